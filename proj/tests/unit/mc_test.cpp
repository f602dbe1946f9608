#include "mssv/mc.hpp"
#include "mssv/model.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mssv;

namespace {

double sample_corr(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double saa = 0, sbb = 0, sab = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
        sab += (a[i] - ma) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

ModelSpec flat_spec(double sigma) {
    ModelSpec s;
    s.r = 0.05;
    s.a = 1.0;
    s.b = 0.0;
    s.nu_z = 0.0;
    s.gamma2 = 0.0;
    s.m_z = sigma;
    s.eps = 0.1;
    s.del = 0.1;
    return s;
}

}  // namespace

TEST(GridSpec, Validation) {
    EXPECT_THROW((GridSpec{1.0, 1.0, 10}.validate()), std::invalid_argument);
    EXPECT_THROW((GridSpec{0.0, 1.0, 0}.validate()), std::invalid_argument);
    EXPECT_DOUBLE_EQ((GridSpec{0.5, 1.5, 4}.dt()), 0.25);
}

TEST(McEstimate, ConstantSampler) {
    const Estimate e = mc_estimate([](std::size_t, Rng&) { return 3.25; }, 100, 5);
    EXPECT_EQ(e.mean, 3.25);
    EXPECT_EQ(e.std_error, 0.0);
    EXPECT_EQ(e.n_paths, 100u);
    EXPECT_EQ(e.seed, 5u);
}

TEST(McEstimate, DeterministicAndWorkerIndependent) {
    auto sampler = [](std::size_t, Rng& rng) {
        NormalSource n(rng);
        return std::exp(n());
    };
    const Estimate a = mc_estimate(sampler, 10001, 42, 1);
    const Estimate b = mc_estimate(sampler, 10001, 42, 1);
    const Estimate c = mc_estimate(sampler, 10001, 42, 3);
    const Estimate d = mc_estimate(sampler, 10001, 43, 1);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.std_error, b.std_error);
    EXPECT_EQ(a.mean, c.mean);
    EXPECT_EQ(a.std_error, c.std_error);
    EXPECT_NE(a.mean, d.mean);
    EXPECT_NEAR(a.mean, std::exp(0.5), 3 * a.std_error);
}

TEST(McEstimate, StderrHalvesWithFourTimesPaths) {
    auto sampler = [](std::size_t, Rng& rng) { return NormalSource(rng)(); };
    const Estimate n = mc_estimate(sampler, 20000, 1);
    const Estimate n4 = mc_estimate(sampler, 80000, 2);
    EXPECT_NEAR(n4.std_error / n.std_error, 0.5, 0.1);
}

TEST(McEstimate, NonFiniteSampleNamesIndex) {
    try {
        mc_estimate([](std::size_t i, Rng&) { return i == 17 ? std::nan("") : 1.0; }, 50, 1);
        FAIL() << "expected runtime_error";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("17"), std::string::npos);
    }
    EXPECT_THROW(mc_estimate([](std::size_t, Rng&) { return 1.0; }, 1, 1), std::invalid_argument);
}

TEST(McEstimate, ExceptionInWorkerPropagates) {
    auto bad = [](std::size_t i, Rng&) -> double {
        if (i == 500) throw std::logic_error("boom");
        return 0.0;
    };
    EXPECT_THROW(mc_estimate(bad, 1000, 1, 2), std::logic_error);
}

TEST(McEstimateControlled, PerfectControlRemovesVariance) {
    auto sampler = [](std::size_t, Rng& rng) {
        const double m = NormalSource(rng)();
        return ControlledSample{2.0 + 3.0 * m, m};
    };
    const Estimate with = mc_estimate_controlled(sampler, 1000, 9);
    const Estimate without = mc_estimate_controlled(sampler, 1000, 9, 0, false);
    EXPECT_NEAR(with.mean, 2.0, 1e-12);
    EXPECT_LT(with.std_error, 1e-12);
    EXPECT_NEAR(without.std_error, 3.0 / std::sqrt(1000.0), 0.02);
}

TEST(McEstimateControlled, MultiOutputMatchesSingle) {
    auto one = [](std::size_t, Rng& rng) {
        NormalSource n(rng);
        const double a = n(), b = n();
        return ControlledSample{a * a + b, b};
    };
    auto two = [](std::size_t, Rng& rng, std::span<ControlledSample> out) {
        NormalSource n(rng);
        const double a = n(), b = n();
        out[0] = {a * a + b, b};
        out[1] = {a, 0.0};
    };
    const Estimate single = mc_estimate_controlled(one, 5000, 3);
    const auto multi = mc_estimate_controlled(two, 2, 5000, 3, 2);
    EXPECT_EQ(single.mean, multi[0].mean);
    EXPECT_EQ(single.std_error, multi[0].std_error);
    EXPECT_NEAR(multi[1].mean, 0.0, 3 * multi[1].std_error);
}

TEST(PathRng, StreamsDependOnSeedAndIndex) {
    Rng a = path_rng(1, 0), b = path_rng(1, 0), c = path_rng(1, 1), d = path_rng(2, 0);
    const auto va = a();
    EXPECT_EQ(va, b());
    EXPECT_NE(va, c());
    EXPECT_NE(va, d());
}

TEST(DefaultWorkers, Positive) { EXPECT_GE(default_workers(), 1); }

TEST(SimulateOu, NoiselessPathIsExponentialDecay) {
    const Path y = simulate_ou(2.0, 1.0, 0.0, -1.0, GridSpec{0.0, 2.0, 40}, 1);
    for (std::size_t i = 0; i < y.size(); ++i)
        EXPECT_NEAR(y[i], 1.0 - 2.0 * std::exp(-2.0 * y.time_at(i)), 1e-13);
}

TEST(SimulateOu, TerminalMeanAndStationaryVariance) {
    const double kappa = 5.0, m = 1.0, nu = 0.5, T = 0.3;
    const Estimate mean = mc_estimate(
        [&](std::size_t i, Rng&) { return simulate_ou(kappa, m, nu, 0.0, GridSpec{0.0, T, 3}, i).back(); }, 100000,
        0);
    EXPECT_NEAR(mean.mean, m * (1 - std::exp(-kappa * T)), 3 * mean.std_error);

    // stationary start: y0 ~ N(m, nu^2)
    const Estimate sq = mc_estimate(
        [&](std::size_t i, Rng& rng) {
            const double y0 = m + nu * NormalSource(rng)();
            const double d = simulate_ou(kappa, m, nu, y0, GridSpec{0.0, T, 2}, i + 7).back() - m;
            return d * d;
        },
        100000, 3);
    EXPECT_NEAR(sq.mean, nu * nu, 3 * sq.std_error);
    EXPECT_THROW(simulate_ou(0.0, 0, 1, 0, GridSpec{0, 1, 1}, 1), std::invalid_argument);
}

TEST(FullModelScheme, StiffnessRule) {
    ModelSpec s = flat_spec(0.2);
    s.eps = 0.01;
    EXPECT_THROW(FullModelScheme(s, 0.002), std::invalid_argument);
    EXPECT_NO_THROW(FullModelScheme(s, 0.001));
}

TEST(SimulateFull, ConstantVolatilityIsLognormal) {
    const double sigma = 0.25, T = 1.0;
    const ModelSpec s = flat_spec(sigma);
    const GridSpec grid{0.0, T, 100};
    const Estimate m1 = mc_estimate(
        [&](std::size_t i, Rng&) { return std::log(simulate_full(s, 100.0, 0.0, sigma, grid, i).s.back() / 100.0); },
        20000, 0);
    EXPECT_NEAR(m1.mean, (s.r - 0.5 * sigma * sigma) * T, 3 * m1.std_error);
    const double mu = (s.r - 0.5 * sigma * sigma) * T;
    const Estimate m2 = mc_estimate(
        [&](std::size_t i, Rng&) {
            const double l = std::log(simulate_full(s, 100.0, 0.0, sigma, grid, i).s.back() / 100.0) - mu;
            return l * l;
        },
        20000, 0);
    EXPECT_NEAR(m2.mean, sigma * sigma * T, 3 * m2.std_error);
}

TEST(SimulateFull, DiscountedPriceIsMartingale) {
    ModelSpec s;
    s.r = 0.05;
    s.a = 1.0;
    s.b = 0.8;
    s.nu_y = 1.0;
    s.rho1 = -0.8;
    s.rho2 = -0.5;
    s.gamma1 = 0.3;
    s.gamma2 = 0.3;
    s.nu_z = 0.15;
    s.eps = 0.05;
    s.del = 0.05;
    const GridSpec grid{0.0, 1.0, 200};
    const Estimate e = mc_estimate(
        [&](std::size_t i, Rng&) { return std::exp(-s.r) * simulate_full(s, 100.0, 0.5, 0.3, grid, i).s.back(); },
        100000, 4);
    EXPECT_NEAR(e.mean, 100.0, 3 * e.std_error);
}

TEST(SimulateFull, IncrementCorrelations) {
    ModelSpec s = flat_spec(0.3);
    s.rho1 = -0.7;
    s.rho2 = 0.4;
    s.rho12 = 0.2;
    s.eps = 0.01;
    s.nu_z = 0.01;
    const FullPaths p = simulate_full(s, 1.0, 0.0, 0.3, GridSpec{0.0, 10.0, 100000}, 5);
    std::vector<double> ds, dy, dz;
    for (std::size_t i = 0; i + 1 < p.s.size(); ++i) {
        ds.push_back(std::log(p.s[i + 1] / p.s[i]));
        dy.push_back(p.y[i + 1] - p.y[i]);
        dz.push_back(p.z[i + 1] - p.z[i]);
    }
    EXPECT_NEAR(sample_corr(ds, dy), s.rho1, 0.01);
    EXPECT_NEAR(sample_corr(ds, dz), s.rho2, 0.01);
    EXPECT_NEAR(sample_corr(dy, dz), s.rho12, 0.01);
}

TEST(SimulateFull, FastFactorErgodicity) {
    ModelSpec s;
    s.a = 1.0;
    s.b = 0.5;
    s.nu_y = 0.5;
    s.eps = 1e-3;
    s.nu_z = 0.0;
    s.gamma1 = 0.0;
    const double z = 0.3;
    double acc = 0.0;
    const int reps = 16;
    for (int k = 0; k < reps; ++k) {
        const FullPaths p = simulate_full(s, 1.0, 0.0, z, GridSpec{0.0, 1.0, 10000}, 100 + k);
        double a = 0.0;
        for (std::size_t i = 0; i + 1 < p.y.size(); ++i) a += std::pow(s.vol(p.y[i], z), 2);
        acc += a / static_cast<double>(p.y.size() - 1);
    }
    EXPECT_NEAR(acc / reps / std::pow(sigma_bar(s, z), 2), 1.0, 0.02);
}

TEST(SimulateFull, HalvingStepBarelyMovesCallPrice) {
    ModelSpec s;
    s.b = 0.8;
    s.nu_y = 1.0;
    s.rho1 = -0.8;
    s.gamma1 = 0.3;
    s.nu_z = 0.15;
    s.eps = 0.1;
    s.del = 0.1;
    auto price = [&](int steps) {
        return mc_estimate(
            [&](std::size_t i, Rng&) {
                const double sT = simulate_full(s, 100.0, 0.5, 0.3, GridSpec{0.0, 1.0, steps}, i).s.back();
                return std::exp(-s.r) * std::max(sT - 100.0, 0.0);
            },
            100000, 8);
    };
    const Estimate coarse = price(100);
    const Estimate fine = price(200);
    EXPECT_LT(std::abs(coarse.mean - fine.mean), 2 * fine.std_error);
}

TEST(SimulateBs, NoiselessContinuationAndJoin) {
    const Path x(0.0, 0.1, {90.0, 95.0, 100.0});
    const Path p = simulate_bs(0.0, 0.05, x, GridSpec{0.2, 1.0, 8}, 1);
    ASSERT_EQ(p.size(), 11u);
    EXPECT_EQ(p[2], 100.0);
    for (std::size_t i = 2; i < p.size(); ++i) EXPECT_NEAR(p[i], 100.0 * std::exp(0.05 * (p.time_at(i) - 0.2)), 1e-10);
}

TEST(SimulateBs, TerminalMean) {
    const Path x(0.0, 0.01, {100.0});
    const Estimate e = mc_estimate(
        [&](std::size_t, Rng& rng) { return simulate_bs(0.3, 0.05, x, GridSpec{0.0, 1.0, 10}, rng).back(); }, 100000,
        6);
    EXPECT_NEAR(e.mean, 100.0 * std::exp(0.05), 3 * e.std_error);
    EXPECT_THROW(simulate_bs(-0.1, 0.05, x, GridSpec{0.0, 1.0, 10}, 1), std::invalid_argument);
}

#include "mssv/mc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mssv {

void GridSpec::validate() const {
    if (!(T > t0)) throw std::invalid_argument("GridSpec: T must exceed t0");
    if (steps < 1) throw std::invalid_argument("GridSpec: steps must be >= 1");
}

Rng path_rng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

int default_workers() {
    if (const char* env = std::getenv("MSSV_DEFAULT_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

// Runs body(i) for i < n on `workers` threads in contiguous blocks. The first
// exception (lowest block) is rethrown after all threads join.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body) {
    if (workers <= 0) workers = default_workers();
    const auto w = static_cast<std::size_t>(std::min<std::size_t>(static_cast<std::size_t>(workers), std::max<std::size_t>(n, 1)));
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(w);
    std::vector<std::thread> threads;
    threads.reserve(w);
    for (std::size_t k = 0; k < w; ++k) {
        threads.emplace_back([&, k] {
            const std::size_t begin = n * k / w;
            const std::size_t end = n * (k + 1) / w;
            try {
                for (std::size_t i = begin; i < end; ++i) body(i);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

void check_finite(double v, std::size_t index) {
    if (!std::isfinite(v))
        throw std::runtime_error("non-finite Monte Carlo sample at path index " + std::to_string(index));
}

}  // namespace

Estimate mc_estimate(const std::function<double(std::size_t, Rng&)>& sampler, std::size_t n_paths,
                     std::uint64_t seed, int workers) {
    if (n_paths < 2) throw std::invalid_argument("mc_estimate: at least 2 paths required");
    std::vector<double> samples(n_paths);
    parallel_for(n_paths, workers, [&](std::size_t i) {
        Rng rng = path_rng(seed, i);
        samples[i] = sampler(i, rng);
        check_finite(samples[i], i);
    });

    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= static_cast<double>(n_paths);
    double ss = 0.0;
    for (double v : samples) ss += (v - mean) * (v - mean);
    const double var = ss / static_cast<double>(n_paths - 1);
    return {mean, std::sqrt(var / static_cast<double>(n_paths)), n_paths, seed};
}

namespace {

// Y - b M with b = Cov(Y, M) / Var(M); samples of one output, strided.
Estimate reduce_controlled(const std::vector<ControlledSample>& samples, std::size_t offset, std::size_t stride,
                           std::size_t n_paths, std::uint64_t seed, bool use_control) {
    const double n = static_cast<double>(n_paths);
    double my = 0.0, mm = 0.0;
    for (std::size_t i = 0; i < n_paths; ++i) {
        my += samples[i * stride + offset].value;
        mm += samples[i * stride + offset].control;
    }
    my /= n;
    mm /= n;
    double syy = 0.0, smm = 0.0, sym = 0.0;
    for (std::size_t i = 0; i < n_paths; ++i) {
        const auto& s = samples[i * stride + offset];
        syy += (s.value - my) * (s.value - my);
        smm += (s.control - mm) * (s.control - mm);
        sym += (s.value - my) * (s.control - mm);
    }
    double beta = 0.0;
    if (use_control && smm > 0.0) beta = sym / smm;

    const double mean = my - beta * mm;
    // residual variance of Y - b M; one extra degree of freedom for b
    const double resid = std::max(0.0, syy - 2.0 * beta * sym + beta * beta * smm);
    const double dof = beta != 0.0 ? n - 2.0 : n - 1.0;
    return {mean, std::sqrt(resid / dof / n), n_paths, seed};
}

}  // namespace

std::vector<Estimate> mc_estimate_controlled(
    const std::function<void(std::size_t, Rng&, std::span<ControlledSample>)>& sampler, std::size_t outputs,
    std::size_t n_paths, std::uint64_t seed, int workers, bool use_control) {
    if (n_paths < 3) throw std::invalid_argument("mc_estimate_controlled: at least 3 paths required");
    if (outputs < 1) throw std::invalid_argument("mc_estimate_controlled: at least one output required");
    std::vector<ControlledSample> samples(n_paths * outputs);
    parallel_for(n_paths, workers, [&](std::size_t i) {
        Rng rng = path_rng(seed, i);
        const std::span<ControlledSample> out(samples.data() + i * outputs, outputs);
        sampler(i, rng, out);
        for (const auto& s : out) {
            check_finite(s.value, i);
            check_finite(s.control, i);
        }
    });
    std::vector<Estimate> result;
    for (std::size_t k = 0; k < outputs; ++k)
        result.push_back(reduce_controlled(samples, k, outputs, n_paths, seed, use_control));
    return result;
}

Estimate mc_estimate_controlled(const std::function<ControlledSample(std::size_t, Rng&)>& sampler,
                                std::size_t n_paths, std::uint64_t seed, int workers, bool use_control) {
    return mc_estimate_controlled(
        [&](std::size_t i, Rng& rng, std::span<ControlledSample> out) { out[0] = sampler(i, rng); }, 1, n_paths,
        seed, workers, use_control)[0];
}

Path simulate_ou(double kappa, double m, double nu, double y0, const GridSpec& grid, std::uint64_t seed) {
    if (!(kappa > 0.0)) throw std::invalid_argument("simulate_ou: kappa must be positive");
    if (!(nu >= 0.0)) throw std::invalid_argument("simulate_ou: nu must be non-negative");
    grid.validate();
    const double dt = grid.dt();
    const double decay = std::exp(-kappa * dt);
    const double scale = nu * std::sqrt(-std::expm1(-2.0 * kappa * dt));
    Rng rng = path_rng(seed, 0);
    std::normal_distribution<double> normal;
    std::vector<double> v(static_cast<std::size_t>(grid.steps) + 1);
    v[0] = y0;
    for (int i = 1; i <= grid.steps; ++i) v[i] = m + (v[i - 1] - m) * decay + scale * normal(rng);
    return Path(grid.t0, dt, std::move(v));
}

FullModelScheme::FullModelScheme(const ModelSpec& spec, double dt) : spec_(spec), dt_(dt) {
    spec.validate();
    if (!(dt > 0.0)) throw std::invalid_argument("FullModelScheme: dt must be positive");
    if (dt > spec.eps / 10.0)
        throw std::invalid_argument("grid too coarse for the fast factor: dt = " + std::to_string(dt) +
                                    " exceeds eps/10 = " + std::to_string(spec.eps / 10.0) +
                                    "; increase --steps");

    const double k1 = 1.0 / spec.eps;
    const double k2 = spec.del;
    const double sqrt_eps = std::sqrt(spec.eps);
    const double sqrt_del = std::sqrt(spec.del);

    mean_y_ = spec.m_y - spec.beta() * spec.gamma1 * sqrt_eps;
    decay_y_ = std::exp(-k1 * dt);
    scale_y_ = spec.beta() / sqrt_eps;
    mean_z_ = spec.m_z - spec.g() * spec.gamma2 / sqrt_del;
    decay_z_ = std::exp(-k2 * dt);
    scale_z_ = spec.g() * sqrt_del;

    // covariance of (W0(dt), int e^{-k1(dt-s)} dW1, int e^{-k2(dt-s)} dW2)
    auto integral = [dt](double k) { return -std::expm1(-k * dt) / k; };
    const double c00 = dt;
    const double c11 = integral(2.0 * k1);
    const double c22 = integral(2.0 * k2);
    const double c10 = spec.rho1 * integral(k1);
    const double c20 = spec.rho2 * integral(k2);
    const double c21 = spec.rho12 * integral(k1 + k2);

    // Cholesky with zero columns for singular directions
    auto root = [](double v) { return v > 0.0 ? std::sqrt(v) : 0.0; };
    const double l00 = root(c00);
    const double l10 = l00 > 0.0 ? c10 / l00 : 0.0;
    const double l20 = l00 > 0.0 ? c20 / l00 : 0.0;
    const double l11 = root(c11 - l10 * l10);
    const double l21 = l11 > 0.0 ? (c21 - l20 * l10) / l11 : 0.0;
    const double l22 = root(c22 - l20 * l20 - l21 * l21);
    chol_ = {l00, l10, l11, l20, l21, l22};
}

void FullModelScheme::step(State& st, NormalSource& normal) const {
    const double n0 = normal();
    const double n1 = normal();
    const double n2 = normal();
    const double dw0 = chol_[0] * n0;
    const double i1 = chol_[1] * n0 + chol_[2] * n1;
    const double i2 = chol_[3] * n0 + chol_[4] * n1 + chol_[5] * n2;

    const double f = spec_.vol(st.y, st.z);
    st.s *= std::exp((spec_.r - 0.5 * f * f) * dt_ + f * dw0);
    st.y = mean_y_ + (st.y - mean_y_) * decay_y_ + scale_y_ * i1;
    st.z = mean_z_ + (st.z - mean_z_) * decay_z_ + scale_z_ * i2;
}

FullPaths simulate_full(const ModelSpec& spec, double s0, double y0, double z0, const GridSpec& grid,
                        std::uint64_t seed) {
    if (!(s0 > 0.0)) throw std::invalid_argument("simulate_full: s0 must be positive");
    grid.validate();
    const FullModelScheme scheme(spec, grid.dt());
    Rng rng = path_rng(seed, 0);
    NormalSource normal(rng);
    const auto n = static_cast<std::size_t>(grid.steps) + 1;
    std::vector<double> s(n), y(n), z(n);
    FullModelScheme::State st{s0, y0, z0};
    s[0] = s0;
    y[0] = y0;
    z[0] = z0;
    for (std::size_t i = 1; i < n; ++i) {
        scheme.step(st, normal);
        s[i] = st.s;
        y[i] = st.y;
        z[i] = st.z;
    }
    return {Path(grid.t0, grid.dt(), std::move(s)), Path(grid.t0, grid.dt(), std::move(y)),
            Path(grid.t0, grid.dt(), std::move(z))};
}

Path simulate_bs(double sigma, double r, const Path& x, const GridSpec& grid, Rng& rng) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("simulate_bs: sigma must be non-negative");
    grid.validate();
    const double dt = grid.dt();
    std::normal_distribution<double> normal;
    std::vector<double> v(static_cast<std::size_t>(grid.steps) + 1);
    v[0] = x.back();
    for (int i = 1; i <= grid.steps; ++i) v[i] = bs_step(v[i - 1], r, sigma, dt, normal(rng));
    return concat(x, Path(grid.t0, dt, std::move(v)));
}

Path simulate_bs(double sigma, double r, const Path& x, const GridSpec& grid, std::uint64_t seed) {
    Rng rng = path_rng(seed, 0);
    return simulate_bs(sigma, r, x, grid, rng);
}

}  // namespace mssv

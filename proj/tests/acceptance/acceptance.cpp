// Acceptance runner. `acceptance <id>` runs one criterion, no argument runs all.
// Each criterion prints a single PASS/FAIL line; indented lines are informational.

#include "mssv/analytic.hpp"
#include "mssv/calibration.hpp"
#include "mssv/mc.hpp"
#include "mssv/model.hpp"
#include "mssv/oracle.hpp"
#include "mssv/path.hpp"
#include "mssv/pricing.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

using namespace mssv;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

void note(const std::string& s) { std::printf("    %s\n", s.c_str()); }

const GroupParams sample = GroupParams::reduced(0.4, 0.006, -0.009, -0.005);

ModelSpec reference_model() {
    ModelSpec s;
    s.r = 0.05;
    s.rho1 = -0.8;
    s.rho2 = -0.5;
    s.rho12 = 0.0;
    s.eps = 0.1;
    s.del = 0.1;
    s.m_y = 0.0;
    s.nu_y = 1.0;
    s.m_z = 0.3;
    s.nu_z = 0.15;
    s.a = 1.0;
    s.b = 0.8;
    s.gamma1 = 0.3;
    s.gamma2 = 0.3;
    return s;
}

Path random_path(std::mt19937_64& rng, std::size_t n, double dt) {
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u(0.1, 0.6);
    const double vol = u(rng);
    std::vector<double> v{100.0};
    for (std::size_t i = 1; i < n; ++i) v.push_back(v.back() * std::exp(vol * std::sqrt(dt) * z(rng)));
    return Path(0.0, dt, std::move(v));
}

McConfig mc_of(std::size_t paths, std::uint64_t seed) {
    McConfig mc;
    mc.paths = paths;
    mc.seed = seed;
    return mc;
}

Path start(double x) { return Path(0.0, 1e-3, {x}); }

// 1 -------------------------------------------------------------------------

Outcome identities() {
    const Functional I = running_integral();
    const Functional qv = quadratic_variation();
    std::mt19937_64 rng(2024);
    // errors in units of DBL_EPSILON times the conditioning of the difference quotient
    double e_it = 0, e_qt = 0, e_qx = 0, e_qxx = 0;
    const double u = std::numeric_limits<double>::epsilon();
    const int n_paths = 200;
    for (int k = 0; k < n_paths; ++k) {
        const Path x = random_path(rng, 20 + rng() % 200, 1.0 / 252);
        const DerivativeConfig cfg = default_derivative_config(x);
        const double cond_t = (I(x) / x.dt() + x.back()) * u;
        const double cond_x = (qv(x) + std::pow(std::abs(x.back() - x[x.size() - 2]) + cfg.h, 2)) / (cfg.h * cfg.h) * u;
        e_it = std::max(e_it, std::abs(delta_t(I, x, cfg) - x.back()) / cond_t);
        e_qt = std::max(e_qt, std::abs(delta_t(qv, x, cfg)) / cond_t);
        // Delta_x QV = 2 (x_t - x_{t-}) vanishes on paths without a terminal jump
        const Path flat = flat_extension(x, 1);
        e_qx = std::max(e_qx, std::abs(delta_x(qv, flat, cfg, 1)) * cfg.h / (qv(x) * u));
        e_qxx = std::max(e_qxx, std::max(std::abs(delta_x(qv, x, cfg, 2) - 2.0),
                                         std::abs(delta_x(qv, flat, cfg, 2) - 2.0)) / cond_x);
    }
    const double tol = 16.0;
    const bool ok = e_it <= tol && e_qt <= tol && e_qx <= tol && e_qxx <= tol;
    return {ok, fmt("%d paths, max err in round-off units (tol %.0f): dtI-x %.2f dtQV %.2f dxQV %.2f dxxQV-2 %.2f",
                    n_paths, tol, e_it, e_qt, e_qx, e_qxx)};
}

// 2 -------------------------------------------------------------------------

Path smooth_path(std::size_t n, double dt) {
    std::vector<double> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back(100.0 + 10.0 * std::sin(3.0 * i * dt));
    return Path(0.0, dt, std::move(v));
}

Outcome lie_brackets() {
    std::mt19937_64 rng(7);
    const Functional h = terminal_function("exp(t) x^2 / 100", [](double t, double v) { return std::exp(t) * v * v / 100; });
    double e_i = 0, e_h = 0, e_d = 0;
    for (int k = 0; k < 20; ++k) {
        const Path x = random_path(rng, 253, 1.0 / 252);
        const DerivativeConfig cfg = default_derivative_config(x);
        e_i = std::max(e_i, std::abs(lie_bracket(running_integral(), x, cfg) - 1.0));
        e_h = std::max(e_h, std::abs(lie_bracket(h, x, cfg)));
        e_d = std::max(e_d, std::abs(lie_bracket(double_integral(), x, cfg)));
    }
    bool ok = e_i <= 0.05 && e_h <= 0.01 && e_d <= 0.01;

    // step halving on sin(I / 100), whose bracket tends to cos(I / 100) / 100
    const Functional I = running_integral();
    const Functional f{"sin(I/100)", [I](const Path& p) { return std::sin(I(p) / 100.0); }};
    std::vector<double> errs;
    for (int level = 0; level < 5; ++level) {
        const double dt = 0.02 / std::pow(2.0, level);
        const Path x = smooth_path(static_cast<std::size_t>(std::lround(1.0 / dt)) + 1, dt);
        const double b = lie_bracket(f, x, DerivativeConfig{0.1 / std::pow(2.0, level), 1});
        errs.push_back(std::abs(b - std::cos(I(x) / 100.0) / 100.0));
    }
    std::string conv;
    for (std::size_t i = 1; i < errs.size(); ++i) {
        const double ratio = errs[i - 1] / errs[i];
        conv += fmt(" %.2f", ratio);
        ok = ok && ratio > 1.5 && ratio < 3.0;
    }
    return {ok, fmt("max |[I]-1| %.1e |[h]| %.1e |[II]| %.1e; halving ratios%s", e_i, e_h, e_d, conv.c_str())};
}

// 3 -------------------------------------------------------------------------

struct VegaGammaWorst {
    double vanilla = 0.0;
    double qv = 0.0;
};

VegaGammaWorst vega_gamma_grid(double r) {
    VegaGammaWorst w;
    const double K = 100.0;
    for (double m : {0.7, 0.85, 1.0, 1.15, 1.3})
        for (double sigma : {0.1, 0.2, 0.3, 0.45, 0.6})
            for (double tau : {0.1, 0.25, 0.5, 1.0, 2.0}) {
                const VanillaSpec spec{K, tau, OptionKind::call};
                const OracleState s{0.0, m * K};
                const Greeks g = bs_greeks(s, spec, r, sigma);
                w.vanilla = std::max(w.vanilla, std::abs(g.vega - tau * sigma * g.d2) / std::abs(g.vega));
                // QV state carries some realized variance already
                const OracleState q{0.0, m, 0.0, 0.01};
                const Greeks gq = qv_linear_greeks(q, tau, r, sigma);
                w.qv = std::max(w.qv, std::abs(gq.vega - tau * sigma * gq.d2) / std::abs(gq.vega));
            }
    return w;
}

Outcome vega_gamma() {
    const VegaGammaWorst a = vega_gamma_grid(0.05);
    const VegaGammaWorst z = vega_gamma_grid(0.0);
    note(fmt("at r = 0: vanilla %.1e, qv-linear %.1e", z.vanilla, z.qv));
    note("qv-linear: vega - tau sigma D2 = -2 sigma x^2 e^{-r tau} (tau - expm1(lambda tau)/lambda), "
         "lambda = 2r + sigma^2, nonzero for r != 0");
    const bool ok = a.vanilla <= 1e-8 && a.qv <= 1e-8;
    return {ok, fmt("r = 0.05, 125 points: max rel defect vanilla %.1e, qv-linear %.1e (tol 1e-8)", a.vanilla, a.qv)};
}

// 4 -------------------------------------------------------------------------

struct FkCheck {
    bool pass;
    std::string text;
};

FkCheck compare_fk(const char* label, const ZeroOrderOracle& o, const Path& x, const CorrectionReport& ref,
                   std::size_t paths) {
    const auto t0 = std::chrono::steady_clock::now();
    const CorrectionReport fk = first_order_price(o, sample, x, Method::feynman_kac, FkConfig{1000, 1e-4}, mc_of(paths, 11));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double corr_fk = fk.p10_eps.mean + fk.p01_delta.mean;
    const double corr_ref = ref.p10_eps.mean + ref.p01_delta.mean;
    const double se = std::hypot(fk.p10_eps.std_error, fk.p01_delta.std_error);
    const bool ok = se <= 1e-3 && std::abs(corr_fk - corr_ref) <= 3 * se && secs <= 120;
    return {ok, fmt("%s %s: ref %.6f fk %.6f se %.1e |diff|/se %.2f %.0fs", ok ? "ok" : "FAIL", label, corr_ref, corr_fk,
                    se, std::abs(corr_fk - corr_ref) / se, secs)};
}

Outcome closed_vs_fk() {
    const std::size_t paths = 100000;
    const auto van = make_oracle("vanilla-call", 100, 1, 0.05);
    const auto asian = make_oracle("geo-asian-call", 100, 1, 0.05);
    const auto qv = make_oracle("qv-linear", 1, 1, 0.05);
    const OracleState s100{0.0, 100.0};
    const OracleState s1{0.0, 1.0};

    const FkCheck a = compare_fk("vanilla closed", *van, start(100), correction_closed(*van, sample, s100), paths);
    note(a.text);
    // the geometric Asian is not weakly path-dependent; its reference is the closed-form FK integral
    const FkCheck b = compare_fk("geo-asian exact", *asian, start(100), correction_exact(*asian, sample, s100), paths);
    note(b.text);
    const FkCheck c = compare_fk("qv-linear closed", *qv, start(1.0), correction_closed(*qv, sample, s1), paths);
    note(c.text);
    const CorrectionReport qv_exact = correction_exact(*qv, sample, s1);
    const CorrectionReport qv_closed = correction_closed(*qv, sample, s1);
    note(fmt("qv-linear exact FK integral %.6f vs closed form %.6f", qv_exact.p10_eps.mean + qv_exact.p01_delta.mean,
             qv_closed.p10_eps.mean + qv_closed.p01_delta.mean));
    return {a.pass && b.pass && c.pass, fmt("vanilla %s, geo-asian %s, qv-linear %s", a.pass ? "ok" : "fail",
                                             b.pass ? "ok" : "fail", c.pass ? "ok" : "fail")};
}

// 5 -------------------------------------------------------------------------

Outcome group_param_checks() {
    ModelSpec s = reference_model();
    const double z = s.m_z;
    // fast factor at unit rate; the time average does not depend on eps
    const Path y = simulate_ou(1.0, s.m_y, s.nu_y, s.m_y, GridSpec{0.0, 200000.0, 2000000}, 5);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) acc += std::pow(s.vol(y[i], z), 2);
    const double avg = acc / static_cast<double>(y.size());
    const double sb2 = std::pow(sigma_bar(s, z), 2);
    const double rel = std::abs(avg / sb2 - 1.0);

    ModelSpec s0 = s;
    s0.rho1 = 0.0;
    const double v3_zero = group_params(s0, z).v3;

    const GroupParams g1 = group_params(s, z);
    ModelSpec s4 = s;
    s4.eps = s.eps / 4;
    s4.del = s.del / 9;
    const GroupParams g4 = group_params(s4, z);
    const double se_v3 = std::abs(g4.v3 / g1.v3 - 0.5);
    const double se_v2 = std::abs(g4.v2 / g1.v2 - 0.5);
    const double sd_v0 = std::abs(g4.v0 / g1.v0 - 1.0 / 3.0);
    const double sd_v1 = std::abs(g4.v1 / g1.v1 - 1.0 / 3.0);
    const double scale = std::max({se_v3, se_v2, sd_v0, sd_v1});

    const bool ok = rel <= 0.01 && v3_zero == 0.0 && scale <= 1e-12;
    return {ok, fmt("sigma_bar^2 %.6f vs time average %.6f (rel %.1e); V3 at rho1=0: %g; scaling defect %.1e", sb2,
                    avg, rel, v3_zero, scale)};
}

// 6 -------------------------------------------------------------------------

Outcome accuracy() {
    const ModelSpec spec = reference_model();
    const auto o = make_oracle("vanilla-call", 100, 1, spec.r);
    SweepConfig cfg;
    cfg.steps_per_eps = 20;
    cfg.method = Method::closed;
    cfg.hedge = true;
    const SweepResult res = accuracy_sweep(spec, *o, {{0.1, 0.1}, {0.025, 0.025}, {0.00625, 0.00625}}, start(100),
                                           0.5, spec.m_z, mc_of(200000, 17), cfg);
    bool ok = res.points_used == 3 && res.slope >= 0.8 && res.slope <= 1.2;
    for (const SweepRow& row : res.rows) {
        note(fmt("eps = delta = %.5f: full %.6f (se %.1e) approx %.6f error %.3e", row.eps, row.full.mean,
                 row.full.std_error, row.approx, row.error));
        ok = ok && std::abs(row.error) > 2 * row.stderr_;
    }
    return {ok, fmt("slope %.3f over %d points", res.slope, res.points_used)};
}

// 7 -------------------------------------------------------------------------

Outcome calibration_round_trip() {
    const double r = 0.05, x = 100.0;
    std::vector<double> strikes, maturities;
    for (int i = 0; i < 13; ++i) strikes.push_back(70.0 + 5.0 * i);
    for (int j = 0; j < 7; ++j) maturities.push_back(0.2 + 0.3 * j);
    const auto quotes = synthesize_surface(sample, r, strikes, maturities, x, 0.0);
    const SmileFit fit = fit_smile(quotes, SurfaceContext{x, r, 0.0});
    const SmileCoeffs want = params_to_coeffs(sample, r);
    const double ce = std::max({std::abs(fit.coeffs.b_star - want.b_star), std::abs(fit.coeffs.b_delta - want.b_delta),
                                std::abs(fit.coeffs.a_eps - want.a_eps), std::abs(fit.coeffs.a_delta - want.a_delta)});

    auto worst = [&](const GroupParams& p) {
        return std::max({std::abs(p.sigma_star / sample.sigma_star - 1), std::abs(p.v0 / sample.v0 - 1),
                         std::abs(p.v1 / sample.v1 - 1), std::abs(p.v3 / sample.v3 - 1)});
    };
    const GroupParams fo = coeffs_to_params(fit.coeffs, r, Inversion::first_order);
    const GroupParams ex = coeffs_to_params(fit.coeffs, r, Inversion::exact);
    note(fmt("first-order inversion: sigma* %.6f V0 %.6f V1 %.6f V3 %.6f", fo.sigma_star, fo.v0, fo.v1, fo.v3));
    note(fmt("exact inversion: max rel err %.1e", worst(ex)));
    const bool ok = ce <= 1e-12 && worst(fo) <= 5e-3;
    return {ok, fmt("coefficient err %.1e; first-order inversion max rel param err %.2e (tol 5e-3)", ce, worst(fo))};
}

// 8 -------------------------------------------------------------------------

Outcome degeneracy() {
    ModelSpec s = reference_model();
    s.b = 0.0;
    s.nu_z = 0.0;
    const double sigma = s.a * s.m_z;
    const auto o = make_oracle("vanilla-call", 100, 1, s.r);
    const Estimate full =
        full_model_price(s, o->payoff(), start(100), 0.5, s.m_z, GridSpec{0.0, 1.0, 100}, mc_of(100000, 23));
    const double bs = bs_price(OracleState{0.0, 100.0}, VanillaSpec{}, s.r, sigma);
    const bool ok_bs = std::abs(full.mean - bs) <= 3 * full.std_error;

    SweepConfig cfg;
    cfg.steps_per_eps = 10;
    const SweepRow row = sweep_point(s, *o, s.eps, s.del, start(100), 0.5, s.m_z, mc_of(100000, 29), cfg);
    const bool ok_fo = std::abs(row.error) <= 3 * row.stderr_;
    return {ok_bs && ok_fo, fmt("full %.5f vs bs %.5f (%.2f se); first-order error %.2e (%.2f se)", full.mean, bs,
                                std::abs(full.mean - bs) / full.std_error, row.error,
                                std::abs(row.error) / row.stderr_)};
}

// 9 -------------------------------------------------------------------------

Outcome path_dependent() {
    const ModelSpec spec = reference_model();
    SweepConfig cfg;
    cfg.steps_per_eps = 20;
    cfg.method = Method::exact;
    struct Case {
        const char* label;
        std::unique_ptr<ZeroOrderOracle> o;
        double x0;
        std::size_t paths;
    };
    std::vector<Case> cases;
    cases.push_back({"geo-asian", make_oracle("geo-asian-call", 100, 1, spec.r), 100.0, 120000});
    cases.push_back({"qv-linear", make_oracle("qv-linear", 1, 1, spec.r), 1.0, 40000});
    bool ok = true;
    std::string line;
    for (const Case& c : cases) {
        const SweepRow a = sweep_point(spec, *c.o, 0.01, 0.01, start(c.x0), 0.5, spec.m_z, mc_of(c.paths, 31), cfg);
        const SweepRow b = sweep_point(spec, *c.o, 0.0025, 0.0025, start(c.x0), 0.5, spec.m_z, mc_of(c.paths, 31), cfg);
        const double ratio = std::abs(a.error) / std::abs(b.error);
        note(fmt("%s: error %.3e (se %.1e) at 0.01, %.3e (se %.1e) at 0.0025", c.label, a.error, a.stderr_, b.error,
                 b.stderr_));
        const bool pass = ratio >= 2.5 && ratio <= 6.0;
        ok = ok && pass;
        line += fmt("%s%s ratio %.2f", line.empty() ? "" : ", ", c.label, ratio);
    }
    return {ok, line};
}

struct Criterion {
    int id;
    const char* tag;
    double budget;   // seconds
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all = {
        {1, "identities", 1, identities},       {2, "lie_bracket", 1, lie_brackets},
        {3, "vega_gamma", 1, vega_gamma},       {4, "closed_vs_fk", 360, closed_vs_fk},
        {5, "group_params", 30, group_param_checks}, {6, "accuracy_sweep", 600, accuracy},
        {7, "calibration", 1, calibration_round_trip}, {8, "degeneracy", 60, degeneracy},
        {9, "path_dependent", 900, path_dependent},
    };
    int only = 0;
    if (argc > 1) {
        only = std::atoi(argv[1]);
        if (only < 1 || only > 9) {
            std::fprintf(stderr, "usage: acceptance [1-9]\n");
            return 2;
        }
    }
    bool all_pass = true;
    for (const Criterion& c : all) {
        if (only != 0 && c.id != only) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.budget) {
            out.pass = false;
            out.detail += fmt("; over time budget %.0fs", c.budget);
        }
        std::printf("%s %d %s: %s [%.1fs]\n", out.pass ? "PASS" : "FAIL", c.id, c.tag, out.detail.c_str(), secs);
        std::fflush(stdout);
        all_pass = all_pass && out.pass;
    }
    return all_pass ? 0 : 1;
}

#include "mssv/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mssv {

Method parse_method(const std::string& s) {
    if (s == "closed") return Method::closed;
    if (s == "feynman_kac" || s == "feynman-kac" || s == "fk") return Method::feynman_kac;
    if (s == "exact") return Method::exact;
    throw std::invalid_argument("method must be closed, feynman_kac or exact, got '" + s + "'");
}

std::string to_string(Method m) {
    switch (m) {
    case Method::closed: return "closed";
    case Method::feynman_kac: return "feynman_kac";
    case Method::exact: return "exact";
    }
    return "?";
}

SigmaMode parse_sigma_mode(const std::string& s) {
    if (s == "reduced") return SigmaMode::reduced;
    if (s == "unreduced") return SigmaMode::unreduced;
    throw std::invalid_argument("sigma mode must be reduced or unreduced, got '" + s + "'");
}

std::string to_string(SigmaMode m) { return m == SigmaMode::reduced ? "reduced" : "unreduced"; }

double zero_order_sigma(const GroupParams& gp, SigmaMode mode) {
    const double sigma = mode == SigmaMode::reduced ? gp.sigma_star : gp.sigma_bar;
    if (!(sigma > 0.0)) throw std::invalid_argument("zero-order volatility must be positive");
    return sigma;
}

double zero_order_price(const ZeroOrderOracle& oracle, const OracleState& state, const GroupParams& gp,
                        SigmaMode mode) {
    return oracle.price(state, zero_order_sigma(gp, mode));
}

namespace {

// V2 only enters in unreduced mode; in reduced mode it is absorbed in sigma_star.
double effective_v2(const GroupParams& gp, SigmaMode mode) { return mode == SigmaMode::unreduced ? gp.v2 : 0.0; }

Estimate exact_estimate(double v) { return {v, 0.0, 0, 0}; }

CorrectionReport terminal_report(const ZeroOrderOracle& oracle, const OracleState& state, double sigma,
                                 Method method, SigmaMode mode) {
    CorrectionReport rep;
    rep.p0 = oracle.price(state, sigma);
    rep.total = rep.p0;
    rep.method = method;
    rep.mode = mode;
    rep.sigma = sigma;
    return rep;
}

void finish(CorrectionReport& rep) { rep.total = rep.p0 + rep.p10_eps.mean + rep.p01_delta.mean; }

}  // namespace

CorrectionReport correction_closed(const ZeroOrderOracle& oracle, const GroupParams& gp, const OracleState& state,
                                   SigmaMode mode) {
    if (!oracle.weakly_pd())
        throw std::logic_error("closed-form correction requires a weakly path-dependent payoff; " + oracle.name() +
                               " is not, use the feynman_kac (or exact) method");
    const double sigma = zero_order_sigma(gp, mode);
    if (!(state.t < oracle.maturity())) return terminal_report(oracle, state, sigma, Method::closed, mode);

    const double tau = oracle.maturity() - state.t;
    const Greeks g = oracle.greeks(state, sigma);
    CorrectionReport rep = terminal_report(oracle, state, sigma, Method::closed, mode);
    rep.p0 = g.price;
    rep.p10_eps = exact_estimate(tau * (gp.v3 * (2.0 * g.d2 + g.d3) + effective_v2(gp, mode) * g.d2));
    rep.p01_delta = exact_estimate(tau * (gp.v0 * g.vega + gp.v1 * g.d1_vega));
    finish(rep);
    return rep;
}

CorrectionReport correction_exact(const ZeroOrderOracle& oracle, const GroupParams& gp, const OracleState& state,
                                  SigmaMode mode) {
    const double sigma = zero_order_sigma(gp, mode);
    if (!(state.t < oracle.maturity())) return terminal_report(oracle, state, sigma, Method::exact, mode);
    const auto corr = oracle.exact_correction(state, sigma, gp.v0, gp.v1, effective_v2(gp, mode), gp.v3);
    if (!corr) throw std::logic_error("payoff " + oracle.name() + " has no closed-form Feynman-Kac correction");
    CorrectionReport rep = terminal_report(oracle, state, sigma, Method::exact, mode);
    rep.p10_eps = exact_estimate(corr->eps);
    rep.p01_delta = exact_estimate(corr->delta);
    finish(rep);
    return rep;
}

std::pair<Estimate, Estimate> correction_fk(const ZeroOrderOracle& oracle, const GroupParams& gp, const Path& x,
                                            const FkConfig& fk, const McConfig& mc, SigmaMode mode) {
    if (fk.steps < 1) throw std::invalid_argument("FkConfig: steps must be >= 1");
    if (!(fk.truncation >= 0.0)) throw std::invalid_argument("FkConfig: truncation must be non-negative");
    const double sigma = zero_order_sigma(gp, mode);
    const double v2 = effective_v2(gp, mode);
    const OracleState start = oracle.state_from_path(x);
    const double t = start.t;
    const double T = oracle.maturity();
    const double end = T - fk.truncation;

    const bool eps_zero = gp.v3 == 0.0 && v2 == 0.0;
    const bool delta_zero = gp.v0 == 0.0 && gp.v1 == 0.0;
    if (!(end > t) || (eps_zero && delta_zero)) {
        const Estimate zero{0.0, 0.0, mc.paths, mc.seed};
        return {zero, zero};
    }

    const double r = oracle.rate();
    const double dt = (T - t) / fk.steps;
    // last node inside [t, end]; the piece [u_last, end] is a left rectangle
    const int last = std::min(fk.steps - 1, static_cast<int>(std::floor((end - t) / dt + 1e-9)));
    const double tail = end - (t + last * dt);
    const double growth = std::exp(-r * dt);

    auto integrands = [&](const OracleState& s) {
        const Greeks g = oracle.greeks(s, sigma);
        if (!std::isfinite(g.d2) || !std::isfinite(g.d3) || !std::isfinite(g.vega) || !std::isfinite(g.d1_vega))
            throw std::runtime_error("non-finite zero-order Greeks at time " + std::to_string(s.t) +
                                     "; increase the truncation before maturity");
        return std::pair{gp.v3 * (2.0 * g.d2 + g.d3) + v2 * g.d2, 2.0 * (gp.v0 * g.vega + gp.v1 * g.d1_vega)};
    };

    auto sampler = [&](std::size_t, Rng& rng, std::span<ControlledSample> out) {
        NormalSource normal(rng);
        OracleState s = start;
        double y_eps = 0.0, y_delta = 0.0, m_eps = 0.0, m_delta = 0.0;
        for (int j = 0; j <= last; ++j) {
            const double u = t + j * dt;
            const double disc = std::exp(-r * (u - t));
            const auto [a_eps, a_delta] = integrands(s);
            double w = (j == 0 || j == last) ? 0.5 * dt : dt;
            if (last == 0) w = 0.0;
            if (j == last) w += tail;
            y_eps += w * disc * a_eps;
            y_delta += w * disc * a_delta;
            if (j == last) break;

            const double s_next = bs_step(s.x, r, sigma, dt, normal());
            if (mc.control_variate) {
                // approximate martingale part of the remaining integral
                const double h = 1e-4 * s.x;
                OracleState up = s, dn = s;
                up.x += h;
                dn.x -= h;
                const auto [e_up, d_up] = integrands(up);
                const auto [e_dn, d_dn] = integrands(dn);
                const double gain = disc * (end - u) * (growth * s_next - s.x);
                m_eps += (e_up - e_dn) / (2.0 * h) * gain;
                m_delta += (d_up - d_dn) / (2.0 * h) * gain;
            }
            s = oracle.advance(s, s_next, dt);
        }
        out[0] = {y_eps, m_eps};
        out[1] = {y_delta, m_delta};
    };
    const auto est = mc_estimate_controlled(sampler, 2, mc.paths, mc.seed, mc.workers, mc.control_variate);
    return {est[0], est[1]};
}

Estimate correction_fk_eps(const ZeroOrderOracle& oracle, const GroupParams& gp, const Path& x, const FkConfig& fk,
                           const McConfig& mc, SigmaMode mode) {
    GroupParams only = gp;
    only.v0 = only.v1 = 0.0;
    return correction_fk(oracle, only, x, fk, mc, mode).first;
}

Estimate correction_fk_delta(const ZeroOrderOracle& oracle, const GroupParams& gp, const Path& x,
                             const FkConfig& fk, const McConfig& mc, SigmaMode mode) {
    GroupParams only = gp;
    only.v2 = only.v3 = 0.0;
    return correction_fk(oracle, only, x, fk, mc, mode).second;
}

CorrectionReport first_order_price(const ZeroOrderOracle& oracle, const GroupParams& gp, const Path& x,
                                   Method method, const FkConfig& fk, const McConfig& mc, SigmaMode mode) {
    const OracleState state = oracle.state_from_path(x);
    switch (method) {
    case Method::closed: return correction_closed(oracle, gp, state, mode);
    case Method::exact: return correction_exact(oracle, gp, state, mode);
    case Method::feynman_kac: {
        const double sigma = zero_order_sigma(gp, mode);
        CorrectionReport rep = terminal_report(oracle, state, sigma, Method::feynman_kac, mode);
        if (!(state.t < oracle.maturity())) return rep;
        const auto [eps, delta] = correction_fk(oracle, gp, x, fk, mc, mode);
        rep.p10_eps = eps;
        rep.p01_delta = delta;
        finish(rep);
        return rep;
    }
    }
    throw std::invalid_argument("unknown method");
}

Estimate full_model_price(const ModelSpec& spec, const Functional& payoff, const Path& x, double y0, double z0,
                          const GridSpec& grid, const McConfig& mc, std::optional<HedgeControl> hedge) {
    grid.validate();
    const double t = x.time();
    if (std::abs(grid.t0 - t) > 1e-9 * std::max(1.0, std::abs(t)))
        throw std::invalid_argument("full_model_price: grid must start at the current time of the history path");
    if (!(x.back() > 0.0)) throw std::invalid_argument("full_model_price: current price must be positive");
    if (hedge && (hedge->oracle == nullptr || !(hedge->sigma > 0.0)))
        throw std::invalid_argument("full_model_price: hedge needs an oracle and a positive volatility");

    const FullModelScheme scheme(spec, grid.dt());
    const double dt = grid.dt();
    const double r = spec.r;
    const double discount = std::exp(-r * (grid.T - t));
    const auto steps = static_cast<std::size_t>(grid.steps);
    const std::optional<OracleState> hedge_start =
        hedge ? std::optional<OracleState>(hedge->oracle->state_from_path(x)) : std::nullopt;

    auto sampler = [&](std::size_t, Rng& rng) {
        NormalSource normal(rng);
        std::vector<double> values(steps + 1);
        FullModelScheme::State st{x.back(), y0, z0};
        values[0] = st.s;
        double control = 0.0;
        OracleState hs = hedge_start ? *hedge_start : OracleState{};
        for (std::size_t i = 0; i < steps; ++i) {
            const double s_prev = st.s;
            scheme.step(st, normal);
            values[i + 1] = st.s;
            if (hedge) {
                const double u = t + static_cast<double>(i) * dt;
                const double delta = hedge->oracle->delta(hs, hedge->sigma);
                control += delta * std::exp(-r * (u - t)) * (std::exp(-r * dt) * st.s - s_prev);
                hs = hedge->oracle->advance(hs, st.s, dt);
            }
        }
        const Path full = concat(x, Path(t, dt, std::move(values)));
        return ControlledSample{discount * payoff(full), control};
    };
    return mc_estimate_controlled(sampler, mc.paths, mc.seed, mc.workers, hedge.has_value() && mc.control_variate);
}

SweepRow sweep_point(const ModelSpec& spec, const ZeroOrderOracle& oracle, double eps, double del, const Path& x,
                     double y0, double z0, const McConfig& mc, const SweepConfig& cfg, const QuadratureConfig& q) {
    if (cfg.steps_per_eps < 10.0) throw std::invalid_argument("sweep_point: steps_per_eps must be >= 10 (dt <= eps/10)");
    ModelSpec s = spec;
    s.eps = eps;
    s.del = del;
    s.validate();
    const double t = x.time();
    const double T = oracle.maturity();
    const GroupParams gp = group_params(s, z0, q);
    const CorrectionReport approx = first_order_price(oracle, gp, x, cfg.method, cfg.fk, mc, SigmaMode::reduced);

    const int steps = std::max(cfg.min_steps, static_cast<int>(std::ceil(cfg.steps_per_eps * (T - t) / eps)));
    std::optional<HedgeControl> hedge;
    if (cfg.hedge) hedge = HedgeControl{&oracle, gp.sigma_star};
    const Estimate full = full_model_price(s, oracle.payoff(), x, y0, z0, GridSpec{t, T, steps}, mc, hedge);

    SweepRow row;
    row.eps = eps;
    row.del = del;
    row.approx = approx.total;
    row.full = full;
    row.error = full.mean - approx.total;
    row.stderr_ = std::sqrt(full.std_error * full.std_error + approx.p10_eps.std_error * approx.p10_eps.std_error +
                            approx.p01_delta.std_error * approx.p01_delta.std_error);
    row.flagged = std::abs(row.error) <= 2.0 * row.stderr_;
    return row;
}

SweepResult accuracy_sweep(const ModelSpec& spec, const ZeroOrderOracle& oracle,
                           const std::vector<std::pair<double, double>>& scales, const Path& x, double y0, double z0,
                           const McConfig& mc, const SweepConfig& cfg, const QuadratureConfig& q) {
    if (scales.size() < 3) throw std::invalid_argument("accuracy_sweep: at least 3 scale points required");
    if (cfg.steps_per_eps < 10.0)
        throw std::invalid_argument("accuracy_sweep: steps_per_eps must be >= 10 (dt <= eps/10)");
    const double ratio = (scales[1].first + scales[1].second) / (scales[0].first + scales[0].second);
    for (std::size_t i = 1; i < scales.size(); ++i) {
        const double rr = (scales[i].first + scales[i].second) / (scales[i - 1].first + scales[i - 1].second);
        if (std::abs(rr / ratio - 1.0) > 0.01 || rr == 1.0)
            throw std::invalid_argument("accuracy_sweep: scale points must be geometrically spaced in eps + del");
    }

    SweepResult result;
    for (const auto& [eps, del] : scales) result.rows.push_back(sweep_point(spec, oracle, eps, del, x, y0, z0, mc, cfg, q));

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    for (const auto& row : result.rows) {
        if (row.flagged) continue;
        const double lx = std::log(row.eps + row.del);
        const double ly = std::log(std::abs(row.error));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    result.points_used = n;
    result.slope = n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : std::numeric_limits<double>::quiet_NaN();
    return result;
}

}  // namespace mssv

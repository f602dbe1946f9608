#include "mssv/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mssv {

OracleState ZeroOrderOracle::state_from_path(const Path& x) const {
    OracleState s;
    s.t = x.time();
    s.x = x.back();
    double log_sum = 0.0;
    double qv = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        log_sum += std::log(x[i]);
        const double d = x[i + 1] - x[i];
        qv += d * d;
    }
    s.log_integral = log_sum * x.dt();
    s.qv = qv;
    return s;
}

OracleState ZeroOrderOracle::advance(const OracleState& s, double x_new, double dt) const {
    OracleState n = s;
    n.t = s.t + dt;
    n.x = x_new;
    n.log_integral = s.log_integral + std::log(s.x) * dt;
    const double d = x_new - s.x;
    n.qv = s.qv + d * d;
    return n;
}

double ZeroOrderOracle::delta(const OracleState& s, double sigma) const { return greeks(s, sigma).d1 / s.x; }

std::optional<CorrectionPair> ZeroOrderOracle::exact_correction(const OracleState&, double, double, double, double,
                                                                double) const {
    return std::nullopt;
}

// -- vanilla ----------------------------------------------------------------

VanillaOracle::VanillaOracle(VanillaSpec spec, double r) : ZeroOrderOracle(r), spec_(spec) { spec_.validate(); }

std::string VanillaOracle::name() const { return "vanilla-" + to_string(spec_.kind); }

double VanillaOracle::price(const OracleState& s, double sigma) const { return bs_price(s, spec_, rate(), sigma); }

Greeks VanillaOracle::greeks(const OracleState& s, double sigma) const { return bs_greeks(s, spec_, rate(), sigma); }

double VanillaOracle::delta(const OracleState& s, double sigma) const {
    const double tau = spec_.maturity - s.t;
    const double sd = sigma * std::sqrt(tau);
    const double d1 = (std::log(s.x / spec_.strike) + (rate() + 0.5 * sigma * sigma) * tau) / sd;
    return normal_cdf(d1) - (spec_.kind == OptionKind::put ? 1.0 : 0.0);
}

Functional VanillaOracle::payoff() const {
    const double k = spec_.strike;
    const bool call = spec_.kind == OptionKind::call;
    return {name(), [k, call](const Path& x) { return std::max(call ? x.back() - k : k - x.back(), 0.0); }};
}

// -- geometric Asian --------------------------------------------------------

GeoAsianOracle::GeoAsianOracle(VanillaSpec spec, double r) : ZeroOrderOracle(r), spec_(spec) { spec_.validate(); }

std::string GeoAsianOracle::name() const { return "geo-asian-" + to_string(spec_.kind); }

OracleState GeoAsianOracle::state_from_path(const Path& x) const {
    if (std::abs(x.t0()) > 1e-12)
        throw std::invalid_argument("geometric Asian: path must start at time 0, where the average starts");
    return ZeroOrderOracle::state_from_path(x);
}

double GeoAsianOracle::price(const OracleState& s, double sigma) const {
    return geo_asian_price(s, spec_, rate(), sigma);
}

Greeks GeoAsianOracle::greeks(const OracleState& s, double sigma) const {
    return geo_asian_greeks(s, spec_, rate(), sigma);
}

Functional GeoAsianOracle::payoff() const {
    const VanillaSpec spec = spec_;
    return {name(), [spec](const Path& x) {
                if (std::abs(x.t0()) > 1e-12 || std::abs(x.time() - spec.maturity) > 1e-9 * spec.maturity)
                    throw std::invalid_argument("geometric Asian payoff needs a path covering [0, T]");
                double log_sum = 0.0;
                for (std::size_t i = 0; i + 1 < x.size(); ++i) log_sum += std::log(x[i]);
                const double avg = std::exp(log_sum * x.dt() / spec.maturity);
                return std::max(spec.kind == OptionKind::call ? avg - spec.strike : spec.strike - avg, 0.0);
            }};
}

std::optional<CorrectionPair> GeoAsianOracle::exact_correction(const OracleState& s, double sigma, double v0,
                                                               double v1, double v2, double v3) const {
    return geo_asian_exact_correction(s, spec_, rate(), sigma, v0, v1, v2, v3);
}

// -- quadratic variation ----------------------------------------------------

QvLinearOracle::QvLinearOracle(double maturity, double r) : ZeroOrderOracle(r), maturity_(maturity) {
    if (!(maturity > 0.0)) throw std::invalid_argument("QvLinearOracle: maturity must be positive");
}

double QvLinearOracle::price(const OracleState& s, double sigma) const {
    return qv_linear_price(s, maturity_, rate(), sigma);
}

Greeks QvLinearOracle::greeks(const OracleState& s, double sigma) const {
    return qv_linear_greeks(s, maturity_, rate(), sigma);
}

Functional QvLinearOracle::payoff() const { return quadratic_variation(); }

std::optional<CorrectionPair> QvLinearOracle::exact_correction(const OracleState& s, double sigma, double v0,
                                                               double v1, double v2, double v3) const {
    return qv_linear_exact_correction(s, maturity_, rate(), sigma, v0, v1, v2, v3);
}

// ---------------------------------------------------------------------------

Functional price_functional(const ZeroOrderOracle& oracle, double sigma) {
    return {"P0[" + oracle.name() + "]",
            [&oracle, sigma](const Path& x) { return oracle.price(oracle.state_from_path(x), sigma); }};
}

std::unique_ptr<ZeroOrderOracle> make_oracle(const std::string& payoff, double strike, double maturity, double r) {
    if (payoff == "qv-linear") return std::make_unique<QvLinearOracle>(maturity, r);
    const auto dash = payoff.rfind('-');
    if (dash != std::string::npos) {
        const std::string family = payoff.substr(0, dash);
        const std::string kind = payoff.substr(dash + 1);
        if (family == "vanilla")
            return std::make_unique<VanillaOracle>(VanillaSpec{strike, maturity, parse_option_kind(kind)}, r);
        if (family == "geo-asian")
            return std::make_unique<GeoAsianOracle>(VanillaSpec{strike, maturity, parse_option_kind(kind)}, r);
    }
    throw std::invalid_argument("unknown payoff '" + payoff +
                                "' (expected vanilla-call, vanilla-put, geo-asian-call, geo-asian-put, qv-linear)");
}

}  // namespace mssv

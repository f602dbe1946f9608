#include "mssv/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mssv {

OptionKind parse_option_kind(const std::string& s) {
    if (s == "call") return OptionKind::call;
    if (s == "put") return OptionKind::put;
    throw std::invalid_argument("option kind must be 'call' or 'put', got '" + s + "'");
}

std::string to_string(OptionKind k) { return k == OptionKind::call ? "call" : "put"; }

void VanillaSpec::validate() const {
    if (!(strike > 0.0)) throw std::invalid_argument("VanillaSpec: strike must be positive");
    if (!(maturity > 0.0)) throw std::invalid_argument("VanillaSpec: maturity must be positive");
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

namespace {

void check_state(const OracleState& s, double maturity) {
    if (!(s.x > 0.0)) throw std::invalid_argument("OracleState: x must be positive");
    if (s.t > maturity + 1e-12) throw std::invalid_argument("OracleState: t exceeds maturity");
    if (s.qv < 0.0) throw std::invalid_argument("OracleState: qv must be non-negative");
}

void check_greeks_inputs(const OracleState& s, double maturity, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("greeks require sigma > 0");
    if (!(s.t < maturity)) throw std::invalid_argument("greeks require t < T");
}

}  // namespace

// -- vanilla ----------------------------------------------------------------

double bs_price(const OracleState& s, const VanillaSpec& spec, double r, double sigma) {
    spec.validate();
    check_state(s, spec.maturity);
    if (!(sigma >= 0.0)) throw std::invalid_argument("bs_price: sigma must be non-negative");
    const double tau = std::max(0.0, spec.maturity - s.t);
    const double df = std::exp(-r * tau);
    const double fwd_gap = s.x - spec.strike * df;
    const double sd = sigma * std::sqrt(tau);
    double call;
    if (sd == 0.0) {
        call = std::max(fwd_gap, 0.0);
    } else {
        const double d1 = (std::log(s.x / spec.strike) + (r + 0.5 * sigma * sigma) * tau) / sd;
        call = s.x * normal_cdf(d1) - spec.strike * df * normal_cdf(d1 - sd);
    }
    return spec.kind == OptionKind::call ? call : call - fwd_gap;
}

Greeks bs_greeks(const OracleState& s, const VanillaSpec& spec, double r, double sigma) {
    spec.validate();
    check_state(s, spec.maturity);
    check_greeks_inputs(s, spec.maturity, sigma);
    const double tau = spec.maturity - s.t;
    const double sd = sigma * std::sqrt(tau);
    const double d1 = (std::log(s.x / spec.strike) + (r + 0.5 * sigma * sigma) * tau) / sd;
    const double n1 = normal_pdf(d1);

    Greeks g;
    g.price = bs_price(s, spec, r, sigma);
    const double delta = normal_cdf(d1) - (spec.kind == OptionKind::put ? 1.0 : 0.0);
    g.d1 = s.x * delta;
    g.d2 = s.x * n1 / sd;
    g.d3 = -g.d2 * (1.0 + d1 / sd);
    g.vega = s.x * n1 * std::sqrt(tau);
    g.d1_vega = g.vega * (1.0 - d1 / sd);
    return g;
}

double implied_vol(double price, const OracleState& s, const VanillaSpec& spec, double r) {
    spec.validate();
    check_state(s, spec.maturity);
    const double tau = spec.maturity - s.t;
    if (!(tau > 0.0)) throw std::invalid_argument("implied_vol: requires t < T");
    const double disc_strike = spec.strike * std::exp(-r * tau);
    const bool call = spec.kind == OptionKind::call;
    const double lower = call ? std::max(s.x - disc_strike, 0.0) : std::max(disc_strike - s.x, 0.0);
    const double upper = call ? s.x : disc_strike;
    if (!(price > lower)) throw std::domain_error("implied_vol: price is at or below the intrinsic lower bound");
    if (!(price < upper)) throw std::domain_error("implied_vol: price is at or above the upper bound");

    double lo = 1e-6;
    double hi = 5.0;
    const double p_lo = bs_price(s, spec, r, lo);
    const double p_hi = bs_price(s, spec, r, hi);
    if (price < p_lo || price > p_hi)
        throw std::domain_error("implied_vol: price outside the range spanned by sigma in [1e-6, 5]");

    double sigma = 0.3;
    for (int iter = 0; iter < 100; ++iter) {
        const double diff = bs_price(s, spec, r, sigma) - price;
        if (diff > 0.0)
            hi = sigma;
        else
            lo = sigma;
        const double vega = bs_greeks(s, spec, r, sigma).vega;
        double next = vega > 0.0 ? sigma - diff / vega : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - sigma) < 1e-10) return next;
        sigma = next;
        if (hi - lo < 1e-10) return 0.5 * (lo + hi);
    }
    throw std::runtime_error("implied_vol: no convergence in 100 iterations");
}

// -- geometric Asian --------------------------------------------------------

namespace {

struct GeoState {
    double tau;
    double c;    // tau / T
    double m;    // conditional mean of log G
    double v;    // conditional variance of log G
    double disc;
};

GeoState geo_state(const OracleState& s, const VanillaSpec& spec, double r, double sigma) {
    spec.validate();
    check_state(s, spec.maturity);
    if (s.t < 0.0) throw std::invalid_argument("geometric Asian: t must be >= 0 (average starts at 0)");
    if (!(sigma >= 0.0)) throw std::invalid_argument("geometric Asian: sigma must be non-negative");
    const double T = spec.maturity;
    const double tau = std::max(0.0, T - s.t);
    GeoState g;
    g.tau = tau;
    g.c = tau / T;
    g.m = (s.log_integral + tau * std::log(s.x)) / T + (r - 0.5 * sigma * sigma) * tau * tau / (2.0 * T);
    g.v = sigma * sigma * tau * tau * tau / (3.0 * T * T);
    g.disc = std::exp(-r * tau);
    return g;
}

// Undiscounted price B(M, V) and its first three M-derivatives.
struct GeoB {
    double b0, b1, b2, b3;
};

GeoB geo_b(const GeoState& g, const VanillaSpec& spec) {
    const double sv = std::sqrt(g.v);
    const double F = std::exp(g.m + 0.5 * g.v);
    const double d1 = (g.m - std::log(spec.strike) + g.v) / sv;
    const double N = normal_cdf(d1);
    const double n = normal_pdf(d1);
    GeoB b;
    b.b0 = F * N - spec.strike * normal_cdf(d1 - sv);
    b.b1 = F * N;
    b.b2 = F * (N + n / sv);
    b.b3 = F * (N + 2.0 * n / sv - d1 * n / g.v);
    if (spec.kind == OptionKind::put) {
        // put = call - (F - K); every M-derivative of F is F
        b.b0 -= F - spec.strike;
        b.b1 -= F;
        b.b2 -= F;
        b.b3 -= F;
    }
    return b;
}

}  // namespace

double geo_asian_price(const OracleState& s, const VanillaSpec& spec, double r, double sigma) {
    const GeoState g = geo_state(s, spec, r, sigma);
    if (g.v <= 0.0) {
        const double avg = std::exp(g.m);
        const double payoff = spec.kind == OptionKind::call ? avg - spec.strike : spec.strike - avg;
        return g.disc * std::max(payoff, 0.0);
    }
    return g.disc * geo_b(g, spec).b0;
}

Greeks geo_asian_greeks(const OracleState& s, const VanillaSpec& spec, double r, double sigma) {
    check_greeks_inputs(s, spec.maturity, sigma);
    const GeoState g = geo_state(s, spec, r, sigma);
    const GeoB b = geo_b(g, spec);
    const double T = spec.maturity;
    const double c = g.c;
    const double dm = -sigma * g.tau * g.tau / (2.0 * T);
    const double dv = 2.0 * sigma * g.tau * g.tau * g.tau / (3.0 * T * T);

    Greeks out;
    out.price = g.disc * b.b0;
    out.d1 = g.disc * c * b.b1;
    out.d2 = g.disc * (c * c * b.b2 - c * b.b1);
    out.d3 = g.disc * (c * c * c * b.b3 - 3.0 * c * c * b.b2 + 2.0 * c * b.b1);
    out.vega = g.disc * (b.b1 * dm + 0.5 * b.b2 * dv);
    out.d1_vega = g.disc * c * (b.b2 * dm + 0.5 * b.b3 * dv);
    return out;
}

CorrectionPair geo_asian_exact_correction(const OracleState& s, const VanillaSpec& spec, double r, double sigma,
                                          double v0, double v1, double v2, double v3) {
    const GeoState g = geo_state(s, spec, r, sigma);
    if (g.tau <= 0.0) return {};
    check_greeks_inputs(s, spec.maturity, sigma);
    const GeoB b = geo_b(g, spec);
    const double T = spec.maturity;
    // I_k = int_t^T c(u)^k du
    auto I = [&](int k) { return T * std::pow(g.c, k + 1) / (k + 1); };

    CorrectionPair out;
    // D1 D2 = 2 D2 + D3 = c^3 B''' - c^2 B''
    out.eps = g.disc * (v3 * (I(3) * b.b3 - I(2) * b.b2) + v2 * (I(2) * b.b2 - I(1) * b.b1));
    // vega(u) = disc (-sigma T c^2 / 2 B' + sigma T c^3 / 3 B''), D1 adds a factor c and one M-derivative
    const double st = sigma * T;
    out.delta = 2.0 * g.disc *
                (v0 * (-0.5 * st * I(2) * b.b1 + st / 3.0 * I(3) * b.b2) +
                 v1 * (-0.5 * st * I(3) * b.b2 + st / 3.0 * I(4) * b.b3));
    return out;
}

// -- linear quadratic-variation payoff ----------------------------------------

namespace {

// k(lambda, tau) = (e^{lambda tau} - 1) / lambda and its lambda-derivative
double qv_k(double lambda, double tau) {
    if (lambda == 0.0) return tau;
    return std::expm1(lambda * tau) / lambda;
}

double qv_dk(double lambda, double tau) {
    const double z = lambda * tau;
    if (std::abs(z) < 0.5) {
        // sum_{n>=2} (n-1) lambda^{n-2} tau^n / n!
        double term = tau * tau / 2.0;  // n = 2
        double sum = term;
        for (int n = 3; n <= 20; ++n) {
            term *= z / n;
            sum += term * (n - 1);
        }
        return sum;
    }
    return (tau * std::exp(z) - qv_k(lambda, tau)) / lambda;
}

void check_qv(const OracleState& s, double maturity, double sigma) {
    check_state(s, maturity);
    if (!(maturity > 0.0)) throw std::invalid_argument("QV payoff: maturity must be positive");
    if (!(sigma >= 0.0)) throw std::invalid_argument("QV payoff: sigma must be non-negative");
}

}  // namespace

double qv_linear_price(const OracleState& s, double maturity, double r, double sigma) {
    check_qv(s, maturity, sigma);
    const double tau = std::max(0.0, maturity - s.t);
    const double lambda = 2.0 * r + sigma * sigma;
    return std::exp(-r * tau) * (s.qv + s.x * s.x * sigma * sigma * qv_k(lambda, tau));
}

QvDerivs qv_linear_derivs(const OracleState& s, double maturity, double r, double sigma) {
    check_qv(s, maturity, sigma);
    const double tau = std::max(0.0, maturity - s.t);
    const double lambda = 2.0 * r + sigma * sigma;
    const double disc = std::exp(-r * tau);
    const double k = qv_k(lambda, tau);
    QvDerivs d;
    d.dx = disc * 2.0 * s.x * sigma * sigma * k;
    d.dxx = disc * (2.0 * sigma * sigma * k + 2.0);  // d2/dx2 + 2 d/dq
    d.dxxx = 0.0;                                    // d3/dx3 = 0 and d2/dxdq = 0
    return d;
}

Greeks qv_linear_greeks(const OracleState& s, double maturity, double r, double sigma) {
    const QvDerivs d = qv_linear_derivs(s, maturity, r, sigma);
    const double tau = std::max(0.0, maturity - s.t);
    const double lambda = 2.0 * r + sigma * sigma;
    const double disc = std::exp(-r * tau);
    Greeks g;
    g.price = qv_linear_price(s, maturity, r, sigma);
    g.d1 = s.x * d.dx;
    g.d2 = s.x * s.x * d.dxx;
    g.d3 = s.x * s.x * s.x * d.dxxx;
    // d/dsigma of sigma^2 k(2r + sigma^2, tau)
    const double dsk = 2.0 * sigma * qv_k(lambda, tau) + 2.0 * sigma * sigma * sigma * qv_dk(lambda, tau);
    g.vega = disc * s.x * s.x * dsk;
    g.d1_vega = 2.0 * g.vega;  // price is homogeneous of degree 2 in x at fixed q
    return g;
}

CorrectionPair qv_linear_exact_correction(const OracleState& s, double maturity, double r, double sigma,
                                          double v0, double v1, double v2, double v3) {
    check_qv(s, maturity, sigma);
    const double tau = std::max(0.0, maturity - s.t);
    if (tau <= 0.0) return {};
    const double lambda = 2.0 * r + sigma * sigma;
    const double x2 = s.x * s.x;

    // rho = T - u is the remaining maturity at the integration time u
    auto growth = [&](double rho) { return x2 * std::exp((r + sigma * sigma) * (tau - rho) - r * rho); };
    auto d2_term = [&](double rho) { return growth(rho) * (2.0 * sigma * sigma * qv_k(lambda, rho) + 2.0); };
    auto vega_term = [&](double rho) {
        return growth(rho) * (2.0 * sigma * qv_k(lambda, rho) + 2.0 * sigma * sigma * sigma * qv_dk(lambda, rho));
    };
    auto simpson = [&](auto&& fn) {
        const int n = 2000;
        const double h = tau / n;
        double sum = fn(0.0) + fn(tau);
        for (int i = 1; i < n; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * fn(i * h);
        return sum * h / 3.0;
    };

    CorrectionPair out;
    out.eps = (2.0 * v3 + v2) * simpson(d2_term);        // D1 D2 = 2 D2 since D3 = 0
    out.delta = 2.0 * (v0 + 2.0 * v1) * simpson(vega_term);  // D1 vega = 2 vega
    return out;
}

}  // namespace mssv

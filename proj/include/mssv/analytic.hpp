#pragma once

#include <string>

namespace mssv {

enum class OptionKind { call, put };

OptionKind parse_option_kind(const std::string& s);
std::string to_string(OptionKind k);

/// Strike, maturity and call/put flag. Also used for the geometric Asian,
/// whose average runs over [0, maturity].
struct VanillaSpec {
    double strike = 100.0;
    double maturity = 1.0;
    OptionKind kind = OptionKind::call;

    void validate() const;
};

/// Reduced Markov state at time t. log_integral = int_0^t log s_u du is used
/// by the geometric Asian and qv = accumulated quadratic variation by the QV
/// payoff; other payoffs ignore them.
struct OracleState {
    double t = 0.0;
    double x = 100.0;
    double log_integral = 0.0;
    double qv = 0.0;
};

/// D_k = x^k d^k/dx^k applied to the price, plus the sigma sensitivities.
struct Greeks {
    double price = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double d3 = 0.0;
    double vega = 0.0;
    double d1_vega = 0.0;   // D1 applied to vega
};

double normal_cdf(double x);
double normal_pdf(double x);

// -- vanilla ----------------------------------------------------------------

double bs_price(const OracleState& s, const VanillaSpec& spec, double r, double sigma);

/// Requires sigma > 0 and t < T.
Greeks bs_greeks(const OracleState& s, const VanillaSpec& spec, double r, double sigma);

/// Safeguarded Newton with bisection on [1e-6, 5], tolerance 1e-10 in sigma.
/// Throws std::domain_error when the price lies outside the no-arbitrage band.
double implied_vol(double price, const OracleState& s, const VanillaSpec& spec, double r);

// -- geometric Asian --------------------------------------------------------

/// Continuously monitored geometric average G = exp((1/T) int_0^T log s_u du).
/// Conditioned on the state, log G is Gaussian with mean M and variance V:
///   M = (A + tau log x)/T + (r - sigma^2/2) tau^2 / (2T),  V = sigma^2 tau^3 / (3 T^2).
double geo_asian_price(const OracleState& s, const VanillaSpec& spec, double r, double sigma);

/// Requires sigma > 0 and t < T.
Greeks geo_asian_greeks(const OracleState& s, const VanillaSpec& spec, double r, double sigma);

/// Closed-form first-order corrections for the geometric Asian.
///
/// The discounted M-derivatives of the undiscounted price are martingales
/// under the zero-order dynamics, so every Feynman-Kac time integral reduces
/// to integrals of powers of c(u) = (T - u)/T.
struct CorrectionPair {
    double eps = 0.0;
    double delta = 0.0;
};
CorrectionPair geo_asian_exact_correction(const OracleState& s, const VanillaSpec& spec, double r, double sigma,
                                          double v0, double v1, double v2, double v3);

// -- linear quadratic-variation payoff ----------------------------------------

/// phi_0 = e^{-r tau} (q + x^2 sigma^2 (e^{(2r + sigma^2) tau} - 1) / (2r + sigma^2)).
double qv_linear_price(const OracleState& s, double maturity, double r, double sigma);

struct QvDerivs {
    double dx = 0.0;
    double dxx = 0.0;
    double dxxx = 0.0;
};

/// Functional derivatives via Dx = d/dx, Dxx = d2/dx2 + 2 d/dq, Dxxx = d3/dx3 + 6 d2/dxdq.
QvDerivs qv_linear_derivs(const OracleState& s, double maturity, double r, double sigma);

Greeks qv_linear_greeks(const OracleState& s, double maturity, double r, double sigma);

/// Feynman-Kac corrections integrated in closed form using
/// E[e^{-r(u-t)} x_u^2] = x^2 e^{(r + sigma^2)(u - t)}; the remaining time
/// integral is evaluated by composite Simpson.
CorrectionPair qv_linear_exact_correction(const OracleState& s, double maturity, double r, double sigma,
                                          double v0, double v1, double v2, double v3);

}  // namespace mssv

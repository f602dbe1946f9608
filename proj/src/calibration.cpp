#include "mssv/calibration.hpp"

#include "mssv/io.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace mssv {

namespace {

void check_quote(const SurfaceQuote& q, const SurfaceContext& ctx) {
    if (!(q.strike > 0.0)) throw std::invalid_argument("quote strike must be positive");
    if (!(q.maturity > ctx.t)) throw std::invalid_argument("quote maturity must exceed the valuation time");
    if (!(q.iv > 0.0)) throw std::invalid_argument("quote implied vol must be positive");
}

}  // namespace

double lmmr(double strike, double maturity, const SurfaceContext& ctx) {
    if (!(ctx.spot > 0.0)) throw std::invalid_argument("spot must be positive");
    return std::log(strike / ctx.spot) / (maturity - ctx.t);
}

double affine_vol(const SmileCoeffs& c, double strike, double maturity, const SurfaceContext& ctx) {
    const double tau = maturity - ctx.t;
    return c.b_star + tau * c.b_delta + (c.a_eps + tau * c.a_delta) * lmmr(strike, maturity, ctx);
}

SmileFit fit_smile(const std::vector<SurfaceQuote>& quotes, const SurfaceContext& ctx) {
    if (quotes.size() < 4) throw std::invalid_argument("fit_smile: at least 4 quotes required");
    std::set<double> maturities, strikes;
    for (const auto& q : quotes) {
        check_quote(q, ctx);
        maturities.insert(q.maturity);
        strikes.insert(q.strike);
    }
    if (maturities.size() < 2)
        throw std::invalid_argument("fit_smile: rank-deficient design, quotes span a single maturity");
    if (strikes.size() < 2) throw std::invalid_argument("fit_smile: rank-deficient design, quotes span a single strike");

    const auto n = static_cast<Eigen::Index>(quotes.size());
    Eigen::MatrixXd a(n, 4);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& q = quotes[static_cast<std::size_t>(i)];
        const double tau = q.maturity - ctx.t;
        const double l = lmmr(q.strike, q.maturity, ctx);
        a.row(i) << 1.0, tau, l, tau * l;
        y(i) = q.iv;
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < 4) throw std::invalid_argument("fit_smile: rank-deficient design matrix");
    const Eigen::VectorXd beta = qr.solve(y);

    SmileFit fit;
    fit.coeffs = {beta(0), beta(1), beta(2), beta(3)};
    const Eigen::VectorXd resid = y - a * beta;
    fit.rms_residual = std::sqrt(resid.squaredNorm() / static_cast<double>(n));
    fit.max_abs_residual = resid.cwiseAbs().maxCoeff();
    return fit;
}

SmileCoeffs params_to_coeffs(const GroupParams& gp, double r) {
    const double s = gp.sigma_star;
    if (!(s > 0.0)) throw std::invalid_argument("params_to_coeffs: sigma_star must be positive");
    const double skew = 1.0 - 2.0 * r / (s * s);
    SmileCoeffs c;
    c.b_star = s + gp.v3 / (2.0 * s) * skew;
    c.a_eps = gp.v3 / (s * s * s);
    c.b_delta = gp.v0 + 0.5 * gp.v1 * skew;
    c.a_delta = gp.v1 / (s * s);
    return c;
}

Inversion parse_inversion(const std::string& s) {
    if (s == "first-order" || s == "first_order") return Inversion::first_order;
    if (s == "exact") return Inversion::exact;
    throw std::invalid_argument("inversion must be first-order or exact, got '" + s + "'");
}

GroupParams coeffs_to_params(const SmileCoeffs& c, double r, Inversion inversion) {
    if (!(c.b_star > 0.0)) throw std::invalid_argument("coeffs_to_params: b_star must be positive");
    if (inversion == Inversion::first_order) {
        const double b = c.b_star;
        const double sigma_star = b + c.a_eps * (r - 0.5 * b * b);
        if (!(sigma_star > 0.0)) throw std::domain_error("coeffs_to_params: calibrated sigma_star is not positive");
        return GroupParams::reduced(sigma_star, c.b_delta + c.a_delta * (r - 0.5 * b * b), c.a_delta * b * b,
                                    c.a_eps * b * b * b);
    }
    // b_star = s + (a_eps / 2) s^2 - a_eps r, solved for the root near b_star
    const double q = c.b_star + c.a_eps * r;
    const double disc = 1.0 + 2.0 * c.a_eps * q;
    if (disc < 0.0) throw std::domain_error("coeffs_to_params: no real sigma_star reproduces b_star");
    const double s = 2.0 * q / (1.0 + std::sqrt(disc));
    if (!(s > 0.0)) throw std::domain_error("coeffs_to_params: calibrated sigma_star is not positive");
    const double v1 = c.a_delta * s * s;
    return GroupParams::reduced(s, c.b_delta - 0.5 * v1 * (1.0 - 2.0 * r / (s * s)), v1, c.a_eps * s * s * s);
}

std::vector<SurfaceQuote> synthesize_surface(const GroupParams& gp, double r, const std::vector<double>& strikes,
                                             const std::vector<double>& maturities, double x, double t) {
    const SmileCoeffs c = params_to_coeffs(gp, r);
    const SurfaceContext ctx{x, r, t};
    std::vector<SurfaceQuote> out;
    std::string bad;
    for (double T : maturities) {
        if (!(T > t)) throw std::invalid_argument("synthesize_surface: maturities must exceed t");
        for (double K : strikes) {
            if (!(K > 0.0)) throw std::invalid_argument("synthesize_surface: strikes must be positive");
            const double iv = affine_vol(c, K, T, ctx);
            if (!(iv > 0.0)) bad += " (K=" + format_double(K) + ", T=" + format_double(T) + ")";
            out.push_back({K, T, iv});
        }
    }
    if (!bad.empty()) throw std::domain_error("synthesize_surface: non-positive vol at" + bad);
    return out;
}

std::vector<SurfaceQuote> read_quotes_csv(std::istream& in) {
    const CsvTable table = read_csv(in);
    const auto ik = table.column("K");
    const auto it = table.column("T");
    const auto iv = table.column("iv");
    std::vector<SurfaceQuote> quotes;
    for (const auto& row : table.rows) quotes.push_back({row[ik], row[it], row[iv]});
    return quotes;
}

std::string quotes_to_csv(const std::vector<SurfaceQuote>& quotes) {
    CsvTable t;
    t.header = {"K", "T", "iv"};
    for (const auto& q : quotes) t.rows.push_back({q.strike, q.maturity, q.iv});
    return to_csv(t);
}

}  // namespace mssv

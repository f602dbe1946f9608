#pragma once

#include "mssv/model.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace mssv {

/// One implied-volatility quote; spot, rate and valuation time live in SurfaceContext.
struct SurfaceQuote {
    double strike = 0.0;
    double maturity = 0.0;
    double iv = 0.0;
};

struct SurfaceContext {
    double spot = 100.0;
    double rate = 0.0;
    double t = 0.0;
};

/// iv ~ b_star + (T - t) b_delta + (a_eps + (T - t) a_delta) LMMR,
/// LMMR = log(K/x) / (T - t).
struct SmileCoeffs {
    double b_star = 0.0;
    double b_delta = 0.0;
    double a_eps = 0.0;
    double a_delta = 0.0;
};

struct SmileFit {
    SmileCoeffs coeffs;
    double rms_residual = 0.0;
    double max_abs_residual = 0.0;
};

double lmmr(double strike, double maturity, const SurfaceContext& ctx);

double affine_vol(const SmileCoeffs& c, double strike, double maturity, const SurfaceContext& ctx);

/// Ordinary least squares on {1, T - t, LMMR, (T - t) LMMR}. Throws
/// std::invalid_argument for fewer than 4 quotes, a single maturity, a single
/// strike, or an otherwise rank-deficient design.
SmileFit fit_smile(const std::vector<SurfaceQuote>& quotes, const SurfaceContext& ctx);

SmileCoeffs params_to_coeffs(const GroupParams& gp, double r);

/// first_order: sigma_star = b + a_eps (r - b^2/2), V3 = a_eps b^3, V0 = b_delta + a_delta (r - b^2/2),
/// V1 = a_delta b^2 with b = b_star.
/// exact: solves params_to_coeffs in closed form (a quadratic in sigma_star).
enum class Inversion { first_order, exact };

Inversion parse_inversion(const std::string& s);

/// Returns reduced GroupParams (sigma_star, V0, V1, V3). Throws
/// std::domain_error if the resulting sigma_star is not positive.
GroupParams coeffs_to_params(const SmileCoeffs& c, double r, Inversion inversion = Inversion::first_order);

/// Affine-approximation vols on the strike x maturity grid. Throws
/// std::domain_error listing every (K, T) with a non-positive vol.
std::vector<SurfaceQuote> synthesize_surface(const GroupParams& gp, double r, const std::vector<double>& strikes,
                                             const std::vector<double>& maturities, double x, double t);

/// CSV with header `K,T,iv`.
std::vector<SurfaceQuote> read_quotes_csv(std::istream& in);
std::string quotes_to_csv(const std::vector<SurfaceQuote>& quotes);

}  // namespace mssv

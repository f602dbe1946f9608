#pragma once

#include "mssv/mc.hpp"
#include "mssv/model.hpp"
#include "mssv/oracle.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mssv {

/// reduced: P0 at sigma_star and V2 absorbed; unreduced: P0 at sigma_bar plus a V2 D2 term.
enum class SigmaMode { reduced, unreduced };

/// closed: (T - t) A P0, valid for weakly path-dependent payoffs.
/// feynman_kac: Monte Carlo of the time-integrated Greeks along zero-order paths.
/// exact: the oracle's closed-form evaluation of the Feynman-Kac integrals.
enum class Method { closed, feynman_kac, exact };

Method parse_method(const std::string& s);
std::string to_string(Method m);
SigmaMode parse_sigma_mode(const std::string& s);
std::string to_string(SigmaMode m);

struct CorrectionReport {
    double p0 = 0.0;
    Estimate p10_eps;     // stderr 0 and n_paths 0 for deterministic methods
    Estimate p01_delta;
    double total = 0.0;   // p0 + p10 + p01
    Method method = Method::closed;
    SigmaMode mode = SigmaMode::reduced;
    double sigma = 0.0;   // volatility at which P0 and its Greeks were evaluated
};

/// Volatility used for P0 under the mode.
double zero_order_sigma(const GroupParams& gp, SigmaMode mode);

double zero_order_price(const ZeroOrderOracle& oracle, const OracleState& state, const GroupParams& gp,
                        SigmaMode mode = SigmaMode::reduced);

/// (T - t)(V0 vega + V1 D1 vega + V3 (2 D2 + D3)) P0, plus (T - t) V2 D2 P0 in
/// unreduced mode. Throws std::logic_error for payoffs that are not weakly
/// path-dependent.
CorrectionReport correction_closed(const ZeroOrderOracle& oracle, const GroupParams& gp, const OracleState& state,
                                   SigmaMode mode = SigmaMode::reduced);

/// Uses the oracle's closed-form Feynman-Kac integrals. Throws std::logic_error
/// if the oracle has none.
CorrectionReport correction_exact(const ZeroOrderOracle& oracle, const GroupParams& gp, const OracleState& state,
                                  SigmaMode mode = SigmaMode::reduced);

struct FkConfig {
    int steps = 1000;           // grid steps over [t, T]
    double truncation = 1e-4;   // the time integral stops at T - truncation
};

/// E[ int_t^{T'} e^{-r(u-t)} (V3 D1 D2 + V2 D2) P0(S_u) du ], S geometric
/// Brownian motion at the zero-order volatility started from X, T' = T - truncation.
Estimate correction_fk_eps(const ZeroOrderOracle& oracle, const GroupParams& gp, const Path& x,
                           const FkConfig& fk, const McConfig& mc, SigmaMode mode = SigmaMode::reduced);

/// 2 E[ int_t^{T'} e^{-r(u-t)} (V0 + V1 D1) dP0/dsigma (S_u) du ].
/// The leading 2 is the convention constant fixed against the vanilla closed form.
Estimate correction_fk_delta(const ZeroOrderOracle& oracle, const GroupParams& gp, const Path& x,
                             const FkConfig& fk, const McConfig& mc, SigmaMode mode = SigmaMode::reduced);

/// Both Feynman-Kac corrections from one set of paths.
std::pair<Estimate, Estimate> correction_fk(const ZeroOrderOracle& oracle, const GroupParams& gp, const Path& x,
                                            const FkConfig& fk, const McConfig& mc,
                                            SigmaMode mode = SigmaMode::reduced);

CorrectionReport first_order_price(const ZeroOrderOracle& oracle, const GroupParams& gp, const Path& x,
                                   Method method, const FkConfig& fk = {}, const McConfig& mc = {},
                                   SigmaMode mode = SigmaMode::reduced);

/// Delta hedge used as a control variate in full_model_price.
struct HedgeControl {
    const ZeroOrderOracle* oracle = nullptr;
    double sigma = 0.0;
};

/// e^{-r(T-t)} E[payoff(concat(X, S))] under the full model, with the factors
/// started at (y0, z0) at time t = X.time(). The grid runs from t to T.
/// With a hedge oracle, the discounted delta-hedging gains
///   sum_i Delta_i (e^{-r(u_{i+1}-t)} s_{i+1} - e^{-r(u_i-t)} s_i),
/// a zero-mean martingale, serve as control variate.
Estimate full_model_price(const ModelSpec& spec, const Functional& payoff, const Path& x, double y0, double z0,
                          const GridSpec& grid, const McConfig& mc, std::optional<HedgeControl> hedge = {});

struct SweepConfig {
    double steps_per_eps = 20.0;   // full-model grid: steps = ceil(steps_per_eps * (T - t) / eps)
    int min_steps = 50;
    Method method = Method::closed;
    FkConfig fk;
    bool hedge = true;
};

struct SweepRow {
    double eps = 0.0;
    double del = 0.0;
    double approx = 0.0;
    Estimate full;
    double error = 0.0;    // full - approx
    double stderr_ = 0.0;  // combined standard error
    bool flagged = false;  // |error| <= 2 stderr, excluded from the slope
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double slope = 0.0;    // least squares of log|error| on log(eps + del); NaN with < 2 usable points
    int points_used = 0;
};

/// One row of the sweep: full_model_price against first_order_price at (eps, del).
SweepRow sweep_point(const ModelSpec& spec, const ZeroOrderOracle& oracle, double eps, double del, const Path& x,
                     double y0, double z0, const McConfig& mc, const SweepConfig& cfg = {},
                     const QuadratureConfig& q = {});

/// Compares full_model_price with first_order_price at each (eps, del); all
/// scales reuse mc.seed, so path i draws from the same stream at every scale.
SweepResult accuracy_sweep(const ModelSpec& spec, const ZeroOrderOracle& oracle,
                           const std::vector<std::pair<double, double>>& scales, const Path& x, double y0, double z0,
                           const McConfig& mc, const SweepConfig& cfg = {}, const QuadratureConfig& q = {});

}  // namespace mssv

#pragma once

#include "mssv/analytic.hpp"
#include "mssv/path.hpp"

#include <memory>
#include <optional>
#include <string>

namespace mssv {

/// Payoff-specific provider of the zero-order price and its D_k / sigma
/// sensitivities, evaluated on the reduced state of a path.
class ZeroOrderOracle {
public:
    explicit ZeroOrderOracle(double r) : r_(r) {}
    virtual ~ZeroOrderOracle() = default;

    virtual std::string name() const = 0;
    virtual double maturity() const = 0;

    /// [Delta_x, Delta_t] P_BS = 0 along continuous paths.
    virtual bool weakly_pd() const = 0;

    double rate() const noexcept { return r_; }

    /// t = X.time(), x = x_t, left-Riemann int log x du and discrete QV of X.
    virtual OracleState state_from_path(const Path& x) const;

    /// Moves the state one grid step to level x_new, consistent with state_from_path.
    OracleState advance(const OracleState& s, double x_new, double dt) const;

    virtual double price(const OracleState& s, double sigma) const = 0;
    virtual Greeks greeks(const OracleState& s, double sigma) const = 0;

    /// Delta_x P; the default reads D1 / x from greeks().
    virtual double delta(const OracleState& s, double sigma) const;

    /// Undiscounted payoff as a functional of a path ending at T.
    virtual Functional payoff() const = 0;

    /// Feynman-Kac corrections in closed form, when the payoff admits one.
    virtual std::optional<CorrectionPair> exact_correction(const OracleState& s, double sigma, double v0,
                                                           double v1, double v2, double v3) const;

private:
    double r_;
};

class VanillaOracle final : public ZeroOrderOracle {
public:
    VanillaOracle(VanillaSpec spec, double r);

    std::string name() const override;
    double maturity() const override { return spec_.maturity; }
    bool weakly_pd() const override { return true; }
    double price(const OracleState& s, double sigma) const override;
    Greeks greeks(const OracleState& s, double sigma) const override;
    double delta(const OracleState& s, double sigma) const override;
    Functional payoff() const override;

    const VanillaSpec& spec() const noexcept { return spec_; }

private:
    VanillaSpec spec_;
};

/// Continuously monitored geometric-average option with the average over [0, T].
class GeoAsianOracle final : public ZeroOrderOracle {
public:
    GeoAsianOracle(VanillaSpec spec, double r);

    std::string name() const override;
    double maturity() const override { return spec_.maturity; }
    bool weakly_pd() const override { return false; }
    OracleState state_from_path(const Path& x) const override;
    double price(const OracleState& s, double sigma) const override;
    Greeks greeks(const OracleState& s, double sigma) const override;
    Functional payoff() const override;
    std::optional<CorrectionPair> exact_correction(const OracleState& s, double sigma, double v0, double v1,
                                                   double v2, double v3) const override;

private:
    VanillaSpec spec_;
};

/// Payoff equal to the realized quadratic variation of the price path.
class QvLinearOracle final : public ZeroOrderOracle {
public:
    QvLinearOracle(double maturity, double r);

    std::string name() const override { return "qv-linear"; }
    double maturity() const override { return maturity_; }
    bool weakly_pd() const override { return true; }
    double price(const OracleState& s, double sigma) const override;
    Greeks greeks(const OracleState& s, double sigma) const override;
    Functional payoff() const override;
    std::optional<CorrectionPair> exact_correction(const OracleState& s, double sigma, double v0, double v1,
                                                   double v2, double v3) const override;

private:
    double maturity_;
};

/// Path -> P_0 at sigma, via state_from_path. Used to cross-check the
/// oracle's D_k against numerical functional derivatives. The oracle must
/// outlive the returned functional.
Functional price_functional(const ZeroOrderOracle& oracle, double sigma);

/// Builds an oracle from a payoff name: vanilla-call, vanilla-put,
/// geo-asian-call, geo-asian-put, qv-linear.
std::unique_ptr<ZeroOrderOracle> make_oracle(const std::string& payoff, double strike, double maturity, double r);

}  // namespace mssv

#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace mssv {

/// Risk-neutral two-factor model
///
///   ds = r s dt + f(y,z) s dw0
///   dy = (alpha(y)/eps - beta Gamma1 / sqrt(eps)) dt + beta / sqrt(eps) dw1
///   dz = (del c(z) - sqrt(del) g Gamma2) dt + sqrt(del) g dw2
///
/// with OU factors alpha(y) = m_y - y, beta = nu_y sqrt(2), c(z) = m_z - z,
/// g = nu_z sqrt(2), volatility f(y,z) = z (a + b tanh y) and constant
/// market prices of volatility risk.
struct ModelSpec {
    double r = 0.05;
    double rho1 = 0.0;
    double rho2 = 0.0;
    double rho12 = 0.0;
    double eps = 0.01;
    double del = 0.01;
    double m_y = 0.0;
    double nu_y = 0.5;
    double m_z = 0.3;
    double nu_z = 0.1;
    double a = 1.0;
    double b = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;

    /// Throws std::invalid_argument naming the first violated constraint.
    void validate() const;

    double alpha(double y) const noexcept { return m_y - y; }
    double beta() const noexcept { return nu_y * std::sqrt(2.0); }
    double c(double z) const noexcept { return m_z - z; }
    double g() const noexcept { return nu_z * std::sqrt(2.0); }
    double vol(double y, double z) const noexcept { return z * (a + b * std::tanh(y)); }
};

/// Group market parameters at one slow-factor level.
struct GroupParams {
    double sigma_bar = 0.0;
    double sigma_star = 0.0;
    double v0 = 0.0;   // V0^delta
    double v1 = 0.0;   // V1^delta
    double v2 = 0.0;   // V2^eps
    double v3 = 0.0;   // V3^eps
    double z = 0.0;

    /// Builds the reduced parameter set (sigma_star, V0, V1, V3); sigma_bar is
    /// set to sigma_star and V2 to zero so that sigma_star^2 = sigma_bar^2 + 2 V2.
    static GroupParams reduced(double sigma_star, double v0, double v1, double v3);
};

struct QuadratureConfig {
    int nodes = 64;              // Gauss-Hermite nodes for invariant averages
    double y_half_width = 10.0;  // Poisson grid half width, in units of nu_y
    int y_nodes = 2000;          // Poisson grid trapezoid nodes

    void validate() const;
};

/// Probabilists' Gauss-Hermite rule: sum_i w_i h(x_i) ~ E[h(N(0,1))].
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussHermite(int n);
};

/// <h> = int h(y) N(m_y, nu_y^2)(dy), the average under the invariant law of
/// the unit-rate fast factor.
double invariant_average(const std::function<double(double)>& h, const ModelSpec& spec,
                         const QuadratureConfig& q = {});

/// Effective volatility sqrt(<f^2(., z)>).
double sigma_bar(const ModelSpec& spec, double z, const QuadratureConfig& q = {});

/// Derivative of the solution of L0 phi = f^2 - sigma_bar^2 at fixed z, with
/// L0 = alpha d/dy + (beta^2/2) d^2/dy^2.
///
/// Uses the integrating factor of the OU generator:
///   phi'(y) = 2 / (beta^2 Phi(y)) int_{-inf}^y (f^2(u,z) - sigma_bar^2) Phi(u) du
/// where Phi is the invariant density. The cumulative integral is tabulated
/// once on m_y +- y_half_width * nu_y.
class PoissonSolution {
public:
    PoissonSolution(const ModelSpec& spec, double z, const QuadratureConfig& q = {});

    /// Throws std::out_of_range when y falls outside the tabulated grid.
    double dphi(double y) const;

    /// <h phi'> computed as (2/beta^2) int h(y) F(y) dy, which avoids dividing
    /// by the invariant density in the tails.
    double average_with_dphi(const std::function<double(double)>& h) const;

    /// int (f^2 - sigma_bar^2) Phi over the whole grid; zero up to quadrature error.
    double centering_residual() const noexcept { return cumulative_.back(); }

    double sigma_bar() const noexcept { return sigma_bar_; }
    double y_min() const noexcept { return y0_; }
    double y_max() const noexcept { return y0_ + hy_ * static_cast<double>(cumulative_.size() - 1); }

private:
    double source(double y) const;  // (f^2 - sigma_bar^2) Phi

    ModelSpec spec_;
    double z_;
    double sigma_bar_;
    double y0_;
    double hy_;
    std::vector<double> cumulative_;
};

/// phi'(y, z); builds a PoissonSolution per call.
double poisson_dphi(const ModelSpec& spec, double y, double z, const QuadratureConfig& q = {});

/// (sigma_bar, sigma_star, V0, V1, V2, V3) at slow level z.
/// Throws std::domain_error if sigma_bar^2 + 2 V2 < 0.
GroupParams group_params(const ModelSpec& spec, double z, const QuadratureConfig& q = {});

}  // namespace mssv

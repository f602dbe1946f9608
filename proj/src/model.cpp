#include "mssv/model.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mssv {

void ModelSpec::validate() const {
    auto corr_ok = [](double rho) { return std::abs(rho) < 1.0; };
    if (!corr_ok(rho1)) throw std::invalid_argument("ModelSpec: |rho1| must be < 1");
    if (!corr_ok(rho2)) throw std::invalid_argument("ModelSpec: |rho2| must be < 1");
    if (!corr_ok(rho12)) throw std::invalid_argument("ModelSpec: |rho12| must be < 1");
    const double det = 1.0 + 2.0 * rho1 * rho2 * rho12 - rho1 * rho1 - rho2 * rho2 - rho12 * rho12;
    if (det < -1e-14) throw std::invalid_argument("ModelSpec: correlation matrix is not positive semidefinite");
    if (!(eps > 0.0)) throw std::invalid_argument("ModelSpec: eps must be positive");
    if (!(del > 0.0)) throw std::invalid_argument("ModelSpec: del must be positive");
    if (!(nu_y > 0.0)) throw std::invalid_argument("ModelSpec: nu_y must be positive");
    if (!(nu_z >= 0.0)) throw std::invalid_argument("ModelSpec: nu_z must be non-negative");
    if (!(b >= 0.0)) throw std::invalid_argument("ModelSpec: b must be non-negative");
    if (!(a - b > 0.0)) throw std::invalid_argument("ModelSpec: a - b must be positive (f bounded away from zero)");
}

GroupParams GroupParams::reduced(double sigma_star, double v0, double v1, double v3) {
    GroupParams gp;
    gp.sigma_bar = sigma_star;
    gp.sigma_star = sigma_star;
    gp.v0 = v0;
    gp.v1 = v1;
    gp.v2 = 0.0;
    gp.v3 = v3;
    return gp;
}

void QuadratureConfig::validate() const {
    if (nodes < 16) throw std::invalid_argument("QuadratureConfig: at least 16 Gauss-Hermite nodes required");
    if (!(y_half_width > 0.0)) throw std::invalid_argument("QuadratureConfig: y_half_width must be positive");
    if (y_nodes < 3) throw std::invalid_argument("QuadratureConfig: y_nodes must be >= 3");
}

GaussHermite::GaussHermite(int n) {
    if (n < 1) throw std::invalid_argument("GaussHermite: n must be positive");
    // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite recurrence.
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
        jacobi(k - 1, k) = jacobi(k, k - 1);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
        nodes[i] = solver.eigenvalues()(i);
        const double v = solver.eigenvectors()(0, i);
        weights[i] = v * v;
    }
}

double invariant_average(const std::function<double(double)>& h, const ModelSpec& spec,
                         const QuadratureConfig& q) {
    q.validate();
    const GaussHermite rule(q.nodes);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double y = spec.m_y + spec.nu_y * rule.nodes[i];
        const double v = h(y);
        if (!std::isfinite(v))
            throw std::domain_error("invariant_average: non-finite integrand at y = " + std::to_string(y));
        sum += rule.weights[i] * v;
    }
    return sum;
}

double sigma_bar(const ModelSpec& spec, double z, const QuadratureConfig& q) {
    if (!(z > 0.0)) throw std::invalid_argument("sigma_bar: z must be positive");
    const double m2 = invariant_average([&](double y) { return std::pow(spec.vol(y, z), 2); }, spec, q);
    if (m2 < 0.0) throw std::domain_error("sigma_bar: negative second moment");
    return std::sqrt(m2);
}

namespace {

double normal_pdf(double y, double m, double s) {
    const double u = (y - m) / s;
    return std::exp(-0.5 * u * u) / (s * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

PoissonSolution::PoissonSolution(const ModelSpec& spec, double z, const QuadratureConfig& q)
    : spec_(spec), z_(z), sigma_bar_(mssv::sigma_bar(spec, z, q)) {
    q.validate();
    y0_ = spec.m_y - q.y_half_width * spec.nu_y;
    hy_ = 2.0 * q.y_half_width * spec.nu_y / (q.y_nodes - 1);
    cumulative_.assign(static_cast<std::size_t>(q.y_nodes), 0.0);
    double prev = source(y0_);
    for (int j = 1; j < q.y_nodes; ++j) {
        const double cur = source(y0_ + j * hy_);
        cumulative_[j] = cumulative_[j - 1] + 0.5 * hy_ * (prev + cur);
        prev = cur;
    }
}

double PoissonSolution::source(double y) const {
    const double f = spec_.vol(y, z_);
    return (f * f - sigma_bar_ * sigma_bar_) * normal_pdf(y, spec_.m_y, spec_.nu_y);
}

double PoissonSolution::dphi(double y) const {
    if (y < y_min() || y > y_max())
        throw std::out_of_range("PoissonSolution::dphi: y outside the quadrature grid (extend y_half_width)");
    const auto last = cumulative_.size() - 1;
    const auto j = std::min(static_cast<std::size_t>((y - y0_) / hy_), last);
    const double yj = y0_ + static_cast<double>(j) * hy_;
    // Simpson on the partial cell [y_j, y]
    const double w = y - yj;
    const double partial = w / 6.0 * (source(yj) + 4.0 * source(yj + 0.5 * w) + source(y));
    const double F = cumulative_[j] + partial;
    const double beta = spec_.beta();
    return 2.0 * F / (beta * beta * normal_pdf(y, spec_.m_y, spec_.nu_y));
}

double PoissonSolution::average_with_dphi(const std::function<double(double)>& h) const {
    double sum = 0.0;
    const auto n = cumulative_.size();
    for (std::size_t j = 0; j < n; ++j) {
        const double weight = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
        sum += weight * h(y0_ + static_cast<double>(j) * hy_) * cumulative_[j];
    }
    const double beta = spec_.beta();
    return 2.0 / (beta * beta) * sum * hy_;
}

double poisson_dphi(const ModelSpec& spec, double y, double z, const QuadratureConfig& q) {
    if (!(z > 0.0)) throw std::invalid_argument("poisson_dphi: z must be positive");
    return PoissonSolution(spec, z, q).dphi(y);
}

GroupParams group_params(const ModelSpec& spec, double z, const QuadratureConfig& q) {
    spec.validate();
    if (!(z > 0.0)) throw std::invalid_argument("group_params: z must be positive");

    const PoissonSolution poisson(spec, z, q);
    const double beta = spec.beta();
    const double sqrt_eps = std::sqrt(spec.eps);
    const double sqrt_del = std::sqrt(spec.del);

    GroupParams gp;
    gp.z = z;
    gp.sigma_bar = poisson.sigma_bar();
    gp.v3 = -0.5 * spec.rho1 * sqrt_eps * beta * poisson.average_with_dphi([&](double y) { return spec.vol(y, z); });
    gp.v2 = 0.5 * sqrt_eps * beta * spec.gamma1 * poisson.average_with_dphi([](double) { return 1.0; });

    const double hz = 1e-4 * z;
    const double dsigma_dz = (sigma_bar(spec, z + hz, q) - sigma_bar(spec, z - hz, q)) / (2.0 * hz);
    const double mean_f = invariant_average([&](double y) { return spec.vol(y, z); }, spec, q);
    gp.v1 = 0.5 * spec.rho2 * spec.g() * sqrt_del * mean_f * dsigma_dz;
    gp.v0 = -0.5 * spec.g() * sqrt_del * spec.gamma2 * dsigma_dz;

    const double s2 = gp.sigma_bar * gp.sigma_bar + 2.0 * gp.v2;
    if (s2 < 0.0) throw std::domain_error("group_params: sigma_bar^2 + 2 V2 < 0, invalid parameter regime");
    gp.sigma_star = std::sqrt(s2);
    return gp;
}

}  // namespace mssv

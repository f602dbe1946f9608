#pragma once

#include "mssv/model.hpp"
#include "mssv/path.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace mssv {

struct GridSpec {
    double t0 = 0.0;
    double T = 1.0;
    int steps = 1;

    void validate() const;
    double dt() const noexcept { return (T - t0) / steps; }
};

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;   // sample standard deviation / sqrt(n_paths)
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
};

struct McConfig {
    std::size_t paths = 100000;
    std::uint64_t seed = 1;
    int workers = 0;               // 0 selects default_workers()
    bool control_variate = true;   // martingale control where the estimator supports one
};

using Rng = std::mt19937_64;

/// Independent stream for path `index`; depends only on (seed, index).
Rng path_rng(std::uint64_t seed, std::uint64_t index);

/// Standard normal draws from one path stream.
class NormalSource {
public:
    explicit NormalSource(Rng& rng) : rng_(rng) {}
    double operator()() { return normal_(rng_); }

private:
    Rng& rng_;
    std::normal_distribution<double> normal_;
};

/// MSSV_DEFAULT_WORKERS if set to a positive integer, else the hardware thread count.
int default_workers();

/// Mean and standard error of sampler(i, rng_i) over i < n_paths. Samples are
/// stored by index and reduced in index order, so the result does not depend
/// on `workers`. A non-finite sample throws std::runtime_error naming the index.
Estimate mc_estimate(const std::function<double(std::size_t, Rng&)>& sampler, std::size_t n_paths,
                     std::uint64_t seed, int workers = 0);

/// A sample paired with a zero-mean control.
struct ControlledSample {
    double value = 0.0;
    double control = 0.0;
};

/// Control-variate estimator mean(Y - b M) with the regression coefficient
/// b = Cov(Y, M) / Var(M) estimated from the same samples. With
/// use_control = false the control is ignored.
Estimate mc_estimate_controlled(const std::function<ControlledSample(std::size_t, Rng&)>& sampler,
                                std::size_t n_paths, std::uint64_t seed, int workers = 0,
                                bool use_control = true);

/// Several controlled estimators sharing one set of paths: the sampler fills
/// `outputs` samples per path. Each output gets its own regression coefficient.
std::vector<Estimate> mc_estimate_controlled(
    const std::function<void(std::size_t, Rng&, std::span<ControlledSample>)>& sampler, std::size_t outputs,
    std::size_t n_paths, std::uint64_t seed, int workers = 0, bool use_control = true);

/// Exact OU transitions: y' = m + (y - m) e^{-kappa dt} + nu sqrt(1 - e^{-2 kappa dt}) xi.
/// nu is the stationary standard deviation.
Path simulate_ou(double kappa, double m, double nu, double y0, const GridSpec& grid, std::uint64_t seed);

/// One step of the full (s, y, z) system.
///
/// The factors use exact OU transitions under the risk-neutral drift and the
/// price a log step with f frozen over the step. The three Gaussian inputs
/// (price increment and the two OU innovations) are drawn jointly with their
/// exact covariance, so the correlations rho1, rho2, rho12 are honoured at any dt.
class FullModelScheme {
public:
    struct State {
        double s;
        double y;
        double z;
    };

    /// Throws std::invalid_argument if dt > eps / 10.
    FullModelScheme(const ModelSpec& spec, double dt);

    void step(State& st, NormalSource& normal) const;
    double dt() const noexcept { return dt_; }

private:
    ModelSpec spec_;
    double dt_;
    double mean_y_, decay_y_, scale_y_;
    double mean_z_, decay_z_, scale_z_;
    std::array<double, 6> chol_{};  // lower triangle, row major
};

struct FullPaths {
    Path s;
    Path y;
    Path z;
};

FullPaths simulate_full(const ModelSpec& spec, double s0, double y0, double z0, const GridSpec& grid,
                        std::uint64_t seed);

/// Exact lognormal step of geometric Brownian motion.
inline double bs_step(double x, double r, double sigma, double dt, double xi) {
    return x * std::exp((r - 0.5 * sigma * sigma) * dt + sigma * std::sqrt(dt) * xi);
}

/// concat(X, S) where S is a GBM continuation from x_t on `grid`. The grid must
/// start at X's current time and use X's step (unless X is a single node).
Path simulate_bs(double sigma, double r, const Path& x, const GridSpec& grid, std::uint64_t seed);

/// Same as simulate_bs but drawing from a caller-supplied stream.
Path simulate_bs(double sigma, double r, const Path& x, const GridSpec& grid, Rng& rng);

}  // namespace mssv

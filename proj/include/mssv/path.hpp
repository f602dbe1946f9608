#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mssv {

/// A cadlag path sampled on a uniform grid.
///
/// Node i sits at time t0 + i*dt. The last node is the current time of the
/// path and may carry a bump relative to its left neighbour. Paths are
/// immutable; every operation below returns a new one.
class Path {
public:
    Path(double t0, double dt, std::vector<double> values);

    double t0() const noexcept { return t0_; }
    double dt() const noexcept { return dt_; }
    std::size_t size() const noexcept { return values_.size(); }

    /// Current time t = t0 + (size-1)*dt.
    double time() const noexcept { return t0_ + static_cast<double>(values_.size() - 1) * dt_; }
    double time_at(std::size_t i) const noexcept { return t0_ + static_cast<double>(i) * dt_; }

    double back() const noexcept { return values_.back(); }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    std::span<const double> values() const noexcept { return values_; }

    bool operator==(const Path&) const = default;

private:
    double t0_;
    double dt_;
    std::vector<double> values_;
};

/// Maps a path to a real number. Must be deterministic.
struct Functional {
    std::string name;
    std::function<double(const Path&)> eval;

    double operator()(const Path& x) const { return eval(x); }
};

/// Discretization of the functional time and space derivatives.
struct DerivativeConfig {
    double h = 1e-4;           // bump size, level units
    int delta_t_steps = 1;     // flat-extension horizon in grid steps

    void validate() const;
};

/// Default steps: h = 1e-4 * max(1, |x_t|), one grid step of flat extension.
DerivativeConfig default_derivative_config(const Path& x);

// -- path operations ---------------------------------------------------------

/// X_{t, n*dt}: the path followed by n copies of its last value.
Path flat_extension(const Path& x, int n);

/// X_t^h: last value shifted by h.
Path bump(const Path& x, double h);

/// Continuous paste: x on [u,t] followed by y_r - y_t + x_t on [t,T].
/// A single-node x adopts the grid step of y.
Path concat(const Path& x, const Path& y);

/// Sup-norm distance after flat-extending the shorter path, plus the time gap.
double d_lambda(const Path& x, const Path& y);

// -- numerical functional derivatives ----------------------------------------

/// Forward difference along the flat extension.
double delta_t(const Functional& f, const Path& x, const DerivativeConfig& cfg);

/// Central differences in the terminal bump; order is 1, 2 or 3.
double delta_x(const Functional& f, const Path& x, const DerivativeConfig& cfg, int order = 1);

/// [Delta_x, Delta_t] f = Delta_x(Delta_t f) - Delta_t(Delta_x f).
double lie_bracket(const Functional& f, const Path& x, const DerivativeConfig& cfg);

// -- built-in functionals ----------------------------------------------------

/// Left-Riemann running integral: sum_{i < n-1} x_i dt. The last node has no
/// quadrature weight, so Delta_t I = x_t and Delta_x I = 0 hold exactly.
Functional running_integral();

/// Discrete quadratic variation sum (x_{i+1} - x_i)^2.
Functional quadratic_variation();

/// Left-Riemann double integral int_0^t int_0^s x_u du ds.
Functional double_integral();

/// Path-independent functional h(t, x_t).
Functional terminal_function(std::string name, std::function<double(double t, double x)> h);

// -- CSV ---------------------------------------------------------------------

/// Writes `time,value` rows with a header line.
void write_path_csv(std::ostream& out, const Path& x);

}  // namespace mssv

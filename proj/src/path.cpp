#include "mssv/path.hpp"

#include "mssv/io.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace mssv {

namespace {

bool same_step(double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b));
}

}  // namespace

Path::Path(double t0, double dt, std::vector<double> values)
    : t0_(t0), dt_(dt), values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("Path: at least one node required");
    if (!(dt_ > 0.0)) throw std::invalid_argument("Path: grid step must be positive");
}

void DerivativeConfig::validate() const {
    if (!(h > 0.0)) throw std::invalid_argument("DerivativeConfig: h must be positive");
    if (delta_t_steps < 1) throw std::invalid_argument("DerivativeConfig: delta_t_steps must be >= 1");
}

DerivativeConfig default_derivative_config(const Path& x) {
    return {1e-4 * std::max(1.0, std::abs(x.back())), 1};
}

Path flat_extension(const Path& x, int n) {
    if (n < 1) throw std::invalid_argument("flat_extension: n must be >= 1");
    std::vector<double> v(x.values().begin(), x.values().end());
    v.insert(v.end(), static_cast<std::size_t>(n), x.back());
    return Path(x.t0(), x.dt(), std::move(v));
}

Path bump(const Path& x, double h) {
    std::vector<double> v(x.values().begin(), x.values().end());
    v.back() += h;
    return Path(x.t0(), x.dt(), std::move(v));
}

Path concat(const Path& x, const Path& y) {
    const double dt = x.size() == 1 ? y.dt() : x.dt();
    if (!same_step(dt, y.dt()))
        throw std::invalid_argument("concat: incompatible discretizations (grid steps differ)");
    if (std::abs(x.time() - y.t0()) > 1e-6 * dt)
        throw std::invalid_argument("concat: incompatible discretizations (second path must start where the first ends)");

    std::vector<double> v(x.values().begin(), x.values().end());
    v.reserve(x.size() + y.size() - 1);
    const double shift = x.back() - y[0];
    for (std::size_t i = 1; i < y.size(); ++i) v.push_back(y[i] + shift);
    return Path(x.t0(), dt, std::move(v));
}

double d_lambda(const Path& x, const Path& y) {
    if (x.size() > y.size()) return d_lambda(y, x);
    if (!same_step(x.dt(), y.dt()) || std::abs(x.t0() - y.t0()) > 1e-12 * std::max(1.0, std::abs(x.t0())))
        throw std::invalid_argument("d_lambda: incompatible discretizations");

    double sup = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double xi = i < x.size() ? x[i] : x.back();
        sup = std::max(sup, std::abs(xi - y[i]));
    }
    return sup + static_cast<double>(y.size() - x.size()) * x.dt();
}

double delta_t(const Functional& f, const Path& x, const DerivativeConfig& cfg) {
    cfg.validate();
    const int n = cfg.delta_t_steps;
    return (f(flat_extension(x, n)) - f(x)) / (n * x.dt());
}

double delta_x(const Functional& f, const Path& x, const DerivativeConfig& cfg, int order) {
    cfg.validate();
    const double h = cfg.h;
    switch (order) {
    case 1:
        return (f(bump(x, h)) - f(bump(x, -h))) / (2.0 * h);
    case 2:
        return (f(bump(x, h)) - 2.0 * f(x) + f(bump(x, -h))) / (h * h);
    case 3:
        // stencil (-1/2, 1, -1, 1/2) at offsets (-2h, -h, h, 2h)
        return (-0.5 * f(bump(x, -2.0 * h)) + f(bump(x, -h)) - f(bump(x, h)) + 0.5 * f(bump(x, 2.0 * h)))
               / (h * h * h);
    default:
        throw std::invalid_argument("delta_x: order must be 1, 2 or 3");
    }
}

double lie_bracket(const Functional& f, const Path& x, const DerivativeConfig& cfg) {
    const Functional dt_f{"Dt(" + f.name + ")", [&](const Path& p) { return delta_t(f, p, cfg); }};
    const Functional dx_f{"Dx(" + f.name + ")", [&](const Path& p) { return delta_x(f, p, cfg, 1); }};
    return delta_x(dt_f, x, cfg, 1) - delta_t(dx_f, x, cfg);
}

Functional running_integral() {
    return {"running_integral", [](const Path& x) {
                double s = 0.0;
                for (std::size_t i = 0; i + 1 < x.size(); ++i) s += x[i];
                return s * x.dt();
            }};
}

Functional quadratic_variation() {
    return {"quadratic_variation", [](const Path& x) {
                double s = 0.0;
                for (std::size_t i = 0; i + 1 < x.size(); ++i) {
                    const double d = x[i + 1] - x[i];
                    s += d * d;
                }
                return s;
            }};
}

Functional double_integral() {
    return {"double_integral", [](const Path& x) {
                // sum_{j < n-1} I_j dt with I_j = sum_{i < j} x_i dt
                double inner = 0.0;
                double outer = 0.0;
                for (std::size_t j = 0; j + 1 < x.size(); ++j) {
                    outer += inner;
                    inner += x[j] * x.dt();
                }
                return outer * x.dt();
            }};
}

Functional terminal_function(std::string name, std::function<double(double, double)> h) {
    return {std::move(name), [h = std::move(h)](const Path& x) { return h(x.time(), x.back()); }};
}

void write_path_csv(std::ostream& out, const Path& x) {
    out << "time,value\n";
    for (std::size_t i = 0; i < x.size(); ++i) out << format_double(x.time_at(i)) << ',' << format_double(x[i]) << '\n';
}

}  // namespace mssv

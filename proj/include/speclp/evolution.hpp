#pragma once

// Evolution multipliers exp(int_s^t psi(r, xi) dr), the evolution system
// T_psi(t, s), the composed operator L_psi1(l) T_psi2(t, s), and their
// convolution kernels.

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "speclp/error.hpp"
#include "speclp/parallel.hpp"
#include "speclp/quadrature.hpp"
#include "speclp/spectral.hpp"
#include "speclp/symbols.hpp"

namespace speclp {

struct TimeIntegralRule {
    enum class Method { ExactTimeConstant, GaussLegendre, Trapezoid };
    Method method = Method::GaussLegendre;
    // Nodes per unit interval (Gauss-Legendre) or panels per unit interval
    // (trapezoid) for the first estimate; doubled until converged.
    int order = 8;
    double tolerance = 1e-10;
    int max_doublings = 14;

    static TimeIntegralRule exact() { return {Method::ExactTimeConstant, 0, 0.0, 0}; }
    static TimeIntegralRule gauss_legendre(int nodes = 8, double tol = 1e-10) { return {Method::GaussLegendre, nodes, tol}; }
    static TimeIntegralRule trapezoid(int panels = 64, double tol = 1e-10) { return {Method::Trapezoid, panels, tol}; }
};

/// Default rule for a symbol: exact for time-constant symbols, adaptive
/// Gauss-Legendre otherwise.
inline TimeIntegralRule default_rule(const SymbolSpec& psi)
{
    return psi.time_constant ? TimeIntegralRule::exact() : TimeIntegralRule::gauss_legendre();
}

struct PreSymbol {
    SymbolSpec symbol;
    double l = 0.0;
};

struct EvolutionMultiplier {
    GridSpec grid;
    double s = 0.0;
    double t = 0.0;
    std::vector<Complex> values;
    std::optional<PreSymbol> pre;
};

namespace detail {

inline std::string describe_xi(const Point& xi, int dim)
{
    std::ostringstream os;
    os << "(";
    for (int a = 0; a < dim; ++a) os << (a ? ", " : "") << xi[a];
    os << ")";
    return os.str();
}

// One fixed-resolution estimate of int_s^t psi(r, xi) dr at every lattice point.
inline std::vector<Complex> time_integral_once(const SymbolSpec& psi, double s, double t, const GridSpec& grid,
                                               TimeIntegralRule::Method method, int per_unit)
{
    const double length = t - s;
    const int units = std::max(1, static_cast<int>(std::ceil(length - 1e-12)));
    std::vector<double> nodes, weights;
    if (method == TimeIntegralRule::Method::GaussLegendre) {
        const auto base = gauss_legendre(per_unit);
        QuadratureRule rule;
        for (int u = 0; u < units; ++u)
            append_mapped(base, s + length * u / units, s + length * (u + 1) / units, rule);
        nodes = std::move(rule.nodes);
        weights = std::move(rule.weights);
    } else {
        const int panels = per_unit * units;
        const double h = length / panels;
        for (int i = 0; i <= panels; ++i) {
            nodes.push_back(s + h * i);
            weights.push_back((i == 0 || i == panels) ? 0.5 * h : h);
        }
    }
    std::vector<Complex> out(grid.size());
    parallel_for(out.size(), [&](std::size_t i) {
        const Point xi = grid.frequency(i);
        Complex acc{};
        for (std::size_t k = 0; k < nodes.size(); ++k) acc += weights[k] * eval_symbol(psi, nodes[k], xi);
        out[i] = acc;
    });
    return out;
}

} // namespace detail

/// Q(xi) ~ int_s^t psi(r, xi) dr on the lattice, to rule.tolerance relative.
inline std::vector<Complex> time_integral(const SymbolSpec& psi, double s, double t, const GridSpec& grid,
                                          const TimeIntegralRule& rule)
{
    grid.validate();
    if (!(s >= 0.0) || !(t >= s)) throw ArgumentError("time integral: need t >= s >= 0");
    std::vector<Complex> out(grid.size());
    if (t == s) return out;
    if (rule.method == TimeIntegralRule::Method::ExactTimeConstant) {
        if (!psi.time_constant)
            throw ArgumentError("exact time integration requested for time-dependent symbol '" + psi.name + "'");
        parallel_for(out.size(), [&](std::size_t i) { out[i] = (t - s) * eval_symbol(psi, s, grid.frequency(i)); });
        return out;
    }
    if (rule.order < 1) throw ArgumentError("time integral: rule order must be >= 1");
    int per_unit = rule.order;
    auto previous = detail::time_integral_once(psi, s, t, grid, rule.method, per_unit);
    double worst = 0.0;
    std::size_t worst_index = 0;
    for (int doubling = 0; doubling < rule.max_doublings; ++doubling) {
        per_unit *= 2;
        auto current = detail::time_integral_once(psi, s, t, grid, rule.method, per_unit);
        worst = 0.0;
        for (std::size_t i = 0; i < current.size(); ++i) {
            const double diff = std::abs(current[i] - previous[i]);
            const double scale = std::abs(current[i]);
            const double rel = diff == 0.0 ? 0.0 : diff / std::max(scale, 1e-300);
            if (rel > worst) {
                worst = rel;
                worst_index = i;
            }
        }
        previous = std::move(current);
        if (worst <= rule.tolerance) return previous;
    }
    throw QuadratureError("time quadrature did not converge for '" + psi.name + "' at xi = " +
                          detail::describe_xi(grid.frequency(worst_index), grid.dim) +
                          " (relative change " + std::to_string(worst) + ")");
}

/// values(xi) = [psi1(l, xi)] * exp(int_s^t psi2(r, xi) dr).
inline EvolutionMultiplier build_multiplier(const SymbolSpec& psi2, double s, double t, const GridSpec& grid,
                                            const TimeIntegralRule& rule,
                                            const std::optional<PreSymbol>& pre = std::nullopt)
{
    if (t < s) throw ArgumentError("evolution: T(t, s) is only defined for t >= s");
    EvolutionMultiplier m;
    m.grid = grid;
    m.s = s;
    m.t = t;
    m.pre = pre;
    m.values = time_integral(psi2, s, t, grid, rule);
    parallel_for(m.values.size(), [&](std::size_t i) {
        Complex v = std::exp(m.values[i]);
        if (pre) v *= eval_symbol(pre->symbol, pre->l, grid.frequency(i));
        m.values[i] = v;
    });
    return m;
}

inline EvolutionMultiplier build_multiplier(const SymbolSpec& psi2, double s, double t, const GridSpec& grid,
                                            const std::optional<PreSymbol>& pre = std::nullopt)
{
    return build_multiplier(psi2, s, t, grid, default_rule(psi2), pre);
}

namespace detail {
// Drops the imaginary part of a transform of real data when it is round-off.
inline void realify_if_residual(Field& out, double relative_limit = 1e-10)
{
    double re = 0.0, im = 0.0;
    for (const auto& v : out.values) {
        re = std::max(re, std::abs(v.real()));
        im = std::max(im, std::abs(v.imag()));
    }
    if (im <= relative_limit * std::max(re, 1e-300) || im == 0.0)
        for (auto& v : out.values) v = Complex(v.real(), 0.0);
}

inline bool is_real(const Field& f)
{
    return std::all_of(f.values.begin(), f.values.end(), [](const Complex& v) { return v.imag() == 0.0; });
}
} // namespace detail

/// inverse(multiplier * forward(f)); real output for real input when the
/// multiplier is conjugate symmetric.
inline Field apply_evolution(const Field& f, const EvolutionMultiplier& mult)
{
    require_same_grid(f.grid, mult.grid, "apply_evolution");
    Field out = inverse_transform(apply_multiplier_values(forward_transform(f), mult.values));
    if (detail::is_real(f)) detail::realify_if_residual(out);
    return out;
}

/// Convolution kernel K(x) with T f = K * f, i.e. (2 pi)^{-d/2} F^{-1}(values).
/// Normalized so that int K dx equals the multiplier at xi = 0.
inline Field kernel_from_multiplier(const GridSpec& grid, std::span<const Complex> values)
{
    SpectralField spec(grid);
    std::copy(values.begin(), values.end(), spec.coeffs.begin());
    Field k = inverse_transform(spec);
    const double norm = std::pow(2.0 * std::numbers::pi, -0.5 * grid.dim);
    for (auto& v : k.values) v *= norm;
    detail::realify_if_residual(k);
    return k;
}

/// Kernel of L_psi1(l) T_psi2(t, s) (or of T_psi2(t, s) alone) sampled on the grid.
inline Field kernel_field(const std::optional<PreSymbol>& pre, const SymbolSpec& psi2, double s, double t,
                          const GridSpec& grid, const TimeIntegralRule& rule)
{
    if (!(t > s)) throw ArgumentError("kernel_field: need t > s");
    const auto m = build_multiplier(psi2, s, t, grid, rule, pre);
    return kernel_from_multiplier(grid, m.values);
}

inline Field kernel_field(const std::optional<PreSymbol>& pre, const SymbolSpec& psi2, double s, double t,
                          const GridSpec& grid)
{
    return kernel_field(pre, psi2, s, t, grid, default_rule(psi2));
}

/// max_xi |M(t,s) - M(t,r) M(r,s)| / (|M(t,s)| + floor).
inline double verify_composition(const SymbolSpec& psi2, double s, double r, double t, const GridSpec& grid,
                                 const TimeIntegralRule& rule, double floor = 1e-280)
{
    if (!(s <= r && r <= t)) throw ArgumentError("verify_composition: need s <= r <= t");
    const auto whole = build_multiplier(psi2, s, t, grid, rule);
    const auto late = build_multiplier(psi2, r, t, grid, rule);
    const auto early = build_multiplier(psi2, s, r, grid, rule);
    double worst = 0.0;
    for (std::size_t i = 0; i < whole.values.size(); ++i) {
        const double err = std::abs(whole.values[i] - late.values[i] * early.values[i]) /
                           (std::abs(whole.values[i]) + floor);
        worst = std::max(worst, err);
    }
    return worst;
}

inline double verify_composition(const SymbolSpec& psi2, double s, double r, double t, const GridSpec& grid)
{
    return verify_composition(psi2, s, r, t, grid, default_rule(psi2));
}

/// Returns g(x) = f(factor * x) on the same grid by separable trigonometric
/// interpolation (exact for band-limited periodic f). Cost O(n^{d+1}).
inline Field resample_scaled(const Field& f, double factor)
{
    const GridSpec& g = f.grid;
    g.validate();
    const int n = g.n;
    // table[i * n + m]: weight of storage frequency m when evaluating at factor * x_i.
    std::vector<Complex> table(static_cast<std::size_t>(n) * n);
    const double norm = 1.0 / n;
    for (int i = 0; i < n; ++i) {
        const double z = factor * (-g.half_extent + i * g.spacing()) + g.half_extent;
        for (int m = 0; m < n; ++m) {
            const double xi = g.freq_step() * g.wavenumber(m);
            table[static_cast<std::size_t>(i) * n + m] =
                (m == n / 2) ? Complex(std::cos(xi * z) * norm, 0.0) : std::polar(norm, xi * z);
        }
    }
    Field current = f;
    std::size_t stride = 1;
    for (int axis = g.dim - 1; axis >= 0; --axis) {
        Field next(g);
        const std::size_t total = g.size();
        const std::size_t block = stride * n;
        const std::size_t lines = total / n;
        parallel_for(lines, [&](std::size_t line) {
            const std::size_t outer = line / stride;
            const std::size_t inner = line % stride;
            const std::size_t base = outer * block + inner;
            std::vector<Complex> buf(n);
            for (int j = 0; j < n; ++j) buf[j] = current.values[base + j * stride];
            // Forward DFT relative to the box corner (origin at -L).
            GridSpec line_grid{1, n, g.half_extent};
            detail::fft_in_place(line_grid, buf, FFTW_FORWARD);
            for (int i = 0; i < n; ++i) {
                Complex acc{};
                const Complex* row = &table[static_cast<std::size_t>(i) * n];
                for (int m = 0; m < n; ++m) acc += row[m] * buf[m];
                next.values[base + i * stride] = acc;
            }
        });
        current = std::move(next);
        stride *= n;
    }
    if (detail::is_real(f)) detail::realify_if_residual(current);
    return current;
}

/// Field-level check of the dilation identity for a time-constant
/// homogeneous pair:
///   L_psi1 T_psi2(b t + s, s) f (x)
///     = b^{-gamma1/gamma2} (L_psi1 T_psi2(t, 0) f_b)(b^{-1/gamma2} x),
/// with f_b(x) = f(b^{1/gamma2} x). Returns the relative L2 discrepancy.
inline double scaling_identity_error(const SymbolSpec& psi1, const SymbolSpec& psi2, const Field& f, double t,
                                     double b, double s = 0.0)
{
    if (!(psi1.time_constant && psi2.time_constant && psi1.homogeneous && psi2.homogeneous))
        throw ArgumentError("scaling identity needs a time-constant homogeneous pair");
    if (!(b > 0.0) || !(t > 0.0)) throw ArgumentError("scaling identity: need b > 0 and t > 0");
    const PreSymbol pre{psi1, 0.0};
    const auto lhs_mult = build_multiplier(psi2, s, b * t + s, f.grid, TimeIntegralRule::exact(), pre);
    const Field lhs = apply_evolution(f, lhs_mult);

    const Field f_b = resample_scaled(f, std::pow(b, 1.0 / psi2.gamma));
    const auto rhs_mult = build_multiplier(psi2, 0.0, t, f.grid, TimeIntegralRule::exact(), pre);
    Field rhs = resample_scaled(apply_evolution(f_b, rhs_mult), std::pow(b, -1.0 / psi2.gamma));
    const double factor = std::pow(b, -psi1.gamma / psi2.gamma);
    for (auto& v : rhs.values) v *= factor;

    const double denom = lp_norm(lhs, 2.0);
    return lp_norm(combine(1.0, lhs, -1.0, rhs), 2.0) / std::max(denom, 1e-300);
}

} // namespace speclp

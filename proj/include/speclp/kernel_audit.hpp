#pragma once

// Numerical audits of the kernel K = kernel of L_psi1(l) T_psi2(t, s):
// gradient decay in space and time, the Hormander integral, the dyadic L1
// envelope, and a principal-value cross-check of the fractional Laplacian.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "speclp/error.hpp"
#include "speclp/evolution.hpp"
#include "speclp/gfunction.hpp"
#include "speclp/lp_decomp.hpp"
#include "speclp/parallel.hpp"
#include "speclp/quadrature.hpp"
#include "speclp/spectral.hpp"
#include "speclp/symbols.hpp"

namespace speclp {

struct GradientKernel {
    std::vector<Field> components; // one per axis
    Field magnitude;               // |grad K|
};

namespace detail {

inline double kernel_norm(const GridSpec& grid) { return std::pow(2.0 * std::numbers::pi, -0.5 * grid.dim); }

// grad of (2 pi)^{-d/2} F^{-1}(values). The Nyquist plane of axis i carries
// no odd mode and is dropped from component i.
inline GradientKernel gradient_from_multiplier(const GridSpec& grid, std::span<const Complex> values)
{
    GradientKernel g;
    g.magnitude = Field(grid);
    const double norm = kernel_norm(grid);
    for (int axis = 0; axis < grid.dim; ++axis) {
        SpectralField spec(grid);
        for (std::size_t i = 0; i < spec.coeffs.size(); ++i) {
            if (grid.unflatten(i)[axis] == grid.n / 2) continue;
            spec.coeffs[i] = Complex(0.0, grid.frequency(i)[axis]) * values[i] * norm;
        }
        Field c = inverse_transform(spec);
        realify_if_residual(c);
        for (std::size_t i = 0; i < c.values.size(); ++i)
            g.magnitude.values[i] += std::norm(c.values[i]);
        g.components.push_back(std::move(c));
    }
    for (auto& v : g.magnitude.values) v = Complex(std::sqrt(v.real()), 0.0);
    return g;
}

// Least-squares slope of y against x.
inline double regression_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const std::size_t m = x.size();
    if (m < 2) throw AuditError("regression needs at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= m;
    my /= m;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw AuditError("regression abscissae are all equal");
    return sxy / sxx;
}

inline double octaves(double lo, double hi) { return std::log2(hi / lo); }

} // namespace detail

/// grad_x of the kernel of L_psi1(l) T_psi2(t, s), i.e. components
/// (2 pi)^{-d/2} F^{-1}(i xi_k psi1(l, xi) exp(int_s^t psi2)).
inline GradientKernel gradient_kernel(const SymbolSpec& psi1, double l, const SymbolSpec& psi2, double s, double t,
                                      const GridSpec& grid, const TimeIntegralRule& rule)
{
    if (!(t > s)) throw ArgumentError("gradient_kernel: need t > s");
    const auto m = build_multiplier(psi2, s, t, grid, rule, PreSymbol{psi1, l});
    return detail::gradient_from_multiplier(grid, m.values);
}

inline GradientKernel gradient_kernel(const SymbolSpec& psi1, double l, const SymbolSpec& psi2, double s, double t,
                                      const GridSpec& grid)
{
    return gradient_kernel(psi1, l, psi2, s, t, grid, default_rule(psi2));
}

struct DecaySample {
    double abscissa = 0.0; // |x| or t - s
    double measured = 0.0;
    double bound = 0.0; // fitted_constant * abscissa^{target_exponent}
};

struct DecayFitReport {
    double fitted_exponent = 0.0;
    double target_exponent = 0.0;
    std::pair<double, double> fit_window{0.0, 0.0};
    double fitted_constant = 0.0;
    double max_pointwise_excess = 0.0;
    std::vector<DecaySample> samples;
};

struct SpaceFitOptions {
    double r_lo = 1.0;
    double r_hi = 0.0;            // 0: half the box half-extent
    double noise_floor = 1e-12;   // relative to max |grad K|; smaller values are not fitted
    double min_octaves = 3.0;
};

/// Fits log|grad K| against log|x| over r_lo <= |x| <= r_hi. The constant is
/// max over the window of |grad K| |x|^{d+1+gamma1}.
inline DecayFitReport decay_fit_space(const SymbolSpec& psi1, double l, const SymbolSpec& psi2, double s, double t,
                                      const GridSpec& grid, const SpaceFitOptions& opt = {})
{
    const double r_hi = opt.r_hi > 0.0 ? opt.r_hi : 0.5 * grid.half_extent;
    if (!(opt.r_lo > 0.0) || !(r_hi > opt.r_lo)) throw ArgumentError("decay_fit_space: bad window");
    if (detail::octaves(opt.r_lo, r_hi) < opt.min_octaves)
        throw AuditError("decay_fit_space: window [" + std::to_string(opt.r_lo) + ", " + std::to_string(r_hi) +
                         "] spans fewer than " + std::to_string(opt.min_octaves) + " octaves; enlarge the grid");
    if (r_hi > grid.half_extent) throw AuditError("decay_fit_space: window exceeds the grid");

    const auto grad = gradient_kernel(psi1, l, psi2, s, t, grid);
    const double peak = sup_norm(grad.magnitude);
    const double target = -(grid.dim + 1.0 + psi1.gamma);

    DecayFitReport rep;
    rep.target_exponent = target;
    rep.fit_window = {opt.r_lo, r_hi};
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = norm(grid.coordinate(i), grid.dim);
        if (r < opt.r_lo || r > r_hi) continue;
        const double v = grad.magnitude.values[i].real();
        rep.samples.push_back({r, v, 0.0});
        rep.fitted_constant = std::max(rep.fitted_constant, v * std::pow(r, -target));
        if (v > opt.noise_floor * peak) {
            lx.push_back(std::log(r));
            ly.push_back(std::log(v));
        }
    }
    if (rep.samples.empty()) throw AuditError("decay_fit_space: no grid points in the window");
    // Fewer than two resolvable points: decay is faster than the noise floor allows to fit.
    rep.fitted_exponent = lx.size() >= 2 ? detail::regression_slope(lx, ly) : -std::numeric_limits<double>::infinity();
    rep.max_pointwise_excess = -std::numeric_limits<double>::infinity();
    for (auto& sm : rep.samples) {
        sm.bound = rep.fitted_constant * std::pow(sm.abscissa, target);
        if (sm.bound > 0.0) rep.max_pointwise_excess = std::max(rep.max_pointwise_excess, sm.measured / sm.bound - 1.0);
    }
    std::sort(rep.samples.begin(), rep.samples.end(),
              [](const DecaySample& a, const DecaySample& b) { return a.abscissa < b.abscissa; });
    return rep;
}

/// Regresses log sup_x |grad K(t, .)| against log(t - s); target exponent
/// -(d + 1 + gamma1) / gamma2.
inline DecayFitReport decay_fit_time(const SymbolSpec& psi1, double l, const SymbolSpec& psi2, double s,
                                     const GridSpec& grid, std::vector<double> t_list, double min_octaves = 3.0)
{
    if (t_list.size() < 2) throw ArgumentError("decay_fit_time: need at least two times");
    std::sort(t_list.begin(), t_list.end());
    if (!(t_list.front() > s)) throw ArgumentError("decay_fit_time: every t must exceed s");
    const double lo = t_list.front() - s, hi = t_list.back() - s;
    if (detail::octaves(lo, hi) < min_octaves - 1e-12)
        throw AuditError("decay_fit_time: t - s spans fewer than " + std::to_string(min_octaves) + " octaves");

    DecayFitReport rep;
    rep.target_exponent = -(grid.dim + 1.0 + psi1.gamma) / psi2.gamma;
    rep.fit_window = {lo, hi};
    std::vector<double> sups(t_list.size());
    parallel_for(t_list.size(), [&](std::size_t k) {
        sups[k] = sup_norm(gradient_kernel(psi1, l, psi2, s, t_list[k], grid).magnitude);
    });
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < t_list.size(); ++k) {
        const double tau = t_list[k] - s;
        lx.push_back(std::log(tau));
        ly.push_back(std::log(sups[k]));
        rep.fitted_constant = std::max(rep.fitted_constant, sups[k] * std::pow(tau, -rep.target_exponent));
        rep.samples.push_back({tau, sups[k], 0.0});
    }
    rep.fitted_exponent = detail::regression_slope(lx, ly);
    rep.max_pointwise_excess = -std::numeric_limits<double>::infinity();
    for (auto& sm : rep.samples) {
        sm.bound = rep.fitted_constant * std::pow(sm.abscissa, rep.target_exponent);
        rep.max_pointwise_excess = std::max(rep.max_pointwise_excess, sm.measured / sm.bound - 1.0);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Hormander integral
// ---------------------------------------------------------------------------

/// Smallest t - s at which e^{-kappa2 t |xi|^gamma2} is below 1e-16 at Nyquist.
inline double hormander_resolution_time(const SymbolSpec& psi2, const GridSpec& grid)
{
    return std::log(1e16) / (psi2.kappa * std::pow(grid.nyquist(), psi2.gamma));
}

/// H(y) = sum over |x| >= 2|y| of || K(., x - y) - K(., x) ||_V h^d for every y,
/// where ||F||_V = (sum_i w_i |F(t_i)|^q)^{1/q} with the window's weights.
/// Shifts that are whole grid steps are exact index rolls; others are done
/// with the spectral phase multiplier.
inline std::vector<double> hormander_integrals(const SymbolSpec& psi1, double l, const SymbolSpec& psi2,
                                               const TimeWindow& window, double q, const std::vector<Point>& ys,
                                               const GridSpec& grid)
{
    if (!(q >= 1.0)) throw ArgumentError("hormander: q must be >= 1");
    if (ys.empty()) throw ArgumentError("hormander: no shifts given");
    detail::check_window_matches(window, psi1, psi2, q);
    grid.validate();
    const double h = grid.spacing();

    struct Shift {
        bool integral = true;
        std::array<int, 3> steps{0, 0, 0};
        double radius = 0.0;
    };
    std::vector<Shift> shifts;
    for (const auto& y : ys) {
        Shift sh;
        sh.radius = norm(y, grid.dim);
        if (!(sh.radius > 0.0)) throw ArgumentError("hormander: |y| must be positive");
        if (h > sh.radius / 8.0)
            throw AuditError("hormander: grid spacing " + std::to_string(h) + " cannot resolve |y| = " +
                             std::to_string(sh.radius) + " (need spacing <= |y|/8)");
        if (sh.radius > 0.5 * grid.half_extent)
            throw AuditError("hormander: |y| = " + std::to_string(sh.radius) + " too large for the box");
        for (int a = 0; a < grid.dim; ++a) {
            const double k = y[a] / h;
            sh.steps[a] = static_cast<int>(std::lround(k));
            if (std::abs(k - sh.steps[a]) > 1e-9) sh.integral = false;
        }
        shifts.push_back(sh);
    }

    std::vector<Complex> pre(grid.size());
    for (std::size_t i = 0; i < pre.size(); ++i) pre[i] = eval_symbol(psi1, l, grid.frequency(i));
    const detail::NodeExponents exponents(psi2, window, grid);
    const double knorm = detail::kernel_norm(grid);

    auto roll_index = [&](std::size_t flat, const std::array<int, 3>& steps) {
        auto idx = grid.unflatten(flat);
        std::size_t out = 0;
        for (int a = 0; a < grid.dim; ++a) {
            int v = (idx[a] - steps[a]) % grid.n;
            if (v < 0) v += grid.n;
            out = out * grid.n + v;
        }
        return out;
    };

    // Below t_res the multiplier is still O(1) at Nyquist: the grid kernel is a
    // truncated-spectrum artifact with algebraic Gibbs tails, not the heat-like
    // bump it approximates. Those nodes are skipped.
    const double t_res = hormander_resolution_time(psi2, grid);

    std::vector<std::vector<double>> acc(shifts.size(), std::vector<double>(grid.size(), 0.0));
    for (std::size_t node = 0; node < window.nodes.size(); ++node) {
        if (window.nodes[node] - window.s < t_res) continue;
        SpectralField spec(grid);
        for (std::size_t i = 0; i < spec.coeffs.size(); ++i)
            spec.coeffs[i] = pre[i] * std::exp(exponents.at(node, i)) * knorm;
        const Field k = inverse_transform(spec);
        const double w = window.weights[node];
        parallel_for(shifts.size(), [&](std::size_t si) {
            const Shift& sh = shifts[si];
            auto& a = acc[si];
            if (sh.integral) {
                for (std::size_t i = 0; i < a.size(); ++i) {
                    const double d = std::abs(k.values[roll_index(i, sh.steps)] - k.values[i]);
                    a[i] += w * (q == 2.0 ? d * d : std::pow(d, q));
                }
            } else {
                const Point& y = ys[si];
                auto moved = spec;
                for (std::size_t i = 0; i < moved.coeffs.size(); ++i) {
                    const Point xi = grid.frequency(i);
                    double phase = 0.0;
                    for (int ax = 0; ax < grid.dim; ++ax) phase -= xi[ax] * y[ax];
                    moved.coeffs[i] *= std::polar(1.0, phase);
                }
                const Field ky = inverse_transform(moved);
                for (std::size_t i = 0; i < a.size(); ++i) {
                    const double d = std::abs(ky.values[i] - k.values[i]);
                    a[i] += w * (q == 2.0 ? d * d : std::pow(d, q));
                }
            }
        });
    }

    std::vector<double> out(shifts.size());
    for (std::size_t si = 0; si < shifts.size(); ++si) {
        double total = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (norm(grid.coordinate(i), grid.dim) >= 2.0 * shifts[si].radius)
                total += std::pow(acc[si][i], 1.0 / q);
        out[si] = total * grid.cell_volume();
        if (!std::isfinite(out[si])) throw AuditError("hormander: integral is not finite");
    }
    return out;
}

inline double hormander_integral(const SymbolSpec& psi1, double l, const SymbolSpec& psi2, const TimeWindow& window,
                                 double q, const Point& y, const GridSpec& grid)
{
    return hormander_integrals(psi1, l, psi2, window, q, {y}, grid).front();
}

struct HormanderReport {
    std::vector<double> y_values;
    std::vector<double> integrals;
    double sup = 0.0;
    double trend_slope = 0.0;
};

/// H(|y| e_1) for every radius; requires the radii to span >= 6 octaves.
inline HormanderReport hormander_report(const SymbolSpec& psi1, double l, const SymbolSpec& psi2,
                                        const TimeWindow& window, double q, std::vector<double> radii,
                                        const GridSpec& grid, double min_octaves = 6.0)
{
    if (radii.size() < 2) throw ArgumentError("hormander_report: need at least two radii");
    std::sort(radii.begin(), radii.end());
    if (!(radii.front() > 0.0)) throw ArgumentError("hormander_report: radii must be positive");
    if (detail::octaves(radii.front(), radii.back()) < min_octaves - 1e-12)
        throw AuditError("hormander_report: radii span fewer than " + std::to_string(min_octaves) + " octaves");
    std::vector<Point> ys;
    for (double r : radii) ys.push_back({r, 0.0, 0.0});
    HormanderReport rep;
    rep.y_values = radii;
    rep.integrals = hormander_integrals(psi1, l, psi2, window, q, ys, grid);
    rep.sup = *std::max_element(rep.integrals.begin(), rep.integrals.end());
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(rep.integrals[i] > 0.0)) throw AuditError("hormander_report: H(y) vanished; cannot fit a trend");
        lx.push_back(std::log(radii[i]));
        ly.push_back(std::log(rep.integrals[i]));
    }
    rep.trend_slope = detail::regression_slope(lx, ly);
    return rep;
}

// ---------------------------------------------------------------------------
// Dyadic L1 envelope
// ---------------------------------------------------------------------------

struct EnvelopeRow {
    int j = 0;
    double l1_norm = 0.0;
    double envelope_value = 0.0;
    double slack = 0.0; // 1 - l1_norm / envelope_value
};

struct EnvelopeReport {
    std::vector<EnvelopeRow> rows;
    double C = 0.0;
    double c = 0.0;
    bool fit_ok = false;
};

/// ||(2 pi)^{-d/2} F^{-1}(psi1(l) Phi(2^{-j} xi) exp int_s^t psi2)||_1 per j,
/// and the envelope C 2^{j gamma1} exp(-c (t - s) 2^{j gamma2}).
///
/// The fit fixes log C at `log_margin` above the smallest value admissible
/// with c = 0, then takes the largest c that keeps every row under the
/// envelope.
inline EnvelopeReport dyadic_l1_envelope(const SymbolSpec& psi1, double l, const SymbolSpec& psi2, double s, double t,
                                         int j_lo, int j_hi, const DyadicDecomposition& dec,
                                         double log_margin = std::numbers::ln2)
{
    const GridSpec& grid = dec.grid;
    if (!(t > s)) throw ArgumentError("dyadic_l1_envelope: need t > s");
    if (j_lo > j_hi || j_lo < dec.j_min || j_hi > dec.j_max)
        throw ArgumentError("dyadic_l1_envelope: j range [" + std::to_string(j_lo) + ", " + std::to_string(j_hi) +
                            "] outside active range [" + std::to_string(dec.j_min) + ", " +
                            std::to_string(dec.j_max) + "]");
    const auto base = build_multiplier(psi2, s, t, grid, default_rule(psi2), PreSymbol{psi1, l});
    const std::size_t count = static_cast<std::size_t>(j_hi - j_lo + 1);
    EnvelopeReport rep;
    rep.rows.resize(count);
    parallel_for(count, [&](std::size_t k) {
        const int j = j_lo + static_cast<int>(k);
        std::vector<Complex> values(base.values.size());
        for (std::size_t i = 0; i < values.size(); ++i) values[i] = base.values[i] * dec.block_weight(j, grid.frequency(i));
        rep.rows[k].j = j;
        rep.rows[k].l1_norm = lp_norm(kernel_from_multiplier(grid, values), 1.0);
    });

    const double tau = t - s;
    double log_c0 = -std::numeric_limits<double>::infinity();
    for (const auto& r : rep.rows)
        if (r.l1_norm > 0.0)
            log_c0 = std::max(log_c0, std::log(r.l1_norm) - r.j * psi1.gamma * std::numbers::ln2);
    if (!std::isfinite(log_c0)) return rep;
    const double log_c = log_c0 + log_margin;
    double c = std::numeric_limits<double>::infinity();
    for (const auto& r : rep.rows) {
        if (!(r.l1_norm > 0.0)) continue;
        const double room = log_c + r.j * psi1.gamma * std::numbers::ln2 - std::log(r.l1_norm);
        c = std::min(c, room / (tau * std::pow(2.0, r.j * psi2.gamma)));
    }
    rep.C = std::exp(log_c);
    rep.c = c;
    rep.fit_ok = std::isfinite(c) && c > 0.0;
    for (auto& r : rep.rows) {
        r.envelope_value = rep.C * std::pow(2.0, r.j * psi1.gamma) * std::exp(-c * tau * std::pow(2.0, r.j * psi2.gamma));
        r.slack = 1.0 - r.l1_norm / r.envelope_value;
    }
    return rep;
}

/// log2 regression slope of l1_norm against j over rows with j in [j_lo, j_hi].
inline double envelope_log2_slope(const EnvelopeReport& rep, int j_lo, int j_hi)
{
    std::vector<double> x, y;
    for (const auto& r : rep.rows)
        if (r.j >= j_lo && r.j <= j_hi && r.l1_norm > 0.0) {
            x.push_back(r.j);
            y.push_back(std::log2(r.l1_norm));
        }
    return detail::regression_slope(x, y);
}

// ---------------------------------------------------------------------------
// Fractional Laplacian by principal value (d = 1)
// ---------------------------------------------------------------------------

/// 2^eta Gamma((d + eta)/2) / (pi^{d/2} |Gamma(-eta/2)|).
inline double fractional_laplacian_constant(double eta, int dim = 1)
{
    return std::pow(2.0, eta) * std::tgamma(0.5 * (dim + eta)) /
           (std::pow(std::numbers::pi, 0.5 * dim) * std::abs(std::tgamma(-0.5 * eta)));
}

struct PvOptions {
    int panels = 24;          // dyadic panels on (0, 1]
    int nodes = 16;           // Gauss-Legendre nodes per panel
    int image_terms = 200;    // explicit periodic images in the far-field weight
    double max_panel = 0.0;   // longest panel; 0: two Nyquist wavelengths
};

/// -(-Laplacian)^{eta/2} f(x) = C(eta) PV int (f(x+y) - f(x)) / |y|^{1+eta} dy
/// evaluated by quadrature on the periodic extension of f:
///   (0, 1]:   symmetric difference f(x+y) + f(x-y) - 2 f(x) (spectral shifts),
///             dyadic Gauss-Legendre panels plus a Taylor term below the last panel;
///   [1, inf): one period of y - 1 against the periodized weight, minus 2 f / eta.
inline Field fractional_laplacian_pv(const Field& f, double eta, const PvOptions& opt = {})
{
    if (!(eta > 0.0 && eta < 2.0)) throw ArgumentError("fractional_laplacian_pv: eta must lie in (0, 2)");
    if (f.grid.dim != 1) throw ArgumentError("fractional_laplacian_pv: only d = 1 is supported");
    if (opt.panels < 1 || opt.nodes < 1 || opt.image_terms < 1) throw ArgumentError("fractional_laplacian_pv: bad options");
    const GridSpec& grid = f.grid;
    const double period = 2.0 * grid.half_extent;
    const SpectralField spec = forward_transform(f);
    const auto base = gauss_legendre(opt.nodes);

    // Each quadrature node is a pair of exact shifts of f; their symbols are
    // summed and applied with one transform.
    std::vector<double> mult(grid.size(), 0.0);
    auto add_node = [&](double weight, auto&& symbol) {
        for (std::size_t i = 0; i < mult.size(); ++i) mult[i] += weight * symbol(grid.frequency(i)[0]);
    };

    const double max_panel = opt.max_panel > 0.0 ? opt.max_panel : 4.0 * std::numbers::pi / grid.nyquist();
    // Gauss-Legendre over [lo, up], split so no piece is longer than max_panel.
    auto integrate = [&](double lo, double up, auto&& weight, auto&& symbol_at) {
        const int pieces = std::max(1, static_cast<int>(std::ceil((up - lo) / max_panel)));
        const double len = (up - lo) / pieces;
        for (int piece = 0; piece < pieces; ++piece) {
            const double a = lo + piece * len;
            for (std::size_t k = 0; k < base.nodes.size(); ++k) {
                const double y = a + 0.5 * len * (base.nodes[k] + 1.0);
                add_node(0.5 * len * base.weights[k] * weight(y), symbol_at(y));
            }
        }
    };

    // (0, 1]: f(x+y) + f(x-y) - 2 f(x) has symbol -4 sin^2(xi y / 2).
    auto near_symbol = [](double y) {
        return [y](double xi) {
            const double sn = std::sin(0.5 * xi * y);
            return -4.0 * sn * sn;
        };
    };
    double hi = 1.0;
    for (int p = 0; p < opt.panels; ++p, hi *= 0.5)
        integrate(0.5 * hi, hi, [eta](double y) { return std::pow(y, -1.0 - eta); }, near_symbol);
    // (0, eps]: symmetric difference ~ f''(x) y^2.
    const double eps = hi;
    add_node(std::pow(eps, 2.0 - eta) / (2.0 - eta), [](double xi) { return -xi * xi; });

    // [1, inf): int_0^P f(x + 1 + v) W(v) dv with W(v) = sum_m (1 + v + m P)^{-1-eta}
    // (and the mirror term); then -2 f(x) int_1^inf y^{-1-eta} = -2 f(x) / eta.
    auto weight_fn = [&](double v) {
        const double a = 1.0 + v;
        double sum = 0.0;
        for (int m = 0; m < opt.image_terms; ++m) sum += std::pow(a + m * period, -1.0 - eta);
        const double tail_at = a + opt.image_terms * period;
        // Euler-Maclaurin tail of sum_{m >= M}.
        sum += std::pow(tail_at, -eta) / (eta * period) + 0.5 * std::pow(tail_at, -1.0 - eta) +
               (1.0 + eta) * period * std::pow(tail_at, -2.0 - eta) / 12.0;
        return sum;
    };
    std::vector<double> edges{0.0, 1.0};
    while (edges.back() < period) edges.push_back(std::min(period, 2.0 * edges.back()));
    for (std::size_t p = 0; p + 1 < edges.size(); ++p)
        integrate(edges[p], edges[p + 1], weight_fn,
                  [](double v) { return [y = 1.0 + v](double xi) { return 2.0 * std::cos(xi * y); }; });
    add_node(-2.0 / eta, [](double) { return 1.0; });

    const double cst = fractional_laplacian_constant(eta, 1);
    SpectralField out(grid);
    for (std::size_t i = 0; i < mult.size(); ++i) out.coeffs[i] = cst * mult[i] * spec.coeffs[i];
    Field r = inverse_transform(out);
    if (detail::is_real(f)) detail::realify_if_residual(r);
    return r;
}

/// -(-Laplacian)^{eta/2} f through the multiplier -|xi|^eta.
inline Field fractional_laplacian_multiplier(const Field& f, double eta)
{
    if (!(eta > 0.0)) throw ArgumentError("fractional_laplacian_multiplier: eta must be positive");
    Field r = inverse_transform(
        apply_multiplier(forward_transform(f), [eta](const Point& xi) { return -std::pow(abs_xi(xi), eta); }));
    if (detail::is_real(f)) detail::realify_if_residual(r);
    return r;
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

inline void write_envelope_csv(const EnvelopeReport& rep, const std::string& path)
{
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    os.precision(17);
    os << "j,l1_norm,envelope_value,slack\n";
    for (const auto& r : rep.rows) os << r.j << ',' << r.l1_norm << ',' << r.envelope_value << ',' << r.slack << '\n';
}

inline void write_hormander_csv(const HormanderReport& rep, const std::string& path)
{
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    os.precision(17);
    os << "abs_y,H\n";
    for (std::size_t i = 0; i < rep.y_values.size(); ++i) os << rep.y_values[i] << ',' << rep.integrals[i] << '\n';
}

/// (abscissa, measured, bound); the abscissa is |x| or t - s.
inline void write_decay_csv(const DecayFitReport& rep, const std::string& abscissa_name, const std::string& path)
{
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    os.precision(17);
    os << abscissa_name << ",sup_grad,bound\n";
    for (const auto& s : rep.samples) os << s.abscissa << ',' << s.measured << ',' << s.bound << '\n';
}

} // namespace speclp

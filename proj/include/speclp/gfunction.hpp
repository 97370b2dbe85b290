#pragma once

// Littlewood-Paley g-function
//   G(x) = ( int_s^{s+a} (t-s)^{q gamma1/gamma2 - 1} |L_psi1(l) T_psi2(t,s) f(x)|^q dt )^{1/q}
// and corpus statistics of ||G||_p / ||f||_p.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp" // nlohmann/json (vendor/)

#include "speclp/error.hpp"
#include "speclp/evolution.hpp"
#include "speclp/parallel.hpp"
#include "speclp/quadrature.hpp"
#include "speclp/spectral.hpp"
#include "speclp/symbols.hpp"

namespace speclp {

inline constexpr double kInfiniteWindow = std::numeric_limits<double>::infinity();

/// Frequency range a window has to resolve: decay rate kappa2 and the
/// smallest/largest nonzero |xi| present.
struct WindowSpectrum {
    double kappa2 = 1.0;
    double xi_min = 0.0;
    double xi_max = 0.0;
};

inline WindowSpectrum spectrum_of(const GridSpec& grid, const SymbolSpec& psi2)
{
    return {psi2.kappa, grid.freq_step(), grid.max_frequency()};
}

struct TimeWindow {
    double s = 0.0;
    double a = 1.0; // may be kInfiniteWindow
    double q = 2.0;
    double gamma1 = 1.0;
    double gamma2 = 1.0;
    double weight_exponent = 0.0; // q gamma1 / gamma2 - 1
    std::vector<double> nodes;    // absolute times t_i in (s, s + effective a)
    std::vector<double> weights;  // include the (t - s)^{weight_exponent} factor
    double truncation_t = 0.0;    // effective upper limit of t - s

    bool infinite() const { return std::isinf(a); }
};

/// Quadrature for int_s^{s+a} (t-s)^{beta-1} F(t) dt, beta = q gamma1 / gamma2.
///
/// Substituting u = (t-s)^beta turns the weight into du / beta, so each
/// panel is Gauss-Legendre in u mapped back to t. Without spectral
/// information the window is a single panel of `nodes_per_panel` nodes.
/// With it, panels are dyadic in t, from the shortest relevant time scale
/// 1e-4 / (kappa2 xi_max^gamma2) up to the window end. For a = infinity the
/// window ends at the time where exp(-kappa2 t xi_min^gamma2) = 1e-16; the
/// tail beyond it is discarded.
inline TimeWindow build_time_window(double s, double a, double q, double gamma1, double gamma2, int nodes_per_panel,
                                    const std::optional<WindowSpectrum>& spectrum = std::nullopt)
{
    if (!(q >= 1.0)) throw ArgumentError("time window: q must be >= 1");
    if (!(gamma1 > 0.0) || !(gamma2 > 0.0)) throw ArgumentError("time window: gammas must be positive");
    if (!(s >= 0.0)) throw ArgumentError("time window: s must be >= 0");
    if (!(a > 0.0)) throw ArgumentError("time window: a must be positive");
    if (nodes_per_panel < 1) throw ArgumentError("time window: need at least one node");

    TimeWindow w;
    w.s = s;
    w.a = a;
    w.q = q;
    w.gamma1 = gamma1;
    w.gamma2 = gamma2;
    const double beta = q * gamma1 / gamma2;
    w.weight_exponent = beta - 1.0;

    if (std::isinf(a)) {
        if (!spectrum || !(spectrum->xi_min > 0.0) || !(spectrum->kappa2 > 0.0))
            throw WindowError("infinite time window needs a spectral gap: remove the mean (zero mode) of f first");
        w.truncation_t = std::log(1e16) / (spectrum->kappa2 * std::pow(spectrum->xi_min, gamma2));
    } else {
        w.truncation_t = a;
    }

    std::vector<double> edges{0.0, w.truncation_t};
    if (spectrum && spectrum->xi_max > 0.0 && spectrum->kappa2 > 0.0) {
        const double shortest = 1e-4 / (spectrum->kappa2 * std::pow(spectrum->xi_max, gamma2));
        edges = {w.truncation_t};
        double edge = w.truncation_t;
        while (edge > shortest) {
            edge *= 0.5;
            edges.push_back(edge);
        }
        edges.push_back(0.0);
        std::reverse(edges.begin(), edges.end());
    }

    const auto base = gauss_legendre(nodes_per_panel);
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double u_lo = std::pow(edges[p], beta);
        const double u_hi = std::pow(edges[p + 1], beta);
        const double half = 0.5 * (u_hi - u_lo);
        const double mid = 0.5 * (u_hi + u_lo);
        for (std::size_t k = 0; k < base.nodes.size(); ++k) {
            const double u = mid + half * base.nodes[k];
            w.nodes.push_back(s + std::pow(u, 1.0 / beta));
            w.weights.push_back(half * base.weights[k] / beta);
        }
    }
    return w;
}

inline TimeWindow build_time_window(double s, double a, double q, const SymbolSpec& psi1, const SymbolSpec& psi2,
                                    const GridSpec& grid, int nodes_per_panel = 16)
{
    return build_time_window(s, a, q, psi1.gamma, psi2.gamma, nodes_per_panel, spectrum_of(grid, psi2));
}

/// An infinite window is admissible only for q = 2 or for a time-constant
/// homogeneous pair; anything else is refused.
inline void check_window_legality(const SymbolSpec& psi1, const SymbolSpec& psi2, double q, double a)
{
    if (!std::isinf(a)) return;
    if (q == 2.0) return;
    const bool pair_ok = psi1.time_constant && psi2.time_constant && psi1.homogeneous && psi2.homogeneous;
    if (!pair_ok)
        throw ConfigError("a = inf with q = " + std::to_string(q) +
                          " requires both symbols time-constant and homogeneous (infinite-window hypothesis); '" +
                          psi1.name + "'/'" + psi2.name + "' are not");
}

namespace detail {

// Multiplier exponents int_s^{t_i} psi2 at every window node, accumulated
// node to node for time-dependent symbols.
class NodeExponents {
public:
    NodeExponents(const SymbolSpec& psi2, const TimeWindow& window, const GridSpec& grid)
        : psi2_(psi2), window_(window), grid_(grid)
    {
        if (psi2.time_constant) {
            base_.resize(grid.size());
            for (std::size_t i = 0; i < base_.size(); ++i) base_[i] = eval_symbol(psi2, window.s, grid.frequency(i));
        } else {
            cumulative_.reserve(window.nodes.size());
            std::vector<Complex> acc(grid.size());
            double prev = window.s;
            for (double t : window.nodes) {
                const auto step = time_integral(psi2, prev, t, grid, TimeIntegralRule::gauss_legendre());
                for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += step[i];
                cumulative_.push_back(acc);
                prev = t;
            }
        }
    }

    Complex at(std::size_t node, std::size_t i) const
    {
        if (psi2_.time_constant) return (window_.nodes[node] - window_.s) * base_[i];
        return cumulative_[node][i];
    }

private:
    const SymbolSpec& psi2_;
    const TimeWindow& window_;
    const GridSpec& grid_;
    std::vector<Complex> base_;
    std::vector<std::vector<Complex>> cumulative_;
};

inline void check_window_matches(const TimeWindow& window, const SymbolSpec& psi1, const SymbolSpec& psi2, double q)
{
    const double expected = q * psi1.gamma / psi2.gamma - 1.0;
    if (std::abs(expected - window.weight_exponent) > 1e-12 * std::max(1.0, std::abs(expected)))
        throw ArgumentError("g_function: window weight exponent does not match q gamma1 / gamma2 - 1");
}

} // namespace detail

/// G(f) on the grid (real, nonnegative). With an infinite window the zero
/// mode of f is projected out first.
inline Field g_function(const Field& f, const SymbolSpec& psi1, double l, const SymbolSpec& psi2,
                        const TimeWindow& window, double q)
{
    if (!(q >= 1.0)) throw ArgumentError("g_function: q must be >= 1");
    check_window_legality(psi1, psi2, q, window.a);
    detail::check_window_matches(window, psi1, psi2, q);
    const GridSpec& grid = f.grid;

    SpectralField spec = forward_transform(f);
    if (window.infinite()) remove_mean(spec);

    std::vector<Complex> pre(grid.size());
    for (std::size_t i = 0; i < pre.size(); ++i) pre[i] = eval_symbol(psi1, l, grid.frequency(i)) * spec.coeffs[i];

    const detail::NodeExponents exponents(psi2, window, grid);

    // Fixed batch size: the reduction order depends only on the node index.
    constexpr std::size_t kBatch = 8;
    std::vector<double> acc(grid.size(), 0.0);
    std::vector<std::vector<double>> partial(kBatch, std::vector<double>(grid.size()));
    const std::size_t count = window.nodes.size();
    for (std::size_t start = 0; start < count; start += kBatch) {
        const std::size_t batch = std::min(kBatch, count - start);
        parallel_for(batch, [&](std::size_t b) {
            const std::size_t node = start + b;
            SpectralField shot(grid);
            for (std::size_t i = 0; i < shot.coeffs.size(); ++i)
                shot.coeffs[i] = pre[i] * std::exp(exponents.at(node, i));
            const Field u = inverse_transform(shot);
            auto& out = partial[b];
            const double w = window.weights[node];
            for (std::size_t i = 0; i < out.size(); ++i)
                out[i] = w * (q == 2.0 ? std::norm(u.values[i]) : std::pow(std::abs(u.values[i]), q));
        });
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += partial[b][i];
    }
    Field g(grid);
    for (std::size_t i = 0; i < acc.size(); ++i) g.values[i] = Complex(std::pow(acc[i], 1.0 / q), 0.0);
    return g;
}

/// mu1^2 Gamma(2 gamma1/gamma2) (2 kappa2)^{-2 gamma1/gamma2}: the bound on
/// ||G||_2^2 / ||f||_2^2 for q = 2 and an infinite window.
inline double explicit_q2_constant(double mu1, double kappa2, double gamma1, double gamma2)
{
    if (!(mu1 > 0.0 && kappa2 > 0.0 && gamma1 > 0.0 && gamma2 > 0.0))
        throw ArgumentError("explicit_q2_constant: all arguments must be positive");
    const double beta = 2.0 * gamma1 / gamma2;
    return mu1 * mu1 * std::tgamma(beta) * std::pow(2.0 * kappa2, -beta);
}

/// Band-limited refinement: the same field on a grid with 2n points per axis
/// (zero padding in frequency).
inline Field refine(const Field& f)
{
    const GridSpec& g = f.grid;
    GridSpec fine{g.dim, 2 * g.n, g.half_extent};
    const SpectralField coarse = forward_transform(f);
    SpectralField padded(fine);
    for (std::size_t i = 0; i < coarse.coeffs.size(); ++i) {
        const auto idx = g.unflatten(i);
        // Each axis maps to one (or, at Nyquist, two half-weight) fine indices.
        std::vector<std::pair<std::array<int, 3>, double>> targets{{{0, 0, 0}, 1.0}};
        for (int a = 0; a < g.dim; ++a) {
            const int k = g.wavenumber(idx[a]);
            std::vector<std::pair<std::array<int, 3>, double>> next;
            for (auto [t, w] : targets) {
                if (k == -g.n / 2) {
                    auto lo = t, hi = t;
                    lo[a] = fine.n + k;
                    hi[a] = -k;
                    next.push_back({lo, 0.5 * w});
                    next.push_back({hi, 0.5 * w});
                } else {
                    t[a] = k >= 0 ? k : fine.n + k;
                    next.push_back({t, w});
                }
            }
            targets = std::move(next);
        }
        for (const auto& [t, w] : targets) {
            std::size_t flat = 0;
            for (int a = 0; a < g.dim; ++a) flat = flat * fine.n + t[a];
            padded.coeffs[flat] += w * coarse.coeffs[i];
        }
    }
    Field out = inverse_transform(padded);
    if (detail::is_real(f)) detail::realify_if_residual(out);
    return out;
}

struct RatioReport {
    std::string pair;
    double p = 2.0;
    double q = 2.0;
    double s = 0.0;
    double a = 1.0;
    int n = 0;
    std::vector<double> per_field;
    double max = 0.0;
    double median = 0.0;
    double max_refined = 0.0;
    double refinement_drift = 0.0;
};

struct RatioOptions {
    int nodes_per_panel = 16;
    bool refine = true;
};

inline double g_ratio(const Field& f, const SymbolSpec& psi1, double l, const SymbolSpec& psi2, double s, double a,
                      double p, double q, int nodes_per_panel = 16)
{
    const auto window = build_time_window(s, a, q, psi1, psi2, f.grid, nodes_per_panel);
    const Field g = g_function(f, psi1, l, psi2, window, q);
    return lp_norm(g, p) / lp_norm(f, p);
}

/// Per-field ||G||_p / ||f||_p, summary statistics and the relative change of
/// the maximum when every field is refined to 2n points per axis.
inline RatioReport ratio_report(const std::vector<Field>& corpus, double p, double q, const SymbolSpec& psi1, double l,
                                const SymbolSpec& psi2, double s, double a, const RatioOptions& opt = {})
{
    if (corpus.empty()) throw ArgumentError("ratio_report: empty corpus");
    if (!(p > 1.0)) throw ArgumentError("ratio_report: p must be > 1");
    check_window_legality(psi1, psi2, q, a);
    RatioReport rep;
    rep.pair = psi1.name + "/" + psi2.name;
    rep.p = p;
    rep.q = q;
    rep.s = s;
    rep.a = a;
    rep.n = corpus.front().grid.n;
    for (const auto& f : corpus) rep.per_field.push_back(g_ratio(f, psi1, l, psi2, s, a, p, q, opt.nodes_per_panel));
    auto sorted = rep.per_field;
    std::sort(sorted.begin(), sorted.end());
    rep.max = sorted.back();
    const std::size_t m = sorted.size();
    rep.median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    if (opt.refine) {
        double fine_max = 0.0;
        for (const auto& f : corpus)
            fine_max = std::max(fine_max, g_ratio(refine(f), psi1, l, psi2, s, a, p, q, opt.nodes_per_panel));
        rep.max_refined = fine_max;
        rep.refinement_drift = std::abs(fine_max - rep.max) / rep.max;
    }
    return rep;
}

inline nlohmann::json to_json(const RatioReport& r)
{
    nlohmann::json j;
    j["pair"] = r.pair;
    j["p"] = r.p;
    j["q"] = r.q;
    j["s"] = r.s;
    j["a"] = std::isinf(r.a) ? nlohmann::json("inf") : nlohmann::json(r.a);
    j["n"] = r.n;
    j["per_field"] = r.per_field;
    j["max"] = r.max;
    j["median"] = r.median;
    j["max_refined"] = r.max_refined;
    j["refinement_drift"] = r.refinement_drift;
    return j;
}

inline void write_ratio_csv(const RatioReport& r, const std::string& path)
{
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    os.precision(17);
    os << "field_id,ratio\n";
    for (std::size_t i = 0; i < r.per_field.size(); ++i) os << i << ',' << r.per_field[i] << '\n';
}

} // namespace speclp

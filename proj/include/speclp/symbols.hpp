#pragma once

// Symbols psi(t, xi) of Fourier-multiplier pseudo-differential operators,
// their (S1)/(S2) certificates, and numerical audits of those certificates.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "speclp/error.hpp"
#include "speclp/spectral.hpp"

namespace speclp {

using SymbolFn = std::function<Complex(double t, const Point& xi)>;

/// A symbol together with the constants it is certified for:
///   (S1)  Re psi(t, xi) <= -kappa |xi|^gamma
///   (S2)  |d^alpha psi(t, xi)| <= mu |xi|^{gamma - |alpha|},  |alpha| <= n_cert
struct SymbolSpec {
    std::string name;
    SymbolFn eval;
    double kappa = 1.0;
    double mu = 1.0;
    double gamma = 1.0;
    int n_cert = 1;
    bool time_constant = true;
    bool homogeneous = false;
    // False for symbols used only in the pre-composed role whose real part
    // is not negative (e.g. squares of negative symbols).
    bool s1_certified = true;

    /// n_cert >= floor(d/2) + 1.
    bool admissible_in(int dim) const { return n_cert >= dim / 2 + 1; }
};

inline double abs_xi(const Point& xi) { return std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]); }

/// psi(t, xi), checked for finiteness.
inline Complex eval_symbol(const SymbolSpec& spec, double t, const Point& xi)
{
    if (!(t >= 0.0)) throw ArgumentError("eval_symbol: t must be >= 0");
    const Complex v = spec.eval(t, xi);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        std::ostringstream msg;
        msg << "symbol '" << spec.name << "' is not finite at t = " << t << ", xi = (" << xi[0] << ", "
            << xi[1] << ", " << xi[2] << ")";
        throw SymbolEvalError(msg.str());
    }
    return v;
}

// ---------------------------------------------------------------------------
// Built-in families
// ---------------------------------------------------------------------------

/// Upper bound for sup_{|w|=1} |d^alpha |w|^gamma| over all |alpha| <= order.
///
/// Writes |xi|^gamma = g(s) with s = |xi|^2, g(s) = s^{gamma/2}. By Faa di
/// Bruno every term pairs a derivative g^{(k)} with a partition of alpha into
/// singletons (|d_i s| = 2|xi_i| <= 2|xi|) and pairs (|d_i d_j s| <= 2), so
///   |d^alpha |xi|^gamma| <= sum_{pairs} m!/(pairs! 2^pairs (m - 2 pairs)!)
///                           * 2^{m - pairs} |(gamma/2)_{m - pairs}| |xi|^{gamma - m}
/// with (x)_k the falling factorial.
inline double power_derivative_bound(double gamma, int order)
{
    auto falling = [](double x, int k) {
        double p = 1.0;
        for (int i = 0; i < k; ++i) p *= (x - i);
        return std::abs(p);
    };
    double worst = 1.0;
    for (int m = 1; m <= order; ++m) {
        double total = 0.0;
        for (int pairs = 0; 2 * pairs <= m; ++pairs) {
            const double count = std::tgamma(m + 1.0) /
                                 (std::tgamma(pairs + 1.0) * std::pow(2.0, pairs) * std::tgamma(m - 2.0 * pairs + 1.0));
            const int k = m - pairs;
            total += count * std::pow(2.0, k) * falling(0.5 * gamma, k);
        }
        worst = std::max(worst, total);
    }
    return worst;
}

inline constexpr int kBuiltinCertDepth = 8;

/// -|xi|^gamma; homogeneous of degree gamma, psi(t, 0) = 0.
inline SymbolSpec power_symbol(double gamma, std::string name = {})
{
    if (!(gamma > 0.0)) throw ArgumentError("power symbol: gamma must be positive");
    SymbolSpec s;
    s.name = name.empty() ? "power:" + std::to_string(gamma) : std::move(name);
    s.eval = [gamma](double, const Point& xi) -> Complex {
        if (gamma == 2.0) return -(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
        return -std::pow(abs_xi(xi), gamma);
    };
    s.kappa = 1.0;
    s.gamma = gamma;
    s.n_cert = kBuiltinCertDepth;
    s.mu = power_derivative_bound(gamma, s.n_cert);
    s.time_constant = true;
    s.homogeneous = true;
    return s;
}

inline SymbolSpec heat_symbol() { return power_symbol(2.0, "heat"); }
inline SymbolSpec poisson_symbol() { return power_symbol(1.0, "poisson"); }
inline SymbolSpec frac_lap_symbol(double eta) { return power_symbol(eta, "frac-lap:" + std::to_string(eta)); }

/// -(kappa + k(t)) |xi|^gamma with 0 <= k(t) <= k_bound on the horizon of use.
inline SymbolSpec power_t_symbol(double gamma, double kappa, std::function<double(double)> k, double k_bound,
                                 std::string name = {})
{
    if (!(gamma > 0.0) || !(kappa > 0.0) || !(k_bound >= 0.0))
        throw ArgumentError("power-t symbol: need gamma > 0, kappa > 0, k_bound >= 0");
    SymbolSpec s;
    s.name = name.empty() ? "power-t:" + std::to_string(gamma) : std::move(name);
    s.eval = [gamma, kappa, k = std::move(k)](double t, const Point& xi) -> Complex {
        return -(kappa + k(t)) * std::pow(abs_xi(xi), gamma);
    };
    s.kappa = kappa;
    s.gamma = gamma;
    s.n_cert = kBuiltinCertDepth;
    s.mu = (kappa + k_bound) * power_derivative_bound(gamma, s.n_cert);
    s.time_constant = false;
    s.homogeneous = false;
    return s;
}

/// (-|xi|^gamma)^k: the symbol of d^k/dt^k acting on the evolution generated
/// by -|xi|^gamma. Homogeneous of degree k*gamma.
inline SymbolSpec evolution_derivative_symbol(double gamma, int k)
{
    if (k < 1) throw ArgumentError("evol-deriv symbol: k must be >= 1");
    SymbolSpec s = power_symbol(gamma * k);
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    const double order = gamma * k;
    s.name = "evol-deriv:" + std::to_string(gamma) + ":" + std::to_string(k);
    s.eval = [sign, order](double, const Point& xi) -> Complex { return sign * std::pow(abs_xi(xi), order); };
    s.s1_certified = (k % 2 == 1);
    return s;
}

/// Looks up a registry name: "heat", "poisson", "power:g", "power-t:g[:M]",
/// "frac-lap:eta", "evol-deriv:g:k".
inline SymbolSpec symbol_from_name(const std::string& name)
{
    std::vector<std::string> parts;
    {
        std::stringstream ss(name);
        std::string item;
        while (std::getline(ss, item, ':')) parts.push_back(item);
    }
    auto number = [&](std::size_t i) {
        if (i >= parts.size()) throw ConfigError("symbol '" + name + "': missing parameter");
        try {
            std::size_t used = 0;
            const double v = std::stod(parts[i], &used);
            if (used != parts[i].size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("symbol '" + name + "': bad number '" + parts[i] + "'");
        }
    };
    if (parts.empty()) throw ConfigError("empty symbol name");
    const std::string& family = parts[0];
    if (family == "heat" && parts.size() == 1) return heat_symbol();
    if (family == "poisson" && parts.size() == 1) return poisson_symbol();
    if (family == "power" && parts.size() == 2) {
        auto s = power_symbol(number(1));
        s.name = name;
        return s;
    }
    if (family == "frac-lap" && parts.size() == 2) {
        auto s = frac_lap_symbol(number(1));
        s.name = name;
        return s;
    }
    if (family == "power-t" && (parts.size() == 2 || parts.size() == 3)) {
        const double bound = parts.size() == 3 ? number(2) : 1.0;
        auto k = [bound](double t) { return bound * t / (1.0 + t); };
        return power_t_symbol(number(1), 1.0, k, bound, name);
    }
    if (family == "evol-deriv" && parts.size() == 3) {
        const double k = number(2);
        if (k != std::floor(k) || k < 1) throw ConfigError("symbol '" + name + "': k must be a positive integer");
        auto s = evolution_derivative_symbol(number(1), static_cast<int>(k));
        s.name = name;
        return s;
    }
    throw ConfigError("unknown symbol '" + name + "'");
}

// ---------------------------------------------------------------------------
// Audits
// ---------------------------------------------------------------------------

enum class Condition { S1, S2, Homogeneity };

inline const char* to_string(Condition c)
{
    switch (c) {
    case Condition::S1: return "S1";
    case Condition::S2: return "S2";
    case Condition::Homogeneity: return "HOMOGENEITY";
    }
    return "?";
}

struct AuditPoint {
    double t = 0.0;
    Point xi{};
    std::array<int, 3> alpha{0, 0, 0};
};

/// Result of a sampled audit. Audits are falsifiers over the supplied sample
/// sets; a pass says nothing about points that were not sampled.
struct AuditReport {
    Condition condition = Condition::S1;
    double worst_violation = -std::numeric_limits<double>::infinity();
    AuditPoint worst_point;
    std::size_t sample_count = 0;
    double tolerance = 0.0;
    bool pass = false;
};

struct AuditOptions {
    double s1_tolerance = 1e-6;
    double s2_tolerance = 1e-3;
    double homogeneity_tolerance = 1e-9;
    double homogeneity_floor = 1e-300;
    // Central-difference step is fd_step_factor * max(|xi|, 1).
    double fd_step_factor = 1e-4;
};

/// worst_violation = max Re psi + kappa |xi|^gamma (absolute).
inline AuditReport audit_s1(const SymbolSpec& spec, const std::vector<double>& t_samples,
                            const std::vector<Point>& xi_samples, const AuditOptions& opt = {})
{
    if (t_samples.empty() || xi_samples.empty()) throw ArgumentError("audit_s1: empty sample set");
    AuditReport rep;
    rep.condition = Condition::S1;
    rep.tolerance = opt.s1_tolerance;
    for (double t : t_samples) {
        for (const auto& xi : xi_samples) {
            const double r = abs_xi(xi);
            if (!(r > 0.0)) throw ArgumentError("audit_s1: samples must avoid xi = 0");
            const double bound = spec.gamma == 2.0 ? xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]
                                                   : std::pow(r, spec.gamma);
            const double v = eval_symbol(spec, t, xi).real() + spec.kappa * bound;
            ++rep.sample_count;
            if (v > rep.worst_violation) {
                rep.worst_violation = v;
                rep.worst_point = {t, xi, {0, 0, 0}};
            }
        }
    }
    rep.pass = rep.worst_violation <= rep.tolerance;
    return rep;
}

/// All multi-indices alpha in N_0^dim with |alpha| <= max_order.
inline std::vector<std::array<int, 3>> multi_indices(int dim, int max_order)
{
    std::vector<std::array<int, 3>> out;
    for (int a0 = 0; a0 <= max_order; ++a0)
        for (int a1 = 0; a1 <= (dim > 1 ? max_order - a0 : 0); ++a1)
            for (int a2 = 0; a2 <= (dim > 2 ? max_order - a0 - a1 : 0); ++a2) out.push_back({a0, a1, a2});
    return out;
}

namespace detail {

// Nested central differences: d^alpha psi at xi with per-axis step h.
inline Complex central_derivative(const SymbolSpec& spec, double t, Point xi, std::array<int, 3> alpha, double h,
                                  int axis = 0)
{
    while (axis < 3 && alpha[axis] == 0) ++axis;
    if (axis == 3) return eval_symbol(spec, t, xi);
    alpha[axis] -= 1;
    Point plus = xi, minus = xi;
    plus[axis] += h;
    minus[axis] -= h;
    return (central_derivative(spec, t, plus, alpha, h, axis) - central_derivative(spec, t, minus, alpha, h, axis)) /
           (2.0 * h);
}

} // namespace detail

/// Finite-difference audit of (S2). The reported defect is
///   (|d^alpha psi| - mu |xi|^{gamma-|alpha|}) / max(1, mu |xi|^{gamma-|alpha|}),
/// i.e. absolute for small bounds and relative for large ones. Samples on a
/// coordinate hyperplane are skipped.
inline AuditReport audit_s2(const SymbolSpec& spec, int max_order, const std::vector<double>& t_samples,
                            const std::vector<Point>& xi_samples, int dim, const AuditOptions& opt = {})
{
    if (t_samples.empty() || xi_samples.empty()) throw ArgumentError("audit_s2: empty sample set");
    if (max_order < 0 || max_order > spec.n_cert)
        throw ArgumentError("audit_s2: max_order must lie in [0, n_cert]");
    if (dim < 1 || dim > 3) throw ArgumentError("audit_s2: dim must be 1, 2 or 3");
    AuditReport rep;
    rep.condition = Condition::S2;
    rep.tolerance = opt.s2_tolerance;
    const auto alphas = multi_indices(dim, max_order);
    for (const auto& xi : xi_samples) {
        bool on_plane = false;
        for (int a = 0; a < dim; ++a) on_plane = on_plane || xi[a] == 0.0;
        if (on_plane) continue;
        const double r = abs_xi(xi);
        const double h = opt.fd_step_factor * std::max(r, 1.0);
        for (int a = 0; a < dim; ++a) {
            const double spread = (xi[a] + h) - (xi[a] - h);
            if (!(h > 0.0) || std::abs(spread - 2.0 * h) > 1e-6 * h || std::pow(h, max_order) == 0.0)
                throw AuditError("audit_s2: finite-difference step underflow at |xi| = " + std::to_string(r));
        }
        for (double t : t_samples) {
            for (const auto& alpha : alphas) {
                const int order = alpha[0] + alpha[1] + alpha[2];
                const double deriv = std::abs(detail::central_derivative(spec, t, xi, alpha, h));
                const double bound = spec.mu * std::pow(r, spec.gamma - order);
                const double v = (deriv - bound) / std::max(1.0, bound);
                ++rep.sample_count;
                if (v > rep.worst_violation) {
                    rep.worst_violation = v;
                    rep.worst_point = {t, xi, alpha};
                }
            }
        }
    }
    if (rep.sample_count == 0) throw ArgumentError("audit_s2: every sample lies on a coordinate hyperplane");
    rep.pass = rep.worst_violation <= rep.tolerance;
    return rep;
}

/// worst_violation = max |psi(lambda xi) - lambda^gamma psi(xi)| / (|lambda^gamma psi(xi)| + floor).
inline AuditReport check_homogeneity(const SymbolSpec& spec, const std::vector<double>& lambdas,
                                     const std::vector<Point>& xi_samples, const AuditOptions& opt = {})
{
    if (!spec.time_constant) throw ArgumentError("check_homogeneity: symbol '" + spec.name + "' depends on time");
    if (lambdas.empty() || xi_samples.empty()) throw ArgumentError("check_homogeneity: empty sample set");
    AuditReport rep;
    rep.condition = Condition::Homogeneity;
    rep.tolerance = opt.homogeneity_tolerance;
    for (double lambda : lambdas) {
        if (!(lambda > 0.0)) throw ArgumentError("check_homogeneity: lambda must be positive");
        for (const auto& xi : xi_samples) {
            const Point scaled{lambda * xi[0], lambda * xi[1], lambda * xi[2]};
            const Complex expected = std::pow(lambda, spec.gamma) * eval_symbol(spec, 0.0, xi);
            const Complex got = eval_symbol(spec, 0.0, scaled);
            const double v = std::abs(got - expected) / (std::abs(expected) + opt.homogeneity_floor);
            ++rep.sample_count;
            if (v > rep.worst_violation) {
                rep.worst_violation = v;
                rep.worst_point = {0.0, xi, {0, 0, 0}};
            }
        }
    }
    rep.pass = rep.worst_violation <= rep.tolerance;
    return rep;
}

} // namespace speclp

#pragma once

// Littlewood-Paley decomposition with an exactly telescoping dyadic bump,
// and the Besov B^0_{qq} / Sobolev H^alpha_p norms built on it.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "speclp/error.hpp"
#include "speclp/spectral.hpp"

namespace speclp {

namespace lp_detail {
inline double mollifier_tail(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }
} // namespace lp_detail

/// Smooth monotone radial cutoff: 1 on [0, 1], 0 on [2, inf).
inline double lp_cutoff(double rho)
{
    if (rho <= 1.0) return 1.0;
    if (rho >= 2.0) return 0.0;
    const double a = lp_detail::mollifier_tail(2.0 - rho);
    const double b = lp_detail::mollifier_tail(rho - 1.0);
    return a / (a + b);
}

/// Dyadic bump: cutoff(rho) - cutoff(2 rho); supported in [1/2, 2], nonnegative.
inline double lp_bump(double rho) { return lp_cutoff(rho) - lp_cutoff(2.0 * rho); }

struct DyadicDecomposition {
    GridSpec grid;
    int j_min = 0;
    int j_max = 0;

    double cutoff(double rho) const { return lp_cutoff(rho); }
    double bump(double rho) const { return lp_bump(rho); }

    /// Phi(2^{-j} xi).
    double block_weight(int j, const Point& xi) const { return lp_bump(std::ldexp(abs_xi(xi), -j)); }

    /// sum_{j=j_min}^{j_max} Phi(2^{-j} xi); telescopes to 1 for 2^{j_min} <= |xi| <= 2^{j_max}.
    double partition_sum(const Point& xi) const
    {
        double acc = 0.0;
        for (int j = j_min; j <= j_max; ++j) acc += block_weight(j, xi);
        return acc;
    }

    double covered_low() const { return std::ldexp(1.0, j_min); }
    double covered_high() const { return std::ldexp(1.0, j_max); }

    static double abs_xi(const Point& xi) { return std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]); }
};

/// Chooses the dyadic range so that the annuli cover every nonzero lattice
/// frequency, from pi/L up to the corner of the Nyquist cube.
inline DyadicDecomposition build_decomposition(const GridSpec& grid)
{
    grid.validate();
    DyadicDecomposition d;
    d.grid = grid;
    d.j_min = static_cast<int>(std::floor(std::log2(grid.freq_step())));
    d.j_max = static_cast<int>(std::ceil(std::log2(grid.max_frequency())));
    return d;
}

/// Delta_j f = F^{-1}(Phi(2^{-j} xi) F f).
inline Field block(const Field& f, int j, const DyadicDecomposition& dec)
{
    require_same_grid(f.grid, dec.grid, "block");
    if (j < dec.j_min || j > dec.j_max)
        throw ArgumentError("block: j = " + std::to_string(j) + " outside active range [" + std::to_string(dec.j_min) +
                            ", " + std::to_string(dec.j_max) + "]");
    return inverse_transform(
        apply_multiplier(forward_transform(f), [&](const Point& xi) { return dec.block_weight(j, xi); }));
}

/// S_0 f as the single multiplier cutoff(|xi|) (= sum_{j <= 0} Phi(2^{-j} xi)).
inline Field low_part(const Field& f, const DyadicDecomposition& dec)
{
    require_same_grid(f.grid, dec.grid, "low_part");
    return inverse_transform(apply_multiplier(
        forward_transform(f), [&](const Point& xi) { return lp_cutoff(DyadicDecomposition::abs_xi(xi)); }));
}

/// sum_{j_min}^{j_max} Delta_j f; equals f minus its mean on the lattice.
inline Field reconstruct(const Field& f, const DyadicDecomposition& dec)
{
    require_same_grid(f.grid, dec.grid, "reconstruct");
    return inverse_transform(apply_multiplier(forward_transform(f), [&](const Point& xi) { return dec.partition_sum(xi); }));
}

/// max over |i - j| >= 2 of ||Delta_i Delta_j f||_2.
inline double almost_orthogonality_defect(const Field& f, const DyadicDecomposition& dec)
{
    require_same_grid(f.grid, dec.grid, "almost_orthogonality_defect");
    const auto spec = forward_transform(f);
    double worst = 0.0;
    for (int i = dec.j_min; i <= dec.j_max; ++i)
        for (int j = i + 2; j <= dec.j_max; ++j) {
            const auto both = apply_multiplier(
                spec, [&](const Point& xi) { return dec.block_weight(i, xi) * dec.block_weight(j, xi); });
            worst = std::max(worst, spectral_l2_norm(both));
        }
    return worst;
}

/// (j, ||Delta_j f||_q) for j = 1 .. j_max.
inline std::vector<std::pair<int, double>> block_norms(const Field& f, double q, const DyadicDecomposition& dec)
{
    std::vector<std::pair<int, double>> out;
    for (int j = std::max(1, dec.j_min); j <= dec.j_max; ++j) out.emplace_back(j, lp_norm(block(f, j, dec), q));
    return out;
}

/// ||S_0 f||_q + (sum_{j >= 1} ||Delta_j f||_q^q)^{1/q}.
inline double besov_norm0(const Field& f, double q, const DyadicDecomposition& dec)
{
    if (!(q >= 1.0)) throw ArgumentError("besov_norm0: q must be >= 1");
    double acc = 0.0;
    for (const auto& [j, norm] : block_norms(f, q, dec)) acc += std::pow(norm, q);
    return lp_norm(low_part(f, dec), q) + std::pow(acc, 1.0 / q);
}

/// ||(1 - Laplacian)^{alpha/2} f||_p.
inline double sobolev_norm(const Field& f, double alpha, double p)
{
    if (!(p >= 1.0)) throw ArgumentError("sobolev_norm: p must be >= 1");
    if (alpha == 0.0) return lp_norm(f, p);
    const auto lifted = apply_multiplier(forward_transform(f), [&](const Point& xi) {
        return std::pow(1.0 + xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2], 0.5 * alpha);
    });
    return lp_norm(inverse_transform(lifted), p);
}

inline void write_block_table_csv(const std::vector<std::pair<int, double>>& table, const std::string& path)
{
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    os.precision(17);
    os << "j,block_norm\n";
    for (const auto& [j, v] : table) os << j << ',' << v << '\n';
}

} // namespace speclp

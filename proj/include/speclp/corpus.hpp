#pragma once

// Deterministic test-field corpora: Gaussian mixtures, random wave packets
// and single-shell (annulus) packets, all localized well inside the box.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "speclp/error.hpp"
#include "speclp/spectral.hpp"

namespace speclp {

enum class CorpusKind { GaussianMix, BandlimitedRandom, Annulus };

inline const char* to_string(CorpusKind k)
{
    switch (k) {
    case CorpusKind::GaussianMix: return "GAUSSIAN_MIX";
    case CorpusKind::BandlimitedRandom: return "BANDLIMITED_RANDOM";
    case CorpusKind::Annulus: return "ANNULUS";
    }
    return "?";
}

inline CorpusKind corpus_kind_from_string(const std::string& s)
{
    if (s == "GAUSSIAN_MIX") return CorpusKind::GaussianMix;
    if (s == "BANDLIMITED_RANDOM") return CorpusKind::BandlimitedRandom;
    if (s == "ANNULUS") return CorpusKind::Annulus;
    throw ConfigError("unknown corpus kind '" + s + "' (GAUSSIAN_MIX, BANDLIMITED_RANDOM, ANNULUS)");
}

struct CorpusEntry {
    int id = 0;
    Field field;
    std::pair<double, double> band{0.0, 0.0}; // (xi_lo, xi_hi) holding the spectrum to 1e-16
    bool mean_removed = false;
};

struct CorpusOptions {
    CorpusKind kind = CorpusKind::GaussianMix;
    int count = 16;
    bool mean_removed = false;
    std::optional<int> annulus_j; // shell 2^j for ANNULUS; default: largest shell that fits below Nyquist/2
};

namespace corpus_detail {

// Gaussian e^{-r^2/(2 sigma^2)} falls below 1e-16 at r = kReach sigma.
inline const double kReach = std::sqrt(2.0 * std::log(1e16));

class Draw {
public:
    explicit Draw(std::uint64_t seed) : rng_(seed) {}
    // Uniform in [0, 1) from the top 53 bits; independent of the standard
    // library's distribution implementations.
    double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
    int integer(int lo, int hi) { return lo + static_cast<int>(unit() * (hi - lo + 1)); }

private:
    std::mt19937_64 rng_;
};

inline double gaussian(const Point& x, const Point& c, double sigma, int dim)
{
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
    return std::exp(-0.5 * r2 / (sigma * sigma));
}

inline Point random_center(Draw& d, double spread, int dim)
{
    Point c{0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a) c[a] = d.uniform(-spread, spread);
    return c;
}

inline Point random_direction(Draw& d, int dim)
{
    Point v{0.0, 0.0, 0.0};
    if (dim == 1) {
        v[0] = 1.0;
        return v;
    }
    double len = 0.0;
    do {
        for (int a = 0; a < dim; ++a) v[a] = d.uniform(-1.0, 1.0);
        len = norm(v, dim);
    } while (len < 1e-3 || len > 1.0);
    for (int a = 0; a < dim; ++a) v[a] /= len;
    return v;
}

// Packet A e^{-|x-c|^2/(2 sigma^2)} cos(k.(x-c) + phase).
inline double packet(const Point& x, const Point& c, double sigma, const Point& k, double phase, int dim)
{
    double arg = phase;
    for (int a = 0; a < dim; ++a) arg += k[a] * (x[a] - c[a]);
    return gaussian(x, c, sigma, dim) * std::cos(arg);
}

inline void project_mean(Field& f)
{
    auto spec = forward_transform(f);
    remove_mean(spec);
    f = inverse_transform(spec);
    for (auto& v : f.values) v = Complex(v.real(), 0.0);
}

} // namespace corpus_detail

/// count fields drawn from a mt19937_64 seeded with `seed`. Every field is
/// below 1e-14 in modulus for |x| > 0.9 L and its spectrum lives in
/// (0, Nyquist/2] up to 1e-16 relative.
inline std::vector<CorpusEntry> generate_corpus(std::uint64_t seed, const GridSpec& grid, const CorpusOptions& opt)
{
    using namespace corpus_detail;
    grid.validate();
    if (opt.count < 1) throw ArgumentError("generate_corpus: count must be >= 1");
    const int dim = grid.dim;
    const double L = grid.half_extent;
    const double band_cap = 0.5 * grid.nyquist();
    Draw draw(seed);
    std::vector<CorpusEntry> out;
    out.reserve(opt.count);

    switch (opt.kind) {
    case CorpusKind::GaussianMix: {
        // Centers within 0.3 L; width so the tail at 0.9 L is below 1e-16
        // and the spectrum ends before Nyquist/2.
        const double spread = 0.3 * L;
        const double sigma_max = (0.9 * L - spread) / kReach;
        const double sigma_min = std::max(kReach / band_cap, 0.02 * L);
        if (sigma_min > sigma_max)
            throw ConfigError("GAUSSIAN_MIX: band exceeds Nyquist/2 on this grid (need a finer grid or a larger box)");
        const double comp_sigma = sigma_max;
        for (int id = 0; id < opt.count; ++id) {
            const int bumps = draw.integer(1, 4);
            std::vector<std::tuple<Point, double, double>> parts;
            double mass = 0.0;
            double narrowest = comp_sigma;
            for (int b = 0; b < bumps; ++b) {
                const Point c = random_center(draw, spread, dim);
                const double sigma = draw.uniform(sigma_min, sigma_max);
                const double w = draw.uniform(-1.0, 1.0) + (draw.unit() < 0.5 ? -0.5 : 0.5);
                parts.emplace_back(c, sigma, w);
                mass += w * std::pow(sigma, dim);
                narrowest = std::min(narrowest, sigma);
            }
            // A centered compensating bump of equal and opposite mass.
            if (opt.mean_removed) parts.emplace_back(Point{0.0, 0.0, 0.0}, comp_sigma, -mass / std::pow(comp_sigma, dim));
            CorpusEntry e;
            e.id = id;
            e.mean_removed = opt.mean_removed;
            e.field = make_field(grid, [&](const Point& x) {
                double v = 0.0;
                for (const auto& [c, sigma, w] : parts) v += w * gaussian(x, c, sigma, dim);
                return Complex(v, 0.0);
            });
            if (opt.mean_removed) project_mean(e.field);
            e.band = {opt.mean_removed ? grid.freq_step() : 0.0, kReach / narrowest};
            out.push_back(std::move(e));
        }
        break;
    }
    case CorpusKind::BandlimitedRandom: {
        // Wave packets with a fixed envelope; carrier frequencies keep the
        // whole spectrum inside [kReach/sigma, Nyquist/2].
        const double spread = 0.3 * L;
        const double sigma = (0.9 * L - spread) / kReach;
        const double margin = kReach / sigma;
        const double k_lo = 2.0 * margin, k_hi = band_cap - margin;
        if (!(k_hi > k_lo))
            throw ConfigError("BANDLIMITED_RANDOM: band exceeds Nyquist/2 on this grid (need a finer grid)");
        for (int id = 0; id < opt.count; ++id) {
            const int packets = draw.integer(2, 5);
            std::vector<std::tuple<Point, Point, double, double>> parts;
            double kmin = k_hi, kmax = k_lo;
            for (int b = 0; b < packets; ++b) {
                const Point c = random_center(draw, spread, dim);
                const double kabs = draw.uniform(k_lo, k_hi);
                Point k = random_direction(draw, dim);
                for (auto& v : k) v *= kabs;
                const double phase = draw.uniform(0.0, 2.0 * std::numbers::pi);
                const double amp = draw.uniform(0.5, 1.5);
                parts.emplace_back(c, k, phase, amp);
                kmin = std::min(kmin, kabs);
                kmax = std::max(kmax, kabs);
            }
            CorpusEntry e;
            e.id = id;
            e.mean_removed = opt.mean_removed;
            e.field = make_field(grid, [&](const Point& x) {
                double v = 0.0;
                for (const auto& [c, k, phase, amp] : parts) v += amp * packet(x, c, sigma, k, phase, dim);
                return Complex(v, 0.0);
            });
            if (opt.mean_removed) project_mean(e.field);
            e.band = {kmin - margin, kmax + margin};
            out.push_back(std::move(e));
        }
        break;
    }
    case CorpusKind::Annulus: {
        // Centered packets with |k| = 2^j and the widest envelope the box allows.
        const double sigma = 0.9 * L / kReach;
        const double margin = kReach / sigma;
        const int j = opt.annulus_j ? *opt.annulus_j
                                    : static_cast<int>(std::floor(std::log2(std::max(band_cap - margin, 1e-300))));
        const double radius = std::ldexp(1.0, j);
        // 99.9% of |F|^2 lies within 3.3 / (sigma sqrt 2) of |k| along any ray.
        const double needed = 3.3 / (sigma * std::numbers::sqrt2);
        const double shell_lo = std::pow(2.0, j - 0.1), shell_hi = std::pow(2.0, j + 0.1);
        if (radius + margin > band_cap)
            throw ConfigError("ANNULUS: shell 2^" + std::to_string(j) + " exceeds Nyquist/2 on this grid");
        if (radius - needed < shell_lo || radius + needed > shell_hi)
            throw ConfigError("ANNULUS: box too small to concentrate the spectrum in shell 2^" + std::to_string(j));
        for (int id = 0; id < opt.count; ++id) {
            Point k = random_direction(draw, dim);
            for (auto& v : k) v *= radius;
            const double phase = draw.uniform(0.0, 2.0 * std::numbers::pi);
            CorpusEntry e;
            e.id = id;
            e.mean_removed = opt.mean_removed;
            e.field = make_field(grid, [&](const Point& x) {
                return Complex(packet(x, Point{0.0, 0.0, 0.0}, sigma, k, phase, dim), 0.0);
            });
            if (opt.mean_removed) project_mean(e.field);
            e.band = {std::max(radius - margin, grid.freq_step()), radius + margin};
            out.push_back(std::move(e));
        }
        break;
    }
    }
    return out;
}

inline std::vector<Field> corpus_fields(const std::vector<CorpusEntry>& corpus)
{
    std::vector<Field> out;
    out.reserve(corpus.size());
    for (const auto& e : corpus) out.push_back(e.field);
    return out;
}

} // namespace speclp

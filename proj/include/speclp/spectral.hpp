#pragma once

// Periodic sampling of R^d on the torus [-L, L)^d, discrete Fourier
// transforms in the symmetric (2 pi)^{-d/2} convention, Fourier multipliers
// and Riemann-sum L^p norms.

#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <fftw3.h>

#include "speclp/error.hpp"

namespace speclp {

using Complex = std::complex<double>;
using Point = std::array<double, 3>;

struct GridSpec {
    int dim = 1;
    int n = 256;
    double half_extent = 16.0;

    double spacing() const { return 2.0 * half_extent / n; }
    double freq_step() const { return std::numbers::pi / half_extent; }
    double nyquist() const { return std::numbers::pi * n / (2.0 * half_extent); }
    double cell_volume() const { return std::pow(spacing(), dim); }
    double freq_cell_volume() const { return std::pow(freq_step(), dim); }

    std::size_t size() const
    {
        std::size_t total = 1;
        for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(n);
        return total;
    }

    void validate() const
    {
        if (dim < 1 || dim > 3) throw ArgumentError("grid: dimension must be 1, 2 or 3");
        if (n < 2 || n % 2 != 0) throw ArgumentError("grid: points per axis must be even and >= 2");
        if (!(half_extent > 0.0) || !std::isfinite(half_extent))
            throw ArgumentError("grid: half extent must be positive");
    }

    // Signed wavenumber of FFT storage index m, in [-n/2, n/2).
    int wavenumber(int m) const { return m < n / 2 ? m : m - n; }

    // Per-axis storage indices of a flat index (axis 0 slowest).
    std::array<int, 3> unflatten(std::size_t flat) const
    {
        std::array<int, 3> idx{0, 0, 0};
        for (int a = dim - 1; a >= 0; --a) {
            idx[a] = static_cast<int>(flat % static_cast<std::size_t>(n));
            flat /= static_cast<std::size_t>(n);
        }
        return idx;
    }

    Point coordinate(std::size_t flat) const
    {
        const auto idx = unflatten(flat);
        Point x{0.0, 0.0, 0.0};
        for (int a = 0; a < dim; ++a) x[a] = -half_extent + idx[a] * spacing();
        return x;
    }

    Point frequency(std::size_t flat) const
    {
        const auto idx = unflatten(flat);
        Point xi{0.0, 0.0, 0.0};
        for (int a = 0; a < dim; ++a) xi[a] = freq_step() * wavenumber(idx[a]);
        return xi;
    }

    // True at lattice points carrying the -n/2 wavenumber on some axis.
    bool is_nyquist(std::size_t flat) const
    {
        const auto idx = unflatten(flat);
        for (int a = 0; a < dim; ++a)
            if (idx[a] == n / 2) return true;
        return false;
    }

    // Largest |xi| on the lattice.
    double max_frequency() const { return std::sqrt(static_cast<double>(dim)) * nyquist(); }

    friend bool operator==(const GridSpec& a, const GridSpec& b)
    {
        return a.dim == b.dim && a.n == b.n && a.half_extent == b.half_extent;
    }
};

inline double norm(const Point& v, int dim)
{
    double s = 0.0;
    for (int a = 0; a < dim; ++a) s += v[a] * v[a];
    return std::sqrt(s);
}

struct Field {
    GridSpec grid;
    std::vector<Complex> values;

    Field() = default;
    explicit Field(const GridSpec& g) : grid(g), values(g.size(), Complex{}) {}
};

struct SpectralField {
    GridSpec grid;
    std::vector<Complex> coeffs;

    SpectralField() = default;
    explicit SpectralField(const GridSpec& g) : grid(g), coeffs(g.size(), Complex{}) {}
};

inline void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what)
{
    if (!(a == b)) throw ArgumentError(std::string(what) + ": grid mismatch");
}

/// Samples fn(x) on every grid point.
template <class Fn>
Field make_field(const GridSpec& grid, Fn&& fn)
{
    grid.validate();
    Field f(grid);
    for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = Complex(fn(grid.coordinate(i)));
    return f;
}

namespace detail {

// FFTW plans cached per (dim, n, sign). Planning is serialized; execution
// through fftw_execute_dft on caller-owned buffers is thread safe.
class PlanCache {
public:
    static PlanCache& instance()
    {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(int dim, int n, int sign)
    {
        std::lock_guard lock(mutex_);
        auto key = std::make_tuple(dim, n, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        std::size_t total = 1;
        for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(n);
        auto* scratch = fftw_alloc_complex(total);
        std::array<int, 3> dims{n, n, n};
        fftw_plan plan = fftw_plan_dft(dim, dims.data(), scratch, scratch, sign,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(scratch);
        if (plan == nullptr) throw Error("fftw: could not create plan");
        plans_.emplace(key, plan);
        return plan;
    }

    ~PlanCache()
    {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

private:
    PlanCache() = default;
    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

inline void fft_in_place(const GridSpec& grid, std::vector<Complex>& data, int sign)
{
    fftw_plan plan = PlanCache::instance().get(grid.dim, grid.n, sign);
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, ptr, ptr);
}

// (-1)^{k_1 + ... + k_d}: the phase e^{i xi . L} picked up because the grid
// starts at -L rather than 0.
inline double origin_phase(const GridSpec& grid, std::size_t flat)
{
    const auto idx = grid.unflatten(flat);
    int parity = 0;
    for (int a = 0; a < grid.dim; ++a) parity += idx[a];
    return (parity % 2 == 0) ? 1.0 : -1.0;
}

} // namespace detail

/// (F f)(xi) = (2 pi)^{-d/2} sum_x e^{-i x.xi} f(x) h^d on the frequency lattice.
inline SpectralField forward_transform(const Field& f)
{
    f.grid.validate();
    SpectralField out(f.grid);
    out.coeffs = f.values;
    detail::fft_in_place(f.grid, out.coeffs, FFTW_FORWARD);
    const double scale = f.grid.cell_volume() / std::pow(2.0 * std::numbers::pi, 0.5 * f.grid.dim);
    for (std::size_t i = 0; i < out.coeffs.size(); ++i)
        out.coeffs[i] *= scale * detail::origin_phase(f.grid, i);
    return out;
}

/// Inverse of forward_transform: (2 pi)^{-d/2} sum_xi e^{i x.xi} F(xi) (pi/L)^d.
inline Field inverse_transform(const SpectralField& spec)
{
    spec.grid.validate();
    Field out(spec.grid);
    out.values = spec.coeffs;
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] *= detail::origin_phase(spec.grid, i);
    detail::fft_in_place(spec.grid, out.values, FFTW_BACKWARD);
    const double scale =
        spec.grid.freq_cell_volume() / std::pow(2.0 * std::numbers::pi, 0.5 * spec.grid.dim);
    for (auto& v : out.values) v *= scale;
    return out;
}

/// Pointwise coeffs(xi) *= m(xi). `m` takes the lattice frequency as a Point.
template <class Multiplier>
SpectralField apply_multiplier(const SpectralField& spec, Multiplier&& m)
{
    SpectralField out(spec.grid);
    for (std::size_t i = 0; i < spec.coeffs.size(); ++i) {
        const Point xi = spec.grid.frequency(i);
        const Complex mv = Complex(m(xi));
        if (!std::isfinite(mv.real()) || !std::isfinite(mv.imag())) {
            std::ostringstream msg;
            msg << "multiplier is not finite at xi = (";
            for (int a = 0; a < spec.grid.dim; ++a) msg << (a ? ", " : "") << xi[a];
            msg << ")";
            throw MultiplierError(msg.str());
        }
        out.coeffs[i] = mv * spec.coeffs[i];
    }
    return out;
}

/// Multiplies by precomputed lattice values (same storage order as coeffs).
inline SpectralField apply_multiplier_values(const SpectralField& spec, std::span<const Complex> values)
{
    if (values.size() != spec.coeffs.size()) throw ArgumentError("multiplier: size mismatch");
    SpectralField out(spec.grid);
    for (std::size_t i = 0; i < values.size(); ++i) out.coeffs[i] = values[i] * spec.coeffs[i];
    return out;
}

/// (sum |f|^p h^d)^{1/p}.
inline double lp_norm(const Field& f, double p)
{
    if (!(p >= 1.0)) throw ArgumentError("lp_norm: p must be >= 1");
    double acc = 0.0;
    if (p == 2.0) {
        for (const auto& v : f.values) acc += std::norm(v);
        return std::sqrt(acc * f.grid.cell_volume());
    }
    for (const auto& v : f.values) acc += std::pow(std::abs(v), p);
    return std::pow(acc * f.grid.cell_volume(), 1.0 / p);
}

/// (sum |F|^2 (pi/L)^d)^{1/2}; equals lp_norm(f, 2) by discrete Plancherel.
inline double spectral_l2_norm(const SpectralField& spec)
{
    double acc = 0.0;
    for (const auto& c : spec.coeffs) acc += std::norm(c);
    return std::sqrt(acc * spec.grid.freq_cell_volume());
}

inline double sup_norm(const Field& f)
{
    double m = 0.0;
    for (const auto& v : f.values) m = std::max(m, std::abs(v));
    return m;
}

/// Zero-mode (mean) projection.
inline void remove_mean(SpectralField& spec) { spec.coeffs[0] = Complex{}; }

inline Field remove_mean(const Field& f)
{
    auto spec = forward_transform(f);
    remove_mean(spec);
    return inverse_transform(spec);
}

/// Linear combination a*f + b*g.
inline Field combine(Complex a, const Field& f, Complex b, const Field& g)
{
    require_same_grid(f.grid, g.grid, "combine");
    Field out(f.grid);
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = a * f.values[i] + b * g.values[i];
    return out;
}

/// Translate: returns x -> f(x - y), exact for band-limited periodic f.
inline Field translate(const Field& f, const Point& y)
{
    const int dim = f.grid.dim;
    auto shifted = apply_multiplier(forward_transform(f), [&](const Point& xi) {
        double phase = 0.0;
        for (int a = 0; a < dim; ++a) phase -= xi[a] * y[a];
        return std::polar(1.0, phase);
    });
    return inverse_transform(shifted);
}

/// Trigonometric interpolation of the field at an arbitrary point (periodic
/// extension outside the box). O(n^d) per point.
inline Complex sample_at(const SpectralField& spec, const Point& x)
{
    const GridSpec& g = spec.grid;
    Complex acc{};
    for (std::size_t i = 0; i < spec.coeffs.size(); ++i) {
        if (g.is_nyquist(i)) {
            // Split the unpaired Nyquist coefficient symmetrically so that
            // the interpolant of a real field stays real.
            const Point xi = g.frequency(i);
            double cos_part = 1.0;
            double phase = 0.0;
            const auto idx = g.unflatten(i);
            for (int a = 0; a < g.dim; ++a) {
                if (idx[a] == g.n / 2) cos_part *= std::cos(xi[a] * x[a]);
                else phase += xi[a] * x[a];
            }
            acc += spec.coeffs[i] * cos_part * std::polar(1.0, phase);
            continue;
        }
        const Point xi = g.frequency(i);
        double phase = 0.0;
        for (int a = 0; a < g.dim; ++a) phase += xi[a] * x[a];
        acc += spec.coeffs[i] * std::polar(1.0, phase);
    }
    return acc * g.freq_cell_volume() / std::pow(2.0 * std::numbers::pi, 0.5 * g.dim);
}

// ---------------------------------------------------------------------------
// Serialization
//
// Binary layout (little endian):
//   char[4]  magic "SPLF"
//   uint32   version (1)
//   uint32   d
//   uint32   n
//   float64  L
//   n^d x (float32 re, float32 im)
// ---------------------------------------------------------------------------

namespace detail {
template <class T>
void put_le(std::ostream& os, T value)
{
    static_assert(std::endian::native == std::endian::little, "little-endian host required");
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get_le(std::istream& is)
{
    T value{};
    is.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!is) throw Error("field file truncated");
    return value;
}
} // namespace detail

inline void write_field_binary(const Field& f, const std::string& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path + " for writing");
    os.write("SPLF", 4);
    detail::put_le<std::uint32_t>(os, 1);
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(f.grid.dim));
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(f.grid.n));
    detail::put_le<double>(os, f.grid.half_extent);
    for (const auto& v : f.values) {
        detail::put_le<float>(os, static_cast<float>(v.real()));
        detail::put_le<float>(os, static_cast<float>(v.imag()));
    }
}

inline Field read_field_binary(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != "SPLF") throw Error(path + ": not a field file");
    if (detail::get_le<std::uint32_t>(is) != 1) throw Error(path + ": unsupported version");
    GridSpec g;
    g.dim = static_cast<int>(detail::get_le<std::uint32_t>(is));
    g.n = static_cast<int>(detail::get_le<std::uint32_t>(is));
    g.half_extent = detail::get_le<double>(is);
    g.validate();
    Field f(g);
    for (auto& v : f.values) {
        const float re = detail::get_le<float>(is);
        const float im = detail::get_le<float>(is);
        v = Complex(re, im);
    }
    return f;
}

inline void write_field_csv(const Field& f, const std::string& path)
{
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    os.precision(17);
    os << "index,re,im\n";
    for (std::size_t i = 0; i < f.values.size(); ++i)
        os << i << ',' << f.values[i].real() << ',' << f.values[i].imag() << '\n';
}

} // namespace speclp

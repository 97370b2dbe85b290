#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "speclp/corpus.hpp"
#include "speclp/kernel_audit.hpp"

using namespace speclp;

namespace {

constexpr double kPi = std::numbers::pi;

// Third x-derivative of the heat kernel p_t(x) = e^{-x^2/4t} / sqrt(4 pi t).
double heat_p3(double x, double t)
{
    const double p = std::exp(-x * x / (4.0 * t)) / std::sqrt(4.0 * kPi * t);
    return p * (3.0 * x / (4.0 * t * t) - x * x * x / (8.0 * t * t * t));
}

// Second x-derivative of the heat kernel.
double heat_p2(double x, double t)
{
    const double p = std::exp(-x * x / (4.0 * t)) / std::sqrt(4.0 * kPi * t);
    return p * (x * x / (4.0 * t * t) - 1.0 / (2.0 * t));
}

// d/dx of the kernel of -|xi| e^{-t|xi|}, i.e. of d/dt P_t with P_t = t / (pi (t^2 + x^2)).
double poisson_grad(double x, double t)
{
    const double r2 = t * t + x * x;
    return 2.0 * x * (3.0 * t * t - x * x) / (kPi * r2 * r2 * r2);
}

} // namespace

TEST(Gradient, HeatPairClosedFormOddAndMeanFree)
{
    const GridSpec g{1, 1024, 32.0};
    const auto heat = heat_symbol();
    const auto grad = gradient_kernel(heat, 0.0, heat, 0.0, 1.0, g);
    ASSERT_EQ(grad.components.size(), 1u);
    double mass = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.coordinate(i)[0];
        EXPECT_NEAR(grad.components[0].values[i].real(), heat_p3(x, 1.0), 1e-13);
        EXPECT_NEAR(grad.magnitude.values[i].real(), std::abs(heat_p3(x, 1.0)), 1e-13);
        mass += grad.components[0].values[i].real();
    }
    EXPECT_NEAR(grad.components[0].values[g.n / 2].real(), 0.0, 1e-15); // x = 0
    EXPECT_NEAR(mass * g.cell_volume(), 0.0, 1e-14);
    EXPECT_THROW(gradient_kernel(heat, 0.0, heat, 1.0, 1.0, g), ArgumentError);
}

TEST(Gradient, MatchesFiniteDifferenceOfKernel)
{
    const GridSpec g{2, 64, 8.0};
    const auto heat = heat_symbol(), poisson = poisson_symbol();
    const auto grad = gradient_kernel(poisson, 0.0, heat, 0.0, 0.5, g);
    const auto k = forward_transform(kernel_field(PreSymbol{poisson, 0.0}, heat, 0.0, 0.5, g));
    const std::size_t idx = 37 * 64 + 29;
    const Point x0 = g.coordinate(idx);
    const double d = 1e-4;
    for (int axis = 0; axis < 2; ++axis) {
        Point plus = x0, minus = x0;
        plus[axis] += d;
        minus[axis] -= d;
        const double fd = (sample_at(k, plus) - sample_at(k, minus)).real() / (2.0 * d);
        const double spectral = grad.components[axis].values[idx].real();
        EXPECT_NEAR(spectral, fd, 1e-6 * std::abs(spectral)) << "axis " << axis;
    }
}

TEST(Gradient, PoissonPairClosedForm)
{
    const GridSpec g{1, 1 << 15, 1024.0};
    const auto poisson = poisson_symbol();
    const auto grad = gradient_kernel(poisson, 0.0, poisson, 0.0, 1.0, g);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.coordinate(i)[0];
        if (std::abs(x) > 512.0) continue;
        worst = std::max(worst, std::abs(grad.components[0].values[i].real() - poisson_grad(x, 1.0)));
    }
    EXPECT_LT(worst, 1e-9);
}

// |grad K| |x|^3 -> 2/pi from below for the Poisson pair in d = 1.
TEST(SpaceDecay, PoissonPairTailAndConstantStability)
{
    const GridSpec g{1, 1 << 15, 1024.0};
    const auto poisson = poisson_symbol();
    SpaceFitOptions opt;
    opt.r_lo = 8.0;
    opt.r_hi = 256.0;
    std::vector<double> constants;
    for (double t : {0.5, 1.0, 2.0}) {
        const auto rep = decay_fit_space(poisson, 0.0, poisson, 0.0, t, g, opt);
        EXPECT_DOUBLE_EQ(rep.target_exponent, -3.0);
        EXPECT_NEAR(rep.fitted_exponent, -3.0, 0.05) << t;
        EXPECT_LE(rep.max_pointwise_excess, 1e-12);
        EXPECT_NEAR(rep.fitted_constant / (2.0 / kPi), 1.0, 3e-3);
        constants.push_back(rep.fitted_constant);
    }
    const auto [lo, hi] = std::minmax_element(constants.begin(), constants.end());
    EXPECT_LT((*hi - *lo) / *hi, 0.10);
}

TEST(SpaceDecay, HeatTailIsFasterThanAnyPower)
{
    const GridSpec g{1, 4096, 64.0};
    const auto heat = heat_symbol();
    std::vector<double> constants;
    for (double t : {0.5, 1.0, 2.0}) {
        const auto rep = decay_fit_space(heat, 0.0, heat, 0.0, t, g);
        EXPECT_LT(rep.fitted_exponent, -6.0);
        constants.push_back(rep.fitted_constant);
    }
    const auto [lo, hi] = std::minmax_element(constants.begin(), constants.end());
    EXPECT_LT((*hi - *lo) / *hi, 0.10);
}

TEST(SpaceDecay, WindowChecks)
{
    const GridSpec g{1, 256, 8.0};
    const auto heat = heat_symbol();
    SpaceFitOptions short_window;
    short_window.r_lo = 1.0;
    short_window.r_hi = 4.0;
    EXPECT_THROW(decay_fit_space(heat, 0.0, heat, 0.0, 1.0, g, short_window), AuditError);
    SpaceFitOptions too_wide;
    too_wide.r_lo = 1.0;
    too_wide.r_hi = 16.0;
    EXPECT_THROW(decay_fit_space(heat, 0.0, heat, 0.0, 1.0, g, too_wide), AuditError);
}

// K(t, x) = t^{-(d + gamma1)/gamma2} Phi(t^{-1/gamma2} x) gives sup|grad K| ~ t^{-(d+1+gamma1)/gamma2}.
TEST(TimeDecay, ScalingExponents)
{
    const GridSpec g{1, 4096, 64.0};
    const auto heat = heat_symbol(), poisson = poisson_symbol();
    struct Case {
        SymbolSpec a, b;
        double target;
    };
    for (const auto& c : {Case{heat, heat, -2.0}, Case{poisson, poisson, -3.0}, Case{poisson, heat, -1.5}}) {
        const auto rep = decay_fit_time(c.a, 0.0, c.b, 0.0, g, {1.0, 2.0, 4.0, 8.0});
        EXPECT_DOUBLE_EQ(rep.target_exponent, c.target);
        EXPECT_NEAR(rep.fitted_exponent / c.target, 1.0, 0.02);
        EXPECT_LE(rep.max_pointwise_excess, 1e-12);
    }
    EXPECT_THROW(decay_fit_time(heat, 0.0, heat, 0.0, g, {1.0, 2.0, 4.0}), AuditError);
}

// Reference: t-integral by composite Simpson in ln t with the closed-form
// kernel, then the same spatial Riemann sum. |y| = 16 h keeps the skipped
// unresolved times (t < t_res) below e^{-17} on |x - y| >= |y|.
TEST(Hormander, MatchesIndependentQuadrature)
{
    const GridSpec g{1, 1024, 16.0};
    const auto heat = heat_symbol();
    const double y = 0.5;
    const auto window = build_time_window(0.0, 1.0, 2.0, heat, heat, g, 16);
    const double h_meas = hormander_integral(heat, 0.0, heat, window, 2.0, Point{y, 0, 0}, g);

    const int m = 6000;
    const double lo = std::log(1e-6), step = -lo / m;
    double reference = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.coordinate(i)[0];
        if (std::abs(x) < 2.0 * y) continue;
        double acc = 0.0;
        for (int k = 0; k <= m; ++k) {
            const double t = std::exp(lo + k * step);
            const double diff = heat_p2(x - y, t) - heat_p2(x, t);
            acc += t * t * diff * diff * ((k == 0 || k == m) ? 1.0 : (k % 2 ? 4.0 : 2.0));
        }
        reference += std::sqrt(acc * step / 3.0);
    }
    reference *= g.spacing();
    EXPECT_NEAR(h_meas / reference, 1.0, 1e-6);
}

// 2|y| sits on a grid point only for the whole-step shift, so compare shifts
// just below a whole step: both keep the same points.
TEST(Hormander, SpectralShiftAgreesWithIndexRoll)
{
    const GridSpec g{1, 512, 8.0};
    const auto heat = heat_symbol();
    const auto window = build_time_window(0.0, 1.0, 2.0, heat, heat, g, 8);
    const auto hs = hormander_integrals(heat, 0.0, heat, window, 2.0, {Point{0.5, 0, 0}, Point{0.5 * (1 - 1e-7), 0, 0}}, g);
    EXPECT_NEAR(hs[1] / hs[0], 1.0, 1e-5);
}

TEST(Hormander, LargeShiftIsSmallAndGuards)
{
    const GridSpec g{1, 512, 16.0};
    const auto heat = heat_symbol();
    const auto window = build_time_window(0.0, 1.0, 2.0, heat, heat, g, 8);
    const auto hs = hormander_integrals(heat, 0.0, heat, window, 2.0, {Point{0.5, 0, 0}, Point{4.0, 0, 0}}, g);
    EXPECT_LT(hs[1], 0.02 * hs[0]);
    EXPECT_THROW(hormander_integral(heat, 0.0, heat, window, 2.0, Point{0, 0, 0}, g), ArgumentError);
    EXPECT_THROW(hormander_integral(heat, 0.0, heat, window, 2.0, Point{0.1, 0, 0}, g), AuditError);
    EXPECT_THROW(hormander_report(heat, 0.0, heat, window, 2.0, {0.5, 1.0, 2.0}, g), AuditError);
}

// With a = inf the heat pair is scale invariant; on a wide box H(y) stays flat.
TEST(Hormander, HeatPairUniformInY)
{
    const GridSpec g{1, 16384, 32.0};
    const auto heat = heat_symbol();
    const auto window = build_time_window(0.0, kInfiniteWindow, 2.0, heat, heat, g, 8);
    const auto rep = hormander_report(heat, 0.0, heat, window, 2.0, {0.03125, 0.125, 0.5, 2.0}, g);
    EXPECT_TRUE(std::isfinite(rep.sup));
    EXPECT_LT(std::abs(rep.trend_slope), 0.1);
}

TEST(Envelope, HeatPairFitSlopeAndScaling)
{
    const GridSpec g{1, 16384, 1024.0};
    const auto dec = build_decomposition(g);
    const auto heat = heat_symbol();
    const auto one = dyadic_l1_envelope(heat, 0.0, heat, 0.0, 1.0, -6, dec.j_max, dec);
    EXPECT_TRUE(one.fit_ok);
    EXPECT_GT(one.c, 0.0);
    for (const auto& r : one.rows) EXPECT_GE(r.slack, -1e-12) << r.j;
    EXPECT_NEAR(envelope_log2_slope(one, -6, -3) / 2.0, 1.0, 0.05);
    // Beyond 2^{2j} (t - s) > 1 each step loses more than the previous one.
    for (std::size_t k = 8; k + 2 < one.rows.size(); ++k)
        EXPECT_LT(one.rows[k + 2].l1_norm / one.rows[k + 1].l1_norm, one.rows[k + 1].l1_norm / one.rows[k].l1_norm);
    // Homogeneity: m_j(4) = 2^{-gamma1} m_{j+1}(1) for gamma2 = 2.
    const auto four = dyadic_l1_envelope(heat, 0.0, heat, 0.0, 4.0, -6, dec.j_max, dec);
    for (std::size_t k = 0; k + 1 < one.rows.size() && one.rows[k + 1].j <= 3; ++k)
        EXPECT_NEAR(four.rows[k].l1_norm / (0.25 * one.rows[k + 1].l1_norm), 1.0, 0.05) << one.rows[k].j;
    EXPECT_THROW(dyadic_l1_envelope(heat, 0.0, heat, 0.0, 1.0, dec.j_min - 1, 0, dec), ArgumentError);
}

TEST(FracLap, ConstantKnownValues)
{
    EXPECT_NEAR(fractional_laplacian_constant(1.0), 1.0 / kPi, 1e-15);
    // eta -> 2: C(eta) ~ (2 - eta) / 2 ... at eta = 1.5: 2^1.5 Gamma(1.25) / (sqrt(pi) |Gamma(-0.75)|).
    EXPECT_NEAR(fractional_laplacian_constant(1.5),
                std::pow(2.0, 1.5) * std::tgamma(1.25) / (std::sqrt(kPi) * std::abs(std::tgamma(-0.75))), 1e-15);
}

// On the torus -(-Laplacian)^{eta/2} cos(w x) = -w^eta cos(w x).
TEST(FracLap, PrincipalValueOnCosine)
{
    const GridSpec g{1, 256, 8.0 * kPi};
    for (double eta : {0.5, 1.0, 1.5})
        for (double w : {0.125, 1.0, 3.0}) {
            const auto f = make_field(g, [=](const Point& x) { return std::cos(w * x[0]); });
            const auto r = fractional_laplacian_pv(f, eta);
            for (std::size_t i = 0; i < g.size(); i += 3)
                EXPECT_NEAR(r.values[i].real(), -std::pow(w, eta) * std::cos(w * g.coordinate(i)[0]), 1e-9)
                    << "eta=" << eta << " w=" << w;
        }
}

TEST(FracLap, RoutesAgreeOnGaussians)
{
    const GridSpec g{1, 1024, 32.0};
    CorpusOptions opt;
    opt.count = 3;
    const auto fields = corpus_fields(generate_corpus(8, g, opt));
    for (double eta : {0.5, 1.0, 1.5})
        for (const auto& f : fields) {
            const auto a = fractional_laplacian_pv(f, eta);
            const auto b = fractional_laplacian_multiplier(f, eta);
            EXPECT_LT(lp_norm(combine(1.0, a, -1.0, b), 2.0), 1e-3 * lp_norm(b, 2.0));
        }
}

TEST(FracLap, SmallEtaLimitAndLinearity)
{
    const GridSpec g{1, 1024, 32.0};
    CorpusOptions opt;
    opt.count = 2;
    opt.mean_removed = true;
    const auto fields = corpus_fields(generate_corpus(12, g, opt));
    const auto& f = fields[0];
    // (-Laplacian)^{eta/2} f = -(PV route) -> f as eta -> 0 for mean-zero f.
    for (const auto& route : {fractional_laplacian_pv(f, 0.01), fractional_laplacian_multiplier(f, 0.01)})
        EXPECT_LT(lp_norm(combine(-1.0, route, -1.0, f), 2.0), 1e-2 * lp_norm(f, 2.0));
    const auto sum = fractional_laplacian_pv(combine(1.0, fields[0], 1.0, fields[1]), 0.8);
    const auto parts = combine(1.0, fractional_laplacian_pv(fields[0], 0.8), 1.0, fractional_laplacian_pv(fields[1], 0.8));
    EXPECT_LT(lp_norm(combine(1.0, sum, -1.0, parts), 2.0), 1e-12 * lp_norm(parts, 2.0));
}

TEST(FracLap, ArgumentErrors)
{
    const GridSpec g{1, 64, 8.0};
    const auto f = make_field(g, [](const Point& x) { return std::exp(-x[0] * x[0]); });
    EXPECT_THROW(fractional_laplacian_pv(f, 0.0), ArgumentError);
    EXPECT_THROW(fractional_laplacian_pv(f, 2.0), ArgumentError);
    const GridSpec g2{2, 16, 4.0};
    EXPECT_THROW(fractional_laplacian_pv(make_field(g2, [](const Point&) { return 1.0; }), 1.0), ArgumentError);
}

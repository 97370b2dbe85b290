#include <gtest/gtest.h>

#include <cmath>

#include "speclp/symbols.hpp"

using namespace speclp;

namespace {

std::vector<Point> radial_samples(int dim)
{
    std::vector<Point> out;
    for (int e = -4; e <= 4; ++e) {
        const double r = std::ldexp(1.3, e);
        if (dim == 1) out.push_back({r, 0, 0});
        if (dim == 2) out.push_back({0.6 * r, 0.8 * r, 0});
        if (dim == 3) out.push_back({0.48 * r, 0.6 * r, 0.64 * r});
    }
    return out;
}

double falling(double x, int k)
{
    double p = 1.0;
    for (int i = 0; i < k; ++i) p *= x - i;
    return std::abs(p);
}

} // namespace

TEST(Builtins, HeatValuesAndCertificate)
{
    const auto h = heat_symbol();
    EXPECT_EQ(h.name, "heat");
    EXPECT_DOUBLE_EQ(h.eval(0.0, {3.0, 4.0, 0.0}).real(), -25.0);
    EXPECT_DOUBLE_EQ(h.gamma, 2.0);
    EXPECT_DOUBLE_EQ(h.mu, 2.0); // |d(xi^2)| = 2|xi|, |d^2(xi^2)| = 2
    EXPECT_TRUE(h.homogeneous);
    EXPECT_TRUE(h.time_constant);
    EXPECT_TRUE(h.admissible_in(3));
}

// In one dimension d^m |xi|^gamma = gamma (gamma-1) ... (gamma-m+1) |xi|^{gamma-m}.
TEST(Builtins, DerivativeBoundDominatesOneDimensionalDerivatives)
{
    for (double g : {0.5, 1.0, 1.5, 2.0, 3.0})
        for (int m = 0; m <= 8; ++m) EXPECT_GE(power_derivative_bound(g, m) + 1e-12, falling(g, m)) << g << " " << m;
}

TEST(Builtins, RegistryNames)
{
    EXPECT_DOUBLE_EQ(symbol_from_name("poisson").eval(0, {-2.0, 0, 0}).real(), -2.0);
    EXPECT_NEAR(symbol_from_name("power:1.5").eval(0, {4.0, 0, 0}).real(), -8.0, 1e-14);
    EXPECT_NEAR(symbol_from_name("frac-lap:0.5").eval(0, {9.0, 0, 0}).real(), -3.0, 1e-14);
    const auto pt = symbol_from_name("power-t:2:3");
    EXPECT_FALSE(pt.time_constant);
    // k(t) = 3 t / (1 + t) at t = 1 is 1.5.
    EXPECT_NEAR(pt.eval(1.0, {2.0, 0, 0}).real(), -(1.0 + 1.5) * 4.0, 1e-13);
    const auto d2 = symbol_from_name("evol-deriv:1:2");
    EXPECT_NEAR(d2.eval(0, {3.0, 0, 0}).real(), 9.0, 1e-14);
    EXPECT_DOUBLE_EQ(d2.gamma, 2.0);
    EXPECT_FALSE(d2.s1_certified);
    EXPECT_TRUE(symbol_from_name("evol-deriv:2:1").s1_certified);
}

TEST(Builtins, RegistryErrors)
{
    EXPECT_THROW(symbol_from_name("laplace"), ConfigError);
    EXPECT_THROW(symbol_from_name("power:abc"), ConfigError);
    EXPECT_THROW(symbol_from_name("power"), ConfigError);
    EXPECT_THROW(symbol_from_name("evol-deriv:1:1.5"), ConfigError);
    EXPECT_THROW(symbol_from_name(""), ConfigError);
}

TEST(Eval, NonFiniteValueNamesPoint)
{
    SymbolSpec s;
    s.name = "bad";
    s.eval = [](double, const Point& xi) { return Complex(1.0 / xi[0]); };
    try {
        eval_symbol(s, 0.5, {0.0, 0.0, 0.0});
        FAIL();
    } catch (const SymbolEvalError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("t = 0.5"), std::string::npos);
        EXPECT_NE(msg.find("xi = (0"), std::string::npos);
    }
    EXPECT_THROW(eval_symbol(heat_symbol(), -1.0, {1, 0, 0}), ArgumentError);
}

TEST(AuditS1, BuiltinsPassInEveryDimension)
{
    for (int dim = 1; dim <= 3; ++dim)
        for (const auto& name : {"heat", "poisson", "power:1.5", "frac-lap:0.3", "power-t:2:1"}) {
            const auto r = audit_s1(symbol_from_name(name), {0.0, 1.0, 7.0}, radial_samples(dim));
            EXPECT_TRUE(r.pass) << name << " d=" << dim << " worst " << r.worst_violation;
        }
}

// psi = +|xi|^2 declared with kappa = 1: violation Re psi + |xi|^2 = 2|xi|^2,
// worst at the largest sample.
TEST(AuditS1, GrowingSymbolFailsAtLargestFrequency)
{
    auto s = heat_symbol();
    s.eval = [](double, const Point& xi) { return Complex(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]); };
    const auto xs = radial_samples(1);
    const auto r = audit_s1(s, {0.0}, xs);
    EXPECT_FALSE(r.pass);
    const double rmax = xs.back()[0];
    EXPECT_NEAR(r.worst_violation, 2.0 * rmax * rmax, 1e-10);
    EXPECT_DOUBLE_EQ(r.worst_point.xi[0], rmax);
}

TEST(AuditS2, BuiltinsPassToSecondOrder)
{
    for (int dim = 1; dim <= 3; ++dim)
        for (const auto& name : {"heat", "poisson", "power:1.5", "power-t:2:1"}) {
            const auto r = audit_s2(symbol_from_name(name), 2, {0.0, 2.0}, radial_samples(dim), dim);
            EXPECT_TRUE(r.pass) << name << " d=" << dim << " worst " << r.worst_violation;
        }
}

// Heat with mu = 0.5: at order 0, |psi| = |xi|^2 against 0.5 |xi|^2, so the
// defect (|xi|^2 - 0.5 |xi|^2) / max(1, 0.5 |xi|^2) reaches 1 for large |xi|;
// at order 1 it is (2|xi| - 0.5|xi|) / (0.5|xi|) = 3.
TEST(AuditS2, UndersizedConstantIsCaught)
{
    auto s = heat_symbol();
    s.mu = 0.5;
    const auto r0 = audit_s2(s, 0, {0.0}, radial_samples(1), 1);
    EXPECT_FALSE(r0.pass);
    EXPECT_NEAR(r0.worst_violation, 1.0, 1e-6);
    const auto r1 = audit_s2(s, 1, {0.0}, radial_samples(1), 1);
    EXPECT_NEAR(r1.worst_violation, 3.0, 1e-6);
}

TEST(AuditS2, GuardsAndErrors)
{
    const auto h = heat_symbol();
    EXPECT_THROW(audit_s2(h, h.n_cert + 1, {0.0}, radial_samples(1), 1), ArgumentError);
    EXPECT_THROW(audit_s2(h, 1, {0.0}, {Point{0.0, 1.0, 0.0}}, 2), ArgumentError);
    AuditOptions tiny;
    tiny.fd_step_factor = 1e-30;
    EXPECT_THROW(audit_s2(h, 1, {0.0}, {Point{1e10, 0, 0}}, 1, tiny), AuditError);
}

TEST(Homogeneity, PowerSymbolsAreHomogeneous)
{
    for (const auto& name : {"heat", "poisson", "power:1.5", "evol-deriv:1:2"}) {
        const auto r = check_homogeneity(symbol_from_name(name), {0.5, 2.0, 10.0}, radial_samples(3));
        EXPECT_TRUE(r.pass) << name << " " << r.worst_violation;
    }
}

// -|xi|^2 - |xi| declared gamma = 2, lambda = 2, xi = 1:
// psi(2) = -6, 4 psi(1) = -8, defect |(-6) - (-8)| / 8 = 0.25.
TEST(Homogeneity, MixedOrderSymbolDefect)
{
    SymbolSpec s = heat_symbol();
    s.eval = [](double, const Point& xi) { return Complex(-abs_xi(xi) * abs_xi(xi) - abs_xi(xi)); };
    const auto r = check_homogeneity(s, {2.0}, {Point{1.0, 0, 0}});
    EXPECT_FALSE(r.pass);
    EXPECT_NEAR(r.worst_violation, 0.25, 1e-14);
}

TEST(Homogeneity, TimeDependentRejected)
{
    EXPECT_THROW(check_homogeneity(symbol_from_name("power-t:2"), {2.0}, radial_samples(1)), ArgumentError);
}

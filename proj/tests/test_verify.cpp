#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "pseudoheat/verify.hpp"

using namespace pseudoheat;

namespace {

EvalParams params(int D, double tau) {
    EvalParams p;
    p.D = D;
    p.tau = tau;
    return p;
}

std::vector<double> l_grid() { return {1.0, std::cosh(0.5), std::cosh(1.0), std::cosh(2.0), std::cosh(3.0)}; }

/// Mass of the D = 4 closed form done by hand:
/// 4 pi (a/pi)^{3/2} e^E int_0^inf s sinh s e^{-a s^2} ds, and
/// int_0^inf s sinh s e^{-a s^2} ds = sqrt(pi/a) e^{1/(4a)} / (4a).
double d4_mass(const EvalParams& p) {
    const double a = p.rate();
    return 4.0 * std::numbers::pi * std::pow(a / std::numbers::pi, 1.5) * std::exp(p.shift()) *
           std::sqrt(std::numbers::pi / a) * std::exp(0.25 / a) / (4.0 * a);
}

}  // namespace

TEST(SphereArea, Examples) {
    EXPECT_NEAR(sphere_area(0), 2.0, 1e-15);
    EXPECT_NEAR(sphere_area(1), 2.0 * std::numbers::pi, 1e-14);
    EXPECT_NEAR(sphere_area(2), 4.0 * std::numbers::pi, 1e-14);
    EXPECT_NEAR(sphere_area(3), 2.0 * std::numbers::pi * std::numbers::pi, 1e-13);
}

TEST(Report, EngineFailureNeverPasses) {
    VerificationReport r;
    r.residual_norm = 0.0;
    r.tolerance = 1.0;
    r.engine_failure = true;
    r.finalize();
    EXPECT_FALSE(r.passed);
    r.engine_failure = false;
    r.residual_norm = std::nan("");
    r.finalize();
    EXPECT_FALSE(r.passed);
    EXPECT_THROW(r.summary_value("missing"), DomainError);
}

TEST(Abel, RightSideAtD4) {
    // Gamma(1) (2 pi)^{-1} (a/pi)^{1/2} e^{-a s^2 + E}
    const auto p = params(4, 1.0);
    const double want = std::sqrt(0.25 / std::numbers::pi) * std::exp(-0.25 - 0.75) / (2.0 * std::numbers::pi);
    EXPECT_NEAR(abel_rhs(p, 1.0), want, 1e-15 * want);
}

TEST(Abel, D4LeftSideByHand) {
    // At D = 4 the weight is 1: int_s^inf K(s') sinh s' ds' with K = (a/pi)^{3/2} s'/sinh s' e^{-a s'^2 + E}
    // integrates to (a/pi)^{3/2} e^{E} e^{-a s^2} / (2a).
    const auto p = params(4, 0.5);
    const double a = p.rate();
    const double s = 1.3;
    const double want = std::pow(a / std::numbers::pi, 1.5) * std::exp(p.shift() - a * s * s) / (2.0 * a);
    EXPECT_NEAR(abel_lhs(p, s).value, want, 1e-9 * want);
    EXPECT_NEAR(abel_rhs(p, s), want, 1e-14 * want);
}

TEST(Abel, AllDimensionsPass) {
    for (int D = 3; D <= 7; ++D) {
        const auto r = abel_residual(params(D, 1.0), l_grid(), default_abel_tolerance(D), 2);
        EXPECT_TRUE(r.passed) << D << " residual " << r.residual_norm;
        EXPECT_EQ(r.details.size(), 5u);
    }
}

TEST(Abel, RejectsBadGrid) { EXPECT_THROW(abel_residual(params(4, 1.0), {0.5}, 1e-6), DomainError); }

TEST(RadialPde, D4FitsQuarter) {
    const auto r = radial_pde_residual(params(4, 1.0), {0.1, 1.0, 3.0, 5.0}, {0.1, 0.7, 2.0}, 1e-7, 2);
    EXPECT_TRUE(r.passed) << r.residual_norm;
    EXPECT_NEAR(r.summary_value("fitted_c"), 0.25, 1e-6);
    EXPECT_LE(r.summary_value("c_spread"), 1e-6);
}

TEST(RadialPde, D4ConstantByHand) {
    // Independent central differences on the closed D = 4 form, small step, at one point.
    const double s = 0.8, tau = 0.6;
    auto K = [](double x, double t) {
        const double a = 0.25 / t;
        return std::pow(a / std::numbers::pi, 1.5) * x / std::sinh(x) * std::exp(-a * x * x - 0.75 * t);
    };
    const double h = 1e-4;
    const double k0 = K(s, tau);
    const double kt = (K(s, tau + h) - K(s, tau - h)) / (2 * h);
    const double ks = (K(s + h, tau) - K(s - h, tau)) / (2 * h);
    const double kss = (K(s + h, tau) - 2 * k0 + K(s - h, tau)) / (h * h);
    const double c = (kt - (kss + 2.0 / std::tanh(s) * ks)) / k0;
    EXPECT_NEAR(c, 0.25, 1e-5);
}

TEST(RadialPde, SameConstantOtherDimensions) {
    for (int D : {3, 5, 6}) {
        const auto r = radial_pde_residual(params(D, 1.0), {0.1, 1.0, 3.0}, {0.1, 1.0}, 1e-5, 2);
        EXPECT_TRUE(r.passed) << D;
        EXPECT_NEAR(r.summary_value("fitted_c"), 0.25, 1e-5) << D;
    }
}

TEST(HoricyclicPde, D4Pairs) {
    std::vector<std::pair<HoricyclicPoint, HoricyclicPoint>> pairs{
        {HoricyclicPoint(1.0, {0.0, 0.0}), HoricyclicPoint(1.5, {0.3, -0.2})},
        {HoricyclicPoint(0.7, {0.1, 0.4}), HoricyclicPoint(1.9, {-0.5, 0.2})},
        {HoricyclicPoint(1.2, {0.0, 0.0}), HoricyclicPoint(0.6, {0.0, 0.8})},
    };
    const auto r = horicyclic_pde_residual(params(4, 1.0), pairs, 1e-4, 2);
    EXPECT_TRUE(r.passed) << r.residual_norm;
    const auto fixed = horicyclic_pde_residual(params(4, 1.0), pairs, 1e-4, 2, 0.25);
    EXPECT_TRUE(fixed.passed) << fixed.residual_norm;
    EXPECT_THROW(horicyclic_pde_residual(params(5, 1.0), pairs, 1e-4), DomainError);
}

TEST(ChapmanKolmogorov, D4) {
    const auto half = params(4, 0.5);
    for (double d : {0.0, 1.0}) {
        const auto r = chapman_kolmogorov(half, half, d, 1e-4);
        EXPECT_TRUE(r.passed) << d << ' ' << r.residual_norm;
    }
}

TEST(ChapmanKolmogorov, UnequalTimes) {
    const auto r = chapman_kolmogorov(params(4, 0.3), params(4, 0.9), 1.5, 1e-4);
    EXPECT_TRUE(r.passed) << r.residual_norm;
    EXPECT_THROW(chapman_kolmogorov(params(4, 0.3), params(5, 0.3), 1.0, 1e-4), DomainError);
}

TEST(Mass, D4ClosedForm) {
    for (double tau : {0.25, 0.5, 1.0, 2.0}) {
        const auto p = params(4, tau);
        EXPECT_NEAR(total_mass(p), d4_mass(p), 1e-8 * d4_mass(p)) << tau;
    }
}

TEST(Mass, Multiplicative) {
    for (int D = 3; D <= 6; ++D) {
        const auto r = mass_multiplicativity(params(D, 1.0), {0.25, 0.5, 1.0}, 1e-4, 2);
        EXPECT_TRUE(r.passed) << D << ' ' << r.residual_norm;
    }
}

TEST(Mass, D3GrowsWithTime) {
    // The D = 3 mass is not 1; it grows like exp(tau/4) in these units.
    for (double tau : {0.25, 1.0}) {
        const double M = total_mass(params(3, tau));
        EXPECT_NEAR(M, std::exp(0.25 * tau), 1e-7);
    }
    const auto r = unit_mass(params(3, 1.0), {0.25, 0.5, 1.0}, 1e-4);
    EXPECT_FALSE(r.passed);
    EXPECT_NEAR(r.residual_norm, std::exp(0.25) - 1.0, 1e-7);
}

TEST(GfuncCheck, Passes) {
    const auto r = gfunc_check({0, 1, 2, 3}, {0.1, 1.0, 3.0}, {0.25, 1.0}, 1e-6, 1e-9);
    EXPECT_TRUE(r.passed) << r.residual_norm;
    EXPECT_LE(r.summary_value("series_continuity"), 1e-9);
}

TEST(GfuncCheck, RichardsonOnKnownFunction) {
    auto f = [](long double x) { return std::exp(x); };
    for (int n = 1; n <= 5; ++n) {
        EXPECT_NEAR(richardson_derivative(f, n, 0.5, 0.3), std::exp(0.5), 1e-10);
    }
}

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "pseudoheat/kernels.hpp"

using namespace pseudoheat;

namespace {

EvalParams params(int D, double tau) {
    EvalParams p;
    p.D = D;
    p.tau = tau;
    return p;
}

/// D = 3 kernel by composite Simpson after cosh s' = cosh s + w^2, which
/// turns the weight into 2 dw / sinh s'. The integrand is smooth in w.
double d3_simpson(const EvalParams& p, double s) {
    const double a = p.rate();
    const double l = std::cosh(s);
    auto g = [&](double w) {
        const double sp = std::acosh(l + w * w);
        const double ratio = sp < 1e-8 ? 1.0 : sp / std::sinh(sp);
        return 2.0 * ratio * std::exp(-a * (sp * sp - s * s));
    };
    // Past sp^2 - s^2 = 60 / a the integrand is below e^{-60}.
    const double sp_max = std::sqrt(s * s + 60.0 / a);
    const double W = std::sqrt(std::cosh(sp_max) - l);
    const int M = 200000;
    const double h = W / M;
    double sum = g(0.0) + g(W);
    for (int j = 1; j < M; ++j) sum += (j % 2 ? 4.0 : 2.0) * g(j * h);
    const double integral = sum * h / 3.0;
    return std::numbers::sqrt2 * std::pow(a / std::numbers::pi, 1.5) * std::exp(-a * s * s + p.shift()) * integral;
}

/// d/dl of F at l = cosh s, five-point central stencil.
template <class F>
double d_dl(F&& F_of_s, double s, double h) {
    const double l = std::cosh(s);
    auto at = [&](double x) { return F_of_s(std::acosh(x)); };
    return (-at(l + 2 * h) + 8 * at(l + h) - 8 * at(l - h) + at(l - 2 * h)) / (12.0 * h);
}

}  // namespace

TEST(Params, Derived) {
    const auto p = params(4, 2.0);
    EXPECT_DOUBLE_EQ(p.rate(), 0.125);
    EXPECT_DOUBLE_EQ(p.shift(), -1.5);
    EXPECT_EQ(params(3, 0.7).shift(), 0.0);
    EXPECT_THROW(params(2, 1.0).validate(), DomainError);
    EXPECT_THROW(params(4, 0.0).validate(), DomainError);
    try {
        kernel(params(2, 1.0), 1.0);
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_STREQ(e.what(), "D must be ≥ 3");
    }
}

TEST(Kernel, D4ClosedExample) {
    const double want = std::pow(0.25 / std::numbers::pi, 1.5) / std::sinh(1.0) * std::exp(-0.25 - 0.75);
    EXPECT_NEAR(kernel(params(4, 1.0), 1.0).value, want, 1e-15 * want);
    EXPECT_NEAR(kernel(params(4, 1.0), 0.0).value, std::pow(0.25 / std::numbers::pi, 1.5) * std::exp(-0.75), 1e-16);
}

TEST(Kernel, RejectsBadDistance) {
    EXPECT_THROW(kernel(params(4, 1.0), -0.1), DomainError);
    EXPECT_THROW(kernel(params(3, 1.0), std::nan("")), DomainError);
    EXPECT_THROW(kernel_d4(params(5, 1.0), 1.0), DomainError);
    EXPECT_THROW(kernel_odd(params(3, 1.0), 1.0), DomainError);
    EXPECT_THROW(kernel_even(params(5, 1.0), 1.0), DomainError);
}

TEST(Kernel, EvenAlgebraMatchesD4) {
    for (double tau : {0.1, 0.5, 1.0, 3.0}) {
        for (double s : {0.0, 5e-4, 0.01, 0.3, 1.0, 2.5, 6.0}) {
            const double a = kernel_even(params(4, tau), s).value;
            const double b = kernel_d4(params(4, tau), s).value;
            EXPECT_NEAR(a, b, 1e-12 * b) << tau << ' ' << s;
        }
    }
}

TEST(Kernel, D3AgainstSimpsonOracle) {
    for (double tau : {0.25, 1.0, 2.0}) {
        for (double s : {0.05, 0.5, 1.0, 2.0, 4.0}) {
            const auto p = params(3, tau);
            const double oracle = d3_simpson(p, s);
            const auto k = kernel_d3(p, s);
            EXPECT_NEAR(k.value, oracle, 1e-9 * oracle) << tau << ' ' << s;
            EXPECT_LE(k.err_est, 1e-9 * k.value);
        }
    }
}

TEST(Kernel, OddFormulaReducesToD3) {
    for (double tau : {0.3, 1.0}) {
        for (double s : {0.0, 0.2, 1.0, 3.0}) {
            const double a = kernel_odd_formula(params(3, tau), s).value;
            const double b = kernel_d3(params(3, tau), s).value;
            EXPECT_NEAR(a, b, 1e-10 * b);
        }
    }
}

TEST(Kernel, DimensionRecursionEven) {
    // K_{D+2} = -(1/2pi) d/dl K_D when both use the same shift.
    for (double tau : {0.5, 1.0}) {
        const auto p6 = params(6, tau);
        for (double s : {0.5, 1.0, 2.0}) {
            auto k4 = [&](double x) {
                const double a = p6.rate();
                return std::pow(a / std::numbers::pi, 1.5) / sinhc(x) * std::exp(-a * x * x + p6.shift());
            };
            const double oracle = -d_dl(k4, s, 1e-3) / (2.0 * std::numbers::pi);
            EXPECT_NEAR(kernel(p6, s).value, oracle, 1e-8 * std::abs(oracle)) << tau << ' ' << s;
        }
    }
}

TEST(Kernel, DimensionRecursionOdd) {
    for (int D : {5, 7}) {
        const auto p = params(D, 0.8);
        auto lower = params(D - 2, 0.8);
        for (double s : {0.5, 1.0, 2.0}) {
            // Lower kernel re-evaluated with the upper dimension's shift.
            const double rescale = std::exp(p.shift() - lower.shift());
            auto k = [&](double x) { return rescale * kernel(lower, x).value; };
            const double oracle = -d_dl(k, s, 1e-3) / (2.0 * std::numbers::pi);
            EXPECT_NEAR(kernel(p, s).value, oracle, 1e-6 * std::abs(oracle)) << D << ' ' << s;
        }
    }
}

TEST(Kernel, PositiveAndDecreasing) {
    for (int D = 3; D <= 8; ++D) {
        for (double tau : {0.1, 1.0, 4.0}) {
            double previous = std::numeric_limits<double>::infinity();
            for (double s = 0.05; s <= 6.0; s += 0.35) {
                const double v = kernel(params(D, tau), s).value;
                EXPECT_GT(v, 0.0) << D << ' ' << tau << ' ' << s;
                EXPECT_LT(v, previous) << D << ' ' << tau << ' ' << s;
                previous = v;
            }
        }
    }
}

TEST(Kernel, SmallTimeMatchesFlatHeatKernel) {
    const double tau = 1e-3;
    const double s = 0.01;
    for (int D = 3; D <= 7; ++D) {
        const double n = D - 1;
        const double flat = std::pow(4.0 * std::numbers::pi * tau, -0.5 * n) * std::exp(-s * s / (4.0 * tau));
        EXPECT_NEAR(kernel(params(D, tau), s).value / flat, 1.0, 1e-2) << D;
    }
}

TEST(Kernel, ValueCarriesArguments) {
    const auto k = kernel(params(5, 0.4), 1.2);
    EXPECT_EQ(k.D, 5);
    EXPECT_EQ(k.s, 1.2);
    EXPECT_EQ(k.tau, 0.4);
    EXPECT_GE(k.err_est, 0.0);
}

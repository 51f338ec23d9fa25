#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "pseudoheat/geometry.hpp"

using namespace pseudoheat;

namespace {

HoricyclicPoint random_point(std::mt19937_64& rng, int D) {
    std::uniform_real_distribution<double> logy(-2.0, 2.0);
    std::uniform_real_distribution<double> off(-3.0, 3.0);
    std::vector<double> x(static_cast<std::size_t>(D - 2));
    for (auto& v : x) v = off(rng);
    return HoricyclicPoint(std::exp(logy(rng)), x);
}

}  // namespace

TEST(HoricyclicPoint, RejectsBadInput) {
    EXPECT_THROW(HoricyclicPoint(0.0, {0.0}), DomainError);
    EXPECT_THROW(HoricyclicPoint(-1.0, {0.0}), DomainError);
    EXPECT_THROW(HoricyclicPoint(1.0, {}), DomainError);
    EXPECT_THROW(HoricyclicPoint::on_axis(2, 1.0), DomainError);
    EXPECT_EQ(HoricyclicPoint::on_axis(5, 2.0).dimension(), 5);
}

TEST(Hyperboloid, ExampleEmbeddings) {
    const auto z3 = to_hyperboloid(HoricyclicPoint(1.0, {0.0}));
    EXPECT_DOUBLE_EQ(z3.Z()[0], 1.0);
    EXPECT_DOUBLE_EQ(z3.Z()[1], 0.0);
    EXPECT_DOUBLE_EQ(z3.Z()[2], 0.0);

    const auto z4 = to_hyperboloid(HoricyclicPoint(2.0, {0.0, 0.0}));
    EXPECT_DOUBLE_EQ(z4.Z()[0], 1.25);
    EXPECT_DOUBLE_EQ(z4.Z()[1], -0.75);

    const auto q = from_hyperboloid(HyperboloidPoint({1.25, -0.75, 0.0, 0.0}));
    EXPECT_DOUBLE_EQ(q.y(), 2.0);
    EXPECT_EQ(q.x()[0], 0.0);
}

TEST(Hyperboloid, RejectsOffSheet) {
    EXPECT_THROW(HyperboloidPoint({2.0, 0.0, 0.0}), DomainError);
    EXPECT_THROW(HyperboloidPoint({-1.0, 0.0, 0.0}), DomainError);
    // On the sheet but Z0 + Z1 = 0 is not reachable.
    EXPECT_THROW(HyperboloidPoint({1.0, -1.0, 0.0}), DomainError);
}

TEST(Hyperboloid, NearBoundaryIsFine) {
    // Z0 + Z1 small and positive: y large. The input itself carries a relative
    // error of about eps * e^{2t} in Z0 + Z1.
    const double t = 5.0;
    const auto p = HyperboloidPoint({std::cosh(t), -std::sinh(t), 0.0});
    const auto q = from_hyperboloid(p);
    EXPECT_NEAR(q.y(), std::exp(t), 1e-9 * std::exp(t));
}

TEST(Hyperboloid, RoundTripAndConstraint) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 1000; ++i) {
        const int D = 3 + i % 4;
        const auto q = random_point(rng, D);
        const auto Z = to_hyperboloid(q);
        EXPECT_LE(std::abs(Z.constraint_residual()), 1e-12 * std::max(1.0, Z.Z()[0] * Z.Z()[0]));
        const auto back = from_hyperboloid(Z);
        EXPECT_NEAR(back.y(), q.y(), 1e-12 * q.y());
        for (std::size_t k = 0; k < q.x().size(); ++k) {
            EXPECT_NEAR(back.x()[k], q.x()[k], 1e-12 * std::max(1.0, std::abs(q.x()[k])));
        }
    }
}

TEST(Distance, Examples) {
    const HoricyclicPoint a(1.0, {0.0});
    EXPECT_EQ(geodesic_distance(a, a), 0.0);
    EXPECT_NEAR(geodesic_distance(a, HoricyclicPoint(std::numbers::e, {0.0})), 1.0, 1e-15);
    EXPECT_NEAR(geodesic_distance(HoricyclicPoint(1.0, {0.0, 0.0}), HoricyclicPoint(1.0, {1.0, 1.0})),
                std::acosh(2.0), 1e-15);
}

TEST(Distance, SmallSeparationKeepsRelativeAccuracy) {
    const HoricyclicPoint a(1.0, {0.0});
    const HoricyclicPoint b(1.0, {1e-9});
    // Exact: 2 asinh(x / 2) for a horizontal offset at y = 1.
    EXPECT_NEAR(geodesic_distance(a, b), 2.0 * std::asinh(0.5e-9), 1e-24);
}

TEST(Distance, SymmetryIdentityTriangle) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 1000; ++i) {
        const int D = 3 + i % 4;
        const auto p = random_point(rng, D);
        const auto q = random_point(rng, D);
        const auto r = random_point(rng, D);
        EXPECT_EQ(geodesic_distance(p, q), geodesic_distance(q, p));
        EXPECT_EQ(geodesic_distance(p, p), 0.0);
        EXPECT_LE(geodesic_distance(p, r), geodesic_distance(p, q) + geodesic_distance(q, r) + 1e-10);
    }
}

TEST(Distance, RadialArgs) {
    const HoricyclicPoint a(1.0, {0.0});
    const HoricyclicPoint b(2.0, {1.0});
    const auto r = radial_args(a, b);
    EXPECT_NEAR(r.l, std::cosh(r.s), 1e-14 * r.l);
    EXPECT_NEAR(r.u, std::cosh(r.d), 1e-14 * r.u);
    EXPECT_GE(r.k, r.l);
    EXPECT_GE(r.l, 1.0);
}

TEST(Isometry, GeneratorsPreserveDistance) {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 300; ++i) {
        const int D = 3 + i % 4;
        const auto p = random_point(rng, D);
        const auto q = random_point(rng, D);
        const double d = geodesic_distance(p, q);
        std::vector<double> v(static_cast<std::size_t>(D - 2), 0.7);
        const std::vector<IsometryGenerator> gens{Translation{v}, Dilation{2.5}, Inversion{v, 1.3}};
        for (const auto& g : gens) {
            EXPECT_NEAR(geodesic_distance(apply_generator(g, p), apply_generator(g, q)), d, 1e-12 * std::max(1.0, d));
        }
    }
}

TEST(NormalizePair, Examples) {
    const HoricyclicPoint a(1.0, {0.0});
    const auto same = normalize_pair(a, a);
    EXPECT_TRUE(same.isometry.is_identity());
    EXPECT_EQ(same.p1, a);
    EXPECT_EQ(same.p2, a);

    const auto n = normalize_pair(a, HoricyclicPoint(1.0, {2.0}));
    EXPECT_NEAR(n.p1.x()[0], 0.0, 1e-12);
    EXPECT_NEAR(n.p2.x()[0], 0.0, 1e-12);
    EXPECT_NEAR(geodesic_distance(n.p1, n.p2), std::acosh(3.0), 1e-12);
}

TEST(NormalizePair, RandomPairs) {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 500; ++i) {
        const int D = 3 + i % 4;
        const auto p = random_point(rng, D);
        const auto q = random_point(rng, D);
        const auto n = normalize_pair(p, q);
        const double d = geodesic_distance(p, q);
        EXPECT_NEAR(geodesic_distance(n.p1, n.p2), d, 1e-12 * std::max(1.0, d));
        const double scale = std::max({1.0, n.p1.y(), n.p2.y()});
        for (std::size_t k = 0; k < n.p1.x().size(); ++k) {
            EXPECT_NEAR(n.p1.x()[k], 0.0, 1e-12 * scale);
            EXPECT_NEAR(n.p2.x()[k], 0.0, 1e-12 * scale);
        }
        // Replaying the record reproduces the images.
        const auto p1 = n.isometry.apply(p);
        EXPECT_NEAR(p1.y(), n.p1.y(), 1e-12 * n.p1.y());
    }
}

TEST(LaplaceBeltrami, Examples) {
    const HoricyclicPoint q(1.5, {0.3});
    auto one = [](const HoricyclicPoint&) { return 1.0; };
    EXPECT_NEAR(laplace_beltrami_apply(one, q, 1e-3), 0.0, 1e-9);
    auto lny = [](const HoricyclicPoint& p) { return std::log(p.y()); };
    EXPECT_NEAR(laplace_beltrami_apply(lny, q, 1e-3), -1.0, 1e-6);
    const HoricyclicPoint q5(0.8, {0.1, -0.2, 0.4});
    EXPECT_NEAR(laplace_beltrami_apply(lny, q5, 1e-4), -3.0, 1e-6);
}

TEST(LaplaceBeltrami, PowerOfHeight) {
    for (int D = 3; D <= 6; ++D) {
        for (double c : {-1.5, 0.5, 2.0}) {
            const auto q = HoricyclicPoint::on_axis(D, 1.7);
            auto f = [c](const HoricyclicPoint& p) { return std::pow(p.y(), c); };
            const double expect = (c * c - (D - 2) * c) * f(q);
            EXPECT_NEAR(laplace_beltrami_apply(f, q, 1e-4), expect, 1e-6 * std::max(1.0, std::abs(expect)));
        }
    }
}

TEST(LaplaceBeltrami, RejectsBadStep) {
    const HoricyclicPoint q(0.5, {0.0});
    auto one = [](const HoricyclicPoint&) { return 1.0; };
    EXPECT_THROW(laplace_beltrami_apply(one, q, 0.0), DomainError);
    EXPECT_THROW(laplace_beltrami_apply(one, q, 0.6), DomainError);
}

TEST(LogHeight, Examples) {
    EXPECT_EQ(log_height(HoricyclicPoint(1.0, {0.0})), 0.0);
    EXPECT_NEAR(log_height(HoricyclicPoint(std::numbers::e, {0.0})), 1.0, 1e-15);
    EXPECT_NEAR(log_height(HoricyclicPoint(std::exp(2.0), {0.0})), 2.0, 1e-15);
}

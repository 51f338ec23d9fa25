#pragma once

// Adaptive Gauss-Kronrod integration on finite and Gaussian-decaying
// semi-infinite domains, plus the inverse-square-root endpoint weight
// (cosh s - cosh d)^{-1/2} removed by the substitution s = d + v^2.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

#include "pseudoheat/error.hpp"

namespace pseudoheat {

struct QuadratureSpec {
    double rel_tol = 1e-9;
    double abs_tol = 1e-14;
    int max_subdivisions = 60;
    /// Semi-infinite domains are first cut where exp(-rate t^2) has fallen by
    /// exp(-truncation_sigma^2 / 2); tail panels then run until negligible.
    double truncation_sigma = 12.0;

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol >= 0.0)) throw DomainError("quadrature tolerances must be positive");
        if (max_subdivisions < 1) throw DomainError("max_subdivisions must be >= 1");
        if (!(truncation_sigma > 0.0)) throw DomainError("truncation_sigma must be positive");
    }
};

struct QuadratureResult {
    double value = 0.0;
    double err_est = 0.0;
    int evaluations = 0;
};

namespace detail {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
inline constexpr std::array<double, 11> kKronrodNodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
inline constexpr std::array<double, 11> kKronrodWeights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208932299218, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
// Gauss weights for the odd Kronrod nodes 1, 3, 5, 7, 9.
inline constexpr std::array<double, 5> kGaussWeights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Panel {
    double a;
    double b;
    double value;
    double err;
    bool operator<(const Panel& o) const { return err < o.err; }
};

template <class F>
Panel gauss_kronrod_21(F& f, double a, double b) {
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(centre);
    double kronrod = kKronrodWeights[10] * fc;
    double gauss = 0.0;
    double abs_sum = std::abs(kronrod);
    std::array<double, 10> f1{};
    std::array<double, 10> f2{};
    for (int j = 0; j < 10; ++j) {
        const double dx = half * kKronrodNodes[static_cast<std::size_t>(j)];
        const double lo = f(centre - dx);
        const double hi = f(centre + dx);
        f1[static_cast<std::size_t>(j)] = lo;
        f2[static_cast<std::size_t>(j)] = hi;
        kronrod += kKronrodWeights[static_cast<std::size_t>(j)] * (lo + hi);
        abs_sum += kKronrodWeights[static_cast<std::size_t>(j)] * (std::abs(lo) + std::abs(hi));
        if (j % 2 == 1) gauss += kGaussWeights[static_cast<std::size_t>(j / 2)] * (lo + hi);
    }
    const double mean = 0.5 * kronrod;
    double asc = kKronrodWeights[10] * std::abs(fc - mean);
    for (std::size_t j = 0; j < 10; ++j) {
        asc += kKronrodWeights[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
    }
    const double result = kronrod * half;
    asc *= std::abs(half);
    abs_sum *= std::abs(half);
    double err = std::abs((kronrod - gauss) * half);
    if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    err = std::max(err, 50.0 * eps * abs_sum);
    return {a, b, result, err};
}

} // namespace detail

/// Globally adaptive GK21 on [a, b]: bisects the panel with the largest error
/// until the summed estimate meets max(abs_tol, rel_tol * |value|).
template <class F>
QuadratureResult integrate_interval(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
    spec.validate();
    QuadratureResult out;
    if (a == b) return out;
    std::priority_queue<detail::Panel> heap;
    const detail::Panel first = detail::gauss_kronrod_21(f, a, b);
    heap.push(first);
    double value = first.value;
    double err = first.err;
    out.evaluations = 21;
    int splits = 0;
    while (true) {
        const double tolerance = std::max(spec.abs_tol, spec.rel_tol * std::abs(value));
        if (err <= tolerance || err == 0.0) break;
        if (splits >= spec.max_subdivisions) {
            throw NonConvergence("adaptive quadrature: subdivision limit reached on [" + std::to_string(a) +
                                     ", " + std::to_string(b) + "]",
                                 value, err);
        }
        const detail::Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const detail::Panel left = detail::gauss_kronrod_21(f, worst.a, mid);
        const detail::Panel right = detail::gauss_kronrod_21(f, mid, worst.b);
        out.evaluations += 42;
        ++splits;
        value += left.value + right.value - worst.value;
        err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum from the panels so the running updates do not leave drift behind.
    double v = 0.0;
    double e = 0.0;
    while (!heap.empty()) {
        v += heap.top().value;
        e += heap.top().err;
        heap.pop();
    }
    if (!std::isfinite(v)) throw NonConvergence("adaptive quadrature: non-finite integrand", v, e);
    out.value = v;
    out.err_est = e;
    return out;
}

/// Integral of f over [lower, inf) for |f(t)| <= C exp(-decay_rate t^2).
///
/// The main interval ends where the Gaussian envelope has dropped by
/// exp(-sigma^2/2) relative to max(lower, 0); further panels of half that width
/// follow until one contributes below 1% of the tolerance. The size of the
/// last panel is added to err_est as the tail bound.
template <class F>
QuadratureResult integrate_semi_infinite(F&& f, double lower, double decay_rate, const QuadratureSpec& spec = {}) {
    spec.validate();
    if (!(decay_rate > 0.0)) throw DomainError("decay_rate must be positive");
    const double width = spec.truncation_sigma / std::sqrt(2.0 * decay_rate);
    const double start = std::max(lower, 0.0);
    const double upper = std::max(std::sqrt(start * start + width * width), lower + 0.25 * width);
    QuadratureResult total = integrate_interval(f, lower, upper, spec);

    const double panel_width = 0.5 * width;
    double edge = upper;
    constexpr int kMaxPanels = 400;
    for (int i = 0; i < kMaxPanels; ++i) {
        QuadratureSpec panel_spec = spec;
        panel_spec.abs_tol = std::max(spec.abs_tol, 0.1 * spec.rel_tol * std::abs(total.value));
        const QuadratureResult piece = integrate_interval(f, edge, edge + panel_width, panel_spec);
        total.value += piece.value;
        total.err_est += piece.err_est;
        total.evaluations += piece.evaluations;
        edge += panel_width;
        const double tolerance = std::max(spec.abs_tol, spec.rel_tol * std::abs(total.value));
        if (std::abs(piece.value) <= 0.01 * tolerance) {
            total.err_est += std::abs(piece.value);
            return total;
        }
    }
    throw NonConvergence("semi-infinite quadrature: tail did not decay", total.value, total.err_est);
}

/// 2 sinh(x) / x style helper: sinh(h) / h with the removable point at 0.
inline double sinhc(double h) noexcept {
    if (std::abs(h) < 1e-4) return 1.0 + h * h / 6.0;
    return std::sinh(h) / h;
}

/// Integral over [d, inf) of f(s) (cosh s - cosh d)^{-1/2}, f smooth with
/// Gaussian decay of rate decay_rate in s.
///
/// With s = d + v^2 the weight times ds becomes
///   2 dv / sqrt(sinh(d + v^2/2) * sinhc(v^2/2)),
/// using cosh(d + v^2) - cosh d = 2 sinh(d + v^2/2) sinh(v^2/2). The result is
/// bounded at v = 0 for d > 0; at d = 0 it behaves like 2 sqrt(2)/v and f must
/// vanish at s = 0 for the integral to exist.
template <class F>
QuadratureResult integrate_endpoint_singular(F&& f, double d, double decay_rate, const QuadratureSpec& spec = {}) {
    if (!(d >= 0.0)) throw DomainError("endpoint d must be nonnegative");
    if (!(decay_rate > 0.0)) throw DomainError("decay_rate must be positive");
    auto integrand = [&](double v) {
        const double h = 0.5 * v * v;
        return 2.0 * f(d + v * v) / std::sqrt(std::sinh(d + h) * sinhc(h));
    };
    // Put the first truncation point where the s-envelope has decayed by
    // exp(-sigma^2/2) relative to s = d.
    const double width = spec.truncation_sigma / std::sqrt(2.0 * decay_rate);
    const double s_max = std::sqrt(d * d + width * width);
    const double v_max = std::sqrt(s_max - d);
    const double v_rate = spec.truncation_sigma * spec.truncation_sigma / (2.0 * v_max * v_max);
    return integrate_semi_infinite(integrand, 0.0, v_rate, spec);
}

struct AbelIdentityResult {
    double lhs;
    double rhs;
    double residual;
};

/// Checks  int_u^inf dl (l-u)^{-1/2} int_l^inf dk f(k) (k-l)^{-1/2} = pi int_u^inf f(k) dk
/// for |f(k)| <= C exp(-decay_rate k). Both weights are removed by square
/// substitutions (l = u + v^2, k = l + w^2); the right side uses k = u + t^2.
template <class F>
AbelIdentityResult abel_identity_check(F&& f, double u, double decay_rate, const QuadratureSpec& spec = {}) {
    if (!(u >= 1.0)) throw DomainError("abel_identity_check: u must be >= 1");
    QuadratureSpec inner = spec;
    inner.rel_tol = spec.rel_tol * 1e-2;
    auto inner_transform = [&](double l) {
        return 2.0 * integrate_semi_infinite([&](double w) { return f(l + w * w); }, 0.0, decay_rate, inner).value;
    };
    const double lhs =
        2.0 * integrate_semi_infinite([&](double v) { return inner_transform(u + v * v); }, 0.0, decay_rate, spec)
                  .value;
    const double rhs =
        2.0 * std::numbers::pi *
        integrate_semi_infinite([&](double t) { return t * f(u + t * t); }, 0.0, decay_rate, spec).value;
    return {lhs, rhs, std::abs(lhs - rhs) / std::abs(rhs)};
}

} // namespace pseudoheat

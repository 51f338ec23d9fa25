#pragma once

// Free propagator (heat kernel) on the (D-1)-dimensional pseudosphere as a
// function of the geodesic distance s, on the diffusive branch T = -i tau:
//   a = m / (2 hbar tau),  E = -hbar (D-1)(D-3) tau / (8 m).
//
//   D = 3      sqrt(2) (a/pi)^{3/2} int_s^inf ds' s' e^{-a s'^2 + E} / sqrt(cosh s' - cosh s)
//   D = 4      (a/pi)^{3/2} (s / sinh s) e^{-a s^2 + E}
//   D even     (-1/(2 pi))^{(D-2)/2} G^((D-2)/2)(s)
//   D odd      sqrt(2) (-1/(2 pi))^{(D-1)/2} int_s^inf ds' [d/ds' G^((D-3)/2)(s')] / sqrt(cosh s' - cosh s)

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "pseudoheat/error.hpp"
#include "pseudoheat/gfunc.hpp"
#include "pseudoheat/quadrature.hpp"

namespace pseudoheat {

struct EvalParams {
    int D = 4;
    double m = 0.5;
    double hbar = 1.0;
    double tau = 1.0;

    void validate() const {
        if (D < 3) throw DomainError("D must be ≥ 3");
        if (!(m > 0.0)) throw DomainError("mass m must be positive");
        if (!(hbar > 0.0)) throw DomainError("hbar must be positive");
        if (!(tau > 0.0)) throw DomainError("diffusive time tau must be positive");
    }

    /// Gaussian rate a = m / (2 hbar tau).
    double rate() const { return m / (2.0 * hbar * tau); }
    /// Exponent shift E = -(hbar (D-1)(D-3) / (8 m)) tau; exactly 0 at D = 3.
    double shift() const {
        if (D == 3) return 0.0;
        return -(hbar * (D - 1) * (D - 3) / (8.0 * m)) * tau;
    }
    double beta() const { return hbar * hbar / (4.0 * m * m) * (D - 1) * (D - 3); }
    /// hbar / 2m, the coefficient of the Laplace-Beltrami operator in the heat equation.
    double diffusivity() const { return hbar / (2.0 * m); }

    EvalParams with_tau(double t) const {
        EvalParams p = *this;
        p.tau = t;
        return p;
    }
};

struct KernelValue {
    double value = 0.0;
    double err_est = 0.0;
    int D = 0;
    double s = 0.0;
    double tau = 0.0;
};

/// Quadrature settings used by the integral-form kernels (D odd).
inline QuadratureSpec default_kernel_quadrature() {
    QuadratureSpec spec;
    spec.rel_tol = 1e-12;
    spec.abs_tol = 0.0;
    spec.max_subdivisions = 200;
    return spec;
}

namespace detail {

/// Term sets of G^(n) and d/ds G^(n), built once per order with unit (a, E).
/// Entries are immutable once inserted.
class GExpressionCache {
public:
    static GExpressionCache& instance() {
        static GExpressionCache cache;
        return cache;
    }

    GExpression iterate(int n, double rate, double shift) {
        return lookup(n).iterate.with_parameters(rate, shift);
    }
    GExpression s_derivative(int n, double rate, double shift) {
        return lookup(n).derivative.with_parameters(rate, shift);
    }

private:
    struct Entry {
        GExpression iterate;
        GExpression derivative;
    };

    const Entry& lookup(int n) {
        std::lock_guard lock(mutex_);
        auto it = entries_.find(n);
        if (it != entries_.end()) return *it->second;
        GExpression g = g_base(1.0, 0.0);
        for (int i = 0; i < n; ++i) g = apply_operator(g);
        auto entry = std::make_unique<Entry>(Entry{g, differentiate_s(g)});
        return *entries_.emplace(n, std::move(entry)).first->second;
    }

    std::mutex mutex_;
    std::map<int, std::unique_ptr<Entry>> entries_;
};

inline void check_distance(double s) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("geodesic distance s must be finite and >= 0");
}

} // namespace detail

inline KernelValue kernel_d4(const EvalParams& p, double s) {
    p.validate();
    if (p.D != 4) throw DomainError("kernel_d4 requires D = 4");
    detail::check_distance(s);
    const double a = p.rate();
    const double ratio = 1.0 / sinhc(s);  // s / sinh s
    const double value = std::pow(a / std::numbers::pi, 1.5) * ratio * std::exp(-a * s * s + p.shift());
    return {value, 0.0, p.D, s, p.tau};
}

inline KernelValue kernel_even(const EvalParams& p, double s) {
    p.validate();
    if (p.D % 2 != 0 || p.D < 4) throw DomainError("kernel_even requires even D >= 4");
    detail::check_distance(s);
    const int n = (p.D - 2) / 2;
    const GExpression g = detail::GExpressionCache::instance().iterate(n, p.rate(), p.shift());
    const double value = std::pow(-1.0 / (2.0 * std::numbers::pi), n) * g.evaluate_at(s);
    return {value, 0.0, p.D, s, p.tau};
}

inline KernelValue kernel_d3(const EvalParams& p, double s, const QuadratureSpec& spec = default_kernel_quadrature()) {
    p.validate();
    if (p.D != 3) throw DomainError("kernel_d3 requires D = 3");
    detail::check_distance(s);
    const double a = p.rate();
    // The Gaussian at the endpoint is factored out of the integrand.
    auto f = [a, s](double sigma) { return sigma * std::exp(-a * (sigma - s) * (sigma + s)); };
    const QuadratureResult r = integrate_endpoint_singular(f, s, a, spec);
    const double scale = std::numbers::sqrt2 * std::pow(a / std::numbers::pi, 1.5) * std::exp(-a * s * s + p.shift());
    return {scale * r.value, scale * r.err_est, p.D, s, p.tau};
}

/// The odd-D integral formula for any odd D >= 3 (at D = 3 it reduces to the
/// D = 3 kernel through d/ds G = -2 a s G).
inline KernelValue kernel_odd_formula(const EvalParams& p, double s,
                                      const QuadratureSpec& spec = default_kernel_quadrature()) {
    p.validate();
    if (p.D % 2 == 0) throw DomainError("odd-D formula requires odd D");
    detail::check_distance(s);
    const int n = (p.D - 3) / 2;
    const double a = p.rate();
    // Shift chosen so that the prefactor inside the integrand is exp(-a (s'^2 - s^2) + E).
    const GExpression dg = detail::GExpressionCache::instance().s_derivative(n, a, p.shift() + a * s * s);
    auto f = [&dg](double sigma) { return dg.evaluate_at(sigma); };
    const QuadratureResult r = integrate_endpoint_singular(f, s, a, spec);
    const double scale = std::numbers::sqrt2 * std::pow(-1.0 / (2.0 * std::numbers::pi), (p.D - 1) / 2) *
                         std::exp(-a * s * s);
    return {scale * r.value, std::abs(scale) * r.err_est, p.D, s, p.tau};
}

inline KernelValue kernel_odd(const EvalParams& p, double s, const QuadratureSpec& spec = default_kernel_quadrature()) {
    if (p.D % 2 == 0 || p.D < 5) throw DomainError("kernel_odd requires odd D >= 5");
    return kernel_odd_formula(p, s, spec);
}

/// Routes to the closed form for the dimension: D = 3, D = 4, even D >= 6, odd D >= 5.
inline KernelValue kernel(const EvalParams& p, double s, const QuadratureSpec& spec = default_kernel_quadrature()) {
    p.validate();
    if (p.D == 3) return kernel_d3(p, s, spec);
    if (p.D == 4) return kernel_d4(p, s);
    if (p.D % 2 == 0) return kernel_even(p, s);
    return kernel_odd(p, s, spec);
}

} // namespace pseudoheat

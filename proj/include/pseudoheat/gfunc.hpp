#pragma once

// Exact term algebra for G(s) = (a/pi)^{1/2} exp(-a s^2 + E) and its iterates
// G^(n) = [(1/sinh s) d/ds]^n G, which equal d^n G / dl^n with l = cosh s.
//
// Every iterate is a finite sum of terms
//     coeff(a) * s^p * cosh^q(s) / sinh^r(s)
// times the common Gaussian prefactor, where coeff is a polynomial in the rate a
// with exact rational coefficients and q is kept in {0, 1} by rewriting
// cosh^2 = 1 + sinh^2.

#include <cmath>
#include <compare>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "pseudoheat/error.hpp"

namespace pseudoheat {

using Rational = boost::multiprecision::cpp_rational;
using WideFloat = boost::multiprecision::cpp_bin_float_50;

/// Polynomial in the Gaussian rate a with exact rational coefficients.
class RatePolynomial {
public:
    RatePolynomial() = default;
    RatePolynomial(int degree, Rational coeff) {
        if (coeff != 0) coeffs_.emplace(degree, std::move(coeff));
    }

    const std::map<int, Rational>& coefficients() const noexcept { return coeffs_; }
    bool is_zero() const noexcept { return coeffs_.empty(); }

    RatePolynomial& operator+=(const RatePolynomial& other) {
        for (const auto& [deg, c] : other.coeffs_) {
            auto it = coeffs_.find(deg);
            if (it == coeffs_.end()) {
                coeffs_.emplace(deg, c);
            } else {
                it->second += c;
                if (it->second == 0) coeffs_.erase(it);
            }
        }
        return *this;
    }

    /// c * a^shift * this
    RatePolynomial scaled(const Rational& c, int shift = 0) const {
        RatePolynomial out;
        if (c == 0) return out;
        for (const auto& [deg, v] : coeffs_) out.coeffs_.emplace(deg + shift, v * c);
        return out;
    }

    template <class T>
    T evaluate(const T& a) const {
        T sum = 0;
        for (const auto& [deg, c] : coeffs_) {
            T term = static_cast<T>(c);
            for (int i = 0; i < deg; ++i) term *= a;
            sum += term;
        }
        return sum;
    }

    std::string str() const {
        if (coeffs_.empty()) return "0";
        std::ostringstream out;
        bool first = true;
        for (const auto& [deg, c] : coeffs_) {
            Rational mag = c < 0 ? Rational(-c) : c;
            if (first) {
                if (c < 0) out << '-';
            } else {
                out << (c < 0 ? " - " : " + ");
            }
            first = false;
            const bool unit = mag == 1;
            if (!unit || deg == 0) out << mag.str();
            if (deg > 0) {
                if (!unit) out << '*';
                out << 'a';
                if (deg > 1) out << '^' << deg;
            }
        }
        return out.str();
    }

    bool operator==(const RatePolynomial&) const = default;

private:
    std::map<int, Rational> coeffs_;
};

/// Exponents of s^p * cosh^q(s) / sinh^r(s). r is negative only for terms of
/// an explicit s-derivative (a positive power of sinh).
struct TermKey {
    int p = 0;
    int q = 0;
    int r = 0;
    auto operator<=>(const TermKey&) const = default;
};

using TermMap = std::map<TermKey, RatePolynomial>;

inline void accumulate(TermMap& terms, TermKey key, const RatePolynomial& c) {
    if (c.is_zero()) return;
    auto it = terms.find(key);
    if (it == terms.end()) {
        terms.emplace(key, c);
    } else {
        it->second += c;
        if (it->second.is_zero()) terms.erase(it);
    }
}

/// Boundary between term-algebra evaluation and the l-series near s = 0.
inline constexpr double kDefaultSMin = 1e-3;

class GExpression {
public:
    enum class Kind {
        /// G^(n)(s) itself.
        iterate,
        /// d/ds of G^(n)(s), which equals sinh(s) G^(n+1)(s).
        s_derivative,
    };

    /// Builds an expression from explicit terms. Keys must be canonical
    /// (q in {0,1}); zero coefficients are rejected.
    static GExpression from_terms(int order, TermMap terms, double rate, double shift,
                                  Kind kind = Kind::iterate) {
        if (!(rate > 0.0)) throw DomainError("Gaussian rate a must be positive");
        if (order < 0) throw DomainError("derivative order must be nonnegative");
        for (const auto& [key, c] : terms) {
            if (key.q != 0 && key.q != 1) throw DomainError("term not canonical: cosh power must be 0 or 1");
            if (key.p < 0) throw DomainError("term has negative power of s");
            if (kind == Kind::iterate && key.r < 0) throw DomainError("iterate term has negative 1/sinh power");
            if (c.is_zero()) throw DomainError("zero coefficient in term set");
        }
        if (order == 0 && kind == Kind::iterate) {
            const bool unit = terms.size() == 1 && terms.begin()->first == TermKey{} &&
                              terms.begin()->second == RatePolynomial(0, 1);
            if (!unit) throw DomainError("order-0 expression must be the single unit term");
        }
        return GExpression(order, kind, std::make_shared<const TermMap>(std::move(terms)), rate, shift);
    }

    int order() const noexcept { return order_; }
    Kind kind() const noexcept { return kind_; }
    double rate() const noexcept { return rate_; }
    double shift() const noexcept { return shift_; }
    const TermMap& terms() const noexcept { return *terms_; }
    std::size_t term_count() const noexcept { return terms_->size(); }

    /// Same term set with a different (a, E); the terms are shared.
    GExpression with_parameters(double rate, double shift) const {
        if (!(rate > 0.0)) throw DomainError("Gaussian rate a must be positive");
        return GExpression(order_, kind_, terms_, rate, shift);
    }

    /// (a/pi)^{1/2} exp(-a s^2 + E)
    double prefactor(double s) const {
        return std::sqrt(rate_ / std::numbers::pi) * std::exp(-rate_ * s * s + shift_);
    }

    /// Term sum without the Gaussian prefactor.
    ///
    /// The binary64 pass measures its own cancellation; when the bound on the
    /// rounding error exceeds 1e-13 of the result, the sum is recomputed with
    /// 50 significant digits. Near s = 0 the 1/sinh^r terms cancel to many
    /// orders of magnitude (about 1e25 at s = 1e-3 for order 5).
    double term_sum(double s) const {
        const double sh = std::sinh(s);
        const double ch = std::cosh(s);
        const double inv_sh = 1.0 / sh;
        double sum = 0.0;
        double comp = 0.0;
        double magnitude = 0.0;
        std::size_t i = 0;
        for (const auto& [key, c] : *terms_) {
            const double t = coeff_double_[i++] * std::pow(s, key.p) * (key.q == 1 ? ch : 1.0) *
                             std::pow(inv_sh, key.r);
            magnitude += std::abs(t);
            // Neumaier compensated summation.
            const double next = sum + t;
            if (std::abs(sum) >= std::abs(t)) {
                comp += (sum - next) + t;
            } else {
                comp += (t - next) + sum;
            }
            sum = next;
        }
        const double result = sum + comp;
        constexpr double per_term_rounding = 64.0 * std::numeric_limits<double>::epsilon();
        if (magnitude * per_term_rounding <= 1e-13 * std::abs(result)) return result;
        return wide_term_sum(s);
    }

    /// Term-algebra evaluation; s must be at least s_min.
    double evaluate(double s, double s_min = kDefaultSMin) const {
        if (!(s >= s_min)) {
            throw DomainError("evaluate: s below s_min; use evaluate_near_origin");
        }
        return term_sum(s) * prefactor(s);
    }

    double evaluate_near_origin(double s, double s_min = kDefaultSMin) const;

    /// Dispatches to the term algebra for s >= s_min and to the l-series below.
    double evaluate_at(double s, double s_min = kDefaultSMin) const {
        return s >= s_min ? evaluate(s, s_min) : evaluate_near_origin(s, s_min);
    }

    /// Plain-text dump: one term per line in key order, exact coefficients.
    std::string str() const {
        std::ostringstream out;
        if (kind_ == Kind::iterate) {
            out << "G^(" << order_ << ")(s)";
        } else {
            out << "d/ds G^(" << order_ << ")(s)";
        }
        out << " = (a/pi)^(1/2) * exp(-a*s^2 + E) * [\n";
        for (const auto& [key, c] : *terms_) {
            out << "  + (" << c.str() << ") * s^" << key.p << " * cosh^" << key.q << "(s) / sinh^" << key.r
                << "(s)\n";
        }
        out << "]\n";
        return out.str();
    }

private:
    GExpression(int order, Kind kind, std::shared_ptr<const TermMap> terms, double rate, double shift)
        : order_(order), kind_(kind), terms_(std::move(terms)), rate_(rate), shift_(shift) {
        coeff_double_.reserve(terms_->size());
        for (const auto& [key, c] : *terms_) coeff_double_.push_back(c.evaluate(rate_));
    }

    double wide_term_sum(double s) const {
        const WideFloat sw = s;
        const WideFloat aw = rate_;
        const WideFloat sh = boost::multiprecision::sinh(sw);
        const WideFloat ch = boost::multiprecision::cosh(sw);
        WideFloat sum = 0;
        for (const auto& [key, c] : *terms_) {
            WideFloat t = c.evaluate(aw);
            t *= boost::multiprecision::pow(sw, key.p);
            if (key.q == 1) t *= ch;
            t /= boost::multiprecision::pow(sh, key.r);
            sum += t;
        }
        return static_cast<double>(sum);
    }

    int order_;
    Kind kind_;
    std::shared_ptr<const TermMap> terms_;
    double rate_;
    double shift_;
    std::vector<double> coeff_double_;
};

/// G^(0) = (a/pi)^{1/2} exp(-a s^2 + E): a single unit term.
inline GExpression g_base(double rate, double shift) {
    if (!(rate > 0.0)) throw DomainError("g_base: rate a must be positive");
    TermMap terms;
    terms.emplace(TermKey{}, RatePolynomial(0, 1));
    return GExpression::from_terms(0, std::move(terms), rate, shift);
}

/// One application of (1/sinh s) d/ds to every term, by the product rule on
/// s^p, cosh^q, sinh^-r and the Gaussian, then canonicalization and merging.
inline TermMap apply_operator_terms(const TermMap& in) {
    TermMap out;
    for (const auto& [key, c] : in) {
        const auto [p, q, r] = key;
        if (p > 0) accumulate(out, {p - 1, q, r + 1}, c.scaled(p));
        if (q == 1) accumulate(out, {p, 0, r}, c);
        if (r != 0) {
            const RatePolynomial minus_r = c.scaled(-r);
            if (q == 0) {
                accumulate(out, {p, 1, r + 2}, minus_r);
            } else {
                accumulate(out, {p, 0, r + 2}, minus_r);
                accumulate(out, {p, 0, r}, minus_r);
            }
        }
        accumulate(out, {p + 1, q, r + 1}, c.scaled(-2, 1));
    }
    return out;
}

inline GExpression apply_operator(const GExpression& g) {
    if (g.kind() != GExpression::Kind::iterate) {
        throw DomainError("apply_operator expects an iterate G^(n)");
    }
    return GExpression::from_terms(g.order() + 1, apply_operator_terms(g.terms()), g.rate(), g.shift());
}

/// Plain d/ds of every term (no 1/sinh factor).
inline TermMap differentiate_s_terms(const TermMap& in) {
    TermMap out;
    for (const auto& [key, c] : in) {
        const auto [p, q, r] = key;
        if (p > 0) accumulate(out, {p - 1, q, r}, c.scaled(p));
        if (q == 1) accumulate(out, {p, 0, r - 1}, c);
        if (r != 0) {
            const RatePolynomial minus_r = c.scaled(-r);
            if (q == 0) {
                accumulate(out, {p, 1, r + 1}, minus_r);
            } else {
                accumulate(out, {p, 0, r + 1}, minus_r);
                accumulate(out, {p, 0, r - 1}, minus_r);
            }
        }
        accumulate(out, {p + 1, q, r}, c.scaled(-2, 1));
    }
    return out;
}

inline GExpression differentiate_s(const GExpression& g) {
    if (g.kind() != GExpression::Kind::iterate) {
        throw DomainError("differentiate_s expects an iterate G^(n)");
    }
    return GExpression::from_terms(g.order(), differentiate_s_terms(g.terms()), g.rate(), g.shift(),
                                   GExpression::Kind::s_derivative);
}

/// G^(n) built by n operator applications from g_base(rate, shift).
inline GExpression g_iterate(int n, double rate, double shift) {
    GExpression g = g_base(rate, shift);
    for (int i = 0; i < n; ++i) g = apply_operator(g);
    return g;
}

// ---------------------------------------------------------------------------
// l-series path. With w = l - 1 = cosh s - 1,
//   s^2 = v(w) = sum_{j>=1} (-1)^{j-1} 2^{j+1} w^j / (j^2 C(2j, j)),
// which is analytic at w = 0 with radius of convergence 2 (the branch point
// l = -1). exp(-a v(w)) is expanded by the power-series exponential
// recurrence and differentiated term by term.

inline constexpr int kSeriesOrderCap = 30;

/// Taylor coefficients of exp(-a v(w)) about w = 0, up to degree `order`.
inline std::vector<double> gaussian_l_series(double rate, int order) {
    std::vector<double> v(static_cast<std::size_t>(order) + 1, 0.0);
    double binom = 1.0;  // C(2j, j)
    double pow2 = 2.0;   // 2^{j+1}
    for (int j = 1; j <= order; ++j) {
        binom *= static_cast<double>(2 * j) * static_cast<double>(2 * j - 1) /
                 (static_cast<double>(j) * static_cast<double>(j));
        pow2 *= 2.0;
        const double sign = (j % 2 == 1) ? 1.0 : -1.0;
        v[static_cast<std::size_t>(j)] = sign * pow2 / (static_cast<double>(j) * j * binom);
    }
    std::vector<double> f(v.size(), 0.0);
    f[0] = 1.0;
    for (int k = 1; k <= order; ++k) {
        double acc = 0.0;
        for (int j = 1; j <= k; ++j) {
            acc += static_cast<double>(j) * (-rate * v[static_cast<std::size_t>(j)]) *
                   f[static_cast<std::size_t>(k - j)];
        }
        f[static_cast<std::size_t>(k)] = acc / static_cast<double>(k);
    }
    return f;
}

/// d^n/dl^n of exp(-a v(l - 1)) at l = 1 + w. Terms are added until they fall
/// below 1e-17 of the running sum three times in a row, or the order cap is hit.
inline double series_derivative(int n, double rate, double w) {
    const auto f = gaussian_l_series(rate, n + kSeriesOrderCap);
    double sum = 0.0;
    double wpow = 1.0;
    int quiet = 0;
    for (int k = n; k <= n + kSeriesOrderCap; ++k) {
        double falling = 1.0;  // k! / (k - n)!
        for (int i = 0; i < n; ++i) falling *= static_cast<double>(k - i);
        const double term = f[static_cast<std::size_t>(k)] * falling * wpow;
        sum += term;
        if (std::abs(term) <= 1e-17 * std::abs(sum)) {
            if (++quiet == 3) break;
        } else {
            quiet = 0;
        }
        wpow *= w;
    }
    return sum;
}

inline double GExpression::evaluate_near_origin(double s, double s_min) const {
    if (!(s >= 0.0) || s > s_min) {
        throw DomainError("evaluate_near_origin: s must lie in [0, s_min]");
    }
    const double half = std::sinh(0.5 * s);
    const double w = 2.0 * half * half;
    const double scale = std::sqrt(rate_ / std::numbers::pi) * std::exp(shift_);
    if (kind_ == Kind::iterate) {
        return scale * series_derivative(order_, rate_, w);
    }
    return scale * std::sinh(s) * series_derivative(order_ + 1, rate_, w);
}

} // namespace pseudoheat

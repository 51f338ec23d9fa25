#pragma once

// Half-space (horicyclic) model of the pseudosphere: points, the hyperboloid
// embedding, geodesic distance, distance-preserving normalization of a point
// pair onto the y-axis, and a finite-difference Laplace-Beltrami operator.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pseudoheat/error.hpp"

namespace pseudoheat {

/// Point q = (y, x^1..x^{D-2}) with y > 0. The ambient dimension D is x.size() + 2.
class HoricyclicPoint {
public:
    HoricyclicPoint(double y, std::vector<double> x) : y_(y), x_(std::move(x)) {
        if (!(y_ > 0.0) || !std::isfinite(y_)) {
            throw DomainError("horicyclic point requires finite y > 0");
        }
        if (x_.empty()) {
            throw DomainError("horicyclic point requires D >= 3 (at least one x component)");
        }
        for (double c : x_) {
            if (!std::isfinite(c)) throw DomainError("horicyclic x components must be finite");
        }
    }

    /// Origin-line point (y, 0, ..., 0) for ambient dimension D.
    static HoricyclicPoint on_axis(int D, double y) {
        if (D < 3) throw DomainError("D must be ≥ 3");
        return HoricyclicPoint(y, std::vector<double>(static_cast<std::size_t>(D - 2), 0.0));
    }

    double y() const noexcept { return y_; }
    std::span<const double> x() const noexcept { return x_; }
    int dimension() const noexcept { return static_cast<int>(x_.size()) + 2; }

    bool operator==(const HoricyclicPoint&) const = default;

private:
    double y_;
    std::vector<double> x_;
};

/// Point Z on the upper sheet (Z^0)^2 - sum (Z^i)^2 = 1, Z^0 > 0.
class HyperboloidPoint {
public:
    explicit HyperboloidPoint(std::vector<double> Z) : Z_(std::move(Z)) {
        if (Z_.size() < 3) throw DomainError("hyperboloid point requires D >= 3 coordinates");
        if (!(Z_[0] > 0.0)) throw DomainError("hyperboloid point must lie on the upper sheet (Z0 > 0)");
        // Rounding in the quadratic form grows with Z0^2, so the 1e-12 bound is
        // applied on the scale max(1, Z0^2).
        const double scale = std::max(1.0, Z_[0] * Z_[0]);
        if (std::abs(constraint_residual()) > 1e-12 * scale) {
            throw DomainError("hyperboloid point violates (Z0)^2 - sum(Zi)^2 = 1");
        }
    }

    std::span<const double> Z() const noexcept { return Z_; }
    int dimension() const noexcept { return static_cast<int>(Z_.size()); }

    /// (Z0 - Z1)(Z0 + Z1) - sum_{i>=2} (Zi)^2 - 1, evaluated in factored form.
    double constraint_residual() const noexcept {
        double sum = (Z_[0] - Z_[1]) * (Z_[0] + Z_[1]) - 1.0;
        for (std::size_t i = 2; i < Z_.size(); ++i) sum -= Z_[i] * Z_[i];
        return sum;
    }

private:
    std::vector<double> Z_;
};

inline HyperboloidPoint to_hyperboloid(const HoricyclicPoint& q) {
    const double y = q.y();
    double r2 = 0.0;
    for (double c : q.x()) r2 += c * c;
    // Z0 + Z1 = 1/y and (Z0 - Z1)(Z0 + Z1) = 1 + |x|^2 / y^2.
    const double plus = 1.0 / y;
    const double minus = y + r2 / y;
    std::vector<double> Z;
    Z.reserve(q.x().size() + 2);
    Z.push_back(0.5 * (plus + minus));
    Z.push_back(0.5 * (plus - minus));
    for (double c : q.x()) Z.push_back(c / y);
    return HyperboloidPoint(std::move(Z));
}

inline HoricyclicPoint from_hyperboloid(const HyperboloidPoint& p) {
    const auto Z = p.Z();
    const double plus = Z[0] + Z[1];
    if (!(plus > 0.0)) {
        throw DomainError("Z0 + Z1 <= 0: point not representable with y > 0");
    }
    const double y = 1.0 / plus;
    std::vector<double> x(Z.begin() + 2, Z.end());
    for (double& c : x) c *= y;
    return HoricyclicPoint(y, std::move(x));
}

/// k - 1 = (R^2 + (y1 - y2)^2) / (2 y1 y2), where k = cosh of the distance.
inline double cosh_distance_minus_one(const HoricyclicPoint& q1, const HoricyclicPoint& q2) {
    if (q1.dimension() != q2.dimension()) throw DomainError("points have different dimensions");
    double r2 = 0.0;
    for (std::size_t i = 0; i < q1.x().size(); ++i) {
        const double dx = q2.x()[i] - q1.x()[i];
        r2 += dx * dx;
    }
    const double dy = q2.y() - q1.y();
    return (r2 + dy * dy) / (2.0 * q1.y() * q2.y());
}

/// Inverse of cosh(d) - 1 = w without cancellation: d = 2 asinh(sqrt(w / 2)).
inline double distance_from_cosh_minus_one(double w) noexcept {
    if (w <= 0.0) return 0.0;
    return 2.0 * std::asinh(std::sqrt(0.5 * w));
}

inline double geodesic_distance(const HoricyclicPoint& q1, const HoricyclicPoint& q2) {
    return distance_from_cosh_minus_one(cosh_distance_minus_one(q1, q2));
}

/// The chain of radial variables attached to an endpoint pair: s is the
/// purely vertical separation |ln(y2/y1)| with l = cosh s, k = cosh d with d
/// the full geodesic distance, and u = cosh d.
struct RadialArgs {
    double s;
    double l;
    double k;
    double u;
    double d;
};

inline RadialArgs radial_args(const HoricyclicPoint& q1, const HoricyclicPoint& q2) {
    RadialArgs r{};
    r.s = std::abs(std::log(q2.y() / q1.y()));
    r.l = std::cosh(r.s);
    r.d = geodesic_distance(q1, q2);
    r.k = 1.0 + cosh_distance_minus_one(q1, q2);
    r.u = r.k;
    return r;
}

inline double log_height(const HoricyclicPoint& q) { return std::log(q.y()); }

// ---------------------------------------------------------------------------
// Isometries of the half-space metric (dy^2 + dx^2) / y^2.

struct Translation {
    std::vector<double> shift;
};

struct Dilation {
    double factor;
};

/// Inversion in the sphere of the given radius centred on the boundary point (0, center).
struct Inversion {
    std::vector<double> center;
    double radius;
};

using IsometryGenerator = std::variant<Translation, Dilation, Inversion>;

inline HoricyclicPoint apply_generator(const IsometryGenerator& g, const HoricyclicPoint& q) {
    std::vector<double> x(q.x().begin(), q.x().end());
    double y = q.y();
    if (const auto* t = std::get_if<Translation>(&g)) {
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += t->shift[i];
    } else if (const auto* dl = std::get_if<Dilation>(&g)) {
        y *= dl->factor;
        for (double& c : x) c *= dl->factor;
    } else {
        const auto& inv = std::get<Inversion>(g);
        double n2 = y * y;
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] -= inv.center[i];
            n2 += x[i] * x[i];
        }
        const double scale = inv.radius * inv.radius / n2;
        y *= scale;
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = inv.center[i] + scale * x[i];
    }
    return HoricyclicPoint(y, std::move(x));
}

/// Ordered composition of generators; apply() replays them first to last.
struct IsometryRecord {
    std::vector<IsometryGenerator> generators;

    HoricyclicPoint apply(HoricyclicPoint q) const {
        for (const auto& g : generators) q = apply_generator(g, q);
        return q;
    }
    bool is_identity() const noexcept { return generators.empty(); }
};

struct NormalizedPair {
    HoricyclicPoint p1;
    HoricyclicPoint p2;
    IsometryRecord isometry;
};

/// Moves an endpoint pair onto the y-axis with an isometry of the half-space.
///
/// q1 is translated to x = 0. If q2 is then off the axis, the geodesic through
/// both points is a half-circle orthogonal to the boundary; inverting in a
/// sphere centred at one of its boundary endpoints sends it to a vertical
/// line, and a final translation puts that line on the axis. The inversion
/// radius is chosen so that q1 lands at height 1.
inline NormalizedPair normalize_pair(const HoricyclicPoint& q1, const HoricyclicPoint& q2) {
    if (q1.dimension() != q2.dimension()) throw DomainError("points have different dimensions");
    const std::size_t n = q1.x().size();
    IsometryRecord record;

    bool centred = true;
    for (double c : q1.x()) centred = centred && c == 0.0;
    if (!centred) {
        std::vector<double> shift(n);
        for (std::size_t i = 0; i < n; ++i) shift[i] = -q1.x()[i];
        record.generators.emplace_back(Translation{std::move(shift)});
    }
    HoricyclicPoint a = record.apply(q1);
    HoricyclicPoint b = record.apply(q2);

    double rho2 = 0.0;
    for (double c : b.x()) rho2 += c * c;
    if (rho2 == 0.0) {
        return {std::move(a), std::move(b), std::move(record)};
    }

    const double rho = std::sqrt(rho2);
    std::vector<double> dir(n);
    for (std::size_t i = 0; i < n; ++i) dir[i] = b.x()[i] / rho;

    // Geodesic circle centre c on the boundary line through 0 along dir, radius R.
    const double y1 = a.y();
    const double y2 = b.y();
    const double c = ((rho - y1) * (rho + y1) + y2 * y2) / (2.0 * rho);
    const double R = std::hypot(c, y1);
    // Endpoint e = c - R, written without cancellation for c > 0.
    const double e = c > 0.0 ? -(y1 * y1) / (c + R) : c - R;

    std::vector<double> center(n);
    for (std::size_t i = 0; i < n; ++i) center[i] = e * dir[i];
    const double dist2 = e * e + y1 * y1;  // |q1 - centre|^2
    const double radius = std::sqrt(dist2 / y1);
    record.generators.emplace_back(Inversion{std::move(center), radius});

    a = apply_generator(record.generators.back(), a);
    b = apply_generator(record.generators.back(), b);

    std::vector<double> shift(a.x().begin(), a.x().end());
    for (double& v : shift) v = -v;
    record.generators.emplace_back(Translation{std::move(shift)});
    a = apply_generator(record.generators.back(), a);
    b = apply_generator(record.generators.back(), b);
    return {std::move(a), std::move(b), std::move(record)};
}

// ---------------------------------------------------------------------------
// Laplace-Beltrami operator y^2 (d_yy + sum d_xx) - (D - 3) y d_y.

inline double default_fd_step(const HoricyclicPoint& q) { return 1e-4 * std::max(1.0, q.y()); }

/// Second-order central-difference application of the Laplace-Beltrami
/// operator to f at q, using the 2(D-1)+1 point stencil of spacing h.
template <class Field>
double laplace_beltrami_apply(Field&& f, const HoricyclicPoint& q, double h) {
    if (!(h > 0.0)) throw DomainError("finite-difference step must be positive");
    if (!(q.y() - h > 0.0)) throw DomainError("stencil leaves the half-space (y - h <= 0)");
    const int D = q.dimension();
    const double y = q.y();
    std::vector<double> x(q.x().begin(), q.x().end());

    const double f0 = f(q);
    const double fyp = f(HoricyclicPoint(y + h, x));
    const double fym = f(HoricyclicPoint(y - h, x));
    double second = fyp - 2.0 * f0 + fym;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        x[i] = xi + h;
        const double fp = f(HoricyclicPoint(y, x));
        x[i] = xi - h;
        const double fm = f(HoricyclicPoint(y, x));
        x[i] = xi;
        second += fp - 2.0 * f0 + fm;
    }
    const double dy = (fyp - fym) / (2.0 * h);
    return y * y * second / (h * h) - static_cast<double>(D - 3) * y * dy;
}

} // namespace pseudoheat

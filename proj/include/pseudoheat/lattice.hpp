#pragma once

// Time-sliced path integral for the propagator in horicyclic coordinates,
// diffusive branch. N slices of width eps = tau / N, a_eps = m / (2 hbar eps).
//
// Slice factor between q_n = (y_n, x_n) and q_{n+1}, as a density in dV(q_{n+1}):
//   (a_eps/pi)^{(D-1)/2} exp{-a_eps [Y(y_n, y_{n+1}) + |x_{n+1} - x_n|^2 / (y_n y_{n+1})]} e^{E eps / tau}
// with intermediate points integrated over dV = dy d^{D-2}x / y^{D-1} = dz d^{D-2}x / y^{D-2}, z = ln y.
//
// Y = (ln y_{n+1} - ln y_n)^2 by default. The alternative (y_{n+1} - y_n)^2 / (y_n y_{n+1})
// = 4 sinh^2(dz/2) is kept selectable; it converges to exp(-tau hbar / 8m) times the
// closed form rather than to the closed form (see README).
//
// The x-sector is Gaussian and integrates in closed form: with S = sum_n y_n y_{n+1}
// and R = x'' - x',
//   int prod dx = (y'y'')^{(D-2)/2} prod_r y_r^{D-2} prod_n (pi/a_eps)^{(D-2)/2} (a_eps/(pi S))^{(D-2)/2} e^{-a_eps R^2/S},
// so the y_r^{D-2} cancel against the measure and only the z-chain remains.
// The Monte Carlo estimator samples that chain as an exact Brownian bridge.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "pseudoheat/error.hpp"
#include "pseudoheat/geometry.hpp"
#include "pseudoheat/kernels.hpp"
#include "pseudoheat/parallel.hpp"
#include "pseudoheat/quadrature.hpp"
#include "pseudoheat/verify.hpp"

namespace pseudoheat {

enum class LatticeMethod { monte_carlo, nested_quadrature };
enum class YDiscretization { logarithmic, symmetric };

struct LatticeSpec {
    int N = 8;
    LatticeMethod method = LatticeMethod::monte_carlo;
    std::int64_t samples = 100000;
    std::uint64_t seed = 1;
    YDiscretization y_form = YDiscretization::logarithmic;
    int threads = 1;
    /// Nested quadrature relative tolerance.
    double rel_tol = 1e-4;

    static constexpr std::int64_t kMinSamples = 10000;
    static constexpr int kMaxMonteCarloSlices = 64;
    static constexpr int kMaxNestedSlices = 3;
    static constexpr std::int64_t kBlock = 4096;

    void validate(int D) const {
        if (N < 1) throw DomainError("lattice: N must be >= 1");
        if (D != 3 && D != 4) throw DomainError("lattice oracle supports D = 3 and 4");
        if (method == LatticeMethod::monte_carlo) {
            if (N > kMaxMonteCarloSlices) throw DomainError("lattice: Monte Carlo supports N <= 64");
            if (samples < kMinSamples) throw DomainError("lattice: at least 10000 samples required");
        } else {
            if (D != 3) throw DomainError("lattice: nested quadrature supports D = 3 only");
            if (N > kMaxNestedSlices) throw DomainError("lattice: nested quadrature supports N <= 3");
            if (!(rel_tol > 0.0)) throw DomainError("lattice: rel_tol must be positive");
        }
    }
};

struct LatticeValue {
    double value = 0.0;
    double err_est = 0.0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Seed of block b for slice count N: independent of how blocks map to threads.
inline std::uint64_t block_seed(std::uint64_t seed, int N, std::uint64_t block) {
    return splitmix64(splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(N)) ^ block);
}

struct Moments {
    double sum = 0.0;
    double sum_sq = 0.0;
};

/// Pairwise reduction in index order.
inline Moments pairwise_sum(const std::vector<Moments>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return v[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    const Moments a = pairwise_sum(v, lo, mid);
    const Moments b = pairwise_sum(v, mid, hi);
    return {a.sum + b.sum, a.sum_sq + b.sum_sq};
}

inline double y_action(YDiscretization form, double dz) {
    if (form == YDiscretization::logarithmic) return dz * dz;
    const double h = std::sinh(0.5 * dz);
    return 4.0 * h * h;
}

struct SliceSetup {
    int D;
    int N;
    double a_eps;
    double z0;
    double zN;
    double R2;  // |x'' - x'|^2
    double shift;
};

inline SliceSetup make_setup(const EvalParams& p, const HoricyclicPoint& q1, const HoricyclicPoint& q2, int N) {
    double r2 = 0.0;
    for (std::size_t i = 0; i < q1.x().size(); ++i) {
        const double dx = q2.x()[i] - q1.x()[i];
        r2 += dx * dx;
    }
    const EvalParams slice = p.with_tau(p.tau / N);
    return {p.D, N, slice.rate(), std::log(q1.y()), std::log(q2.y()), r2, p.shift()};
}

/// x-integrated weight of one z-path, excluding the free z-chain normalization.
inline double x_sector(const SliceSetup& st, const std::vector<double>& z) {
    double S = 0.0;
    for (int n = 0; n < st.N; ++n) S += std::exp(z[static_cast<std::size_t>(n)] + z[static_cast<std::size_t>(n) + 1]);
    return std::pow(st.a_eps / (std::numbers::pi * S), 0.5 * (st.D - 2)) * std::exp(-st.a_eps * st.R2 / S);
}

inline LatticeValue lattice_monte_carlo(const SliceSetup& st, const LatticeSpec& spec) {
    const double dz_total = st.zN - st.z0;
    const double a_tau = st.a_eps / st.N;
    // Free z-chain integrated over the intermediate z: (a_tau/pi)^{1/2} exp(-a_tau dz^2).
    const double chain = std::sqrt(a_tau / std::numbers::pi) * std::exp(-a_tau * dz_total * dz_total);
    const double prefactor = std::exp(0.5 * (st.D - 2) * (st.z0 + st.zN)) * chain * std::exp(st.shift);

    const auto blocks = static_cast<std::size_t>((spec.samples + LatticeSpec::kBlock - 1) / LatticeSpec::kBlock);
    std::vector<Moments> partial(blocks);
    const double step_sd = std::sqrt(0.5 / st.a_eps);
    parallel_for(blocks, spec.threads, [&](std::size_t b) {
        std::mt19937_64 rng(block_seed(spec.seed, st.N, b));
        std::normal_distribution<double> normal(0.0, step_sd);
        const std::int64_t first = static_cast<std::int64_t>(b) * LatticeSpec::kBlock;
        const std::int64_t count = std::min<std::int64_t>(LatticeSpec::kBlock, spec.samples - first);
        std::vector<double> walk(static_cast<std::size_t>(st.N) + 1);
        std::vector<double> z(static_cast<std::size_t>(st.N) + 1);
        Moments m;
        for (std::int64_t k = 0; k < count; ++k) {
            walk[0] = 0.0;
            for (int n = 1; n <= st.N; ++n) walk[static_cast<std::size_t>(n)] = walk[static_cast<std::size_t>(n) - 1] + normal(rng);
            const double end = walk[static_cast<std::size_t>(st.N)];
            for (int n = 0; n <= st.N; ++n) {
                const double frac = static_cast<double>(n) / st.N;
                z[static_cast<std::size_t>(n)] = st.z0 + walk[static_cast<std::size_t>(n)] + frac * (dz_total - end);
            }
            double w = x_sector(st, z);
            if (spec.y_form == YDiscretization::symmetric) {
                double excess = 0.0;
                for (int n = 0; n < st.N; ++n) {
                    const double dz = z[static_cast<std::size_t>(n) + 1] - z[static_cast<std::size_t>(n)];
                    excess += y_action(YDiscretization::symmetric, dz) - dz * dz;
                }
                w *= std::exp(-st.a_eps * excess);
            }
            m.sum += w;
            m.sum_sq += w * w;
        }
        partial[b] = m;
    });
    const Moments total = pairwise_sum(partial, 0, partial.size());
    const double n = static_cast<double>(spec.samples);
    const double mean = total.sum / n;
    const double var = std::max(0.0, total.sum_sq / n - mean * mean) * n / (n - 1.0);
    return {prefactor * mean, prefactor * std::sqrt(var / n)};
}

/// Direct nested integration over every intermediate (z_r, x_r), D = 3.
inline LatticeValue lattice_nested(const SliceSetup& st, double x1, double x2, const LatticeSpec& spec) {
    const int inner = st.N - 1;
    const double norm = std::sqrt(st.a_eps / std::numbers::pi);  // per coordinate, D - 1 = 2 coordinates
    std::vector<double> z(static_cast<std::size_t>(st.N) + 1);
    std::vector<double> x(static_cast<std::size_t>(st.N) + 1);
    z.front() = st.z0;
    z.back() = st.zN;
    x.front() = x1;
    x.back() = x2;
    auto integrand = [&]() {
        double action = 0.0;
        double measure = 1.0;
        for (int n = 0; n < st.N; ++n) {
            const auto un = static_cast<std::size_t>(n);
            const double dz = z[un + 1] - z[un];
            const double dx = x[un + 1] - x[un];
            action += y_action(spec.y_form, dz) + dx * dx * std::exp(-(z[un] + z[un + 1]));
        }
        for (int r = 1; r < st.N; ++r) measure *= std::exp(-z[static_cast<std::size_t>(r)]);
        return std::pow(norm * norm, st.N) * measure * std::exp(-st.a_eps * action) * std::exp(st.shift);
    };
    if (inner == 0) return {integrand(), 0.0};

    QuadratureSpec qs;
    qs.abs_tol = 0.0;
    qs.max_subdivisions = 200;
    constexpr double kHalfWidth = 8.0;  // in conditional standard deviations
    // Coordinate `level` (even: z_r, odd: x_r) is integrated over a window around the
    // bridge mean given q_{r-1} and the final point; the window is wide enough that the
    // discarded Gaussian mass is far below the tolerance.
    std::function<double(int)> level_integral = [&](int level) -> double {
        if (level == 2 * inner) return integrand();
        const int r = level / 2 + 1;
        const auto ur = static_cast<std::size_t>(r);
        const bool is_z = level % 2 == 0;
        const double left = static_cast<double>(st.N - r + 1);
        const double sd_z = std::sqrt((left - 1.0) / left / (2.0 * st.a_eps));
        double centre, half;
        if (is_z) {
            centre = z[ur - 1] + (st.zN - z[ur - 1]) / left;
            half = kHalfWidth * sd_z;
        } else {
            centre = x[ur - 1] + (x2 - x[ur - 1]) / left;
            const double yscale = std::exp(std::max({z[ur - 1], z[ur], st.zN}));
            half = kHalfWidth * sd_z * yscale * 1.5;
        }
        QuadratureSpec local = qs;
        local.rel_tol = level == 0 ? spec.rel_tol : 0.1 * spec.rel_tol;
        auto f = [&](double u) {
            (is_z ? z : x)[ur] = u;
            return level_integral(level + 1);
        };
        return integrate_interval(f, centre - half, centre + half, local).value;
    };
    const double value = level_integral(0);
    return {value, spec.rel_tol * std::abs(value)};
}

} // namespace detail

/// Closed single-slice value: (a/pi)^{(D-1)/2} exp{-a [Y + R^2/(y'y'')]} e^E.
inline double lattice_single_slice(const EvalParams& p, const HoricyclicPoint& q1, const HoricyclicPoint& q2,
                                   YDiscretization form = YDiscretization::logarithmic) {
    const auto st = detail::make_setup(p, q1, q2, 1);
    const double dz = st.zN - st.z0;
    return std::pow(st.a_eps / std::numbers::pi, 0.5 * (p.D - 1)) *
           std::exp(-st.a_eps * (detail::y_action(form, dz) + st.R2 / (q1.y() * q2.y())) + st.shift);
}

inline LatticeValue lattice_kernel(const EvalParams& p, const HoricyclicPoint& q1, const HoricyclicPoint& q2,
                                   const LatticeSpec& spec) {
    p.validate();
    spec.validate(p.D);
    if (q1.dimension() != p.D || q2.dimension() != p.D) throw DomainError("lattice: point dimension does not match D");
    if (spec.N == 1) return {lattice_single_slice(p, q1, q2, spec.y_form), 0.0};
    const auto st = detail::make_setup(p, q1, q2, spec.N);
    if (spec.method == LatticeMethod::nested_quadrature) return detail::lattice_nested(st, q1.x()[0], q2.x()[0], spec);
    return detail::lattice_monte_carlo(st, spec);
}

struct OracleRow {
    int N;
    double lattice_value;
    double err_est;
    double closed_value;
    double rel_dev;
};

/// Least-squares slope of -log|rel_dev| against log N.
inline double fit_convergence_order(const std::vector<OracleRow>& rows) {
    if (rows.size() < 2) throw DomainError("convergence fit needs at least two rows");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& r : rows) {
        const double x = std::log(static_cast<double>(r.N));
        const double y = -std::log(std::abs(r.rel_dev));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(rows.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline std::vector<OracleRow> lattice_convergence(const EvalParams& p, const HoricyclicPoint& q1,
                                                  const HoricyclicPoint& q2, const std::vector<int>& Ns,
                                                  const LatticeSpec& base) {
    const double closed = kernel(p, geodesic_distance(q1, q2)).value;
    std::vector<OracleRow> rows;
    for (int N : Ns) {
        LatticeSpec spec = base;
        spec.N = N;
        const LatticeValue v = lattice_kernel(p, q1, q2, spec);
        rows.push_back({N, v.value, v.err_est, closed, (v.value - closed) / closed});
    }
    return rows;
}

/// Integrates the closed-form kernel over the x-offset R and compares with
/// (y'y'')^{(D-2)/2} (a/pi)^{1/2} exp(-a (z'' - z')^2 + E).
/// With R = 2 sqrt(y'y'') sinh t, cosh d - 1 = 2 sinh^2(dz/2) + 2 sinh^2 t.
inline VerificationReport x_marginal_check(const EvalParams& p, double y1, double y2, double tolerance = 1e-5) {
    p.validate();
    if (p.D > 6) throw DomainError("x_marginal_check supports D = 3..6");
    if (!(y1 > 0.0) || !(y2 > 0.0)) throw DomainError("x_marginal_check: heights must be positive");
    VerificationReport rep;
    rep.check_name = "x-marginal";
    rep.D = p.D;
    rep.tau = {p.tau};
    rep.grid = "y1=" + std::to_string(y1) + " y2=" + std::to_string(y2);
    rep.tolerance = tolerance;
    const double P = y1 * y2;
    const double dz = std::log(y2 / y1);
    const double hz = std::sinh(0.5 * dz);
    const double base = 2.0 * hz * hz;
    QuadratureSpec outer;
    outer.rel_tol = 1e-10;
    outer.abs_tol = 0.0;
    outer.max_subdivisions = 200;
    try {
        auto f = [&](double t) {
            const double st = std::sinh(t);
            const double d = distance_from_cosh_minus_one(base + 2.0 * st * st);
            const double R = 2.0 * std::sqrt(P) * st;
            return std::pow(R, p.D - 3) * kernel(p, d).value * 2.0 * std::sqrt(P) * std::cosh(t);
        };
        const double lhs = sphere_area(p.D - 3) * integrate_semi_infinite(f, 0.0, p.rate(), outer).value;
        const double rhs = std::pow(P, 0.5 * (p.D - 2)) * std::sqrt(p.rate() / std::numbers::pi) *
                           std::exp(-p.rate() * dz * dz + p.shift());
        rep.residual_norm = std::abs(lhs - rhs) / std::abs(rhs);
        rep.details.push_back({{{"y1", y1}, {"y2", y2}, {"x_integral", lhs}, {"free_z_kernel", rhs}}, ""});
    } catch (const NonConvergence& e) {
        rep.engine_failure = true;
        rep.details.push_back({{{"y1", y1}, {"y2", y2}}, e.what()});
    }
    rep.finalize();
    return rep;
}

} // namespace pseudoheat

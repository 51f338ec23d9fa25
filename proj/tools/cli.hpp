#pragma once

// Command layer of the pseudoheat tool. Each command writes to a stream and
// returns its exit status, so tests can drive it without a subprocess.

#include <cstdio>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pseudoheat/error.hpp"
#include "pseudoheat/geometry.hpp"
#include "pseudoheat/kernels.hpp"
#include "pseudoheat/lattice.hpp"
#include "pseudoheat/parallel.hpp"
#include "pseudoheat/verify.hpp"

namespace pseudoheat::cli {

using Json = nlohmann::ordered_json;

enum Exit : int { kOk = 0, kVerifyFailed = 1, kUsage = 2, kNonConvergence = 3 };

inline constexpr double kDefaultRelTol = 1e-9;

struct Grid {
    double start = 0.0;
    double stop = 0.0;
    int count = 1;

    std::vector<double> values() const {
        std::vector<double> v(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) {
            v[static_cast<std::size_t>(i)] = count == 1 ? start : start + (stop - start) * i / (count - 1);
        }
        return v;
    }
};

inline Grid parse_grid(const std::string& text) {
    std::vector<double> parts;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) parts.push_back(std::stod(item));
    if (parts.size() != 3) throw DomainError("grid must be start,stop,count");
    Grid g{parts[0], parts[1], static_cast<int>(parts[2])};
    if (g.count < 1 || static_cast<double>(g.count) != parts[2]) throw DomainError("grid count must be an integer >= 1");
    if (g.stop < g.start) throw DomainError("grid stop must be >= start");
    return g;
}

struct RunConfig {
    std::string command;
    int D = 4;
    std::vector<int> dims{3, 4};
    double m = 0.5;
    double hbar = 1.0;
    std::vector<double> tau{1.0};
    std::optional<double> s;
    std::optional<std::string> s_grid;
    std::optional<std::string> tau_grid;
    std::optional<double> y1, y2;
    std::vector<double> x1, x2;
    std::optional<double> tolerance;
    double rel_tol = kDefaultRelTol;
    std::string format = "csv";
    std::string suite;
    std::vector<int> slices{2, 4, 8, 16, 32};
    std::int64_t samples = 200000;
    std::uint64_t seed = 42;
    std::string method = "mc";
    std::string y_form = "log";
    int threads = 0;

    EvalParams params(int dim, double t) const {
        EvalParams p;
        p.D = dim;
        p.m = m;
        p.hbar = hbar;
        p.tau = t;
        p.validate();
        return p;
    }
};

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline Json header(const RunConfig& c) {
    Json h;
    h["command"] = c.command;
    h["hbar"] = c.hbar;
    h["m"] = c.m;
    h["rel_tol"] = c.rel_tol;
    h["threads"] = resolve_threads(c.threads);
    return h;
}

inline HoricyclicPoint make_point(int D, double y, std::vector<double> x) {
    if (D < 3) throw DomainError("D must be ≥ 3");
    if (x.empty()) x.push_back(0.0);
    if (static_cast<int>(x.size()) == 1 && D > 3) x.resize(static_cast<std::size_t>(D - 2), 0.0);
    if (static_cast<int>(x.size()) != D - 2) throw DomainError("point needs D - 2 x components");
    return HoricyclicPoint(y, std::move(x));
}

inline QuadratureSpec kernel_spec(const RunConfig& c) {
    QuadratureSpec q = default_kernel_quadrature();
    q.rel_tol = std::min(q.rel_tol, c.rel_tol);
    return q;
}

// --------------------------------------------------------------------------

inline int cmd_eval(const RunConfig& c, std::ostream& out) {
    if (c.tau.size() != 1) throw DomainError("eval takes a single --tau");
    const EvalParams p = c.params(c.D, c.tau.front());
    double s = 0.0;
    if (c.y1 || c.y2) {
        if (!c.y1 || !c.y2) throw DomainError("point pair needs both --y1 and --y2");
        s = geodesic_distance(make_point(c.D, *c.y1, c.x1), make_point(c.D, *c.y2, c.x2));
    } else if (c.s) {
        s = *c.s;
    } else {
        throw DomainError("eval needs --s or a point pair");
    }
    const KernelValue k = kernel(p, s, kernel_spec(c));
    if (c.format == "json") {
        Json doc;
        doc["header"] = header(c);
        doc["records"] = Json::array({{{"D", c.D}, {"tau", p.tau}, {"s", s}, {"value", k.value}, {"err_est", k.err_est}}});
        out << doc.dump(2) << '\n';
    } else {
        out << "D,tau,s,value,err_est\n"
            << c.D << ',' << fmt(p.tau) << ',' << fmt(s) << ',' << fmt(k.value) << ',' << fmt(k.err_est) << '\n';
    }
    return kOk;
}

inline int cmd_table(const RunConfig& c, std::ostream& out) {
    if (!c.s_grid) throw DomainError("table needs --s-grid start,stop,count");
    const std::vector<double> svals = parse_grid(*c.s_grid).values();
    const std::vector<double> tvals = c.tau_grid ? parse_grid(*c.tau_grid).values() : c.tau;
    c.params(c.D, tvals.front());
    struct Cell {
        double tau, s;
        std::optional<KernelValue> k;
        std::string error;
    };
    std::vector<Cell> cells;
    for (double t : tvals) {
        for (double s : svals) cells.push_back({t, s, std::nullopt, ""});
    }
    const QuadratureSpec spec = kernel_spec(c);
    parallel_for(cells.size(), resolve_threads(c.threads), [&](std::size_t i) {
        try {
            cells[i].k = kernel(c.params(c.D, cells[i].tau), cells[i].s, spec);
        } catch (const NonConvergence& e) {
            cells[i].error = e.what();
        }
    });
    bool failed = false;
    if (c.format == "json") {
        Json doc;
        doc["header"] = header(c);
        Json rows = Json::array();
        for (const auto& cell : cells) {
            Json r{{"D", c.D}, {"tau", cell.tau}, {"s", cell.s}};
            if (cell.k) {
                r["value"] = cell.k->value;
                r["err_est"] = cell.k->err_est;
            } else {
                failed = true;
                r["value"] = nullptr;
                r["err_est"] = nullptr;
                r["error"] = cell.error;
            }
            rows.push_back(r);
        }
        doc["records"] = rows;
        out << doc.dump(2) << '\n';
    } else {
        out << "D,tau,s,value,err_est\n";
        for (const auto& cell : cells) {
            out << c.D << ',' << fmt(cell.tau) << ',' << fmt(cell.s) << ',';
            if (cell.k) {
                out << fmt(cell.k->value) << ',' << fmt(cell.k->err_est) << '\n';
            } else {
                failed = true;
                out << ",\n";
            }
        }
    }
    return failed ? kNonConvergence : kOk;
}

// --------------------------------------------------------------------------

inline Json report_json(const VerificationReport& r) {
    Json j;
    j["check"] = r.check_name;
    j["D"] = r.D;
    j["residual"] = r.residual_norm;
    j["tolerance"] = r.tolerance;
    j["passed"] = r.passed;
    Json details = Json::array();
    for (const auto& d : r.details) {
        Json rec = Json::object();
        for (const auto& [k, v] : d.values) rec[k] = v;
        if (!d.note.empty()) rec["note"] = d.note;
        details.push_back(rec);
    }
    j["details"] = details;
    j["tau"] = r.tau;
    j["grid"] = r.grid;
    Json summary = Json::object();
    for (const auto& [k, v] : r.summary) summary[k] = v;
    j["summary"] = summary;
    j["engine_failure"] = r.engine_failure;
    return j;
}

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"abel", "pde-radial", "pde-horicyclic", "ck", "mass", "gfunc", "all"};
    return names;
}

/// Deterministic endpoint pairs for the horicyclic stencil check.
inline std::vector<std::pair<HoricyclicPoint, HoricyclicPoint>> random_pairs(int D, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> height(0.5, 2.0);
    std::uniform_real_distribution<double> offset(-1.0, 1.0);
    std::vector<std::pair<HoricyclicPoint, HoricyclicPoint>> pairs;
    for (int i = 0; i < count; ++i) {
        auto point = [&] {
            const double y = height(rng);
            std::vector<double> x(static_cast<std::size_t>(D - 2));
            for (auto& v : x) v = offset(rng);
            return HoricyclicPoint(y, x);
        };
        auto a = point();
        auto b = point();
        pairs.emplace_back(std::move(a), std::move(b));
    }
    return pairs;
}

inline double abel_l(double s) { return std::cosh(s); }

inline std::vector<VerificationReport> run_suite(const RunConfig& c, const std::string& suite) {
    const int threads = resolve_threads(c.threads);
    std::vector<VerificationReport> reps;
    auto want = [&](const char* name) { return suite == "all" || suite == name; };
    const std::vector<double> l_grid{1.0, abel_l(0.5), abel_l(1.0), abel_l(2.0), abel_l(3.0)};
    for (int D : c.dims) {
        if (D < 3) throw DomainError("D must be ≥ 3");
        if (want("abel")) {
            for (double t : c.tau) {
                reps.push_back(abel_residual(c.params(D, t), l_grid, c.tolerance.value_or(default_abel_tolerance(D)),
                                             threads));
            }
        }
        if (want("pde-radial")) {
            const auto sv = parse_grid(c.s_grid.value_or("0.1,5,6")).values();
            const auto tv = parse_grid(c.tau_grid.value_or("0.1,2,4")).values();
            const double tol = c.tolerance.value_or(D == 4 ? 1e-7 : (D % 2 == 0 ? 1e-6 : 1e-5));
            reps.push_back(radial_pde_residual(c.params(D, 1.0), sv, tv, tol, threads));
        }
        if (want("pde-horicyclic") && (D == 3 || D == 4)) {
            for (double t : c.tau) {
                reps.push_back(horicyclic_pde_residual(c.params(D, t), random_pairs(D, 20, c.seed),
                                                       c.tolerance.value_or(1e-4), threads));
            }
        }
        if (want("ck") && D <= 5) {
            for (double d : {0.0, 1.0, 2.0}) {
                const EvalParams half = c.params(D, 0.5);
                reps.push_back(chapman_kolmogorov(half, half, d, c.tolerance.value_or(D == 3 ? 1e-3 : 1e-4)));
            }
        }
        if (want("mass") && D <= 6) {
            const std::vector<double> taus{0.25, 0.5, 1.0};
            reps.push_back(mass_multiplicativity(c.params(D, 1.0), taus, c.tolerance.value_or(1e-4), threads));
            if (D == 3) reps.push_back(unit_mass(c.params(D, 1.0), taus, c.tolerance.value_or(1e-4), threads));
        }
    }
    if (want("gfunc")) {
        reps.push_back(gfunc_check({0, 1, 2, 3, 4, 5}, {0.1, 0.5, 1.0, 2.0, 3.0, 5.0}, {0.125, 0.25, 1.0},
                                   c.tolerance.value_or(1e-6), 1e-9));
    }
    return reps;
}

inline int cmd_verify(const RunConfig& c, std::ostream& out) {
    const auto& names = suite_names();
    if (std::find(names.begin(), names.end(), c.suite) == names.end()) {
        throw DomainError("unknown suite '" + c.suite + "'");
    }
    const auto reps = run_suite(c, c.suite);
    bool all_passed = true;
    bool engine = false;
    for (const auto& r : reps) {
        all_passed = all_passed && r.passed;
        engine = engine || r.engine_failure;
    }
    if (c.format == "json") {
        Json doc;
        doc["header"] = header(c);
        Json arr = Json::array();
        for (const auto& r : reps) arr.push_back(report_json(r));
        doc["reports"] = arr;
        doc["all_passed"] = all_passed;
        out << doc.dump(2) << '\n';
    } else {
        out << "check,D,residual,tolerance,passed\n";
        for (const auto& r : reps) {
            out << r.check_name << ',' << r.D << ',' << fmt(r.residual_norm) << ',' << fmt(r.tolerance) << ','
                << (r.passed ? "true" : "false") << '\n';
        }
    }
    if (engine) return kNonConvergence;
    return all_passed ? kOk : kVerifyFailed;
}

// --------------------------------------------------------------------------

inline int cmd_oracle(const RunConfig& c, std::ostream& out) {
    if (c.D != 3 && c.D != 4) throw DomainError("oracle supports D = 3 and 4");
    if (c.tau.size() != 1) throw DomainError("oracle takes a single --tau");
    const EvalParams p = c.params(c.D, c.tau.front());
    const auto q1 = make_point(c.D, c.y1.value_or(1.0), c.x1.empty() ? std::vector<double>{0.0} : c.x1);
    const auto q2 = make_point(c.D, c.y2.value_or(1.2), c.x2.empty() ? std::vector<double>{0.3} : c.x2);
    LatticeSpec spec;
    spec.samples = c.samples;
    spec.seed = c.seed;
    spec.threads = resolve_threads(c.threads);
    if (c.method == "mc") {
        spec.method = LatticeMethod::monte_carlo;
    } else if (c.method == "nested") {
        spec.method = LatticeMethod::nested_quadrature;
        spec.rel_tol = 1e-3;
    } else {
        throw DomainError("--method must be mc or nested");
    }
    if (c.y_form == "log") {
        spec.y_form = YDiscretization::logarithmic;
    } else if (c.y_form == "symmetric") {
        spec.y_form = YDiscretization::symmetric;
    } else {
        throw DomainError("--y-form must be log or symmetric");
    }
    if (c.slices.empty()) throw DomainError("--n needs at least one slice count");
    for (int N : c.slices) {
        LatticeSpec probe = spec;
        probe.N = N;
        probe.validate(c.D);
    }
    const auto rows = lattice_convergence(p, q1, q2, c.slices, spec);
    std::optional<double> order;
    if (rows.size() >= 2) order = fit_convergence_order(rows);
    if (c.format == "json") {
        Json doc;
        doc["header"] = header(c);
        doc["header"]["seed"] = c.seed;
        doc["header"]["samples"] = c.samples;
        doc["header"]["D"] = c.D;
        doc["header"]["tau"] = p.tau;
        Json arr = Json::array();
        for (const auto& r : rows) {
            arr.push_back({{"N", r.N},
                           {"lattice_value", r.lattice_value},
                           {"err_est", r.err_est},
                           {"closed_value", r.closed_value},
                           {"rel_dev", r.rel_dev}});
        }
        doc["rows"] = arr;
        if (order) {
            doc["fitted_order"] = *order;
        } else {
            doc["fitted_order"] = nullptr;
        }
        out << doc.dump(2) << '\n';
    } else {
        out << "N,lattice_value,err_est,closed_value,rel_dev\n";
        for (const auto& r : rows) {
            out << r.N << ',' << fmt(r.lattice_value) << ',' << fmt(r.err_est) << ',' << fmt(r.closed_value) << ','
                << fmt(r.rel_dev) << '\n';
        }
        out << "fitted_order," << (order ? fmt(*order) : std::string("nan")) << ",,,\n";
    }
    return kOk;
}

// --------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig c;
    CLI::App app{"Heat kernel on the pseudosphere: evaluation, tables, verification, lattice oracle", "pseudoheat"};
    app.require_subcommand(1);

    auto common = [&](CLI::App* sub) {
        sub->add_option("--m", c.m, "mass")->capture_default_str();
        sub->add_option("--hbar", c.hbar, "Planck constant")->capture_default_str();
        sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
        sub->add_option("--threads", c.threads, "worker threads (default: PSEUDOHEAT_THREADS, then hardware)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--rel-tol", c.rel_tol, "kernel quadrature relative tolerance")->capture_default_str();
    };
    auto pair = [&](CLI::App* sub) {
        sub->add_option("--y1", c.y1, "height of the first point");
        sub->add_option("--y2", c.y2, "height of the second point");
        sub->add_option("--x1", c.x1, "x components of the first point")->delimiter(',');
        sub->add_option("--x2", c.x2, "x components of the second point")->delimiter(',');
    };

    CLI::App* eval = app.add_subcommand("eval", "evaluate the kernel at one distance or point pair");
    common(eval);
    pair(eval);
    eval->add_option("--dim,-D", c.D, "ambient dimension D")->required();
    eval->add_option("--tau", c.tau, "diffusive time")->required()->delimiter(',');
    eval->add_option("--s", c.s, "geodesic distance");

    CLI::App* table = app.add_subcommand("table", "kernel table on an s grid and tau grid");
    common(table);
    table->add_option("--dim,-D", c.D, "ambient dimension D")->required();
    table->add_option("--s-grid", c.s_grid, "start,stop,count")->required();
    table->add_option("--tau-grid", c.tau_grid, "start,stop,count");
    table->add_option("--tau", c.tau, "diffusive time list")->delimiter(',');

    CLI::App* verify = app.add_subcommand("verify", "run verification suites");
    common(verify);
    verify->add_option("suite", c.suite, "abel, pde-radial, pde-horicyclic, ck, mass, gfunc, all")->required();
    verify->add_option("--dims", c.dims, "dimension list")->delimiter(',')->capture_default_str();
    verify->add_option("--tau", c.tau, "diffusive time list")->delimiter(',');
    verify->add_option("--s-grid", c.s_grid, "radial PDE s grid start,stop,count");
    verify->add_option("--tau-grid", c.tau_grid, "radial PDE tau grid start,stop,count");
    verify->add_option("--tol", c.tolerance, "override every check tolerance");
    verify->add_option("--seed", c.seed, "seed for random endpoint pairs")->capture_default_str();

    CLI::App* oracle = app.add_subcommand("oracle", "lattice path-integral convergence study");
    common(oracle);
    pair(oracle);
    oracle->add_option("--dim,-D", c.D, "ambient dimension D (3 or 4)")->required();
    oracle->add_option("--tau", c.tau, "diffusive time")->delimiter(',');
    oracle->add_option("--n", c.slices, "slice counts")->delimiter(',')->capture_default_str();
    oracle->add_option("--samples", c.samples, "Monte Carlo samples per N")->capture_default_str();
    oracle->add_option("--seed", c.seed, "Monte Carlo seed")->capture_default_str();
    oracle->add_option("--method", c.method, "mc or nested")->capture_default_str();
    oracle->add_option("--y-form", c.y_form, "log or symmetric")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    try {
        if (eval->parsed()) {
            c.command = "eval";
            return cmd_eval(c, out);
        }
        if (table->parsed()) {
            c.command = "table";
            return cmd_table(c, out);
        }
        if (verify->parsed()) {
            c.command = "verify";
            return cmd_verify(c, out);
        }
        c.command = "oracle";
        return cmd_oracle(c, out);
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const NonConvergence& e) {
        err << "nonconvergence: " << e.what() << '\n';
        return kNonConvergence;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
}

} // namespace pseudoheat::cli

#pragma once

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <solman/config.hpp>
#include <solman/segment_io.hpp>
#include <solman/solman.hpp>
#include <solman/verify.hpp>

namespace solman::cli {

using json = nlohmann::json;

enum ExitCode : int { kPass = 0, kCheckFailure = 1, kUsage = 2 };

// A rectangular result: written as CSV or as {"columns": [...], "rows": [[...], ...]}.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

inline void write_table(std::ostream& os, const Table& tab, const std::string& format) {
    if (format == "json") {
        json j{{"columns", tab.columns}, {"rows", tab.rows}};
        os << j.dump() << '\n';
        return;
    }
    for (std::size_t i = 0; i < tab.columns.size(); ++i) os << (i ? "," : "") << tab.columns[i];
    os << '\n';
    for (const auto& row : tab.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
        os << '\n';
    }
}

// Each column after the first as a polyline against the first.
inline void write_svg(const std::string& path, const Table& tab, const std::string& title) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write '" + path + "'");
    const double W = 640, H = 400, pad = 40;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& row : tab.rows) {
        x0 = std::min(x0, row[0]);
        x1 = std::max(x1, row[0]);
        for (std::size_t k = 1; k < row.size(); ++k) {
            if (!std::isfinite(row[k])) continue;
            y0 = std::min(y0, row[k]);
            y1 = std::max(y1, row[k]);
        }
    }
    if (!(x1 > x0)) x1 = x0 + 1.0;
    if (!(y1 > y0)) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    auto px = [&](double x) { return pad + (W - 2 * pad) * (x - x0) / (x1 - x0); };
    auto py = [&](double y) { return H - pad - (H - 2 * pad) * (y - y0) / (y1 - y0); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << pad << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
    os << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << W - 2 * pad << "\" height=\""
       << H - 2 * pad << "\" fill=\"none\" stroke=\"#888\"/>\n";
    for (std::size_t k = 1; k < tab.columns.size(); ++k) {
        os << "<polyline fill=\"none\" stroke=\"" << colors[(k - 1) % 5] << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& row : tab.rows)
            if (std::isfinite(row[k])) os << px(row[0]) << ',' << py(row[k]) << ' ';
        os << "\"><title>" << tab.columns[k] << "</title></polyline>\n";
    }
    os << "</svg>\n";
}

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline Segment read_segment_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open segment file '" + path + "'");
    return read_segment_csv(in);
}

inline Segment checked_segment(const Problem& P, const std::string& path) {
    Segment s = read_segment_file(path);
    if (std::abs(s.r() - P.r()) > kClampTol * std::max(1.0, P.r()))
        throw ConfigError("segment '" + path + "' spans [" + format_double(-s.r()) + ", 0] but the instance has r = " +
                          format_double(P.r()));
    return s;
}

// ---------------------------------------------------------------------------

struct Globals {
    std::string config;
    std::uint64_t seed = 42;
    std::string out = "-";
    std::string format; // empty: command default
};

struct VerifyArgs {
    std::vector<std::string> suites;
    double samples = 1.0;
};

struct MapArgs {
    std::string dir;
    std::string in;
    std::string branch_report;
    std::size_t nodes = kDefaultNodes;
    bool check_overlap = false;
};

struct SampleArgs {
    std::size_t count = 100;
    std::optional<double> xi_min, xi_max;
    std::size_t nodes = kDefaultNodes;
    bool random_shape = false;
};

struct IntegrateArgs {
    std::string init;
    double t_end = 1.0;
    double step = 1e-3;
    std::size_t every = 1;
};

struct PlotArgs {
    std::string what;
    std::optional<double> eta;
    std::size_t n = 401;
    std::string svg;
    std::string init;
    double t_end = 1.0;
    double step = 1e-3;
};

inline int cmd_verify(const Problem& P, const Globals& g, const VerifyArgs& a, std::ostream& out) {
    VerifyOptions o;
    o.seed = g.seed;
    o.sample_scale = a.samples;
    o.suites = a.suites;
    if (!(a.samples > 0.0)) throw ConfigError("--samples must be positive");
    for (const auto& s : o.suites)
        if (std::find(verify_suites().begin(), verify_suites().end(), s) == verify_suites().end())
            throw ConfigError("unknown suite '" + s + "'");
    const VerifyReport rep = run_verify(P, o);
    if (g.format == "csv") {
        out << "suite,name,samples,worst,tolerance,bound,pass\n";
        for (const auto& c : rep.checks)
            out << c.suite << ',' << c.name << ',' << c.samples << ',' << format_double(c.worst) << ','
                << format_double(c.tolerance) << ',' << (c.upper ? "upper" : "lower") << ','
                << (c.pass ? "true" : "false") << '\n';
    } else {
        json j = to_json(rep);
        j["seed"] = g.seed;
        j["config"] = g.config;
        j["timestamp"] = utc_timestamp();
        out << j.dump(2) << '\n';
    }
    return rep.pass() ? kPass : kCheckFailure;
}

inline int cmd_map(const Problem& P, const Globals& g, const MapArgs& a, std::ostream& out) {
    if (a.dir != "A" && a.dir != "B") throw ConfigError("--dir must be A or B");
    if (a.nodes < 2) throw ConfigError("--nodes must be at least 2");
    const Segment phi = checked_segment(P, a.in);
    MapOptions opts;
    opts.check_overlap = a.check_overlap;
    const MapResult res = a.dir == "A" ? map_A(P, phi, opts) : map_B(P, phi, opts);
    const Segment outseg = res.segment.has_tail() ? resample_on(res.segment, refined_nodes(phi, a.nodes)) : res.segment;

    Table tab{{"t", "x", "dx"}, {}};
    for (std::size_t i = 0; i < outseg.size(); ++i)
        tab.rows.push_back({outseg.nodes()[i], outseg.values()[i], outseg.derivs()[i]});
    write_table(out, tab, g.format);

    if (!a.branch_report.empty()) {
        json j{{"dir", a.dir},
               {"branch_used", branch_name(res.report.branch_used)},
               {"eta", res.report.eta},
               {"tau", res.report.tau},
               {"overlap_checked", res.report.overlap_checked}};
        if (a.dir == "B") j["sigma"] = res.report.sigma;
        std::ofstream rf(a.branch_report);
        if (!rf) throw ConfigError("cannot write '" + a.branch_report + "'");
        rf << j.dump(2) << '\n';
    }
    return kPass;
}

inline int cmd_sample_manifold(const Problem& P, const Globals& g, const SampleArgs& a, std::ostream& out) {
    const double lo = a.xi_min.value_or(P.eta0() - 2.0);
    const double hi = a.xi_max.value_or(P.eta0() + 2.0);
    if (a.nodes < 2) throw ConfigError("--nodes must be at least 2");
    Rng rng(g.seed);
    Table tab{{"xi", "residual", "x0", "x_delayed", "dx0"}, {}};
    bool ok = true;
    const std::size_t count = hi < lo ? 0 : a.count;
    for (std::size_t i = 0; i < count; ++i) {
        const double xi = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
        const Segment phi = a.random_shape
                                ? make_manifold_point(P, xi, random_segment(rng, P.r(), a.nodes))
                                : make_manifold_point(P, xi, a.nodes);
        const double res = residual_Xf(P, phi);
        ok = ok && std::abs(res) <= 1e-12;
        tab.rows.push_back({xi, res, phi.eval(0.0), phi.eval(-P.delay(xi)), phi.eval_deriv(0.0)});
    }
    write_table(out, tab, g.format);
    return ok ? kPass : kCheckFailure;
}

inline Trajectory run_integration(const Problem& P, const std::string& init, double t_end, double step,
                                  std::ostream& err) {
    if (init.empty()) throw ConfigError("--init is required");
    if (!(t_end > 0.0)) throw ConfigError("--t-end must be positive");
    if (!(step > 0.0)) throw ConfigError("--step must be positive");
    const Segment phi0 = checked_segment(P, init);
    Trajectory tr = integrate(P, phi0, t_end, step);
    if (!tr.started_on_manifold())
        err << "warning: initial segment is off the solution manifold (residual "
            << format_double(tr.initial_residual()) << "); the slope jumps at t = 0\n";
    return tr;
}

inline int cmd_integrate(const Problem& P, const Globals& g, const IntegrateArgs& a, std::ostream& out,
                         std::ostream& err) {
    if (a.every < 1) throw ConfigError("--every must be at least 1");
    const Trajectory tr = run_integration(P, a.init, a.t_end, a.step, err);
    Table tab{{"t", "x", "dx", "residual"}, {}};
    const auto T = tr.t_grid();
    for (std::size_t k = 0; k < T.size(); ++k) {
        if (k % a.every != 0 && k + 1 != T.size()) continue;
        // at t = 0 the slope column is the initial segment's, so dx - g(...) = residual on every row
        tab.rows.push_back({T[k], tr.x()[k], tr.eval_deriv(T[k]), trajectory_residual_at(P, tr, T[k])});
    }
    write_table(out, tab, g.format);
    return kPass;
}

inline double grid_point(double lo, double hi, std::size_t i, std::size_t n) {
    if (n == 1) return lo;
    return i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

inline int cmd_plot(const Problem& P, const Globals& g, const PlotArgs& a, std::ostream& out, std::ostream& err) {
    if (a.n < 2) throw ConfigError("--n must be at least 2");
    const double eta = a.eta.value_or(P.eta0());
    Table tab;
    std::string title = a.what;
    if (a.what == "psi") {
        const Segment psi = psi_segment(P, eta);
        tab.columns = {"t", "psi", "dpsi"};
        for (std::size_t i = 0; i < a.n; ++i) {
            const double t = grid_point(-P.r(), 0.0, i, a.n);
            tab.rows.push_back({t, psi.eval(t), psi.eval_deriv(t)});
        }
        title = "psi, eta = " + format_double(eta);
    } else if (a.what == "bump") {
        tab.columns = {"xi", "a", "da"};
        for (std::size_t i = 0; i < a.n; ++i) {
            const double xi = grid_point(P.eta0() - 2.0 * P.rho(), P.eta0() + 2.0 * P.rho(), i, a.n);
            tab.rows.push_back({xi, bump_a(P, xi), bump_a_deriv(P, xi)});
        }
    } else if (a.what == "h") {
        tab.columns = {"tau", "h", "dh"};
        for (std::size_t i = 0; i < a.n; ++i) {
            const double tau = grid_point(P.eta0() - 2.0 * P.rho(), P.eta0() + 2.0 * P.rho(), i, a.n);
            tab.rows.push_back({tau, h_eta(P, eta, tau), h_eta_deriv(P, eta, tau)});
        }
        title = "h, eta = " + format_double(eta);
    } else if (a.what == "slice") {
        const Segment phi = make_manifold_point(P, eta);
        const Segment img = map_A(P, phi).segment;
        tab.columns = {"t", "phi", "dphi", "A_phi", "dA_phi"};
        for (std::size_t i = 0; i < a.n; ++i) {
            const double t = grid_point(-P.r(), 0.0, i, a.n);
            tab.rows.push_back({t, phi.eval(t), phi.eval_deriv(t), img.eval(t), img.eval_deriv(t)});
        }
        title = "slice point and its image, eta = " + format_double(eta);
    } else if (a.what == "trajectory") {
        const Trajectory tr = run_integration(P, a.init, a.t_end, a.step, err);
        tab.columns = {"t", "x", "dx", "residual"};
        for (std::size_t i = 0; i < a.n; ++i) {
            const double t = grid_point(0.0, tr.t_end(), i, a.n);
            tab.rows.push_back({t, tr.eval(t), tr.eval_deriv(t), trajectory_residual_at(P, tr, t)});
        }
    } else {
        throw ConfigError("unknown plot '" + a.what + "' (expected psi, bump, h, slice or trajectory)");
    }
    write_table(out, tab, g.format);
    if (!a.svg.empty()) write_svg(a.svg, tab, title);
    return kPass;
}

// ---------------------------------------------------------------------------

/// Parse `args` (without the program name) and run the selected command.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Almost-graph charts of the solution manifold of x'(t) = g(x(t - d(x(t))))", "solman"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--config", g.config, "instance JSON file");
    app.add_option("--seed", g.seed, "64-bit seed for all random corpora");
    app.add_option("--out", g.out, "output file ('-' for stdout)");
    app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"csv", "json"}));

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "run the invariant suites and emit a report");
    verify->add_option("--suite", va.suites, "suites to run (default all): constants,psi,h,roundtrip,manifold,dde")
        ->delimiter(',');
    verify->add_option("--samples", va.samples, "scale factor for every sample count");

    MapArgs ma;
    auto* map = app.add_subcommand("map", "apply A or B to a segment");
    map->add_option("--dir", ma.dir, "A or B")->required()->check(CLI::IsMember({"A", "B"}));
    map->add_option("--in", ma.in, "input segment CSV (t,x,dx)")->required();
    map->add_option("--emit-branch-report", ma.branch_report, "write the branch report JSON here");
    map->add_option("--nodes", ma.nodes, "uniform nodes added when the result carries a psi tail");
    map->add_flag("--check-overlap", ma.check_overlap, "also evaluate the other branch on overlaps");

    SampleArgs sa;
    auto* sample = app.add_subcommand("sample-manifold", "construct manifold points and report residuals");
    sample->add_option("--count", sa.count, "number of points");
    sample->add_option("--xi-min", sa.xi_min, "lower end of the xi range (default eta0 - 2)");
    sample->add_option("--xi-max", sa.xi_max, "upper end of the xi range (default eta0 + 2)");
    sample->add_option("--nodes", sa.nodes, "nodes of the base shape");
    sample->add_flag("--random-shape", sa.random_shape, "random base shapes drawn from --seed");

    IntegrateArgs ia;
    auto* integ = app.add_subcommand("integrate", "integrate from an initial segment");
    integ->add_option("--init", ia.init, "initial segment CSV")->required();
    integ->add_option("--t-end", ia.t_end, "final time")->required();
    integ->add_option("--step", ia.step, "step size");
    integ->add_option("--every", ia.every, "write every k-th step");

    PlotArgs pa;
    auto* plot = app.add_subcommand("plot", "sample a curve to CSV (and optionally SVG)");
    plot->add_option("what", pa.what, "psi, bump, h, slice or trajectory")
        ->required()
        ->check(CLI::IsMember({"psi", "bump", "h", "slice", "trajectory"}));
    plot->add_option("--eta", pa.eta, "slice / family parameter (default eta0)");
    plot->add_option("--n", pa.n, "number of samples");
    plot->add_option("--svg", pa.svg, "also write an SVG polyline figure");
    plot->add_option("--init", pa.init, "initial segment (trajectory)");
    plot->add_option("--t-end", pa.t_end, "final time (trajectory)");
    plot->add_option("--step", pa.step, "step size (trajectory)");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kPass : kUsage;
    }

    try {
        if (g.config.empty()) throw ConfigError("--config is required");
        const Problem P = load_problem(g.config);
        if (g.format.empty()) g.format = verify->parsed() ? "json" : "csv";

        std::ofstream file;
        std::ostream* os = &out;
        if (g.out != "-") {
            file.open(g.out);
            if (!file) throw ConfigError("cannot write '" + g.out + "'");
            os = &file;
        }
        if (verify->parsed()) return cmd_verify(P, g, va, *os);
        if (map->parsed()) return cmd_map(P, g, ma, *os);
        if (sample->parsed()) return cmd_sample_manifold(P, g, sa, *os);
        if (integ->parsed()) return cmd_integrate(P, g, ia, *os, err);
        return cmd_plot(P, g, pa, *os, err);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) { // malformed segments, bad domains
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kCheckFailure;
    }
}

} // namespace solman::cli

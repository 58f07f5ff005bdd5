#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "almost_graph.hpp"
#include "dde.hpp"
#include "problem.hpp"
#include "random.hpp"
#include "transversal.hpp"

namespace solman {

/// One invariant check: `worst` is the extreme observed value, compared with
/// `tolerance` from above (upper = true) or below.
struct Check {
    std::string suite;
    std::string name;
    std::size_t samples = 0;
    double worst = 0.0;
    double tolerance = 0.0;
    bool upper = true;
    bool pass = false;
};

struct VerifyReport {
    std::vector<Check> checks;

    bool pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
    }
};

inline const std::vector<std::string>& verify_suites() {
    static const std::vector<std::string> all{"constants", "psi", "h", "roundtrip", "manifold", "dde"};
    return all;
}

struct VerifyOptions {
    std::uint64_t seed = 42;
    double sample_scale = 1.0;           // multiplies every sample count
    std::vector<std::string> suites;     // empty = all
};

namespace detail {

// FNV-1a, used to give each suite its own stream regardless of which suites run.
inline std::uint64_t suite_seed(std::uint64_t seed, std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : name) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h ^ seed;
}

class CheckBuilder {
public:
    CheckBuilder(std::string suite, std::string name, double tolerance, bool upper = true)
        : check_{std::move(suite), std::move(name), 0,
                 upper ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity(),
                 tolerance, upper, false} {}

    void add(double v) {
        ++check_.samples;
        if (std::isnan(v)) {
            nan_ = true;
            return;
        }
        check_.worst = check_.upper ? std::max(check_.worst, v) : std::min(check_.worst, v);
    }

    Check finish(bool strict = false) {
        if (check_.samples == 0) check_.worst = check_.upper ? 0.0 : check_.tolerance;
        if (check_.upper)
            check_.pass = strict ? check_.worst < check_.tolerance : check_.worst <= check_.tolerance;
        else
            check_.pass = check_.worst >= check_.tolerance;
        check_.pass = check_.pass && !nan_;
        return check_;
    }

private:
    Check check_;
    bool nan_ = false;
};

inline std::size_t scaled(std::size_t n, double scale) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(n) * scale)));
}

// eta with d(eta) > 0 spread over several orders of magnitude around eta0
inline double random_eta(Rng& rng, const Problem& P, double span = 2.0) {
    const double mag = span * std::pow(10.0, rng.uniform(-6.0, 0.0));
    const double eta = P.eta0() + (rng.uniform01() < 0.5 ? -mag : mag);
    return eta;
}

// zeros of g in [lo, hi] located by sign changes on a grid and bisection
inline std::vector<double> zeros_of_g(const Problem& P, double lo, double hi, std::size_t grid = 4000) {
    std::vector<double> out;
    double a = lo, fa = P.g(a);
    if (fa == 0.0) out.push_back(a);
    for (std::size_t i = 1; i <= grid; ++i) {
        const double b = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid);
        const double fb = P.g(b);
        if (fb == 0.0) {
            out.push_back(b);
        } else if (fa != 0.0 && (fa < 0.0) != (fb < 0.0)) {
            double x0 = a, x1 = b, f0 = fa;
            for (int it = 0; it < 200 && x1 - x0 > 0.0; ++it) {
                const double m = 0.5 * (x0 + x1);
                if (m == x0 || m == x1) break;
                const double fm = P.g(m);
                if (fm == 0.0) {
                    x0 = x1 = m;
                    break;
                }
                if ((fm < 0.0) == (f0 < 0.0)) {
                    x0 = m;
                    f0 = fm;
                } else {
                    x1 = m;
                }
            }
            out.push_back(std::abs(P.g(x0)) <= std::abs(P.g(x1)) ? x0 : x1);
        }
        a = b;
        fa = fb;
    }
    return out;
}

// random point of X_0: a random segment projected along the transversal of its own slice
inline Segment random_x0(Rng& rng, const Problem& P, std::size_t nodes = 64) {
    const Segment phi = random_segment(rng, P.r(), nodes);
    return project_P_eta(P, phi.eval(0.0), phi);
}

inline Segment random_manifold_point(Rng& rng, const Problem& P, double xi, std::size_t nodes = 64,
                                     double amplitude = 2.0) {
    return make_manifold_point(P, xi, random_segment(rng, P.r(), nodes, -amplitude, amplitude));
}

inline double sampled_sup_abs(std::size_t n, double r, auto&& f) {
    double best = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = -r + r * static_cast<double>(k) / static_cast<double>(n - 1);
        best = std::max(best, std::abs(f(k + 1 == n ? 0.0 : t)));
    }
    return best;
}

} // namespace detail

// ---------------------------------------------------------------------------

inline void verify_constants(const Problem& P, VerifyReport& rep) {
    {
        detail::CheckBuilder b("constants", "c_cstar_below_quarter_rho", P.rho() / 4.0);
        b.add(P.c() * P.c_star());
        rep.checks.push_back(b.finish(/*strict=*/true));
    }
    {
        detail::CheckBuilder b("constants", "monotonicity_margin", 0.75, false);
        b.add(P.monotonicity_margin());
        rep.checks.push_back(b.finish());
    }
    {
        detail::CheckBuilder b("constants", "delay_zero_and_slope", kDelaySlopeTol);
        b.add(std::abs(P.delay(P.eta0())));
        b.add(std::abs(P.delay_prime(P.eta0())));
        rep.checks.push_back(b.finish());
    }
    {
        detail::CheckBuilder b("constants", "psi0_sup_below_cstar", P.c_star() + 1e-12);
        b.add(detail::sampled_sup_abs(100001, P.r(), [&](double t) { return psi0_eval(P, t); }));
        rep.checks.push_back(b.finish());
    }
}

inline void verify_psi(const Problem& P, const VerifyOptions& o, VerifyReport& rep) {
    Rng rng(detail::suite_seed(o.seed, "psi"));
    const std::size_t n_eta = detail::scaled(100, o.sample_scale);
    detail::CheckBuilder sup("psi", "psi_sup_below_cstar", P.c_star() + 1e-12);
    detail::CheckBuilder head("psi", "psi_vanishes_at_zero", 0.0);
    detail::CheckBuilder delayed("psi", "psi_vanishes_at_delay", 0.0);
    detail::CheckBuilder slope("psi", "psi_unit_slope_at_zero", 0.0);
    detail::CheckBuilder support("psi", "psi_zero_before_cutoff", 0.0);
    for (std::size_t i = 0; i < n_eta; ++i) {
        const double eta = detail::random_eta(rng, P);
        const TailTerm psi = transversal_term(P, eta);
        sup.add(detail::sampled_sup_abs(100001, P.r(), [&](double t) { return psi.basis(t); }));
        head.add(std::abs(psi.basis(0.0)));
        delayed.add(std::abs(psi.basis(-P.delay(eta))));
        slope.add(std::abs(psi.basis_deriv(0.0) - 1.0));
        if (psi.kind == TailKind::AtEta)
            for (int k = 0; k <= 100; ++k) {
                const double t = std::min(psi.z, -P.r() + (psi.z + P.r()) * k / 100.0);
                support.add(std::abs(psi.basis(t)) + std::abs(psi.basis_deriv(t)));
            }
    }
    for (auto* b : {&sup, &head, &delayed, &slope, &support}) rep.checks.push_back(b->finish());

    detail::CheckBuilder bump("psi", "bump_slope_at_most_3_over_rho", 3.0 / P.rho() + 1e-12);
    detail::CheckBuilder bump_range("psi", "bump_values_in_unit_interval", 0.0);
    for (int k = 0; k <= 100000; ++k) {
        const double xi = P.eta0() - 2.0 * P.rho() + 4.0 * P.rho() * k / 100000.0;
        bump.add(std::abs(bump_a_deriv(P, xi)));
        const double a = bump_a(P, xi);
        bump_range.add(std::max(0.0, std::max(-a, a - 1.0)));
    }
    rep.checks.push_back(bump.finish());
    rep.checks.push_back(bump_range.finish());

    detail::CheckBuilder trans("psi", "transversality_residual_is_one", 1e-10);
    const std::size_t n_pts = detail::scaled(200, o.sample_scale);
    const std::size_t n_zero = std::max<std::size_t>(1, n_pts / 10);
    for (std::size_t i = 0; i < n_pts; ++i) {
        const double xi = i < n_zero ? P.eta0() : P.eta0() + rng.uniform(-2.0, 2.0);
        const Segment phi = detail::random_manifold_point(rng, P, xi);
        trans.add(std::abs(tangent_residual(P, phi, psi_segment(P, phi.eval(0.0))) - 1.0));
    }
    rep.checks.push_back(trans.finish());
}

inline void verify_h(const Problem& P, const VerifyOptions& o, VerifyReport& rep) {
    Rng rng(detail::suite_seed(o.seed, "h"));
    const double floor = P.monotonicity_margin();
    detail::CheckBuilder mono("h", "h_slope_floor", floor - 1e-12, false);
    detail::CheckBuilder sign("h", "implicit_function_sign", -floor + 1e-12);
    detail::CheckBuilder ident("h", "h_identity_outside_rho", 0.0);
    const std::size_t n_eta = detail::scaled(100, o.sample_scale);
    for (std::size_t i = 0; i < n_eta; ++i) {
        const double eta = P.eta0() + rng.uniform(-2.0, 2.0);
        for (int k = 0; k < 1000; ++k) {
            const double tau = P.eta0() - 2.0 * P.rho() + 4.0 * P.rho() * k / 999.0;
            const double dh = h_eta_deriv(P, eta, tau);
            mono.add(dh);
            sign.add(-dh);
            if (std::abs(tau - P.eta0()) >= P.rho()) ident.add(std::abs(h_eta(P, eta, tau) - tau));
        }
    }
    rep.checks.push_back(mono.finish());
    rep.checks.push_back(sign.finish());
    rep.checks.push_back(ident.finish());

    detail::CheckBuilder inv("h", "invert_h_roundtrip", 1e-12);
    detail::CheckBuilder outside("h", "invert_h_identity_far_from_eta0", 0.0);
    const std::size_t n = detail::scaled(10000, o.sample_scale);
    for (std::size_t i = 0; i < n; ++i) {
        const double eta = P.eta0() + rng.uniform(-2.0, 2.0);
        const double tau = P.eta0() + rng.uniform(-2.0 * P.rho(), 2.0 * P.rho());
        inv.add(std::abs(invert_h(P, eta, h_eta(P, eta, tau)) - tau));
        const double gap = P.rho() + P.c() * P.c_star();
        const double sigma = P.eta0() + (rng.uniform01() < 0.5 ? -1.0 : 1.0) * (gap + rng.uniform(0.0, 2.0));
        outside.add(std::abs(invert_h(P, eta, sigma) - sigma));
    }
    rep.checks.push_back(inv.finish());
    rep.checks.push_back(outside.finish());
}

inline void verify_roundtrip_suite(const Problem& P, const VerifyOptions& o, VerifyReport& rep) {
    Rng rng(detail::suite_seed(o.seed, "roundtrip"));
    MapOptions opts;
    opts.check_overlap = false;
    detail::CheckBuilder ba("roundtrip", "B_after_A_identity", 1e-9);
    detail::CheckBuilder ab("roundtrip", "A_after_B_identity", 1e-9);
    detail::CheckBuilder rec("roundtrip", "tau_recovery_over_root_tol", 10.0);
    detail::CheckBuilder headA("roundtrip", "A_preserves_head_point", 0.0);
    detail::CheckBuilder headB("roundtrip", "B_preserves_head_point", 0.0);
    const std::size_t n = detail::scaled(1000, o.sample_scale);
    for (std::size_t i = 0; i < n; ++i) {
        const Segment phi = random_segment(rng, P.r(), 64);
        const auto rt = verify_roundtrip(P, phi, opts);
        ba.add(rt.ba_error);
        ab.add(rt.ab_error);
        rec.add(rt.ba_tau_recovery / root_tolerance(rt.b_of_a.sigma));
        rec.add(rt.ab_tau_recovery / root_tolerance(rt.b.sigma));
        headA.add(std::abs(map_A(P, phi, opts).segment.eval(0.0) - phi.eval(0.0)));
        headB.add(std::abs(map_B(P, phi, opts).segment.eval(0.0) - phi.eval(0.0)));
    }
    for (auto* b : {&ba, &ab, &rec, &headA, &headB}) rep.checks.push_back(b->finish());

    detail::CheckBuilder ovA("roundtrip", "A_branches_agree_on_overlap", kOverlapTol);
    detail::CheckBuilder ovB("roundtrip", "B_branches_agree_on_overlap", kOverlapTol);
    const std::size_t n_ov = detail::scaled(200, o.sample_scale);
    for (std::size_t i = 0; i < n_ov; ++i) {
        const double eta = detail::random_eta(rng, P);
        if (!in_plus_domain(P, eta)) continue;
        const Segment base = random_segment(rng, P.r(), 64);
        const double tau = P.eta0() + rng.uniform(-0.5, 0.5) * P.rho() * 0.999;
        const Segment phi = make_pinned_segment(P, base, eta, tau, rng.uniform(-2.0, 2.0));
        ovA.add(norm_c1(map_A_plus(P, phi) - map_A_rho_half(P, phi)));
        const double sigma = P.eta0() + rng.uniform(-0.25, 0.25) * P.rho() * 0.999;
        const Segment chi = make_pinned_segment(P, base, eta, sigma, rng.uniform(-2.0, 2.0));
        ovB.add(norm_c1(map_B_plus(P, chi) - map_B_rho_quarter(P, chi)));
    }
    rep.checks.push_back(ovA.finish());
    rep.checks.push_back(ovB.finish());

    detail::CheckBuilder fixed("roundtrip", "A_fixes_Xf_cap_X0", 1e-12);
    const auto zeros = detail::zeros_of_g(P, P.eta0() - 4.0, P.eta0() + 4.0);
    const std::size_t n_fix = detail::scaled(50, o.sample_scale);
    for (std::size_t i = 0; i < n_fix && !zeros.empty(); ++i) {
        const double tau = zeros[i % zeros.size()];
        double eta = P.eta0() + rng.uniform(-2.0, 2.0);
        if (!(P.delay(eta) > 0.0)) eta = tau;
        if (!(P.delay(eta) > 0.0) && eta != tau) continue;
        const Segment phi = make_slice_point(P, eta, tau, random_segment(rng, P.r(), 64));
        fixed.add(norm_c1(map_A(P, phi, opts).segment - phi));
    }
    rep.checks.push_back(fixed.finish());
}

inline void verify_manifold(const Problem& P, const VerifyOptions& o, VerifyReport& rep) {
    Rng rng(detail::suite_seed(o.seed, "manifold"));
    MapOptions opts;
    opts.check_overlap = false;
    detail::CheckBuilder pts("manifold", "manifold_point_residual", 1e-12);
    detail::CheckBuilder into("manifold", "A_maps_Xf_into_X0", 1e-11);
    const std::size_t n = detail::scaled(500, o.sample_scale);
    for (std::size_t i = 0; i < n; ++i) {
        const Segment phi = detail::random_manifold_point(rng, P, P.eta0() + rng.uniform(-2.0, 2.0));
        pts.add(std::abs(residual_Xf(P, phi)));
        into.add(std::abs(map_A(P, phi, opts).segment.eval_deriv(0.0)));
    }
    rep.checks.push_back(pts.finish());
    rep.checks.push_back(into.finish());

    detail::CheckBuilder onto("manifold", "B_maps_X0_into_Xf", 1e-9);
    detail::CheckBuilder surj("manifold", "A_after_B_on_X0", 1e-9);
    for (std::size_t i = 0; i < n; ++i) {
        const Segment zeta = detail::random_x0(rng, P);
        const Segment b = map_B(P, zeta, opts).segment;
        onto.add(std::abs(residual_Xf(P, b)));
        surj.add(norm_c1(map_A(P, b, opts).segment - zeta));
    }
    rep.checks.push_back(onto.finish());
    rep.checks.push_back(surj.finish());

    detail::CheckBuilder flat("manifold", "flat_slice_at_eta0", 0.0);
    for (std::size_t i = 0; i < detail::scaled(100, o.sample_scale); ++i) {
        const Segment phi = make_pinned_segment(P, random_segment(rng, P.r(), 64), P.eta0(), P.eta0(),
                                                rng.uniform(-2.0, 2.0));
        flat.add(std::abs(f_eval(P, phi) - P.g(P.eta0())));
    }
    rep.checks.push_back(flat.finish());

    // central differences, relative error
    detail::CheckBuilder fd("manifold", "extended_derivative_vs_central_difference", 1e-6);
    const double hstep = 1e-5;
    for (std::size_t i = 0; i < detail::scaled(100, o.sample_scale); ++i) {
        const Segment phi = random_smooth_segment(rng, P.r(), 64, 1.0);
        const Segment chi = random_smooth_segment(rng, P.r(), 64, 1.0);
        const double exact = df_apply(P, phi, chi);
        const double num =
            (f_eval(P, combine(phi, hstep, chi)) - f_eval(P, combine(phi, -hstep, chi))) / (2.0 * hstep);
        fd.add(std::abs(num - exact) / std::abs(exact));
    }
    rep.checks.push_back(fd.finish());
}

inline void verify_dde(const Problem& P, const VerifyOptions& o, VerifyReport& rep) {
    Rng rng(detail::suite_seed(o.seed, "dde"));
    MapOptions opts;
    opts.check_overlap = false;
    detail::CheckBuilder inv("dde", "flow_keeps_segments_on_manifold", 1e-5);
    detail::CheckBuilder conv("dde", "step_halving_self_convergence", 1e-6);
    detail::CheckBuilder chart("dde", "chart_transport_into_X0", 1e-5);
    const std::size_t n = detail::scaled(10, o.sample_scale);
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = P.eta0() + rng.uniform(-0.5, 0.5);
        const Segment phi0 =
            make_smooth_manifold_point(P, xi, rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
        const Trajectory tr = integrate(P, phi0, 3.0, 1e-3);
        for (double res : trajectory_residuals(P, tr, 6001)) inv.add(std::abs(res));
        for (int k = 1; k <= 6; ++k) {
            const Segment xt = tr.segment(0.5 * k);
            chart.add(std::abs(map_A(P, xt, opts).segment.eval_deriv(0.0)));
        }
        const Trajectory coarse = integrate(P, phi0, 1.0, 1e-3);
        const Trajectory fine = integrate(P, phi0, 1.0, 5e-4);
        for (int k = 0; k <= 2000; ++k) {
            const double t = k / 2000.0;
            conv.add(std::abs(coarse.eval(t) - fine.eval(t)));
        }
    }
    rep.checks.push_back(inv.finish());
    rep.checks.push_back(conv.finish());
    rep.checks.push_back(chart.finish());
}

/// Run the selected suites in a fixed order.
inline VerifyReport run_verify(const Problem& P, const VerifyOptions& o = {}) {
    for (const auto& s : o.suites)
        if (std::find(verify_suites().begin(), verify_suites().end(), s) == verify_suites().end())
            throw std::invalid_argument("unknown suite '" + s + "'");
    auto wanted = [&](const char* s) {
        return o.suites.empty() || std::find(o.suites.begin(), o.suites.end(), s) != o.suites.end();
    };
    VerifyReport rep;
    if (wanted("constants")) verify_constants(P, rep);
    if (wanted("psi")) verify_psi(P, o, rep);
    if (wanted("h")) verify_h(P, o, rep);
    if (wanted("roundtrip")) verify_roundtrip_suite(P, o, rep);
    if (wanted("manifold")) verify_manifold(P, o, rep);
    if (wanted("dde")) verify_dde(P, o, rep);
    return rep;
}

inline nlohmann::json to_json(const Check& c) {
    return {{"suite", c.suite},         {"name", c.name},   {"samples", c.samples},
            {"worst", c.worst},         {"tolerance", c.tolerance},
            {"bound", c.upper ? "upper" : "lower"}, {"pass", c.pass}};
}

inline nlohmann::json to_json(const VerifyReport& r) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : r.checks) checks.push_back(to_json(c));
    return {{"pass", r.pass()}, {"checks", std::move(checks)}};
}

} // namespace solman

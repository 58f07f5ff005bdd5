#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "problem.hpp"
#include "segment.hpp"
#include "transversal.hpp"

namespace solman {

// ---------------------------------------------------------------------------
// The scalar maps h_eta and their inverse T(eta, sigma).

/// psi_{eta0}(-d(eta)), the only place eta enters h_eta.
inline double h_eta_weight(const Problem& P, double eta) { return psi0_eval(P, -P.delay(eta)); }

/// h_eta(tau) = tau - g(tau) a(tau) psi_{eta0}(-d(eta)).
inline double h_eta(const Problem& P, double eta, double tau) {
    return tau - P.g(tau) * bump_a(P, tau) * h_eta_weight(P, eta);
}

inline double h_eta_deriv(const Problem& P, double eta, double tau) {
    const double ga_prime = P.g_prime(tau) * bump_a(P, tau) + P.g(tau) * bump_a_deriv(P, tau);
    return 1.0 - ga_prime * h_eta_weight(P, eta);
}

inline double root_tolerance(double sigma) { return 1e-13 * (1.0 + std::abs(sigma)); }
inline constexpr int kMaxRootIterations = 100;

struct RootResult {
    double tau;
    int iterations;
    double residual; // h_eta(tau) - sigma
};

/// Solve h_eta(tau) = sigma by Newton's method safeguarded with bisection.
///
/// Since |h_eta(tau) - tau| <= c c*, the root lies in [sigma - c c*, sigma + c c*];
/// h_eta' >= 1 - c/(4(c+1)) >= 3/4 makes the root unique and the bracket
/// shrink geometrically.
inline RootResult invert_h_detailed(const Problem& P, double eta, double sigma) {
    const double weight = h_eta_weight(P, eta);
    auto F = [&](double tau) { return tau - P.g(tau) * bump_a(P, tau) * weight - sigma; };
    auto dF = [&](double tau) {
        return 1.0 - (P.g_prime(tau) * bump_a(P, tau) + P.g(tau) * bump_a_deriv(P, tau)) * weight;
    };
    const double tol = root_tolerance(sigma);

    double tau = sigma;
    double f = F(tau);
    if (std::abs(f) <= tol) return {tau, 0, f};

    double width = P.c() * P.c_star() * (1.0 + 1e-9) + tol;
    double lo = sigma - width, hi = sigma + width;
    double flo = F(lo), fhi = F(hi);
    // c is a sampled bound; widen if it turned out too tight
    for (int k = 0; k < 60 && !(flo <= 0.0 && fhi >= 0.0); ++k) {
        width *= 2.0;
        lo = sigma - width;
        hi = sigma + width;
        flo = F(lo);
        fhi = F(hi);
    }
    if (!(flo <= 0.0 && fhi >= 0.0)) throw NumericalError("invert_h: could not bracket the root");

    for (int it = 1; it <= kMaxRootIterations; ++it) {
        if (f < 0.0)
            lo = tau;
        else
            hi = tau;
        const double slope = dF(tau);
        double next = tau - f / slope;
        if (!(slope > 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
        tau = next;
        f = F(tau);
        if (std::abs(f) <= tol) return {tau, it, f};
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(tau)))
            return {tau, it, f};
    }
    throw NumericalError("invert_h: iteration limit reached for eta = " + std::to_string(eta) +
                         ", sigma = " + std::to_string(sigma));
}

/// T(eta, sigma) = h_eta^{-1}(sigma).
inline double invert_h(const Problem& P, double eta, double sigma) {
    return invert_h_detailed(P, eta, sigma).tau;
}

// ---------------------------------------------------------------------------
// The diffeomorphism A and its inverse B.

enum class Branch { RhoHalf, Plus, RhoQuarter };

inline const char* branch_name(Branch b) {
    switch (b) {
    case Branch::RhoHalf: return "rho_half";
    case Branch::Plus: return "plus";
    case Branch::RhoQuarter: return "rho_quarter";
    }
    return "?";
}

struct BranchReport {
    Branch branch_used = Branch::Plus;
    double tau = 0.0;
    double eta = 0.0;
    double sigma = 0.0; // B only
    bool overlap_checked = false;
};

struct MapResult {
    Segment segment;
    BranchReport report;
};

struct MapOptions {
#ifdef NDEBUG
    bool check_overlap = false;
#else
    bool check_overlap = true;
#endif
};

/// Branch outputs on an overlap must agree to this C^1 distance.
inline constexpr double kOverlapTol = 1e-15;

/// Domain of the "plus" branches: d(eta) > 0. Points within 1e-14 of eta0
/// are sent to the rho/2 and rho/4 branches, which are valid there.
inline bool in_plus_domain(const Problem& P, double eta) {
    return std::abs(eta - P.eta0()) > kEtaZeroTol && P.delay(eta) > 0.0;
}

/// A on {|phi(-d(phi(0))) - eta0| < rho/2}: phi - g(tau) psi_{eta0}.
inline Segment map_A_rho_half(const Problem& P, const Segment& phi) {
    const double eta = phi.eval(0.0);
    const double tau = phi.eval(-P.delay(eta));
    if (!(std::abs(tau - P.eta0()) < 0.5 * P.rho()))
        throw PreconditionError("map_A_rho_half: |tau - eta0| >= rho/2");
    return phi.axpy(-P.g(tau), psi0_term(P));
}

/// A on {d(phi(0)) > 0}: phi - g(tau)[a(tau) psi_{eta0} + (1 - a(tau)) psi_eta].
inline Segment map_A_plus(const Problem& P, const Segment& phi) {
    const double eta = phi.eval(0.0);
    if (!in_plus_domain(P, eta)) throw PreconditionError("map_A_plus: d(phi(0)) = 0");
    const double tau = phi.eval(-P.delay(eta));
    const double g = P.g(tau), a = bump_a(P, tau);
    return phi.axpy(-g * a, psi0_term(P)).axpy(-g * (1.0 - a), psi_eta_term(P, eta));
}

inline MapResult map_A(const Problem& P, const Segment& phi, MapOptions opts = {}) {
    BranchReport rep;
    rep.eta = phi.eval(0.0);
    rep.tau = phi.eval(-P.delay(rep.eta));
    if (!in_plus_domain(P, rep.eta)) {
        rep.branch_used = Branch::RhoHalf;
        return {map_A_rho_half(P, phi), rep};
    }
    rep.branch_used = Branch::Plus;
    Segment out = map_A_plus(P, phi);
    if (opts.check_overlap && std::abs(rep.tau - P.eta0()) < 0.5 * P.rho()) {
        const double gap = norm_c1(out - map_A_rho_half(P, phi));
        if (gap > kOverlapTol)
            throw NumericalError("map_A: branches disagree on overlap by " + std::to_string(gap));
        rep.overlap_checked = true;
    }
    return {std::move(out), rep};
}

/// B on {|chi(-d(chi(0))) - eta0| < rho/4}: chi + g(tau) psi_{eta0}, tau = T(eta, sigma).
inline Segment map_B_rho_quarter(const Problem& P, const Segment& chi) {
    const double eta = chi.eval(0.0);
    const double sigma = chi.eval(-P.delay(eta));
    if (!(std::abs(sigma - P.eta0()) < 0.25 * P.rho()))
        throw PreconditionError("map_B_rho_quarter: |sigma - eta0| >= rho/4");
    const double tau = invert_h(P, eta, sigma);
    return chi.axpy(P.g(tau), psi0_term(P));
}

/// B on {d(chi(0)) > 0}: chi + g(tau)[a(tau) psi_{eta0} + (1 - a(tau)) psi_eta].
inline Segment map_B_plus(const Problem& P, const Segment& chi) {
    const double eta = chi.eval(0.0);
    if (!in_plus_domain(P, eta)) throw PreconditionError("map_B_plus: d(chi(0)) = 0");
    const double sigma = chi.eval(-P.delay(eta));
    const double tau = invert_h(P, eta, sigma);
    const double g = P.g(tau), a = bump_a(P, tau);
    return chi.axpy(g * a, psi0_term(P)).axpy(g * (1.0 - a), psi_eta_term(P, eta));
}

inline MapResult map_B(const Problem& P, const Segment& chi, MapOptions opts = {}) {
    BranchReport rep;
    rep.eta = chi.eval(0.0);
    rep.sigma = chi.eval(-P.delay(rep.eta));
    rep.tau = invert_h(P, rep.eta, rep.sigma);
    if (!in_plus_domain(P, rep.eta)) {
        rep.branch_used = Branch::RhoQuarter;
        return {map_B_rho_quarter(P, chi), rep};
    }
    rep.branch_used = Branch::Plus;
    Segment out = map_B_plus(P, chi);
    if (opts.check_overlap && std::abs(rep.sigma - P.eta0()) < 0.25 * P.rho()) {
        const double gap = norm_c1(out - map_B_rho_quarter(P, chi));
        if (gap > kOverlapTol)
            throw NumericalError("map_B: branches disagree on overlap by " + std::to_string(gap));
        rep.overlap_checked = true;
    }
    return {std::move(out), rep};
}

struct RoundTrip {
    double ba_error = 0.0;         // |B(A(phi)) - phi|_{C^1}
    double ab_error = 0.0;         // |A(B(phi)) - phi|_{C^1}
    double ba_tau_recovery = 0.0;  // |tau_hat - tau| inside B(A(phi))
    double ab_tau_recovery = 0.0;  // |tau_hat - tau| inside A(B(phi))
    BranchReport a, b_of_a, b, a_of_b;
};

/// Both compositions of A and B applied to phi. Tails cancel exactly, so the
/// errors measure only tail-coefficient mismatch from the root solver.
inline RoundTrip verify_roundtrip(const Problem& P, const Segment& phi, MapOptions opts = {}) {
    RoundTrip rt;
    const auto A1 = map_A(P, phi, opts);
    const auto BA = map_B(P, A1.segment, opts);
    rt.a = A1.report;
    rt.b_of_a = BA.report;
    rt.ba_error = norm_c1(BA.segment - phi);
    rt.ba_tau_recovery = std::abs(BA.report.tau - A1.report.tau);

    const auto B1 = map_B(P, phi, opts);
    const auto AB = map_A(P, B1.segment, opts);
    rt.b = B1.report;
    rt.a_of_b = AB.report;
    rt.ab_error = norm_c1(AB.segment - phi);
    rt.ab_tau_recovery = std::abs(AB.report.tau - B1.report.tau);
    return rt;
}

} // namespace solman

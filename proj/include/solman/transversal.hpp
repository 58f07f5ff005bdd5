#pragma once

#include <cmath>
#include <string>

#include "problem.hpp"
#include "segment.hpp"
#include "tail.hpp"

namespace solman {

/// eta is treated as eta0 when closer than this.
inline constexpr double kEtaZeroTol = 1e-14;

namespace detail {
inline double check_t(const Problem& P, double t) {
    if (!(t >= -P.r() - kClampTol && t <= kClampTol))
        throw DomainError("psi: t = " + std::to_string(t) + " outside [-r, 0]");
    return std::clamp(t, -P.r(), 0.0);
}
} // namespace detail

/// psi_{eta0}(t) = t exp(kappa t): vanishes at 0, unit slope there, sup |psi| = 1/(kappa e) <= c*.
inline double psi0_eval(const Problem& P, double t) {
    return psi_template(P.kappa(), detail::check_t(P, t));
}

inline double psi0_deriv(const Problem& P, double t) {
    return psi_template_deriv(P.kappa(), detail::check_t(P, t));
}

inline TailTerm psi0_term(const Problem& P) { return TailTerm::at_eta_zero(P.kappa()); }

/// psi_eta for eta != eta0: the template cut off smoothly so that it vanishes on
/// [-r, -d(eta)] and coincides with psi_{eta0} on [-d(eta)/2, 0].
inline TailTerm psi_eta_term(const Problem& P, double eta) {
    if (std::abs(eta - P.eta0()) <= kEtaZeroTol)
        throw PreconditionError("psi_eta: the family has no continuous extension to eta0");
    const double dl = P.delay(eta);
    if (!(dl > 0.0)) throw PreconditionError("psi_eta: d(eta) underflows to 0, cutoff undefined");
    return TailTerm::at_eta(eta, P.kappa(), -dl);
}

inline double psi_eval(const Problem& P, double eta, double t) {
    return psi_eta_term(P, eta).basis(detail::check_t(P, t));
}

inline double psi_deriv(const Problem& P, double eta, double t) {
    return psi_eta_term(P, eta).basis_deriv(detail::check_t(P, t));
}

/// Transversal direction for the slice phi(0) = eta: psi_eta when d(eta) > 0,
/// psi_{eta0} otherwise (both vanish at -d(eta) and at 0 there).
inline TailTerm transversal_term(const Problem& P, double eta) {
    if (std::abs(eta - P.eta0()) <= kEtaZeroTol || !(P.delay(eta) > 0.0)) return psi0_term(P);
    return psi_eta_term(P, eta);
}

/// The transversal function as a Segment (zero spline part).
inline Segment psi_segment(const Problem& P, const TailTerm& term) {
    return zero_segment(P.r()).axpy(1.0, term);
}

inline Segment psi_segment(const Problem& P, double eta) {
    return psi_segment(P, transversal_term(P, eta));
}

/// C^1 cutoff: 1 on |xi - eta0| <= rho/2, 0 on |xi - eta0| >= rho, smoothstep
/// in between with maximal slope exactly 3/rho.
inline double bump_a(const Problem& P, double xi) {
    const double dist = std::abs(xi - P.eta0());
    const double half = 0.5 * P.rho();
    if (dist <= half) return 1.0;
    if (dist >= P.rho()) return 0.0;
    return smoothstep((P.rho() - dist) / half);
}

inline double bump_a_deriv(const Problem& P, double xi) {
    const double dist = std::abs(xi - P.eta0());
    const double half = 0.5 * P.rho();
    if (dist <= half || dist >= P.rho()) return 0.0;
    const double sign = xi > P.eta0() ? -1.0 : 1.0;
    return sign * smoothstep_deriv((P.rho() - dist) / half) / half;
}

/// Projection onto X_0 along psi_eta: phi - phi'(0) psi_eta. Applied as an
/// exact tail operation, so the result has slope exactly 0 at t = 0.
inline Segment project_P_eta(const Problem& P, double eta, const Segment& phi) {
    return phi.axpy(-phi.eval_deriv(0.0), transversal_term(P, eta));
}

} // namespace solman

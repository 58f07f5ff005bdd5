#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "scalar.hpp"
#include "segment.hpp"

namespace solman {

/// Raw instance description before validation.
struct ProblemSpec {
    double r = 1.0;
    double eta0 = 0.0;
    double rho = 1.0;
    ScalarFn g;
    ScalarFn d;
    double sample_range = 10.0;    // d is validated on [eta0 - R, eta0 + R]
    double safety_factor = 1.01;   // multiplies the sampled bound c
    std::optional<double> c_override;
    std::string g_name = "g";
    std::string d_name = "d";
};

/// Tolerances used when validating d.
inline constexpr double kDelayZeroTol = 1e-12;
inline constexpr double kDelaySlopeTol = 1e-8;
inline constexpr std::size_t kConstantSamples = 10000;

/// An equation x'(t) = g(x(t - d(x(t)))) with L phi = phi(0), together with
/// the constants c, c* and the transversal steepness kappa.
///
/// Immutable after construction; see make_problem().
class Problem {
public:
    double r() const { return r_; }
    double eta0() const { return eta0_; }
    double rho() const { return rho_; }
    double c() const { return c_; }
    double c_star() const { return c_star_; }
    double kappa() const { return kappa_; }
    const ProblemSpec& spec() const { return spec_; }

    double g(double x) const { return spec_.g(x); }
    double g_prime(double x) const { return spec_.g.deriv(x); }

    /// d(eta), with round-off negatives (|d| <= 1e-12) clamped to 0.
    double delay(double eta) const {
        const double v = spec_.d(eta);
        if (v < 0.0) {
            if (v >= -kDelayZeroTol) return 0.0;
            throw DomainError("delay is negative at eta = " + std::to_string(eta));
        }
        if (v > r_ + kClampTol) throw DomainError("delay exceeds r at eta = " + std::to_string(eta));
        return std::min(v, r_);
    }

    double delay_prime(double eta) const { return spec_.d.deriv(eta); }

    /// 1 - c/(4(c+1)): lower bound on every h_eta'.
    double monotonicity_margin() const { return 1.0 - c_ / (4.0 * (c_ + 1.0)); }

    friend Problem make_problem(ProblemSpec spec);

private:
    ProblemSpec spec_;
    double r_ = 1.0, eta0_ = 0.0, rho_ = 1.0;
    double c_ = 0.0, c_star_ = 0.0, kappa_ = 1.0;
};

inline double c_star_from(double c, double rho) { return rho / (4.0 * (c + 1.0) * (rho + 3.0)); }

/// Validate the instance and compute c, c*, kappa.
///
/// c = safety * (max |g| + max |g'|) over 10^4 samples of [eta0 - rho, eta0 + rho]
/// unless overridden. d is checked on a sampled range for nonnegativity,
/// the bound d <= r, a zero at eta0 with vanishing slope, and no second zero.
inline Problem make_problem(ProblemSpec spec) {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (!(spec.r > 0.0) || !std::isfinite(spec.r)) fail("r must be positive");
    if (!(spec.rho > 0.0) || !std::isfinite(spec.rho)) fail("rho must be positive");
    if (!std::isfinite(spec.eta0)) fail("eta0 must be finite");
    if (!spec.g.f || !spec.g.df || !spec.d.f || !spec.d.df) fail("g and d need value and derivative");
    if (!(spec.sample_range > 0.0)) fail("sample_range must be positive");
    if (!(spec.safety_factor >= 1.0)) fail("safety_factor must be >= 1");

    const double eta0 = spec.eta0;
    const double d0 = spec.d(eta0);
    if (!(std::abs(d0) <= kDelayZeroTol)) {
        std::ostringstream os;
        os << "d(eta0) = " << d0 << " but d must vanish at eta0";
        fail(os.str());
    }
    const double dp0 = spec.d.deriv(eta0);
    if (!(std::abs(dp0) <= kDelaySlopeTol)) {
        std::ostringstream os;
        os << "|d'(eta0)| = " << std::abs(dp0) << " exceeds " << kDelaySlopeTol
           << " (d must be minimal at its zero)";
        fail(os.str());
    }
    const double R = spec.sample_range;
    for (std::size_t i = 0; i <= kConstantSamples; ++i) {
        const double xi = eta0 - R + 2.0 * R * static_cast<double>(i) / kConstantSamples;
        const double v = spec.d(xi);
        std::ostringstream os;
        if (!std::isfinite(v)) {
            os << "d is not finite at " << xi;
            fail(os.str());
        }
        if (v < -kDelayZeroTol) {
            os << "d(" << xi << ") = " << v << " is negative";
            fail(os.str());
        }
        if (v > spec.r + kClampTol) {
            os << "d(" << xi << ") = " << v << " exceeds r = " << spec.r;
            fail(os.str());
        }
        if (std::abs(xi - eta0) > 1e-12 * std::max(1.0, R) && v <= 0.0) {
            os << "d has a second zero near " << xi << " (only a single zero is supported)";
            fail(os.str());
        }
    }
    // d >= 0 never changes sign, so zeros between samples hide in local minima
    const double hs = 2.0 * R / kConstantSamples;
    for (std::size_t i = 1; i < kConstantSamples; ++i) {
        const double xi = eta0 - R + hs * static_cast<double>(i);
        if (std::abs(xi - eta0) <= 2.0 * hs) continue;
        const double v = spec.d(xi);
        if (!(v <= spec.d(xi - hs) && v <= spec.d(xi + hs))) continue;
        double a = xi - hs, b = xi + hs;
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        for (int it = 0; it < 80 && b - a > 1e-15 * std::max(1.0, std::abs(xi)); ++it) {
            const double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
            if (spec.d(x1) < spec.d(x2))
                b = x2;
            else
                a = x1;
        }
        const double xm = 0.5 * (a + b);
        if (spec.d(xm) <= kDelayZeroTol) {
            std::ostringstream os;
            os << "d has a second zero near " << xm << " (only a single zero is supported)";
            fail(os.str());
        }
    }

    double max_g = 0.0, max_gp = 0.0;
    for (std::size_t i = 0; i <= kConstantSamples; ++i) {
        const double xi = eta0 - spec.rho + 2.0 * spec.rho * static_cast<double>(i) / kConstantSamples;
        max_g = std::max(max_g, std::abs(spec.g(xi)));
        max_gp = std::max(max_gp, std::abs(spec.g.deriv(xi)));
    }
    if (!std::isfinite(max_g) || !std::isfinite(max_gp)) fail("g or g' is not finite near eta0");

    Problem p;
    p.r_ = spec.r;
    p.eta0_ = eta0;
    p.rho_ = spec.rho;
    if (spec.c_override) {
        if (!(*spec.c_override >= 0.0)) fail("c override must be nonnegative");
        p.c_ = *spec.c_override;
    } else {
        p.c_ = spec.safety_factor * (max_g + max_gp);
    }
    p.c_star_ = c_star_from(p.c_, p.rho_);
    p.kappa_ = std::max(1.0 / (std::numbers::e * p.c_star_), 1.0 / p.r_);
    p.spec_ = std::move(spec);

    if (!(p.c_ * p.c_star_ < p.rho_ / 4.0)) fail("c * c* < rho/4 violated");
    if (!(p.monotonicity_margin() >= 0.75)) fail("monotonicity margin below 3/4");
    return p;
}

// ---------------------------------------------------------------------------
// The functional f and its extended derivative.

/// g(phi(-d(phi(0))))
inline double f_eval(const Problem& P, const Segment& phi) {
    const double eta = phi.eval(0.0);
    return P.g(phi.eval(-P.delay(eta)));
}

/// Extended derivative D_e f(phi) chi for any continuous chi on [-r, 0]:
/// g'(phi(-d)) * [chi(-d) - phi'(-d) d'(phi(0)) chi(0)] with d = d(phi(0)).
template <class Chi>
    requires std::invocable<const Chi&, double>
double df_apply(const Problem& P, const Segment& phi, const Chi& chi) {
    const double eta = phi.eval(0.0);
    const double s = -P.delay(eta);
    return P.g_prime(phi.eval(s)) * (chi(s) - phi.eval_deriv(s) * P.delay_prime(eta) * chi(0.0));
}

inline double df_apply(const Problem& P, const Segment& phi, const Segment& chi) {
    return df_apply(P, phi, [&chi](double t) { return chi.eval(t); });
}

/// phi'(0) - f(phi); zero exactly on the solution manifold.
inline double residual_Xf(const Problem& P, const Segment& phi) {
    return phi.eval_deriv(0.0) - f_eval(P, phi);
}

inline constexpr double kOnManifoldTol = 1e-8;

/// chi'(0) - Df(phi) chi; zero iff chi is tangent to the manifold at phi.
inline double tangent_residual(const Problem& P, const Segment& phi, const Segment& chi) {
    const double res = residual_Xf(P, phi);
    if (!(std::abs(res) <= kOnManifoldTol))
        throw PreconditionError("tangent_residual: phi is off the solution manifold (residual " +
                                std::to_string(res) + ")");
    return chi.eval_deriv(0.0) - df_apply(P, phi, chi);
}

// ---------------------------------------------------------------------------
// Constructing points of the solution manifold.

/// Tail-free segment with phi(0) = eta, phi(-d(eta)) = tau and phi'(0) = slope0,
/// shaped elsewhere by the tail-free `base`. A node is inserted at -d(eta), or
/// an interior node within 5% of the local spacing is moved there.
inline Segment make_pinned_segment(const Problem& P, const Segment& base, double eta, double tau,
                                   double slope0) {
    if (base.has_tail()) throw PreconditionError("make_pinned_segment: base shape must be tail-free");
    if (std::abs(base.r() - P.r()) > kClampTol) throw PreconditionError("make_pinned_segment: r mismatch");
    const double z = -P.delay(eta);
    if (z == 0.0 && tau != eta)
        throw PreconditionError("make_pinned_segment: on the zero slice the delayed value must equal eta");

    std::vector<double> t(base.nodes().begin(), base.nodes().end());
    std::vector<double> v(base.values().begin(), base.values().end());
    std::vector<double> m(base.derivs().begin(), base.derivs().end());

    auto it = std::lower_bound(t.begin(), t.end(), z);
    auto k = static_cast<std::size_t>(it - t.begin());
    if (k < t.size() && t[k] == z) {
        v[k] = tau;
    } else {
        // k > 0 here since t.front() = -r <= z
        const double h = t[k] - t[k - 1];
        const double snap = 0.05 * h;
        if (k - 1 > 0 && z - t[k - 1] < snap) {
            t[k - 1] = z;
            v[k - 1] = tau;
        } else if (k + 1 < t.size() && t[k] - z < snap) {
            t[k] = z;
            v[k] = tau;
        } else {
            const double slope = base.spline_deriv(z);
            t.insert(t.begin() + static_cast<std::ptrdiff_t>(k), z);
            v.insert(v.begin() + static_cast<std::ptrdiff_t>(k), tau);
            m.insert(m.begin() + static_cast<std::ptrdiff_t>(k), slope);
        }
    }
    v.back() = eta;
    m.back() = slope0;
    return Segment(P.r(), std::move(t), std::move(v), std::move(m));
}

/// Point of the slice {phi(0) = eta}: phi(0) = eta, phi(-d(eta)) = tau,
/// phi'(0) = g(tau). Every such phi lies on the manifold and every manifold
/// point arises this way.
inline Segment make_slice_point(const Problem& P, double eta, double tau, const Segment& base) {
    return make_pinned_segment(P, base, eta, tau, P.g(tau));
}

/// Point of the manifold with phi(0) = phi(-d(xi)) = xi and phi'(0) = g(xi).
inline Segment make_manifold_point(const Problem& P, double xi, const Segment& base) {
    return make_slice_point(P, xi, xi, base);
}

/// The flat point: constant xi except for the slope g(xi) at 0.
inline Segment make_manifold_point(const Problem& P, double xi, std::size_t nodes = kDefaultNodes) {
    const Segment base(P.r(), uniform_nodes(P.r(), nodes), std::vector<double>(nodes, xi),
                       std::vector<double>(nodes, 0.0));
    return make_manifold_point(P, xi, base);
}

/// Smooth manifold point: xi + g(xi) t S(2(t - z)/(-z)) + t^2 (t - z)(a + b t),
/// z = -d(xi), sampled on `nodes` uniform nodes plus a node at z. The first
/// term carries the slope g(xi) at 0 and vanishes on [-r, z]; the second is a
/// free perturbation vanishing at z and 0 with zero slope at 0.
inline Segment make_smooth_manifold_point(const Problem& P, double xi, double a, double b,
                                          std::size_t nodes = kDefaultNodes) {
    const double z = -P.delay(xi);
    const double slope = P.g(xi);
    auto f = [=](double t) {
        const double bump = z < 0.0 ? smoothstep(2.0 * (t - z) / (-z)) : 1.0;
        return xi + slope * t * bump + t * t * (t - z) * (a + b * t);
    };
    auto df = [=](double t) {
        double lead = slope;
        if (z < 0.0) {
            const double u = 2.0 * (t - z) / (-z);
            lead = slope * (smoothstep(u) + t * smoothstep_deriv(u) * 2.0 / (-z));
        }
        return lead + (3.0 * t * t - 2.0 * z * t) * (a + b * t) + t * t * (t - z) * b;
    };
    return make_manifold_point(P, xi, sample_segment(P.r(), nodes, f, df));
}

} // namespace solman

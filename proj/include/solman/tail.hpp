#pragma once

#include <algorithm>
#include <cmath>

namespace solman {

/// Cubic smoothstep 3u^2 - 2u^3 with u clamped to [0, 1].
inline double smoothstep(double u) {
    u = std::clamp(u, 0.0, 1.0);
    return u * u * (3.0 - 2.0 * u);
}

inline double smoothstep_deriv(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    return 6.0 * u * (1.0 - u);
}

// Transversal template t*exp(kappa*t). Value 0 and slope 1 at t = 0,
// sup over t <= 0 equals 1/(kappa*e), attained at t = -1/kappa.
inline double psi_template(double kappa, double t) { return t * std::exp(kappa * t); }

inline double psi_template_deriv(double kappa, double t) {
    return std::exp(kappa * t) * (1.0 + kappa * t);
}

// Template multiplied by a smoothstep cutoff that vanishes on t <= z and is
// identically 1 on [z/2, 0]. Requires z < 0.
inline double psi_cutoff(double kappa, double z, double t) {
    if (t <= z) return 0.0;
    const double u = 2.0 * (t - z) / (-z);
    if (u >= 1.0) return psi_template(kappa, t);
    return psi_template(kappa, t) * smoothstep(u);
}

inline double psi_cutoff_deriv(double kappa, double z, double t) {
    if (t <= z) return 0.0;
    const double u = 2.0 * (t - z) / (-z);
    if (u >= 1.0) return psi_template_deriv(kappa, t);
    return psi_template_deriv(kappa, t) * smoothstep(u) +
           psi_template(kappa, t) * smoothstep_deriv(u) * 2.0 / (-z);
}

enum class TailKind {
    AtEtaZero, ///< psi at the zero eta0 of the delay
    AtEta      ///< psi_eta for eta != eta0, with support cutoff z = -d(eta)
};

/// One exact summand coeff * psi carried symbolically inside a Segment.
struct TailTerm {
    double coeff = 1.0;
    TailKind kind = TailKind::AtEtaZero;
    double eta = 0.0;   // only meaningful for AtEta
    double kappa = 1.0;
    double z = 0.0;     // only meaningful for AtEta; always < 0 there

    static TailTerm at_eta_zero(double kappa, double coeff = 1.0) {
        return TailTerm{coeff, TailKind::AtEtaZero, 0.0, kappa, 0.0};
    }

    static TailTerm at_eta(double eta, double kappa, double z, double coeff = 1.0) {
        return TailTerm{coeff, TailKind::AtEta, eta, kappa, z};
    }

    double basis(double t) const {
        return kind == TailKind::AtEtaZero ? psi_template(kappa, t) : psi_cutoff(kappa, z, t);
    }

    double basis_deriv(double t) const {
        return kind == TailKind::AtEtaZero ? psi_template_deriv(kappa, t)
                                           : psi_cutoff_deriv(kappa, z, t);
    }

    double value(double t) const { return coeff * basis(t); }
    double deriv(double t) const { return coeff * basis_deriv(t); }

    /// Same basis function (coefficients may differ).
    bool same_basis(const TailTerm& other) const {
        if (kind != other.kind || kappa != other.kappa) return false;
        return kind == TailKind::AtEtaZero || (eta == other.eta && z == other.z);
    }
};

} // namespace solman

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "tail.hpp"

namespace solman {

/// Evaluation points may overshoot [-r, 0] by this much and are clamped.
inline constexpr double kClampTol = 1e-12;
/// Tail coefficients at or below this magnitude are dropped.
inline constexpr double kDropCoeff = 1e-300;
inline constexpr std::size_t kDefaultNodes = 200;

namespace detail {

struct HermitePiece {
    double t0, h, y0, y1, m0, m1;

    double value(double s) const {
        const double u = 1.0 - s;
        return (1.0 + 2.0 * s) * u * u * y0 + h * s * u * u * m0 + s * s * (3.0 - 2.0 * s) * y1 +
               h * s * s * (s - 1.0) * m1;
    }

    // d/dt, not d/ds
    double deriv(double s) const {
        return ((6.0 * s * s - 6.0 * s) * y0 + (6.0 * s - 6.0 * s * s) * y1) / h +
               (3.0 * s * s - 4.0 * s + 1.0) * m0 + (3.0 * s * s - 2.0 * s) * m1;
    }

    // power basis in s: a0 + a1 s + a2 s^2 + a3 s^3
    std::array<double, 4> power() const {
        return {y0, h * m0, -3.0 * y0 + 3.0 * y1 - 2.0 * h * m0 - h * m1,
                2.0 * y0 - 2.0 * y1 + h * m0 + h * m1};
    }
};

// Real roots of a + b s + c s^2 lying strictly inside (0, 1).
inline std::vector<double> quadratic_roots_unit(double a, double b, double c) {
    std::vector<double> out;
    auto keep = [&](double s) {
        if (s > 0.0 && s < 1.0) out.push_back(s);
    };
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
    if (scale == 0.0) return out;
    if (std::abs(c) <= 1e-14 * scale) {
        if (b != 0.0) keep(-a / b);
        return out;
    }
    const double disc = b * b - 4.0 * c * a;
    if (disc < 0.0) return out;
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    if (q != 0.0) {
        keep(q / c);
        keep(a / q);
    } else {
        keep(0.0);
    }
    return out;
}

} // namespace detail

/// An element of C^1([-r, 0]): a cubic Hermite spline on a stored grid plus
/// an exact linear combination of transversal functions (the tail).
///
/// Segments are immutable values. All arithmetic on them is exact in the
/// tail and nodewise in the spline part.
class Segment {
public:
    Segment() = default;

    Segment(double r, std::vector<double> nodes, std::vector<double> values,
            std::vector<double> derivs, std::vector<TailTerm> tail = {})
        : r_(r), nodes_(std::move(nodes)), values_(std::move(values)), derivs_(std::move(derivs)),
          tail_(std::move(tail)) {
        if (!(r_ > 0.0) || !std::isfinite(r_)) throw std::invalid_argument("segment: r must be positive");
        if (nodes_.size() < 2) throw std::invalid_argument("segment: need at least two nodes");
        if (values_.size() != nodes_.size() || derivs_.size() != nodes_.size())
            throw std::invalid_argument("segment: nodes, values and derivs differ in length");
        if (nodes_.front() != -r_ || nodes_.back() != 0.0)
            throw std::invalid_argument("segment: nodes must run from -r to 0");
        for (std::size_t i = 1; i < nodes_.size(); ++i)
            if (!(nodes_[i] > nodes_[i - 1]))
                throw std::invalid_argument("segment: nodes must be strictly increasing");
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (!std::isfinite(values_[i]) || !std::isfinite(derivs_[i]))
                throw std::invalid_argument("segment: non-finite node data");
        for (const auto& term : tail_)
            if (term.kind == TailKind::AtEta && !(term.z < 0.0 && term.z >= -r_ - kClampTol))
                throw std::invalid_argument("segment: psi_eta cutoff outside (-r, 0)");
    }

    double r() const { return r_; }
    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> values() const { return values_; }
    std::span<const double> derivs() const { return derivs_; }
    std::span<const TailTerm> tail() const { return tail_; }
    bool has_tail() const { return !tail_.empty(); }
    std::size_t size() const { return nodes_.size(); }

    double eval(double t) const {
        t = clamp(t);
        double v = spline_eval_clamped(t);
        for (const auto& term : tail_) v += term.value(t);
        return v;
    }

    double eval_deriv(double t) const {
        t = clamp(t);
        double v = spline_deriv_clamped(t);
        for (const auto& term : tail_) v += term.deriv(t);
        return v;
    }

    double spline_eval(double t) const { return spline_eval_clamped(clamp(t)); }
    double spline_deriv(double t) const { return spline_deriv_clamped(clamp(t)); }

    double tail_eval(double t) const {
        t = clamp(t);
        double v = 0.0;
        for (const auto& term : tail_) v += term.value(t);
        return v;
    }

    /// Hermite piece i covering [nodes[i], nodes[i+1]].
    detail::HermitePiece piece(std::size_t i) const {
        return {nodes_[i], nodes_[i + 1] - nodes_[i], values_[i], values_[i + 1], derivs_[i],
                derivs_[i + 1]};
    }

    /// Copy with coeff * term merged into the tail.
    Segment axpy(double coeff, const TailTerm& term) const {
        Segment out = *this;
        out.add_term(coeff, term);
        return out;
    }

    Segment without_tail() const { return Segment(r_, nodes_, values_, derivs_); }

    friend Segment combine(const Segment& a, double alpha, const Segment& b);
    friend Segment scale(const Segment& a, double k);

private:
    double clamp(double t) const {
        if (!(t >= -r_ - kClampTol && t <= kClampTol))
            throw DomainError("segment: evaluation point " + std::to_string(t) + " outside [-r, 0]");
        return std::clamp(t, -r_, 0.0);
    }

    std::size_t locate(double t) const {
        auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
        auto i = static_cast<std::size_t>(std::distance(nodes_.begin(), it));
        if (i == 0) return 0;
        return std::min(i - 1, nodes_.size() - 2);
    }

    double spline_eval_clamped(double t) const {
        const auto p = piece(locate(t));
        return p.value((t - p.t0) / p.h);
    }

    double spline_deriv_clamped(double t) const {
        const auto p = piece(locate(t));
        return p.deriv((t - p.t0) / p.h);
    }

    void add_term(double coeff, const TailTerm& term) {
        if (term.kind == TailKind::AtEta && !(term.z < 0.0 && term.z >= -r_ - kClampTol))
            throw std::invalid_argument("segment: psi_eta cutoff outside (-r, 0)");
        const double c = coeff * term.coeff;
        for (auto it = tail_.begin(); it != tail_.end(); ++it) {
            if (it->same_basis(term)) {
                it->coeff += c;
                if (std::abs(it->coeff) <= kDropCoeff) tail_.erase(it);
                return;
            }
        }
        if (std::abs(c) <= kDropCoeff) return;
        TailTerm added = term;
        added.coeff = c;
        tail_.push_back(added);
    }

    double r_ = 1.0;
    std::vector<double> nodes_;
    std::vector<double> values_;
    std::vector<double> derivs_;
    std::vector<TailTerm> tail_;
};

/// Uniform grid on [-r, 0] with exact endpoints.
inline std::vector<double> uniform_nodes(double r, std::size_t n) {
    if (n < 2) throw std::invalid_argument("uniform_nodes: need at least two nodes");
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i)
        t[i] = -r + r * static_cast<double>(i) / static_cast<double>(n - 1);
    t.front() = -r;
    t.back() = 0.0;
    return t;
}

inline Segment make_segment(double r, std::vector<double> nodes, std::vector<double> values,
                            std::vector<double> derivs) {
    return Segment(r, std::move(nodes), std::move(values), std::move(derivs));
}

inline Segment zero_segment(double r, std::size_t n = 2) {
    return Segment(r, uniform_nodes(r, n), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0));
}

/// Hermite data of (f, df) sampled on the uniform n-node grid.
template <class F, class DF>
Segment sample_segment(double r, std::size_t n, F&& f, DF&& df) {
    auto t = uniform_nodes(r, n);
    std::vector<double> v(n), m(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = f(t[i]);
        m[i] = df(t[i]);
    }
    return Segment(r, std::move(t), std::move(v), std::move(m));
}

inline double eval(const Segment& phi, double t) { return phi.eval(t); }
inline double eval_deriv(const Segment& phi, double t) { return phi.eval_deriv(t); }

inline Segment axpy(const Segment& phi, double coeff, const TailTerm& term) {
    return phi.axpy(coeff, term);
}

/// Tail-free segment on a uniform n-node grid interpolating phi's values and
/// slopes at the nodes. C-norm error is O(h^4) for smooth phi.
inline Segment resample(const Segment& phi, std::size_t n) {
    auto t = uniform_nodes(phi.r(), n);
    std::vector<double> v(n), m(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = phi.eval(t[i]);
        m[i] = phi.eval_deriv(t[i]);
    }
    return Segment(phi.r(), std::move(t), std::move(v), std::move(m));
}

/// Tail-free segment interpolating phi on the given grid (from -r to 0).
inline Segment resample_on(const Segment& phi, std::vector<double> t) {
    std::vector<double> v(t.size()), m(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        v[i] = phi.eval(t[i]);
        m[i] = phi.eval_deriv(t[i]);
    }
    return Segment(phi.r(), std::move(t), std::move(v), std::move(m));
}

/// Union of phi's own nodes and a uniform n-node grid; ties within 1e-12 r collapse.
inline std::vector<double> refined_nodes(const Segment& phi, std::size_t n) {
    std::vector<double> t(phi.nodes().begin(), phi.nodes().end());
    const auto u = uniform_nodes(phi.r(), n);
    t.insert(t.end(), u.begin(), u.end());
    std::sort(t.begin(), t.end());
    std::vector<double> out;
    for (double x : t)
        if (out.empty() || x - out.back() > 1e-12 * phi.r()) out.push_back(x);
    out.front() = -phi.r();
    out.back() = 0.0;
    return out;
}

/// a + alpha * b. Identical grids combine nodewise; otherwise the spline parts
/// are merged on the union grid, which represents both exactly.
inline Segment combine(const Segment& a, double alpha, const Segment& b) {
    if (std::abs(a.r() - b.r()) > kClampTol * std::max(1.0, a.r()))
        throw std::invalid_argument("combine: segments live on different intervals");
    Segment out;
    if (std::ranges::equal(a.nodes(), b.nodes())) {
        const std::size_t n = a.size();
        std::vector<double> v(n), m(n);
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = a.values_[i] + alpha * b.values_[i];
            m[i] = a.derivs_[i] + alpha * b.derivs_[i];
        }
        out = Segment(a.r(), a.nodes_, std::move(v), std::move(m), a.tail_);
    } else {
        std::vector<double> t;
        t.reserve(a.size() + b.size());
        std::ranges::merge(a.nodes(), b.nodes(), std::back_inserter(t));
        t.erase(std::unique(t.begin(), t.end()), t.end());
        t.front() = -a.r();
        std::vector<double> v(t.size()), m(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
            v[i] = a.spline_eval(t[i]) + alpha * b.spline_eval(t[i]);
            m[i] = a.spline_deriv(t[i]) + alpha * b.spline_deriv(t[i]);
        }
        out = Segment(a.r(), std::move(t), std::move(v), std::move(m), a.tail_);
    }
    for (const auto& term : b.tail_) out.add_term(alpha, term);
    return out;
}

inline Segment scale(const Segment& a, double k) {
    std::vector<double> v(a.values_), m(a.derivs_);
    for (auto& x : v) x *= k;
    for (auto& x : m) x *= k;
    Segment out(a.r(), a.nodes_, std::move(v), std::move(m));
    for (const auto& term : a.tail_) out.add_term(k, term);
    return out;
}

inline Segment operator+(const Segment& a, const Segment& b) { return combine(a, 1.0, b); }
inline Segment operator-(const Segment& a, const Segment& b) { return combine(a, -1.0, b); }

namespace detail {

// Exact sup of |p| and |p'| over a tail-free segment via per-piece critical points.
inline std::pair<double, double> spline_sup_exact(const Segment& phi) {
    double sup_v = 0.0, sup_d = 0.0;
    for (std::size_t i = 0; i + 1 < phi.size(); ++i) {
        const auto p = phi.piece(i);
        const auto a = p.power();
        auto consider = [&](double s) {
            sup_v = std::max(sup_v, std::abs(p.value(s)));
            sup_d = std::max(sup_d, std::abs(p.deriv(s)));
        };
        consider(0.0);
        consider(1.0);
        for (double s : quadratic_roots_unit(a[1], 2.0 * a[2], 3.0 * a[3]))
            sup_v = std::max(sup_v, std::abs(p.value(s)));
        if (a[3] != 0.0) {
            const double s = -a[2] / (3.0 * a[3]);
            if (s > 0.0 && s < 1.0) sup_d = std::max(sup_d, std::abs(p.deriv(s)));
        }
    }
    return {sup_v, sup_d};
}

// Maximize |f| on [lo, hi] by golden-section search (one local refinement).
template <class F>
double golden_max_abs(F&& f, double lo, double hi) {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
    double f1 = std::abs(f(x1)), f2 = std::abs(f(x2));
    double best = std::max({std::abs(f(lo)), std::abs(f(hi)), f1, f2});
    for (int it = 0; it < 80 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = std::abs(f(x2));
            best = std::max(best, f2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = std::abs(f(x1));
            best = std::max(best, f1);
        }
    }
    return best;
}

// Sampled sup of |f| with 64 samples per breakpoint interval, then one
// golden-section refinement around the best sample.
template <class F>
double sampled_sup(F&& f, std::span<const double> breaks) {
    constexpr int kPerPiece = 64;
    double best = 0.0, best_t = breaks.front(), best_h = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double lo = breaks[i], hi = breaks[i + 1];
        const double h = (hi - lo) / kPerPiece;
        for (int k = 0; k <= kPerPiece; ++k) {
            const double t = (k == kPerPiece) ? hi : lo + h * k;
            const double v = std::abs(f(t));
            if (v > best) {
                best = v;
                best_t = t;
                best_h = h;
            }
        }
    }
    if (best_h > 0.0) {
        const double lo = std::max(breaks.front(), best_t - best_h);
        const double hi = std::min(breaks.back(), best_t + best_h);
        best = std::max(best, golden_max_abs(f, lo, hi));
    }
    return best;
}

inline std::vector<double> breakpoints(const Segment& phi) {
    std::vector<double> b(phi.nodes().begin(), phi.nodes().end());
    for (const auto& term : phi.tail()) {
        if (term.kind != TailKind::AtEta) continue;
        for (double p : {term.z, 0.5 * term.z})
            if (p > -phi.r() && p < 0.0) b.push_back(p);
    }
    // the template peaks at -1/kappa
    for (const auto& term : phi.tail()) {
        const double peak = -1.0 / term.kappa;
        if (peak > -phi.r()) b.push_back(peak);
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

} // namespace detail

/// Relative tolerance of sampled norms (segments with tails).
inline double norm_tolerance(double result) { return 1e-8 * (1.0 + result); }

/// sup |phi| and sup |phi'| on [-r, 0]. Exact for tail-free segments; a lower
/// bound within norm_tolerance() otherwise.
inline std::pair<double, double> sup_norms(const Segment& phi) {
    if (!phi.has_tail()) return detail::spline_sup_exact(phi);
    const auto b = detail::breakpoints(phi);
    const double v = detail::sampled_sup([&](double t) { return phi.eval(t); }, b);
    const double d = detail::sampled_sup([&](double t) { return phi.eval_deriv(t); }, b);
    return {v, d};
}

inline double norm_c(const Segment& phi) { return sup_norms(phi).first; }

/// |phi|_C + |phi'|_C
inline double norm_c1(const Segment& phi) {
    const auto [v, d] = sup_norms(phi);
    return v + d;
}

} // namespace solman

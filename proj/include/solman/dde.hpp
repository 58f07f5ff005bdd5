#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "problem.hpp"
#include "segment.hpp"

namespace solman {

/// Solution of x'(t) = g(x(t - d(x(t)))) on [-r, t_end]: the initial segment
/// on [-r, 0] followed by a cubic Hermite dense history on the step grid.
///
/// At t = 0 the history may have a slope jump when the initial segment is off
/// the solution manifold; eval_deriv(0) returns the initial segment's slope and
/// times t > 0 use the right-hand pieces.
class Trajectory {
public:
    Trajectory(Segment initial, std::vector<double> t, std::vector<double> x, std::vector<double> dx,
               double initial_residual)
        : initial_(std::move(initial)), t_(std::move(t)), x_(std::move(x)), dx_(std::move(dx)),
          initial_residual_(initial_residual) {}

    double r() const { return initial_.r(); }
    double t_end() const { return t_.back(); }
    const Segment& initial() const { return initial_; }
    std::span<const double> t_grid() const { return t_; }
    std::span<const double> x() const { return x_; }
    std::span<const double> dx() const { return dx_; }

    /// residual_Xf of the initial segment.
    double initial_residual() const { return initial_residual_; }
    bool started_on_manifold() const { return std::abs(initial_residual_) <= kOnManifoldTol; }

    double eval(double t) const {
        if (t <= 0.0) return initial_.eval(t);
        const auto k = piece_index(t);
        return piece_value(k, t);
    }

    double eval_deriv(double t) const {
        if (t <= 0.0) return initial_.eval_deriv(t);
        const auto k = piece_index(t);
        const double h = t_[k + 1] - t_[k];
        const double s = (t - t_[k]) / h;
        return ((6.0 * s * s - 6.0 * s) * x_[k] + (6.0 * s - 6.0 * s * s) * x_[k + 1]) / h +
               (3.0 * s * s - 4.0 * s + 1.0) * dx_[k] + (3.0 * s * s - 2.0 * s) * dx_[k + 1];
    }

    /// The solution segment x_t(s) = x(t + s), s in [-r, 0].
    Segment segment(double t) const {
        if (t == 0.0) return initial_;
        if (!(t > 0.0 && t <= t_end() * (1.0 + 1e-15)))
            throw std::invalid_argument("trajectory: segment time outside [0, t_end]");
        const double r = this->r();
        const double lo = t - r;
        const double eps = 1e-13 * r;
        std::vector<double> times;
        if (lo < 0.0) {
            std::vector<double> init_nodes;
            if (initial_.has_tail()) {
                init_nodes = uniform_nodes(r, 4 * kDefaultNodes);
            } else {
                init_nodes.assign(initial_.nodes().begin(), initial_.nodes().end());
            }
            for (double s : init_nodes)
                if (s > lo) times.push_back(s);
        }
        for (std::size_t k = 0; k < t_.size(); ++k)
            if (t_[k] > lo && t_[k] < t && (times.empty() || t_[k] > times.back())) times.push_back(t_[k]);

        std::vector<double> nodes{-r}, v{eval(lo)}, m{eval_deriv_right(lo)};
        for (double tau : times) {
            const double s = tau - t;
            if (s <= -r + eps || s >= -eps) continue;
            nodes.push_back(s);
            v.push_back(eval(tau));
            m.push_back(eval_deriv_right(tau));
        }
        nodes.push_back(0.0);
        v.push_back(eval(t));
        m.push_back(eval_deriv(t));
        return Segment(r, std::move(nodes), std::move(v), std::move(m));
    }

private:
    std::size_t piece_index(double t) const {
        if (t > t_.back() * (1.0 + 1e-15) + 1e-300)
            throw std::invalid_argument("trajectory: evaluation beyond t_end");
        auto it = std::lower_bound(t_.begin(), t_.end(), t);
        auto k = static_cast<std::size_t>(it - t_.begin());
        return std::clamp<std::size_t>(k, 1, t_.size() - 1) - 1;
    }

    double piece_value(std::size_t k, double t) const {
        const double h = t_[k + 1] - t_[k];
        const double s = (t - t_[k]) / h;
        const double u = 1.0 - s;
        return (1.0 + 2.0 * s) * u * u * x_[k] + h * s * u * u * dx_[k] + s * s * (3.0 - 2.0 * s) * x_[k + 1] +
               h * s * s * (s - 1.0) * dx_[k + 1];
    }

    // slope of the piece to the right of a history node at t = 0
    double eval_deriv_right(double t) const { return t == 0.0 ? dx_.front() : eval_deriv(t); }

    Segment initial_;
    std::vector<double> t_, x_, dx_;
    double initial_residual_ = 0.0;
};

/// Method of steps with the classical four-stage Runge-Kutta scheme.
///
/// Deviated arguments t - d(x(t)) at or before the current node are read from
/// the dense history. When one falls inside the current step (small delay near
/// eta0) a local polynomial built from the stages computed so far is used.
/// The node slope x'(t_{n+1}) is g evaluated on that history, so the defining
/// relation x'(t) = f(x_t) holds at every node t > 0.
inline Trajectory integrate(const Problem& P, const Segment& phi0, double t_end, double step) {
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("integrate: t_end must be positive");
    if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("integrate: step must be positive");
    if (std::abs(phi0.r() - P.r()) > kClampTol) throw std::invalid_argument("integrate: r mismatch");

    const double res0 = residual_Xf(P, phi0);
    const auto n_steps = static_cast<std::size_t>(std::ceil(t_end / step - 1e-9));

    std::vector<double> T{0.0}, X{phi0.eval(0.0)}, DX{f_eval(P, phi0)};
    T.reserve(n_steps + 1);
    X.reserve(n_steps + 1);
    DX.reserve(n_steps + 1);

    // history up to the last accepted node
    auto history = [&](double s) -> double {
        if (s <= 0.0) return phi0.eval(s);
        auto it = std::lower_bound(T.begin(), T.end(), s);
        const auto k = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - T.begin(), 1,
                                                                            static_cast<std::ptrdiff_t>(T.size()) - 1)) - 1;
        const double h = T[k + 1] - T[k];
        const double u = (s - T[k]) / h, w = 1.0 - u;
        return (1.0 + 2.0 * u) * w * w * X[k] + h * u * w * w * DX[k] + u * u * (3.0 - 2.0 * u) * X[k + 1] +
               h * u * u * (u - 1.0) * DX[k + 1];
    };

    for (std::size_t n = 0; n < n_steps; ++n) {
        const double tn = T.back();
        const double h = (n + 1 == n_steps) ? t_end - tn : step;
        const double xn = X.back();
        const double k1 = DX.back();

        // k = g(x(t - d(state))) with x inside (tn, tn + h] given by `local(theta)`
        auto rhs = [&](double t, double state, auto&& local) {
            const double s = t - P.delay(state);
            if (s <= tn) return P.g(history(s));
            return P.g(local((s - tn) / h));
        };

        const double k2 = rhs(tn + 0.5 * h, xn + 0.5 * h * k1,
                              [&](double th) { return xn + th * h * k1; });
        const double k3 = rhs(tn + 0.5 * h, xn + 0.5 * h * k2,
                              [&](double th) { return xn + th * h * k1 + th * th * h * (k2 - k1); });
        const double k4 = rhs(tn + h, xn + h * k3,
                              [&](double th) { return xn + th * h * k1 + th * th * h * (k3 - k1); });
        const double xn1 = xn + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double dxn1 = rhs(tn + h, xn1, [&](double th) {
            return xn + th * h * k1 + th * th * (xn1 - xn - h * k1);
        });
        T.push_back(n + 1 == n_steps ? t_end : tn + h);
        X.push_back(xn1);
        DX.push_back(dxn1);
    }
    return Trajectory(phi0, std::move(T), std::move(X), std::move(DX), res0);
}

/// x'(t) - g(x(t - d(x(t)))) on the dense history; equals residual_Xf of x_t.
inline double trajectory_residual_at(const Problem& P, const Trajectory& traj, double t) {
    if (t <= 0.0) return residual_Xf(P, traj.initial());
    const double x = traj.eval(t);
    return traj.eval_deriv(t) - P.g(traj.eval(t - P.delay(x)));
}

/// Residuals at `samples` equispaced times in [0, t_end].
inline std::vector<double> trajectory_residuals(const Problem& P, const Trajectory& traj, std::size_t samples) {
    std::vector<double> out;
    out.reserve(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        const double t = samples == 1 ? 0.0
                                      : (k + 1 == samples ? traj.t_end()
                                                          : traj.t_end() * static_cast<double>(k) /
                                                                static_cast<double>(samples - 1));
        out.push_back(trajectory_residual_at(P, traj, t));
    }
    return out;
}

} // namespace solman

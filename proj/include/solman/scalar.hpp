#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

namespace solman {

/// A real function together with its derivative.
struct ScalarFn {
    std::function<double(double)> f;
    std::function<double(double)> df;

    double operator()(double x) const { return f(x); }
    double deriv(double x) const { return df(x); }
};

inline ScalarFn linear_fn(double slope) {
    return {[slope](double x) { return slope * x; }, [slope](double) { return slope; }};
}

/// amplitude * sin(frequency * x) + offset
inline ScalarFn sine_fn(double amplitude, double frequency, double offset) {
    return {[=](double x) { return amplitude * std::sin(frequency * x) + offset; },
            [=](double x) { return amplitude * frequency * std::cos(frequency * x); }};
}

/// scale * u^2 / (1 + u^2) with u = x - center; single zero at center.
inline ScalarFn rational_square_fn(double scale, double center) {
    return {[=](double x) {
                const double u = x - center;
                return scale * u * u / (1.0 + u * u);
            },
            [=](double x) {
                const double u = x - center;
                const double q = 1.0 + u * u;
                return scale * 2.0 * u / (q * q);
            }};
}

/// Natural cubic spline through (ts, xs), extended linearly outside the table.
class CubicTable {
public:
    CubicTable(std::vector<double> ts, std::vector<double> xs) : t_(std::move(ts)), x_(std::move(xs)) {
        const std::size_t n = t_.size();
        if (n < 2 || x_.size() != n) throw std::invalid_argument("table: need >= 2 matching points");
        for (std::size_t i = 1; i < n; ++i)
            if (!(t_[i] > t_[i - 1])) throw std::invalid_argument("table: ts must be strictly increasing");
        // second derivatives, tridiagonal solve with natural end conditions
        m_.assign(n, 0.0);
        if (n > 2) {
            std::vector<double> diag(n - 2), rhs(n - 2), sup(n - 2);
            for (std::size_t i = 1; i + 1 < n; ++i) {
                const double h0 = t_[i] - t_[i - 1], h1 = t_[i + 1] - t_[i];
                diag[i - 1] = 2.0 * (h0 + h1);
                sup[i - 1] = h1;
                rhs[i - 1] = 6.0 * ((x_[i + 1] - x_[i]) / h1 - (x_[i] - x_[i - 1]) / h0);
            }
            for (std::size_t i = 1; i < n - 2; ++i) {
                const double w = (t_[i + 1] - t_[i]) / diag[i - 1];
                diag[i] -= w * sup[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            for (std::size_t i = n - 2; i-- > 0;) {
                const double upper = (i + 1 < n - 2) ? sup[i] * m_[i + 2] : 0.0;
                m_[i + 1] = (rhs[i] - upper) / diag[i];
            }
        }
    }

    double value(double x) const {
        if (x <= t_.front()) return x_.front() + slope_at(0, 0.0) * (x - t_.front());
        if (x >= t_.back()) return x_.back() + slope_at(t_.size() - 2, 1.0) * (x - t_.back());
        const std::size_t i = interval(x);
        const double h = t_[i + 1] - t_[i];
        const double a = (t_[i + 1] - x) / h, b = (x - t_[i]) / h;
        return a * x_[i] + b * x_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
    }

    double deriv(double x) const {
        if (x <= t_.front()) return slope_at(0, 0.0);
        if (x >= t_.back()) return slope_at(t_.size() - 2, 1.0);
        const std::size_t i = interval(x);
        return slope_at(i, (x - t_[i]) / (t_[i + 1] - t_[i]));
    }

private:
    std::size_t interval(double x) const {
        auto it = std::upper_bound(t_.begin(), t_.end(), x);
        return std::min<std::size_t>(static_cast<std::size_t>(it - t_.begin()) - 1, t_.size() - 2);
    }

    double slope_at(std::size_t i, double b) const {
        const double h = t_[i + 1] - t_[i];
        const double a = 1.0 - b;
        return (x_[i + 1] - x_[i]) / h + ((1.0 - 3.0 * a * a) * m_[i] + (3.0 * b * b - 1.0) * m_[i + 1]) * h / 6.0;
    }

    std::vector<double> t_, x_, m_;
};

inline ScalarFn table_fn(std::vector<double> ts, std::vector<double> xs) {
    auto tab = std::make_shared<const CubicTable>(std::move(ts), std::move(xs));
    return {[tab](double x) { return tab->value(x); }, [tab](double x) { return tab->deriv(x); }};
}

} // namespace solman

#pragma once

#include <cstdint>
#include <random>

#include "segment.hpp"

namespace solman {

/// Seeded generator for every random corpus in the library.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Uniform doubles are formed from the top 53 bits by hand rather
/// than through std::uniform_real_distribution, whose algorithm is
/// implementation-defined, so corpora are identical across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Independent stream derived from this one.
    Rng split() { return Rng(next() ^ 0x9e3779b97f4a7c15ULL); }

private:
    std::mt19937_64 engine_;
};

/// Tail-free segment on n uniform nodes with values and slopes uniform in [lo, hi].
inline Segment random_segment(Rng& rng, double r, std::size_t n, double lo = -2.0, double hi = 2.0) {
    auto t = uniform_nodes(r, n);
    std::vector<double> v(n), m(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = rng.uniform(lo, hi);
        m[i] = rng.uniform(lo, hi);
    }
    return Segment(r, std::move(t), std::move(v), std::move(m));
}

/// Smooth random segment: a + b t + c sin(w t + p) sampled onto n nodes.
/// Second-derivative jumps across nodes are O(h^2), unlike random_segment.
inline Segment random_smooth_segment(Rng& rng, double r, std::size_t n, double amplitude = 1.0) {
    const double a = rng.uniform(-amplitude, amplitude);
    const double b = rng.uniform(-amplitude, amplitude);
    const double c = rng.uniform(-amplitude, amplitude);
    const double w = rng.uniform(0.5, 4.0);
    const double p = rng.uniform(0.0, 6.283185307179586);
    return sample_segment(
        r, n, [=](double t) { return a + b * t + c * std::sin(w * t + p); },
        [=](double t) { return b + c * w * std::cos(w * t + p); });
}

} // namespace solman

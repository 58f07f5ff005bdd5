#include <cmath>

#include <gtest/gtest.h>

#include <solman/random.hpp>
#include <solman/solman.hpp>

#include "fixtures.hpp"

using namespace solman;

namespace {

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace

TEST(Integrate, EquilibriumStaysAtZero) {
    const auto& P = fixtures::lin();
    const Trajectory tr = integrate(P, zero_segment(1.0, 8), 2.0, 1e-2);
    for (double x : tr.x()) EXPECT_EQ(x, 0.0);
    for (double r : trajectory_residuals(P, tr, 101)) EXPECT_EQ(r, 0.0);
    EXPECT_TRUE(tr.started_on_manifold());
}

TEST(Integrate, GridEndsExactlyAtFinalTime) {
    const auto& P = fixtures::lin();
    const Trajectory tr = integrate(P, make_manifold_point(P, 0.3), 0.95, 0.1);
    EXPECT_EQ(tr.t_grid().size(), 11u);
    EXPECT_EQ(tr.t_end(), 0.95);
    EXPECT_NEAR(tr.t_grid()[9], 0.9, 1e-15);
}

TEST(Integrate, SolutionStaysOnTheManifold) {
    const auto& P = fixtures::lin();
    const Trajectory tr = integrate(P, make_manifold_point(P, 0.3), 3.0, 1e-3);
    EXPECT_LE(max_abs(trajectory_residuals(P, tr, 6001)), 1e-5);
    for (double t : {0.25, 1.0, 2.5, 3.0}) EXPECT_LE(std::abs(residual_Xf(P, tr.segment(t))), 1e-5) << t;
}

TEST(Integrate, StepHalvingSelfConvergence) {
    const auto& P = fixtures::lin();
    const Segment phi = make_manifold_point(P, 0.3);
    const Trajectory coarse = integrate(P, phi, 1.0, 1e-3);
    const Trajectory fine = integrate(P, phi, 1.0, 5e-4);
    double err = 0.0;
    for (int k = 0; k <= 2000; ++k) err = std::max(err, std::abs(coarse.eval(k / 2000.0) - fine.eval(k / 2000.0)));
    EXPECT_LE(err, 1e-6);
}

TEST(Integrate, AgreesWithFineStepReference) {
    const auto& P = fixtures::sin();
    const Segment phi = make_smooth_manifold_point(P, -0.4, 0.2, 0.1);
    const Trajectory ref = integrate(P, phi, 0.5, 1.25e-4);
    const Trajectory run = integrate(P, phi, 0.5, 1e-3);
    for (int k = 0; k <= 100; ++k) EXPECT_NEAR(run.eval(0.005 * k), ref.eval(0.005 * k), 1e-8);
}

TEST(Integrate, OffManifoldDataRecoversAfterOneStep) {
    const auto& P = fixtures::lin();
    const Segment on = make_manifold_point(P, 0.3);
    std::vector<double> m(on.derivs().begin(), on.derivs().end());
    m.back() += 0.1;
    const Segment off(on.r(), {on.nodes().begin(), on.nodes().end()}, {on.values().begin(), on.values().end()}, m);
    const double step = 1e-3;
    const Trajectory tr = integrate(P, off, 1.0, step);
    EXPECT_FALSE(tr.started_on_manifold());
    EXPECT_NEAR(trajectory_residual_at(P, tr, 0.0), 0.1, 1e-12);
    for (int k = 0; k <= 1000; ++k) {
        const double t = step + (1.0 - step) * k / 1000.0;
        EXPECT_LE(std::abs(trajectory_residual_at(P, tr, t)), 1e-5) << t;
    }
}

TEST(Trajectory, SegmentsContinueTheHistory) {
    const auto& P = fixtures::sin();
    const Segment phi = make_smooth_manifold_point(P, 0.45, -0.3, 0.2);
    const Trajectory tr = integrate(P, phi, 2.0, 1e-3);
    EXPECT_EQ(norm_c1(tr.segment(0.0) - phi), 0.0);
    const Segment x1 = tr.segment(1.3);
    EXPECT_EQ(x1.r(), 1.0);
    for (double s : {-1.0, -0.71, -0.3, 0.0}) EXPECT_NEAR(x1.eval(s), tr.eval(1.3 + s), 1e-12);
    const Segment xh = tr.segment(0.4); // straddles t = 0
    for (double s : {-1.0, -0.6, -0.4, -0.2, 0.0}) EXPECT_NEAR(xh.eval(s), tr.eval(0.4 + s), 1e-12);
    EXPECT_THROW(tr.segment(2.5), std::invalid_argument);
}

TEST(Trajectory, ChartTransportsIntoX0) {
    for (const Problem* P : {&fixtures::lin(), &fixtures::sin()}) {
        Rng rng(21);
        for (int i = 0; i < 4; ++i) {
            const Segment phi = make_smooth_manifold_point(*P, rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                                                           rng.uniform(-0.5, 0.5));
            const Trajectory tr = integrate(*P, phi, 3.0, 1e-3);
            for (double t : {0.5, 1.5, 3.0}) EXPECT_LE(std::abs(map_A(*P, tr.segment(t)).segment.eval_deriv(0.0)), 1e-5);
        }
    }
}

TEST(Integrate, RejectsBadArguments) {
    const auto& P = fixtures::lin();
    const Segment phi = make_manifold_point(P, 0.3);
    EXPECT_THROW(integrate(P, phi, 0.0, 1e-3), std::invalid_argument);
    EXPECT_THROW(integrate(P, phi, 1.0, 0.0), std::invalid_argument);
    EXPECT_THROW(integrate(P, phi, 1.0, -1e-3), std::invalid_argument);
    EXPECT_THROW(integrate(P, zero_segment(2.0), 1.0, 1e-3), std::invalid_argument);
}

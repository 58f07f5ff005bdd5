#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include <solman/random.hpp>
#include <solman/segment.hpp>
#include <solman/segment_io.hpp>

using namespace solman;

namespace {

double cubic(double t) { return t * t * t - 2.0 * t + 1.0; }
double cubic_d(double t) { return 3.0 * t * t - 2.0; }

Segment cubic_on(std::vector<double> t) {
    std::vector<double> v, m;
    for (double s : t) {
        v.push_back(cubic(s));
        m.push_back(cubic_d(s));
    }
    return Segment(1.0, std::move(t), std::move(v), std::move(m));
}

} // namespace

TEST(Segment, ReproducesCubicsExactly) {
    const Segment phi = cubic_on({-1.0, -0.73, -0.4, -0.05, 0.0});
    for (int k = 0; k <= 1000; ++k) {
        const double t = -1.0 + k / 1000.0;
        EXPECT_NEAR(phi.eval(t), cubic(t), 1e-14);
        EXPECT_NEAR(phi.eval_deriv(t), cubic_d(t), 1e-13);
    }
}

TEST(Segment, NodeValuesAreExact) {
    Rng rng(7);
    const Segment phi = random_segment(rng, 2.0, 17);
    for (std::size_t i = 0; i < phi.size(); ++i) {
        EXPECT_EQ(phi.eval(phi.nodes()[i]), phi.values()[i]);
        EXPECT_EQ(phi.eval_deriv(phi.nodes()[i]), phi.derivs()[i]);
    }
}

TEST(Segment, DomainIsClampedWithinTolerance) {
    const Segment phi = cubic_on({-1.0, 0.0});
    EXPECT_EQ(phi.eval(1e-13), phi.eval(0.0));
    EXPECT_EQ(phi.eval(-1.0 - 1e-13), phi.eval(-1.0));
    EXPECT_THROW(phi.eval(1e-9), DomainError);
    EXPECT_THROW(phi.eval_deriv(-1.1), DomainError);
}

TEST(Segment, ConstructorRejectsBadGrids) {
    EXPECT_THROW(Segment(1.0, {-1.0}, {0.0}, {0.0}), std::invalid_argument);
    EXPECT_THROW(Segment(1.0, {-0.9, 0.0}, {0.0, 0.0}, {0.0, 0.0}), std::invalid_argument);
    EXPECT_THROW(Segment(1.0, {-1.0, -0.5, -0.5, 0.0}, {0, 0, 0, 0}, {0, 0, 0, 0}), std::invalid_argument);
    EXPECT_THROW(Segment(1.0, {-1.0, 0.0}, {0.0, NAN}, {0.0, 0.0}), std::invalid_argument);
    EXPECT_THROW(Segment(-1.0, {1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}), std::invalid_argument);
    EXPECT_THROW(Segment(1.0, {-1.0, 0.0}, {0.0, 0.0}, {0.0}), std::invalid_argument);
}

TEST(Segment, CombineIsLinearAcrossGrids) {
    Rng rng(11);
    const Segment a = random_segment(rng, 1.0, 9);
    const Segment b = random_segment(rng, 1.0, 14);
    const Segment s = combine(a, -0.75, b);
    for (int k = 0; k <= 500; ++k) {
        const double t = -1.0 + k / 500.0;
        EXPECT_NEAR(s.eval(t), a.eval(t) - 0.75 * b.eval(t), 1e-13);
        EXPECT_NEAR(s.eval_deriv(t), a.eval_deriv(t) - 0.75 * b.eval_deriv(t), 1e-12);
    }
    EXPECT_EQ(norm_c1(a - a), 0.0);
    EXPECT_NEAR(norm_c1((a + b) - b - a), 0.0, 1e-13);
}

TEST(Segment, TailTermsMergeAndCancel) {
    const Segment z = zero_segment(1.0);
    const TailTerm psi = TailTerm::at_eta_zero(3.0);
    const Segment one = z.axpy(2.0, psi).axpy(-0.5, psi);
    ASSERT_EQ(one.tail().size(), 1u);
    EXPECT_DOUBLE_EQ(one.tail()[0].coeff, 1.5);
    EXPECT_FALSE(one.axpy(-1.5, psi).has_tail());

    const TailTerm cut = TailTerm::at_eta(0.3, 3.0, -0.2);
    EXPECT_EQ(z.axpy(1.0, psi).axpy(1.0, cut).tail().size(), 2u);
    EXPECT_EQ((z.axpy(1.0, cut) - z.axpy(1.0, cut)).tail().size(), 0u);
}

TEST(Segment, ExactNormsOfTailFreeSegments) {
    // t^2 on [-1, 0]: sup |phi| = 1, sup |phi'| = 2
    const Segment sq(1.0, {-1.0, 0.0}, {1.0, 0.0}, {-2.0, 0.0});
    EXPECT_DOUBLE_EQ(norm_c(sq), 1.0);
    EXPECT_DOUBLE_EQ(norm_c1(sq), 3.0);

    // interior extremum: t^3 - 2t + 1 peaks at t = -sqrt(2/3)
    const Segment c = cubic_on({-1.0, 0.0});
    const double tp = -std::sqrt(2.0 / 3.0);
    EXPECT_NEAR(norm_c(c), cubic(tp), 1e-14);
    EXPECT_NEAR(sup_norms(c).second, 2.0, 1e-14);
}

TEST(Segment, SampledNormsOfTailsAreTight) {
    const double kappa = 5.0;
    const Segment psi = zero_segment(1.0).axpy(1.0, TailTerm::at_eta_zero(kappa));
    // sup |t e^{kappa t}| = 1/(e kappa), sup of the derivative is 1 at t = 0
    const double want = 1.0 / (std::exp(1.0) * kappa);
    EXPECT_NEAR(norm_c(psi), want, norm_tolerance(want));
    EXPECT_LE(norm_c(psi), want + 1e-15);
    EXPECT_NEAR(sup_norms(psi).second, 1.0, 1e-12);
}

TEST(Segment, ResampleConvergesAtFourthOrder) {
    const double kappa = 4.0;
    const Segment psi = zero_segment(1.0).axpy(1.0, TailTerm::at_eta_zero(kappa));
    const double e1 = norm_c(resample(psi, 21) - psi);
    const double e2 = norm_c(resample(psi, 41) - psi);
    EXPECT_GT(e1 / e2, 12.0);
    EXPECT_LT(e2, 1e-5);
}

TEST(Segment, RefinedNodesKeepOriginalNodes) {
    const Segment phi = cubic_on({-1.0, -0.31, 0.0});
    const auto t = refined_nodes(phi, 5);
    EXPECT_EQ(t.front(), -1.0);
    EXPECT_EQ(t.back(), 0.0);
    EXPECT_NE(std::find(t.begin(), t.end(), -0.31), t.end());
    EXPECT_EQ(t.size(), 6u);
}

TEST(SegmentCsv, RoundTripIsBitExact) {
    Rng rng(3);
    const Segment phi = random_segment(rng, 1.5, 33);
    std::stringstream ss;
    write_segment_csv(ss, phi);
    const Segment back = read_segment_csv(ss);
    EXPECT_EQ(back.r(), 1.5);
    ASSERT_EQ(back.size(), phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) {
        EXPECT_EQ(back.nodes()[i], phi.nodes()[i]);
        EXPECT_EQ(back.values()[i], phi.values()[i]);
        EXPECT_EQ(back.derivs()[i], phi.derivs()[i]);
    }
}

TEST(SegmentCsv, RejectsMalformedInput) {
    auto parse = [](const std::string& s) {
        std::istringstream in(s);
        return read_segment_csv(in);
    };
    EXPECT_THROW(parse(""), std::invalid_argument);
    EXPECT_THROW(parse("t,x\n-1,0\n0,0\n"), std::invalid_argument);
    EXPECT_THROW(parse("t,x,dx\n-1,0,0\n"), std::invalid_argument);
    EXPECT_THROW(parse("t,x,dx\n-1,0,0\n0,zero,0\n"), std::invalid_argument);
    EXPECT_THROW(parse("t,x,dx\n-1,0,0,1\n0,0,0\n"), std::invalid_argument);
    EXPECT_THROW(parse("t,x,dx\n0,0,0\n-1,0,0\n"), std::invalid_argument);
    EXPECT_NO_THROW(parse("t,x,dx\r\n-1,0,0\r\n0,1,2\r\n"));
}

TEST(SegmentCsv, TailsAreResampled) {
    const Segment psi = zero_segment(1.0).axpy(1.0, TailTerm::at_eta_zero(2.0));
    std::stringstream ss;
    write_segment_csv(ss, psi, 11);
    const Segment back = read_segment_csv(ss);
    EXPECT_EQ(back.size(), 11u);
    EXPECT_FALSE(back.has_tail());
    EXPECT_EQ(back.eval_deriv(0.0), 1.0);
}

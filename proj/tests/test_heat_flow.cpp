#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "entropy_flow/analytic.hpp"
#include "entropy_flow/functionals.hpp"
#include "entropy_flow/heat_flow.hpp"
#include "reference_values.hpp"
#include "test_support.hpp"

using namespace entropy_flow;
using test_support::rel_err;

namespace {

const double no_tail_check = std::numeric_limits<double>::infinity();

DensityGrid mixture_pm2() { return build_grid(symmetric_mixture(2.0, 1.0), default_domain(1)); }

}  // namespace

TEST(Evolve, GaussianVarianceGrowsByTwiceTime) {
    const auto g = build_grid(GaussianSpec::centered(1, 0.5), default_domain(1));
    for (const double t : {0.1, 0.75, 2.0}) {
        const auto e = evolve(g, t);
        const auto expected = build_grid(GaussianSpec::centered(1, 0.5 + 2.0 * t), e.domain(), no_tail_check);
        EXPECT_LT(sup_distance(e, expected), 1e-12) << "t=" << t;
    }
}

TEST(Evolve, MatchesClosedFormMixtureEvolution) {
    const auto m = symmetric_mixture(2.0, 1.0);
    for (const double t : {0.2, 1.0}) {
        const auto e = evolve(build_grid(m, default_domain(1)), t);
        EXPECT_LT(sup_distance(e, build_grid(heat_evolve_spec(m, t), e.domain(), no_tail_check)), 1e-12);
    }
}

TEST(Evolve, TwoDimensionalGaussian) {
    const auto g = build_grid(GaussianSpec{2, {0.5, -0.3}, 0.4}, default_domain(2));
    const auto e = evolve(g, 0.5);
    EXPECT_LT(sup_distance(e, build_grid(GaussianSpec{2, {0.5, -0.3}, 1.4}, e.domain(), no_tail_check)), 1e-12);
}

TEST(Evolve, PreservesMass) {
    const auto g = scale(mixture_pm2(), 2.5);
    EXPECT_NEAR(evolve(g, 1.0).mass(), 2.5, 1e-10);
}

TEST(Evolve, SemigroupProperty) {
    const auto g = mixture_pm2();
    EXPECT_LT(sup_distance(evolve(evolve(g, 0.3), 0.4), evolve(g, 0.7)), 1e-12);
}

TEST(Evolve, RejectsNonPositiveTime) {
    EXPECT_THROW(evolve(mixture_pm2(), 0.0), ValidationError);
    EXPECT_THROW(evolve(mixture_pm2(), -1.0), ValidationError);
}

TEST(Evolve, PadsTheDomainWithoutMovingNodes) {
    const auto g = build_grid(GaussianSpec::centered(1, 1.0), default_domain(1));
    const auto e = evolve(g, 50.0);
    EXPECT_GT(e.domain().half_width[0], 6.0 * std::sqrt(101.0));
    EXPECT_NEAR(e.domain().spacing(0), g.domain().spacing(0), 1e-15);
    EXPECT_NEAR(e.mass(), 1.0, 1e-10);
}

TEST(RescaledFlow, FixesTheUnitGaussian) {
    const auto g = build_grid(GaussianSpec::centered(1, 1.0), default_domain(1));
    const auto f = rescaled_flow(g, 2.0);
    const auto m1 = build_grid(GaussianSpec::centered(1, 1.0), f.domain(), no_tail_check);
    EXPECT_LT(l1_distance(f, m1), 1e-9);
}

TEST(RescaledFlow, ZeroTimeIsIdentity) {
    const auto g = mixture_pm2();
    EXPECT_EQ(l1_distance(rescaled_flow(g, 0.0), g), 0.0);
}

TEST(RescaledFlow, ConvergesToUnitGaussian) {
    const auto g = mixture_pm2();
    const std::array<double, 4> times{1.0, 5.0, 10.0, 50.0};
    const std::array<double, 4> oracle{reference::rescaled_l1_t1, reference::rescaled_l1_t5,
                                       reference::rescaled_l1_t10, reference::rescaled_l1_t50};
    double previous = reference::mixture_pm2.l1_to_matched * 10.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto f = rescaled_flow(g, times[i]);
        const auto m1 = build_grid(GaussianSpec::centered(1, 1.0), f.domain(), no_tail_check);
        const double dist = l1_distance(f, m1);
        EXPECT_LT(dist, previous);
        EXPECT_NEAR(dist, oracle[i], 1e-5) << "t=" << times[i];
        previous = dist;
    }
    EXPECT_LT(previous, 0.05);
}

TEST(TimeStencil, GaussianDeBruijnAndFisherDerivative) {
    for (const int n : {1, 2}) {
        const auto g = build_grid(GaussianSpec::centered(n, 1.0), default_domain(n));
        for (const double t : {0.2, 0.5, 1.0}) {
            const auto s = time_stencil(g, t, 1e-3);
            EXPECT_LT(s.debruijn_residual(), 1e-4) << "n=" << n << " t=" << t;
            EXPECT_LT(s.fisher_residual(), 1e-3) << "n=" << n << " t=" << t;
            // the entropy power of a Gaussian is linear in t
            EXPECT_LT(std::abs(s.n_second_diff()), 1e-4 * s.at.N);
        }
    }
}

TEST(TimeStencil, MixtureDeBruijnAndConcavity) {
    const auto g = mixture_pm2();
    for (const double t : {0.2, 0.5, 1.0}) {
        const auto s = time_stencil(g, t, 1e-3);
        EXPECT_LT(s.debruijn_residual(), 1e-3);
        EXPECT_LT(s.fisher_residual(), 1e-3);
        EXPECT_LE(s.n_second_diff(), 1e-6 * s.at.N);
    }
}

TEST(TimeStencil, ConvenienceWrappersAgree) {
    const auto g = mixture_pm2();
    const auto s = time_stencil(g, 0.5, 1e-3);
    EXPECT_EQ(debruijn_check(g, 0.5, 1e-3), s.debruijn_residual());
    EXPECT_EQ(fisher_derivative_check(g, 0.5, 1e-3), s.fisher_residual());
    EXPECT_EQ(concavity_check(g, 0.5, 1e-3), s.n_second_diff());
}

TEST(TimeStencil, RejectsOversizedStep) {
    EXPECT_THROW(time_stencil(mixture_pm2(), 0.2, 0.05), ValidationError);
    EXPECT_THROW(time_stencil(mixture_pm2(), 0.2, 0.0), ValidationError);
}

TEST(TimeStencil, UpsilonNonIncreasingAlongFlow) {
    const auto g = mixture_pm2();
    double previous = upsilon(g);
    for (const double t : {0.1, 0.5, 1.0, 2.0, 4.0}) {
        const double u = upsilon(evolve(g, t));
        EXPECT_LE(u, previous * (1.0 + 1e-9)) << "t=" << t;
        previous = u;
    }
}

TEST(FlowTrace, ShapeAndDefaults) {
    const auto g = mixture_pm2();
    const std::vector<double> times{0.2, 1.0, 2.0};
    const auto trace = flow_trace(g, times);
    ASSERT_EQ(trace.snapshots.size(), 3u);
    EXPECT_EQ(trace.times, times);
    for (std::size_t i = 0; i < times.size(); ++i) {
        EXPECT_EQ(trace.snapshots[i].t, times[i]);
        const auto s = time_stencil(g, times[i], default_time_step(times[i]));
        EXPECT_EQ(trace.debruijn_residual[i], s.debruijn_residual());
        EXPECT_EQ(trace.n_second_diff[i], s.n_second_diff());
    }
    EXPECT_EQ(default_time_step(0.2), 1e-3);
    EXPECT_EQ(default_time_step(5.0), 5e-3);
}

TEST(FlowTrace, ValidatesTimes) {
    const auto g = mixture_pm2();
    const std::vector<double> too_few{0.5, 1.0};
    const std::vector<double> unordered{0.5, 0.3, 1.0};
    const std::vector<double> nonpositive{0.0, 0.3, 1.0};
    EXPECT_THROW(flow_trace(g, too_few), ValidationError);
    EXPECT_THROW(flow_trace(g, unordered), ValidationError);
    EXPECT_THROW(flow_trace(g, nonpositive), ValidationError);
}

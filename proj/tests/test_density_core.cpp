#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "entropy_flow/analytic.hpp"
#include "entropy_flow/convolution.hpp"
#include "entropy_flow/grid.hpp"
#include "test_support.hpp"

using namespace entropy_flow;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DensityGrid gaussian_grid(double sigma, GridDomain d) {
    return build_grid(GaussianSpec::centered(d.dim, sigma), d);
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (const double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

}  // namespace

TEST(BuildGrid, GaussianHasUnitMass) {
    const auto g = gaussian_grid(1.0, GridDomain::make(1, 12.0, 4096));
    EXPECT_NEAR(g.mass(), 1.0, 1e-12);
}

TEST(BuildGrid, MixtureHasUnitMass) {
    const auto g = build_grid(symmetric_mixture(2.0, 1.0), GridDomain::make(1, 14.0, 4096));
    EXPECT_NEAR(g.mass(), 1.0, 1e-12);
}

TEST(BuildGrid, NarrowDomainRaisesTailMassError) {
    // Oracle: mass beyond 3 standard deviations is erfc(3 / sqrt 2) ≈ 2.7e-3,
    // far above the 1e-10 tail tolerance.
    EXPECT_GT(std::erfc(3.0 / std::sqrt(2.0)), 2.6e-3);
    EXPECT_THROW(gaussian_grid(1.0, GridDomain::make(1, 3.0, 64)), TailMassError);
}

TEST(BuildGrid, DimensionMismatchIsRejected) {
    EXPECT_THROW(build_grid(GaussianSpec::centered(2, 1.0), GridDomain::make(1, 10.0, 64)), DimensionMismatch);
}

TEST(DensityGridValidation, RejectsDegenerateInput) {
    const auto d = GridDomain::make(1, 5.0, 32);
    std::vector<double> zeros(32, 0.0);
    EXPECT_THROW(DensityGrid(d, zeros, kInf), ValidationError);
    auto nan = zeros;
    nan[5] = std::nan("");
    EXPECT_THROW(DensityGrid(d, nan, kInf), ValidationError);
    auto negative = zeros;
    negative[10] = 1.0;
    negative[11] = -1e-3;
    EXPECT_THROW(DensityGrid(d, negative, kInf), ValidationError);
    EXPECT_THROW(DensityGrid(d, std::vector<double>(31, 1.0), kInf), ValidationError);
    EXPECT_THROW(GridDomain::make(1, 5.0, 15), ValidationError);
    EXPECT_THROW(GridDomain::make(1, -1.0, 64), ValidationError);
    EXPECT_THROW(GridDomain::make(3, 1.0, 64), ValidationError);
}

TEST(Mass, LinearAndReproducible) {
    const auto g = gaussian_grid(1.0, default_domain(1));
    EXPECT_NEAR(mass(g), 1.0, 1e-12);
    EXPECT_NEAR(mass(scale(g, 2.0)), 2.0, 1e-12);
    EXPECT_EQ(integrate(g.domain(), g.values()), integrate(g.domain(), g.values()));
    EXPECT_NEAR(integrate(g.domain(), g.values()), g.mass(), 1e-12 * g.mass());
}

TEST(Mass, PreservedByDilation) {
    const auto g = build_grid(symmetric_mixture(2.0, 1.0), default_domain(1));
    EXPECT_NEAR(mass(dilate(g, 2.0)), g.mass(), 1e-12);
}

TEST(SecondMoment, GaussianVariance) {
    for (const double s : {0.5, 1.0, 2.0}) {
        EXPECT_LT(test_support::rel_err(second_moment(gaussian_grid(s, default_domain(1))), s), 1e-9);
        EXPECT_LT(test_support::rel_err(second_moment(gaussian_grid(s, default_domain(2))), 2.0 * s), 1e-9);
    }
}

TEST(SecondMoment, MixtureFollowsLawOfTotalVariance) {
    for (const double m : {0.5, 1.0, 2.0}) {
        const auto spec = symmetric_mixture(m, 1.0);
        const double oracle = 1.0 + m * m;
        ASSERT_DOUBLE_EQ(spec_second_moment(spec), oracle);
        EXPECT_LT(test_support::rel_err(second_moment(build_grid(spec, default_domain(1))), oracle), 1e-9);
    }
}

TEST(Gradient, ConstantArrayHasZeroGradient) {
    const auto d = GridDomain::make(2, 3.0, 20);
    const DensityGrid c(d, std::vector<double>(d.size(), 0.25), kInf);
    for (const auto stencil : {Stencil::second_order, Stencil::fourth_order}) {
        const auto grad = gradient(c, stencil);
        EXPECT_EQ(max_abs(grad.components[0]), 0.0);
        EXPECT_EQ(max_abs(grad.components[1]), 0.0);
    }
}

TEST(Gradient, GaussianDerivativeConvergesAtSecondOrder) {
    // Oracle: d/dv M_1(v) = -v M_1(v). Doubling the intervals halves h exactly.
    const auto error_at = [](std::size_t points) {
        const auto g = gaussian_grid(1.0, GridDomain::make(1, 12.0, points));
        const auto grad = gradient(g);
        double err = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double v = g.domain().node(0, k);
            err = std::max(err, std::abs(grad[0][k] + v * g[k]));
        }
        return err;
    };
    const double coarse = error_at(513);
    const double fine = error_at(1025);
    const double h = 24.0 / 1024.0;
    EXPECT_LT(fine, 0.2 * h * h);
    const double ratio = coarse / fine;
    EXPECT_GE(ratio, 3.5);
    EXPECT_LE(ratio, 4.5);
}

TEST(Gradient, ChainRuleUnderDilation) {
    const auto g = build_grid(symmetric_mixture(1.0, 1.0), default_domain(1));
    const double a = 2.0;
    const auto ga = dilate(g, a);
    const auto grad = gradient(g);
    const auto grad_a = gradient(ga);
    for (std::size_t k = 0; k < g.size(); k += 97) {
        EXPECT_NEAR(grad_a[0][k], a * a * grad[0][k], 1e-13 * (1.0 + std::abs(a * a * grad[0][k])));
    }
}

TEST(HessianLog, GaussianIsConstantCurvature) {
    for (const double s : {0.5, 2.0}) {
        const auto g = gaussian_grid(s, default_domain(1));
        const auto hess = hessian_log(g);
        for (std::size_t k = 2; k + 2 < g.size(); ++k) {
            if (hess.mask[k]) {
                ASSERT_NEAR(hess.xx[k], -1.0 / s, 1e-6) << "node " << k;
            }
        }
    }
}

TEST(HessianLog, Gaussian2DDiagonalAndZeroOffDiagonal) {
    const double s = 1.0;
    const auto g = gaussian_grid(s, GridDomain::make(2, 8.0, 128));
    const auto hess = hessian_log(g);
    const auto& d = g.domain();
    for (std::size_t i = 2; i + 2 < d.points[0]; i += 5) {
        for (std::size_t j = 2; j + 2 < d.points[1]; j += 5) {
            const std::size_t k = i * d.points[1] + j;
            if (!hess.mask[k]) {
                continue;
            }
            ASSERT_NEAR(hess.xx[k], -1.0 / s, 1e-6);
            ASSERT_NEAR(hess.yy[k], -1.0 / s, 1e-6);
            ASSERT_NEAR(hess.xy[k], 0.0, 1e-6);
        }
    }
}

TEST(HessianLog, ProductDensityHasZeroMixedPartial) {
    const auto mix = symmetric_mixture(1.5, 0.7);
    const auto d = GridDomain::make(2, 9.0, 160);
    const auto g = sample_grid(d, [&](double x, double y) {
        const double vx[1] = {x};
        const double vy[1] = {y};
        return pdf(mix, vx) * pdf(GaussianSpec{1, {0.0}, 1.3}, vy);
    });
    const auto hess = hessian_log(g);
    double worst = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (hess.mask[k]) {
            worst = std::max(worst, std::abs(hess.xy[k]));
        }
    }
    EXPECT_LT(worst, 1e-8);
}

TEST(HessianLog, MixtureCurvatureConvergesAtSecondOrder) {
    // Oracle: (log f)'' = f''/f - (f'/f)^2 from the analytic mixture derivatives.
    const auto spec = symmetric_mixture(1.0, 1.0);
    const auto error_at = [&](std::size_t points) {
        const auto g = build_grid(spec, GridDomain::make(1, 12.0, points));
        const auto hess = hessian_log(g);
        double err = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double v = g.domain().node(0, k);
            if (std::abs(v) > 6.0) {
                continue;
            }
            const auto der = test_support::mixture_derivatives(spec, v);
            const double exact = der.d2 / der.f - (der.d1 / der.f) * (der.d1 / der.f);
            err = std::max(err, std::abs(hess.xx[k] - exact));
        }
        return err;
    };
    const double ratio = error_at(513) / error_at(1025);
    EXPECT_GE(ratio, 3.5);
    EXPECT_LE(ratio, 4.5);
}

TEST(HessianLog, MasksNodesBelowFloor) {
    const auto g = gaussian_grid(1.0, default_domain(1));
    const auto hess = hessian_log(g, 1e-14);
    const double cutoff = 1e-14 * g.max_value();
    // mask = nodes whose 3-point neighbourhood is above the cutoff
    for (std::size_t k = 1; k + 1 < g.size(); ++k) {
        const bool expected = g[k - 1] >= cutoff && g[k] >= cutoff && g[k + 1] >= cutoff;
        ASSERT_EQ(hess.mask[k] != 0, expected) << "node " << k;
    }
    const auto wide = hessian_log(g, 1e-14, Stencil::fourth_order);
    std::size_t narrow_count = 0;
    std::size_t wide_count = 0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        narrow_count += hess.mask[k];
        wide_count += wide.mask[k];
    }
    EXPECT_EQ(narrow_count, wide_count + 2);
    EXPECT_EQ(hess.mask.front(), 0);
    EXPECT_EQ(hess.mask[g.size() / 2], 1);
    EXPECT_THROW(hessian_log(g, 0.0), ValidationError);
}

TEST(Dilate, UnitFactorIsIdentity) {
    const auto g = build_grid(symmetric_mixture(2.0, 1.0), default_domain(1));
    const auto same = dilate(g, 1.0);
    EXPECT_EQ(same.domain(), g.domain());
    EXPECT_EQ(sup_distance(same, g), 0.0);
}

TEST(Dilate, MatchesClosedFormGaussianScaling) {
    const double sigma = 1.0;
    for (const double a : {0.5, 2.0, 3.0}) {
        const auto g = gaussian_grid(sigma, default_domain(1));
        const auto ga = dilate(g, a);
        EXPECT_NEAR(ga.mass(), g.mass(), 1e-10);
        const auto exact = build_grid(GaussianSpec::centered(1, sigma / (a * a)), ga.domain(), kInf);
        EXPECT_LT(sup_distance(ga, exact), 1e-12 * ga.max_value());
    }
}

TEST(Dilate, RoundTripRestoresValues) {
    const auto g = build_grid(symmetric_mixture(1.0, 0.8), default_domain(1));
    const auto back = dilate(dilate(g, 2.5), 1.0 / 2.5);
    ASSERT_EQ(back.size(), g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        ASSERT_NEAR(back[k], g[k], 1e-14 * g.max_value());
    }
}

TEST(Dilate, RejectsDegenerateFactor) {
    const auto g = gaussian_grid(1.0, default_domain(1));
    EXPECT_THROW(dilate(g, 1e-4), DegenerateScale);
    EXPECT_THROW(dilate(g, 2e3), DegenerateScale);
    EXPECT_THROW(dilate(g, -1.0), DegenerateScale);
}

TEST(Normalize, UnitMassUnchanged) {
    const auto g = gaussian_grid(1.0, default_domain(1));
    const auto [unit, mu] = normalize(g);
    EXPECT_NEAR(mu, 1.0, 1e-12);
    EXPECT_LT(sup_distance(unit, g), 1e-12 * g.max_value());
}

TEST(Normalize, RecoversScaleFactor) {
    const auto g = gaussian_grid(1.0, default_domain(1));
    const auto [unit, mu] = normalize(scale(g, 2.0));
    EXPECT_NEAR(mu, 2.0, 1e-12);
    EXPECT_LT(sup_distance(unit, g), 1e-14);
}

TEST(Normalize, PropertyUnitMassForRandomMixtures) {
    std::mt19937 rng(20240611);
    std::uniform_real_distribution<double> factor(0.1, 10.0);
    for (int trial = 0; trial < 25; ++trial) {
        const auto g = scale(build_grid(test_support::random_mixture(rng), default_domain(1)), factor(rng));
        EXPECT_NEAR(mass(normalize(g).first), 1.0, 1e-12);
    }
}

TEST(Convolve, GaussianSemigroup) {
    const auto g = gaussian_grid(1.0, GridDomain::make(1, 12.0, 2048));
    const auto c = convolve(g, g);
    EXPECT_DOUBLE_EQ(c.domain().half_width[0], 24.0);
    EXPECT_EQ(c.domain().points[0], 4095u);
    const auto exact = build_grid(GaussianSpec::centered(1, 2.0), c.domain());
    EXPECT_LT(sup_distance(c, exact), 1e-8);
    EXPECT_NEAR(c.mass(), 1.0, 1e-9);
}

TEST(Convolve, CommutativeAndMassMultiplicative) {
    const auto d = GridDomain::make(1, 10.0, 1500);
    const auto a = scale(build_grid(symmetric_mixture(2.0, 1.0), d), 1.5);
    const auto b = build_grid(GaussianSpec{1, {0.7}, 0.6}, d);
    const auto ab = convolve(a, b);
    const auto ba = convolve(b, a);
    EXPECT_LE(sup_distance(ab, ba), 1e-12 * ab.max_value());
    EXPECT_NEAR(ab.mass(), a.mass() * b.mass(), 1e-9);
}

TEST(Convolve, TwoDimensionalGaussians) {
    const auto d = GridDomain::make(2, 8.0, 128);
    const auto c = convolve(gaussian_grid(0.5, d), gaussian_grid(1.0, d));
    const auto exact = build_grid(GaussianSpec::centered(2, 1.5), c.domain());
    EXPECT_LT(sup_distance(c, exact), 1e-9);
    EXPECT_NEAR(c.mass(), 1.0, 1e-9);
}

TEST(Convolve, NarrowSpikeApproximatesIdentity) {
    // Oracle: M_1 * M_eps = M_{1+eps}; the deviation from M_1 is
    // (eps/2) M_1'' + O(eps^2), bounded by (eps/2) max|M_1''| = (eps/2) M_1(0).
    const auto d = default_domain(1);
    const double h = d.spacing(0);
    const double eps = 4.0 * h * h;
    const auto g = gaussian_grid(1.0, d);
    const auto spike = build_grid(GaussianSpec::centered(1, eps), GridDomain::make(1, 20.0 * h, 41));
    const auto c = convolve(g, spike);
    const double bound = 0.5 * eps * pdf(GaussianSpec::centered(1, 1.0), std::vector<double>{0.0});
    const double dev = sup_distance(c, g);
    EXPECT_LE(dev, 1.01 * bound);
    EXPECT_GE(dev, 0.9 * bound);
}

TEST(Convolve, GridMismatch) {
    const auto a = gaussian_grid(1.0, GridDomain::make(1, 10.0, 512));
    const auto b = gaussian_grid(1.0, GridDomain::make(1, 10.0, 700));
    EXPECT_THROW(convolve(a, b), GridMismatch);
    EXPECT_THROW(convolve(a, gaussian_grid(1.0, GridDomain::make(2, 10.0, 64))), GridMismatch);
}

TEST(L1Distance, BasicIdentities) {
    const auto g = gaussian_grid(1.0, default_domain(1));
    const auto m = build_grid(symmetric_mixture(2.0, 1.0), default_domain(1));
    EXPECT_EQ(l1_distance(g, g), 0.0);
    EXPECT_NEAR(l1_distance(g, scale(g, 2.0)), 1.0, 1e-10);
    EXPECT_EQ(l1_distance(g, m), l1_distance(m, g));
}

TEST(L1Distance, AlignedGridsOfDifferentExtent) {
    const auto d = default_domain(1);
    const double h = d.spacing(0);
    const auto wide_domain = GridDomain::make(1, d.half_width[0] + 100 * h, d.points[0] + 200);
    const auto narrow = gaussian_grid(1.0, d);
    const auto wide = gaussian_grid(1.0, wide_domain);
    EXPECT_LT(l1_distance(narrow, wide), 1e-12);
    EXPECT_THROW(l1_distance(narrow, gaussian_grid(1.0, GridDomain::make(1, 14.0, 4095))), GridMismatch);
}

#pragma once

/**
 * @file inequalities.hpp
 * @brief Both sides of each inequality in the entropy-power chain, with slack.
 *
 * Every report is oriented so that slack >= -tol means the inequality holds;
 * the raw sides are kept so the orientation never has to be re-derived.
 * Tolerances are relative: tol = rel_tol * max(1, |lhs|, |rhs|).
 */

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "entropy_flow/analytic.hpp"
#include "entropy_flow/convolution.hpp"
#include "entropy_flow/errors.hpp"
#include "entropy_flow/functionals.hpp"
#include "entropy_flow/grid.hpp"

namespace entropy_flow {

enum class InequalityTag {
    EPI,
    KEY,
    ISO,
    LSI,
    LSI_REMAINDER,
    CK,
    NASH,
    NASH_GENERAL,
    GEN_FISHER,
    JENSEN_STEP,
    SCALING_H,
    SCALING_I,
    SCALING_UPSILON,
};

inline std::string_view to_string(InequalityTag tag) {
    switch (tag) {
        case InequalityTag::EPI: return "EPI";
        case InequalityTag::KEY: return "KEY";
        case InequalityTag::ISO: return "ISO";
        case InequalityTag::LSI: return "LSI";
        case InequalityTag::LSI_REMAINDER: return "LSI_REMAINDER";
        case InequalityTag::CK: return "CK";
        case InequalityTag::NASH: return "NASH";
        case InequalityTag::NASH_GENERAL: return "NASH_GENERAL";
        case InequalityTag::GEN_FISHER: return "GEN_FISHER";
        case InequalityTag::JENSEN_STEP: return "JENSEN_STEP";
        case InequalityTag::SCALING_H: return "SCALING_H";
        case InequalityTag::SCALING_I: return "SCALING_I";
        case InequalityTag::SCALING_UPSILON: return "SCALING_UPSILON";
    }
    return "UNKNOWN";
}

struct InequalityReport {
    InequalityTag tag{};
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    double tol = 0.0;
    bool pass = false;
    std::string meta;
    /// Auxiliary named values (ratio, identity residual, ...).
    std::vector<std::pair<std::string, double>> extra;

    [[nodiscard]] double extra_value(std::string_view name) const {
        for (const auto& [k, v] : extra) {
            if (k == name) {
                return v;
            }
        }
        return std::numeric_limits<double>::quiet_NaN();
    }
};

namespace tolerance {
inline constexpr double standard = 1e-5;
inline constexpr double key = 1e-4;
inline constexpr double ck = 1e-8;
}  // namespace tolerance

/// Assembles a report; pass is derived from slack so the two can never disagree.
inline InequalityReport make_report(InequalityTag tag, double lhs, double rhs, double slack, double rel_tol,
                                    std::string meta = {}) {
    InequalityReport r;
    r.tag = tag;
    r.lhs = lhs;
    r.rhs = rhs;
    r.slack = slack;
    r.tol = rel_tol * std::max({1.0, std::abs(lhs), std::abs(rhs)});
    r.pass = slack >= -r.tol;
    r.meta = std::move(meta);
    return r;
}

namespace detail {

/// Centred M_sigma sampled on g's nodes without the tail check.
inline DensityGrid reference_gaussian(const DensityGrid& g, double sigma) {
    return build_grid(GaussianSpec::centered(g.dim(), sigma), g.domain(), std::numeric_limits<double>::infinity());
}

inline double two_pi_e() { return 2.0 * std::numbers::pi * std::numbers::e; }

}  // namespace detail

/// N(g1 * g2) >= N(g1) + N(g2).
inline InequalityReport check_epi(const DensityGrid& g1, const DensityGrid& g2,
                                  double rel_tol = tolerance::standard) {
    require_unit_mass(g1, "EPI");
    require_unit_mass(g2, "EPI");
    const double lhs = entropy_power(convolve(g1, g2));
    const double rhs = entropy_power(g1) + entropy_power(g2);
    return make_report(InequalityTag::EPI, lhs, rhs, lhs - rhs, rel_tol);
}

/// J >= (2/n) I^2, equivalent to Upsilon being non-increasing along the flow.
inline InequalityReport check_key_inequality(const DensityGrid& g, double rel_tol = tolerance::key) {
    const double j = mckean_j(g);
    const double i = fisher(g);
    const double rhs = 2.0 / g.dim() * i * i;
    return make_report(InequalityTag::KEY, j, rhs, j - rhs, rel_tol);
}

/// N(f) I(f) >= 2 pi e n.
inline InequalityReport check_isoperimetric(const DensityGrid& g, double rel_tol = tolerance::standard) {
    const double lhs = upsilon(g);
    const double rhs = detail::two_pi_e() * g.dim();
    return make_report(InequalityTag::ISO, lhs, rhs, lhs - rhs, rel_tol);
}

/// (sigma/2) I(f) >= ∫ f log f + n + (n/2) log(2 pi sigma).
inline InequalityReport check_lsi(const DensityGrid& g, double sigma, double rel_tol = tolerance::standard) {
    if (!(sigma > 0.0)) {
        throw ValidationError("LSI reference variance must be positive");
    }
    const int n = g.dim();
    const double lhs = 0.5 * sigma * fisher(g);
    const double rhs = -entropy(g) + n + 0.5 * n * std::log(2.0 * std::numbers::pi * sigma);
    return make_report(InequalityTag::LSI, lhs, rhs, lhs - rhs, rel_tol, "sigma=" + std::to_string(sigma));
}

/// 2 KL(f | M_sigma) >= ||f - M_sigma||_1^2 with M_sigma centred at the origin.
inline InequalityReport check_ck(const DensityGrid& g, double sigma, double rel_tol = tolerance::ck) {
    const auto ref = GaussianSpec::centered(g.dim(), sigma);
    const double lhs = 2.0 * kl_divergence(g, ref);
    const double l1 = l1_distance(g, detail::reference_gaussian(g, sigma));
    const double rhs = l1 * l1;
    return make_report(InequalityTag::CK, lhs, rhs, lhs - rhs, rel_tol, "sigma=" + std::to_string(sigma));
}

/// LSI with remainder, sigma = second_moment / n:
/// (sigma/2) I - (∫ f log f + n + (n/2) log 2 pi sigma) >= (n^2/8) ||f - M_sigma||_1^4.
inline InequalityReport check_improved_lsi(const DensityGrid& g, double rel_tol = tolerance::standard) {
    require_unit_mass(g, "improved LSI");
    const int n = g.dim();
    const double sigma = second_moment(g) / n;
    const double deficit =
        0.5 * sigma * fisher(g) - (-entropy(g) + n + 0.5 * n * std::log(2.0 * std::numbers::pi * sigma));
    const double l1 = l1_distance(g, detail::reference_gaussian(g, sigma));
    const double rhs = n * n / 8.0 * l1 * l1 * l1 * l1;
    auto r = make_report(InequalityTag::LSI_REMAINDER, deficit, rhs, deficit - rhs, rel_tol,
                         "sigma=" + std::to_string(sigma));
    r.extra = {{"sigma", sigma}, {"l1_distance", l1}};
    return r;
}

/// I(f) >= 2 pi e n mu exp(-(2/(n mu)) (H(f) + mu log mu)) for any f >= 0 of mass mu.
/// H(f) = -∫ f log f on the unnormalized f; equality for every mu * M_sigma.
inline InequalityReport check_gen_fisher(const DensityGrid& g, double rel_tol = tolerance::standard) {
    const double mu = g.mass();
    if (!(mu > 0.0)) {
        throw ZeroMass("generalized Fisher bound needs positive mass");
    }
    const int n = g.dim();
    const double lhs = fisher(g);
    const double h = raw_entropy(g);
    const double rhs = detail::two_pi_e() * n * mu * std::exp(-2.0 / (n * mu) * (h + mu * std::log(mu)));
    auto r = make_report(InequalityTag::GEN_FISHER, lhs, rhs, lhs - rhs, rel_tol);
    r.extra = {{"mass", mu}};
    return r;
}

/// For a unit-mass g: -H(g^2) >= 2 (∫ g^2) log(∫ g^2)  (Jensen on r log r).
inline InequalityReport check_jensen_step(const DensityGrid& g, double rel_tol = tolerance::standard) {
    require_unit_mass(g, "Jensen step");
    const auto f = square(g);
    const double lhs = -raw_entropy(f);
    const double m = f.mass();
    const double rhs = 2.0 * m * std::log(m);
    auto r = make_report(InequalityTag::JENSEN_STEP, lhs, rhs, lhs - rhs, rel_tol);
    r.extra = {{"l2_mass", m}};
    return r;
}

/// (∫ g^2)^{1+2/n} <= (2/(pi e n)) (∫ g)^{4/n} ∫ |∇g|^2.
///
/// Tagged NASH for unit-mass g and NASH_GENERAL otherwise. Also reports the
/// lhs/rhs ratio and the residual of I(g^2) = 4 ∫ |∇g|^2.
inline InequalityReport check_nash(const DensityGrid& g, double rel_tol = tolerance::standard) {
    const double mu = g.mass();
    if (!(mu > 0.0)) {
        throw ZeroMass("Nash inequality needs positive mass");
    }
    const int n = g.dim();
    const auto grad = gradient(g, functional_stencil);
    std::vector<double> grad_sq(g.size(), 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        for (int ax = 0; ax < n; ++ax) {
            grad_sq[k] += grad[ax][k] * grad[ax][k];
        }
    }
    const double dirichlet = integrate(g.domain(), grad_sq);
    const auto g2 = square(g);
    const double l2 = g2.mass();
    const double lhs = std::pow(l2, 1.0 + 2.0 / n);
    const double rhs = 2.0 / (std::numbers::pi * std::numbers::e * n) * std::pow(mu, 4.0 / n) * dirichlet;
    const double fisher_sq = fisher(g2);
    const double identity_residual = std::abs(fisher_sq - 4.0 * dirichlet) / fisher_sq;
    const auto tag = std::abs(mu - 1.0) <= unit_mass_tol ? InequalityTag::NASH : InequalityTag::NASH_GENERAL;
    auto r = make_report(tag, lhs, rhs, rhs - lhs, rel_tol, "mass=" + std::to_string(mu));
    r.extra = {{"ratio", lhs / rhs}, {"identity_residual", identity_residual}, {"dirichlet", dirichlet}};
    return r;
}

/// Entropy, Fisher and Upsilon under g -> g_a. Slack is -|deviation| so that
/// pass means the deviation is within tol.
inline std::vector<InequalityReport> check_scaling_laws(const DensityGrid& g, double a,
                                                        double rel_tol = tolerance::standard) {
    if (!(a >= 0.25 && a <= 4.0)) {
        throw DegenerateScale("scaling factor must lie in [0.25, 4]");
    }
    const int n = g.dim();
    const auto ga = dilate(g, a);
    const double h = entropy(g);
    const double ha = entropy(ga);
    const double i = fisher(g);
    const double ia = fisher(ga);
    const double u = std::exp(2.0 / n * h) * i;
    const double ua = std::exp(2.0 / n * ha) * ia;
    const std::string meta = "a=" + std::to_string(a);

    // Deviation-type reports use absolute tolerances (no max(1, ...) scaling).
    const auto deviation_report = [&](InequalityTag tag, double lhs, double rhs, double dev) {
        InequalityReport r;
        r.tag = tag;
        r.lhs = lhs;
        r.rhs = rhs;
        r.slack = dev == 0.0 ? 0.0 : -dev;
        r.tol = rel_tol;
        r.pass = r.slack >= -r.tol;
        r.meta = meta;
        r.extra = {{"a", a}};
        return r;
    };
    const double predicted_h = h - n * std::log(a);
    return {
        deviation_report(InequalityTag::SCALING_H, ha, predicted_h, std::abs(ha - predicted_h)),
        deviation_report(InequalityTag::SCALING_I, ia / i, a * a, std::abs(ia / i - a * a) / (a * a)),
        deviation_report(InequalityTag::SCALING_UPSILON, ua / u, 1.0, std::abs(ua / u - 1.0)),
    };
}

}  // namespace entropy_flow

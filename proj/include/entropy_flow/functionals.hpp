#pragma once

/**
 * @file functionals.hpp
 * @brief Entropy, entropy power, Fisher information, McKean's J, Costa's
 *        Upsilon and KL divergence of grid densities.
 *
 * Log and divide integrands skip nodes where f < 1e-14 * max f; there the
 * integrands are negligible for the admitted tail class, but evaluating
 * them would only add round-off noise.
 *
 * Derivatives inside the functionals use the fourth-order stencil.
 */

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "entropy_flow/analytic.hpp"
#include "entropy_flow/errors.hpp"
#include "entropy_flow/grid.hpp"

namespace entropy_flow {

inline constexpr double unit_mass_tol = 1e-8;
inline constexpr Stencil functional_stencil = Stencil::fourth_order;

struct FunctionalSnapshot {
    double t = 0.0;
    double H = 0.0;
    double N = 0.0;
    double I = 0.0;
    double J = 0.0;
    double Upsilon = 0.0;
};

inline void require_unit_mass(const DensityGrid& g, const char* what) {
    if (std::abs(g.mass() - 1.0) > unit_mass_tol) {
        throw NotNormalized(std::string(what) + " needs a unit-mass density (mass = " +
                            std::to_string(g.mass()) + "); normalize first");
    }
}

/// -∫ f log f for any nonnegative f, no mass requirement (0 log 0 = 0).
inline double raw_entropy(const DensityGrid& g, double floor = default_log_floor) {
    const double cutoff = floor * g.max_value();
    std::vector<double> integrand(g.size(), 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g[k] >= cutoff) {
            integrand[k] = -g[k] * std::log(g[k]);
        }
    }
    return integrate(g.domain(), integrand);
}

/// Shannon entropy in nats of a unit-mass density.
inline double entropy(const DensityGrid& g) {
    require_unit_mass(g, "entropy");
    return raw_entropy(g);
}

/// N(f) = exp((2/n) H(f)).
inline double entropy_power(const DensityGrid& g) {
    return std::exp(2.0 / g.dim() * entropy(g));
}

/// ∫ |∇f|^2 / f.
inline double fisher(const DensityGrid& g, Stencil stencil = functional_stencil) {
    if (!(g.mass() > 0.0)) {
        throw ZeroMass("Fisher information of a zero-mass grid");
    }
    const auto grad = gradient(g, stencil);
    const double cutoff = default_log_floor * g.max_value();
    std::vector<double> integrand(g.size(), 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g[k] < cutoff) {
            continue;
        }
        double sq = 0.0;
        for (int ax = 0; ax < g.dim(); ++ax) {
            sq += grad[ax][k] * grad[ax][k];
        }
        integrand[k] = sq / g[k];
    }
    return integrate(g.domain(), integrand);
}

/// J(f) = 2 Σ_ij ∫ (∂_i ∂_j log f)^2 f, the log-Hessian form.
inline double mckean_j(const DensityGrid& g, Stencil stencil = functional_stencil) {
    require_unit_mass(g, "McKean's J");
    const auto hess = hessian_log(g, default_log_floor, stencil);
    std::vector<double> integrand(g.size(), 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!hess.mask[k]) {
            continue;
        }
        double frob = hess.xx[k] * hess.xx[k];
        if (g.dim() == 2) {
            frob += 2.0 * hess.xy[k] * hess.xy[k] + hess.yy[k] * hess.yy[k];
        }
        integrand[k] = frob * g[k];
    }
    return 2.0 * integrate(g.domain(), integrand);
}

/// 1D only: J(f) = 2 (∫ f''^2 / f - (1/3) ∫ f'^4 / f^3). Subtracts two large
/// terms, so it serves as a cross-check of mckean_j rather than the primary route.
inline double mckean_j_raw_1d(const DensityGrid& g, Stencil stencil = functional_stencil) {
    if (g.dim() != 1) {
        throw DimensionMismatch("the derivative-moment form of J is one-dimensional");
    }
    require_unit_mass(g, "McKean's J");
    const auto d1 = derivative(g.domain(), g.values(), 0, stencil);
    const auto d2 = second_derivative(g.domain(), g.values(), 0, stencil);
    const double cutoff = default_log_floor * g.max_value();
    std::vector<double> curvature(g.size(), 0.0);
    std::vector<double> quartic(g.size(), 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g[k] < cutoff) {
            continue;
        }
        curvature[k] = d2[k] * d2[k] / g[k];
        const double score = d1[k] / g[k];
        quartic[k] = score * score * score * score * g[k];
    }
    return 2.0 * (integrate(g.domain(), curvature) - integrate(g.domain(), quartic) / 3.0);
}

/// Costa's functional N(f) I(f).
inline double upsilon(const DensityGrid& g) {
    return entropy_power(g) * fisher(g);
}

/// ∫ f log(f / M) for a Gaussian reference evaluated analytically on g's nodes.
inline double kl_divergence(const DensityGrid& g, const GaussianSpec& ref) {
    require_unit_mass(g, "KL divergence");
    ref.validate();
    if (ref.dim != g.dim()) {
        throw DimensionMismatch("KL reference has a different dimension than the grid");
    }
    const auto& d = g.domain();
    const double log_norm = -0.5 * ref.dim * std::log(2.0 * std::numbers::pi * ref.sigma);
    const double cutoff = default_log_floor * g.max_value();
    std::vector<double> integrand(g.size(), 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g[k] < cutoff) {
            continue;
        }
        const auto c = d.coords(k);
        double r2 = 0.0;
        for (int ax = 0; ax < ref.dim; ++ax) {
            const double x = c[static_cast<std::size_t>(ax)] - ref.mean[static_cast<std::size_t>(ax)];
            r2 += x * x;
        }
        const double log_ref = log_norm - r2 / (2.0 * ref.sigma);
        integrand[k] = g[k] * (std::log(g[k]) - log_ref);
    }
    return integrate(d, integrand);
}

/// All functionals at once. N and Upsilon are derived from H and I so the
/// snapshot identities hold exactly.
inline FunctionalSnapshot snapshot(const DensityGrid& g, double t = 0.0) {
    FunctionalSnapshot s;
    s.t = t;
    s.H = entropy(g);
    s.N = std::exp(2.0 / g.dim() * s.H);
    s.I = fisher(g);
    s.J = mckean_j(g);
    s.Upsilon = s.N * s.I;
    return s;
}

}  // namespace entropy_flow

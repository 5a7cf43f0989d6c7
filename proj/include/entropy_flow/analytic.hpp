#pragma once

/**
 * @file analytic.hpp
 * @brief Isotropic Gaussians and Gaussian mixtures in closed form.
 *
 * M_sigma(v) = (2 pi sigma)^{-n/2} exp(-|v - mean|^2 / (2 sigma)), where sigma
 * is the per-coordinate variance. Both families are closed under the heat
 * semigroup and under dilation, which makes them exact oracles for every
 * flow-level check.
 */

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "entropy_flow/errors.hpp"
#include "entropy_flow/grid.hpp"

namespace entropy_flow {

struct GaussianSpec {
    int dim = 1;
    std::vector<double> mean{0.0};
    double sigma = 1.0;

    static GaussianSpec centered(int dim, double sigma) {
        GaussianSpec s{dim, std::vector<double>(static_cast<std::size_t>(dim), 0.0), sigma};
        s.validate();
        return s;
    }

    void validate() const {
        if (dim < 1) {
            throw ValidationError("Gaussian dimension must be positive");
        }
        if (mean.size() != static_cast<std::size_t>(dim)) {
            throw DimensionMismatch("Gaussian mean has length " + std::to_string(mean.size()) +
                                    ", expected " + std::to_string(dim));
        }
        if (!(sigma > 0.0) || !std::isfinite(sigma)) {
            throw ValidationError("Gaussian sigma must be positive");
        }
    }
};

struct MixtureSpec {
    std::vector<GaussianSpec> components;
    std::vector<double> weights;

    [[nodiscard]] int dim() const { return components.empty() ? 0 : components.front().dim; }

    void validate() const {
        if (components.empty() || components.size() != weights.size()) {
            throw ValidationError("mixture needs one positive weight per component");
        }
        double total = 0.0;
        for (std::size_t i = 0; i < components.size(); ++i) {
            components[i].validate();
            if (components[i].dim != components.front().dim) {
                throw DimensionMismatch("mixture components have different dimensions");
            }
            if (!(weights[i] > 0.0)) {
                throw ValidationError("mixture weights must be positive");
            }
            total += weights[i];
        }
        if (std::abs(total - 1.0) > 1e-12) {
            throw ValidationError("mixture weights must sum to 1");
        }
    }
};

/// Symmetric two-component 1D mixture: means ±m, common sigma, equal weights.
inline MixtureSpec symmetric_mixture(double m, double sigma) {
    MixtureSpec s{{GaussianSpec{1, {-m}, sigma}, GaussianSpec{1, {m}, sigma}}, {0.5, 0.5}};
    s.validate();
    return s;
}

using DensitySpec = std::variant<GaussianSpec, MixtureSpec>;

inline int spec_dim(const DensitySpec& s) {
    return std::visit([](const auto& x) {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, GaussianSpec>) {
            return x.dim;
        } else {
            return x.dim();
        }
    }, s);
}

inline void validate(const DensitySpec& s) {
    std::visit([](const auto& x) { x.validate(); }, s);
}

inline double pdf(const GaussianSpec& s, std::span<const double> v) {
    double r2 = 0.0;
    for (int i = 0; i < s.dim; ++i) {
        const double d = v[static_cast<std::size_t>(i)] - s.mean[static_cast<std::size_t>(i)];
        r2 += d * d;
    }
    return std::pow(2.0 * std::numbers::pi * s.sigma, -0.5 * s.dim) * std::exp(-r2 / (2.0 * s.sigma));
}

inline double pdf(const MixtureSpec& s, std::span<const double> v) {
    double total = 0.0;
    for (std::size_t i = 0; i < s.components.size(); ++i) {
        total += s.weights[i] * pdf(s.components[i], v);
    }
    return total;
}

inline double pdf(const DensitySpec& s, std::span<const double> v) {
    return std::visit([&](const auto& x) { return pdf(x, v); }, s);
}

/// H(M_sigma) = (n/2) log(2 pi sigma) + n/2.
inline double gaussian_entropy(double sigma, int n) {
    return 0.5 * n * std::log(2.0 * std::numbers::pi * sigma) + 0.5 * n;
}

/// I(M_sigma) = n / sigma.
inline double gaussian_fisher(double sigma, int n) { return n / sigma; }

/// J(M_sigma) = 2 n / sigma^2 (the log-Hessian is -Id / sigma).
inline double gaussian_mckean_j(double sigma, int n) { return 2.0 * n / (sigma * sigma); }

/// N(M_sigma) = 2 pi e sigma.
inline double gaussian_entropy_power(double sigma, int n) {
    return std::exp(2.0 / n * gaussian_entropy(sigma, n));
}

/// exp((2/n) H(M_sigma)) I(M_sigma); equals 2 pi e n for every sigma.
inline double gaussian_upsilon(double sigma, int n) {
    return gaussian_entropy_power(sigma, n) * gaussian_fisher(sigma, n);
}

/// Exact heat-flow evolution f * M_{2t}: every component's sigma grows by 2t.
inline GaussianSpec heat_evolve_spec(GaussianSpec s, double t) {
    if (!(t >= 0.0)) {
        throw ValidationError("heat-flow time must be nonnegative");
    }
    s.sigma += 2.0 * t;
    return s;
}

inline MixtureSpec heat_evolve_spec(MixtureSpec s, double t) {
    for (auto& c : s.components) {
        c = heat_evolve_spec(c, t);
    }
    return s;
}

inline DensitySpec heat_evolve_spec(const DensitySpec& s, double t) {
    return std::visit([&](const auto& x) { return DensitySpec(heat_evolve_spec(x, t)); }, s);
}

/// Closed-form dilation a^n f(a v): means divide by a, sigma by a^2.
inline GaussianSpec dilate_spec(GaussianSpec s, double a) {
    for (auto& m : s.mean) {
        m /= a;
    }
    s.sigma /= a * a;
    return s;
}

inline MixtureSpec dilate_spec(MixtureSpec s, double a) {
    for (auto& c : s.components) {
        c = dilate_spec(c, a);
    }
    return s;
}

/// ∫ |v|^2 f dv in closed form (law of total variance for mixtures).
inline double spec_second_moment(const GaussianSpec& s) {
    double m2 = 0.0;
    for (const double m : s.mean) {
        m2 += m * m;
    }
    return s.dim * s.sigma + m2;
}

inline double spec_second_moment(const MixtureSpec& s) {
    double total = 0.0;
    for (std::size_t i = 0; i < s.components.size(); ++i) {
        total += s.weights[i] * spec_second_moment(s.components[i]);
    }
    return total;
}

/// Samples the density on the grid; throws TailMassError when the domain is too small.
inline DensityGrid build_grid(const DensitySpec& spec, const GridDomain& domain,
                              double tail_tol = default_tail_tol) {
    validate(spec);
    if (spec_dim(spec) != domain.dim) {
        throw DimensionMismatch("density spec has dimension " + std::to_string(spec_dim(spec)) +
                                " but grid has dimension " + std::to_string(domain.dim));
    }
    return std::visit([&](const auto& s) {
        return sample_grid(domain, [&](double x, double y) {
            const double v[2] = {x, y};
            return pdf(s, std::span<const double>(v, static_cast<std::size_t>(domain.dim)));
        }, tail_tol);
    }, spec);
}

/// Default resolution: 1D [-14, 14] with 4096 nodes, 2D [-10, 10]^2 with 512^2 nodes.
inline GridDomain default_domain(int dim) {
    return dim == 1 ? GridDomain::make(1, 14.0, 4096) : GridDomain::make(2, 10.0, 512);
}

}  // namespace entropy_flow

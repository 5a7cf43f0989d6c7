#pragma once

/**
 * @file heat_flow.hpp
 * @brief Heat semigroup on grids: f(., t) = f * M_{2t}, functional traces and
 *        finite-difference checks of the flow identities.
 *
 * Evolution convolves with the sampled kernel, so every time is computed
 * independently from the initial grid and there is no time-step constraint.
 * The output domain grows by 6 sqrt(2t) per side (rounded up to whole
 * nodes). The kernel itself is sampled over every offset the output grid can
 * see, never truncated, so values are smooth functions of t.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "entropy_flow/convolution.hpp"
#include "entropy_flow/errors.hpp"
#include "entropy_flow/functionals.hpp"
#include "entropy_flow/grid.hpp"
#include "entropy_flow/parallel.hpp"

namespace entropy_flow {

inline constexpr double heat_padding_widths = 6.0;

namespace detail {

/// Nodes of padding per side for flow time t on spacing h.
inline std::size_t heat_padding_nodes(double t, double h) {
    return static_cast<std::size_t>(std::ceil(heat_padding_widths * std::sqrt(2.0 * t) / h));
}

/// 1D heat kernel of variance 2t sampled at offsets -reach..reach (times h).
inline std::vector<double> heat_kernel(double t, double h, std::size_t reach) {
    const double var = 2.0 * t;
    const double norm = h / std::sqrt(2.0 * std::numbers::pi * var);
    std::vector<double> k(2 * reach + 1);
    for (std::size_t i = 0; i < k.size(); ++i) {
        const double x = (static_cast<double>(i) - static_cast<double>(reach)) * h;
        k[i] = norm * std::exp(-x * x / (2.0 * var));
    }
    return k;
}

/// Convolves one line of n values (with padding pad per side in the output).
inline void evolve_line(std::span<const double> in, std::span<const double> kernel, std::size_t pad,
                        std::span<double> out) {
    const auto full = linear_convolve(in, kernel);
    // full[q] sits at output position q - (n - 1 + pad) relative to input node 0
    const std::size_t first = in.size() - 1;
    std::copy_n(full.begin() + static_cast<std::ptrdiff_t>(first), out.size(), out.begin());
}

}  // namespace detail

/// f * M_{2t}: solution of the heat equation at time t > 0.
inline DensityGrid evolve(const DensityGrid& g, double t) {
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw ValidationError("heat-flow time must be positive");
    }
    const auto& d = g.domain();
    GridDomain out = d;
    std::array<std::size_t, 2> pad{0, 0};
    for (int ax = 0; ax < d.dim; ++ax) {
        pad[ax] = detail::heat_padding_nodes(t, d.spacing(ax));
        out.points[ax] = d.points[ax] + 2 * pad[ax];
        out.half_width[ax] = d.half_width[ax] + static_cast<double>(pad[ax]) * d.spacing(ax);
    }

    std::vector<double> values;
    if (d.dim == 1) {
        const std::size_t reach = d.points[0] - 1 + pad[0];
        const auto kernel = detail::heat_kernel(t, d.spacing(0), reach);
        values.resize(out.points[0]);
        detail::evolve_line(g.values(), kernel, pad[0], values);
    } else {
        // The 2D kernel is a product, so convolve along axis 0 then axis 1.
        const std::size_t n0 = d.points[0];
        const std::size_t n1 = d.points[1];
        const std::size_t m0 = out.points[0];
        const std::size_t m1 = out.points[1];
        const auto kernel0 = detail::heat_kernel(t, d.spacing(0), n0 - 1 + pad[0]);
        const auto kernel1 = detail::heat_kernel(t, d.spacing(1), n1 - 1 + pad[1]);
        std::vector<double> stage(m0 * n1);  // axis-0 convolved, stored column-major (j, i)
        parallel_for(n1, [&](std::size_t j) {
            std::vector<double> column(n0);
            for (std::size_t i = 0; i < n0; ++i) {
                column[i] = g[i * n1 + j];
            }
            detail::evolve_line(column, kernel0, pad[0], std::span<double>(stage.data() + j * m0, m0));
        });
        values.resize(m0 * m1);
        parallel_for(m0, [&](std::size_t i) {
            std::vector<double> row(n1);
            for (std::size_t j = 0; j < n1; ++j) {
                row[j] = stage[j * m0 + i];
            }
            detail::evolve_line(row, kernel1, pad[1], std::span<double>(values.data() + i * m1, m1));
        });
    }
    detail::clamp_roundoff(values);
    return DensityGrid(out, std::move(values));
}

/// F(v, t) = (1 + 2t)^{n/2} f(v sqrt(1 + 2t), t): the heat flow rescaled so
/// that a unit Gaussian is a fixed point.
inline DensityGrid rescaled_flow(const DensityGrid& g, double t) {
    if (!(t >= 0.0)) {
        throw ValidationError("rescaled-flow time must be nonnegative");
    }
    if (t == 0.0) {
        return g;
    }
    return dilate(evolve(g, t), std::sqrt(1.0 + 2.0 * t));
}

/// Default central-difference step in t: 1e-3 * max(t, 1).
inline double default_time_step(double t) { return 1e-3 * std::max(t, 1.0); }

namespace detail {

inline void require_stencil_fits(double t, double dt) {
    if (!(t > 0.0) || !(dt > 0.0)) {
        throw ValidationError("flow time and time step must be positive");
    }
    if (dt > t / 10.0) {
        throw ValidationError("time step must not exceed t / 10");
    }
}

}  // namespace detail

/// Snapshots at t - dt, t, t + dt.
struct TimeStencil {
    FunctionalSnapshot before;
    FunctionalSnapshot at;
    FunctionalSnapshot after;
    double dt = 0.0;

    /// |dH/dt - I| / I by central difference.
    [[nodiscard]] double debruijn_residual() const {
        return std::abs((after.H - before.H) / (2.0 * dt) - at.I) / at.I;
    }
    /// |dI/dt + J| / J by central difference.
    [[nodiscard]] double fisher_residual() const {
        return std::abs((after.I - before.I) / (2.0 * dt) + at.J) / at.J;
    }
    /// Second central difference of N.
    [[nodiscard]] double n_second_diff() const {
        return (after.N - 2.0 * at.N + before.N) / (dt * dt);
    }
};

inline TimeStencil time_stencil(const DensityGrid& g, double t, double dt) {
    detail::require_stencil_fits(t, dt);
    const double times[3] = {t - dt, t, t + dt};
    FunctionalSnapshot snaps[3];
    parallel_for(3, [&](std::size_t i) { snaps[i] = snapshot(evolve(g, times[i]), times[i]); });
    return {snaps[0], snaps[1], snaps[2], dt};
}

inline double debruijn_check(const DensityGrid& g, double t, double dt) {
    return time_stencil(g, t, dt).debruijn_residual();
}

inline double fisher_derivative_check(const DensityGrid& g, double t, double dt) {
    return time_stencil(g, t, dt).fisher_residual();
}

inline double concavity_check(const DensityGrid& g, double t, double dt) {
    return time_stencil(g, t, dt).n_second_diff();
}

struct FlowTrace {
    std::vector<double> times;
    std::vector<FunctionalSnapshot> snapshots;
    std::vector<double> debruijn_residual;
    std::vector<double> fisher_residual;
    std::vector<double> n_second_diff;
};

/// Functionals along the flow at each requested time, with residuals from a
/// (t - dt, t, t + dt) stencil at every time. dt <= 0 selects default_time_step(t).
inline FlowTrace flow_trace(const DensityGrid& g, std::span<const double> times, double dt = 0.0) {
    if (times.size() < 3) {
        throw ValidationError("a flow trace needs at least 3 times");
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] > 0.0)) {
            throw ValidationError("flow-trace times must be positive");
        }
        if (i > 0 && !(times[i] > times[i - 1])) {
            throw ValidationError("flow-trace times must be strictly increasing");
        }
    }
    FlowTrace trace;
    trace.times.assign(times.begin(), times.end());
    std::vector<TimeStencil> stencils(times.size());
    // Each time point is independent; results land in fixed slots.
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double step = dt > 0.0 ? dt : default_time_step(times[i]);
        stencils[i] = time_stencil(g, times[i], step);
    }
    for (const auto& s : stencils) {
        trace.snapshots.push_back(s.at);
        trace.debruijn_residual.push_back(s.debruijn_residual());
        trace.fisher_residual.push_back(s.fisher_residual());
        trace.n_second_diff.push_back(s.n_second_diff());
    }
    return trace;
}

}  // namespace entropy_flow

#pragma once

/**
 * @file grid.hpp
 * @brief Densities sampled on uniform tensor grids over [-L, L]^n, n in {1, 2}.
 *
 * Values are stored row-major: node (i0, i1) lives at i0 * points[1] + i1.
 * A 1D domain is stored with points[1] == 1 so the same loops serve both
 * dimensions.
 *
 * Quadrature is the tensor trapezoid rule. For smooth densities that have
 * decayed to round-off at the boundary it is spectrally accurate.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "entropy_flow/errors.hpp"

namespace entropy_flow {

/// Relative floor below which nodes are dropped from log/divide integrands.
inline constexpr double default_log_floor = 1e-14;

/// Default tolerance on the fraction of mass carried by the two outer layers.
inline constexpr double default_tail_tol = 1e-10;

struct GridDomain {
    int dim = 1;
    std::array<double, 2> half_width{1.0, 0.0};
    std::array<std::size_t, 2> points{16, 1};

    static GridDomain make(int dim, double half_width, std::size_t points) {
        GridDomain d;
        d.dim = dim;
        d.half_width = {half_width, dim == 2 ? half_width : 0.0};
        d.points = {points, dim == 2 ? points : std::size_t{1}};
        d.validate();
        return d;
    }

    static GridDomain make_2d(std::array<double, 2> half_width, std::array<std::size_t, 2> points) {
        GridDomain d;
        d.dim = 2;
        d.half_width = half_width;
        d.points = points;
        d.validate();
        return d;
    }

    void validate() const {
        if (dim != 1 && dim != 2) {
            throw ValidationError("grid dimension must be 1 or 2, got " + std::to_string(dim));
        }
        for (int a = 0; a < dim; ++a) {
            if (points[a] < 16) {
                throw ValidationError("grid needs at least 16 points per axis");
            }
            if (!(half_width[a] > 0.0) || !std::isfinite(half_width[a])) {
                throw ValidationError("grid half_width must be positive and finite");
            }
        }
        if (dim == 1 && points[1] != 1) {
            throw ValidationError("1D grid must have a singleton second axis");
        }
    }

    [[nodiscard]] double spacing(int axis) const {
        return 2.0 * half_width[axis] / static_cast<double>(points[axis] - 1);
    }
    [[nodiscard]] double node(int axis, std::size_t i) const {
        return -half_width[axis] + static_cast<double>(i) * spacing(axis);
    }
    [[nodiscard]] std::size_t size() const { return points[0] * points[1]; }
    [[nodiscard]] double cell_volume() const {
        return dim == 1 ? spacing(0) : spacing(0) * spacing(1);
    }
    /// Node coordinates of flat index k (second entry is 0 in 1D).
    [[nodiscard]] std::array<double, 2> coords(std::size_t k) const {
        const std::size_t i0 = k / points[1];
        const std::size_t i1 = k % points[1];
        return {node(0, i0), dim == 2 ? node(1, i1) : 0.0};
    }

    bool operator==(const GridDomain&) const = default;
};

namespace detail {

inline double trapezoid_weight(std::size_t i, std::size_t n) {
    return (i == 0 || i + 1 == n) ? 0.5 : 1.0;
}

}  // namespace detail

/// Trapezoid quadrature of node values; fixed summation order.
inline double integrate(const GridDomain& d, std::span<const double> values) {
    const std::size_t n0 = d.points[0];
    const std::size_t n1 = d.points[1];
    double total = 0.0;
    for (std::size_t i0 = 0; i0 < n0; ++i0) {
        double row = 0.0;
        for (std::size_t i1 = 0; i1 < n1; ++i1) {
            const double w1 = d.dim == 2 ? detail::trapezoid_weight(i1, n1) : 1.0;
            row += w1 * values[i0 * n1 + i1];
        }
        total += detail::trapezoid_weight(i0, n0) * row;
    }
    return total * d.cell_volume();
}

/// Quadrature of values restricted to the two outermost layers of nodes.
inline double boundary_layer_mass(const GridDomain& d, std::span<const double> values) {
    const std::size_t n0 = d.points[0];
    const std::size_t n1 = d.points[1];
    const auto outer = [](std::size_t i, std::size_t n) { return i < 2 || i + 2 >= n; };
    double total = 0.0;
    for (std::size_t i0 = 0; i0 < n0; ++i0) {
        for (std::size_t i1 = 0; i1 < n1; ++i1) {
            const bool on_edge = outer(i0, n0) || (d.dim == 2 && outer(i1, n1));
            if (!on_edge) {
                continue;
            }
            const double w = detail::trapezoid_weight(i0, n0) *
                             (d.dim == 2 ? detail::trapezoid_weight(i1, n1) : 1.0);
            total += w * values[i0 * n1 + i1];
        }
    }
    return total * d.cell_volume();
}

/// Nonnegative density on a GridDomain. Immutable once constructed.
class DensityGrid {
public:
    /// Validates values (finite, >= 0, not all zero) and the tail invariant.
    /// Pass tail_tol = infinity to skip the tail check.
    DensityGrid(GridDomain domain, std::vector<double> values, double tail_tol = default_tail_tol)
        : domain_(domain), values_(std::move(values)) {
        domain_.validate();
        if (values_.size() != domain_.size()) {
            throw ValidationError("value count " + std::to_string(values_.size()) +
                                  " does not match grid size " + std::to_string(domain_.size()));
        }
        double vmax = 0.0;
        for (const double v : values_) {
            if (!std::isfinite(v)) {
                throw ValidationError("density grid contains a non-finite value");
            }
            if (v < 0.0) {
                throw ValidationError("density grid contains a negative value");
            }
            vmax = std::max(vmax, v);
        }
        if (vmax == 0.0) {
            throw ValidationError("density grid is identically zero");
        }
        max_value_ = vmax;
        mass_ = integrate(domain_, values_);
        if (std::isfinite(tail_tol)) {
            const double tail = boundary_layer_mass(domain_, values_);
            if (tail > tail_tol * mass_) {
                throw TailMassError("boundary layers carry a mass fraction of " + std::to_string(tail / mass_) +
                                    " (limit " + std::to_string(tail_tol) + "); increase half_width");
            }
        }
    }

    [[nodiscard]] const GridDomain& domain() const { return domain_; }
    [[nodiscard]] int dim() const { return domain_.dim; }
    [[nodiscard]] std::span<const double> values() const { return values_; }
    [[nodiscard]] double mass() const { return mass_; }
    [[nodiscard]] double max_value() const { return max_value_; }
    [[nodiscard]] std::size_t size() const { return values_.size(); }
    double operator[](std::size_t k) const { return values_[k]; }

private:
    GridDomain domain_;
    std::vector<double> values_;
    double mass_ = 0.0;
    double max_value_ = 0.0;
};

/// Samples fn(x, y) at every node (y = 0 in 1D).
template <typename Fn>
DensityGrid sample_grid(const GridDomain& domain, Fn&& fn, double tail_tol = default_tail_tol) {
    std::vector<double> values(domain.size());
    for (std::size_t k = 0; k < values.size(); ++k) {
        const auto c = domain.coords(k);
        values[k] = fn(c[0], c[1]);
    }
    return DensityGrid(domain, std::move(values), tail_tol);
}

inline double mass(const DensityGrid& g) { return g.mass(); }

/// ∫ |v|^2 f dv (not divided by the mass).
inline double second_moment(const DensityGrid& g) {
    if (!(g.mass() > 0.0)) {
        throw ZeroMass("second moment of a zero-mass grid");
    }
    const auto& d = g.domain();
    std::vector<double> integrand(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto c = d.coords(k);
        integrand[k] = (c[0] * c[0] + c[1] * c[1]) * g[k];
    }
    return integrate(d, integrand);
}

/// c * g for c > 0.
inline DensityGrid scale(const DensityGrid& g, double c) {
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw ValidationError("mass scale factor must be positive");
    }
    std::vector<double> v(g.values().begin(), g.values().end());
    for (auto& x : v) {
        x *= c;
    }
    return DensityGrid(g.domain(), std::move(v), std::numeric_limits<double>::infinity());
}

/// Pointwise square g^2 on the same nodes.
inline DensityGrid square(const DensityGrid& g) {
    std::vector<double> v(g.values().begin(), g.values().end());
    for (auto& x : v) {
        x *= x;
    }
    return DensityGrid(g.domain(), std::move(v), std::numeric_limits<double>::infinity());
}

/// (g / mass, mass).
inline std::pair<DensityGrid, double> normalize(const DensityGrid& g) {
    const double mu = g.mass();
    if (!(mu > 0.0)) {
        throw ZeroMass("cannot normalize a grid with zero mass");
    }
    if (mu == 1.0) {
        return {g, mu};
    }
    return {scale(g, 1.0 / mu), mu};
}

/// Dilation g_a(v) = a^n g(a v).
///
/// The result lives on [-L/a, L/a]^n with the same point count, so node v'
/// of the new grid maps to a * v', which is exactly a node of the old grid.
/// No interpolation is involved and quadrature identities hold to round-off.
inline DensityGrid dilate(const DensityGrid& g, double a) {
    if (!(a >= 1e-3 && a <= 1e3)) {
        throw DegenerateScale("dilation factor must lie in [1e-3, 1e3]");
    }
    if (a == 1.0) {
        return g;
    }
    GridDomain d = g.domain();
    for (int ax = 0; ax < d.dim; ++ax) {
        d.half_width[ax] /= a;
    }
    const double factor = std::pow(a, d.dim);
    std::vector<double> v(g.values().begin(), g.values().end());
    for (auto& x : v) {
        x *= factor;
    }
    return DensityGrid(d, std::move(v), std::numeric_limits<double>::infinity());
}

// ---------------------------------------------------------------------------
// Finite differences
// ---------------------------------------------------------------------------

enum class Stencil {
    second_order,  ///< 3-point central, one-sided 3-point at the ends
    fourth_order,  ///< 5-point central; falls back to second order on the 2 outer nodes
};

namespace detail {

/// Calls op(line_offset, stride, count) for every grid line along `axis`.
template <typename Op>
void for_each_line(const GridDomain& d, int axis, Op&& op) {
    const std::size_t n0 = d.points[0];
    const std::size_t n1 = d.points[1];
    if (axis == 0) {
        for (std::size_t j = 0; j < n1; ++j) {
            op(j, n1, n0);
        }
    } else {
        for (std::size_t i = 0; i < n0; ++i) {
            op(i * n1, std::size_t{1}, n1);
        }
    }
}

}  // namespace detail

/// d/dv_axis of node values.
inline std::vector<double> derivative(const GridDomain& d, std::span<const double> f, int axis,
                                      Stencil stencil = Stencil::second_order) {
    std::vector<double> out(f.size(), 0.0);
    const double h = d.spacing(axis);
    detail::for_each_line(d, axis, [&](std::size_t off, std::size_t s, std::size_t n) {
        const auto at = [&](std::size_t i) { return f[off + i * s]; };
        for (std::size_t i = 1; i + 1 < n; ++i) {
            double v;
            if (stencil == Stencil::fourth_order && i >= 2 && i + 2 < n) {
                v = (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2)) / (12.0 * h);
            } else {
                v = (at(i + 1) - at(i - 1)) / (2.0 * h);
            }
            out[off + i * s] = v;
        }
        out[off] = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
        out[off + (n - 1) * s] = (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h);
    });
    return out;
}

/// d²/dv_axis² of node values.
inline std::vector<double> second_derivative(const GridDomain& d, std::span<const double> f, int axis,
                                             Stencil stencil = Stencil::second_order) {
    std::vector<double> out(f.size(), 0.0);
    const double h2 = d.spacing(axis) * d.spacing(axis);
    detail::for_each_line(d, axis, [&](std::size_t off, std::size_t s, std::size_t n) {
        const auto at = [&](std::size_t i) { return f[off + i * s]; };
        for (std::size_t i = 1; i + 1 < n; ++i) {
            double v;
            if (stencil == Stencil::fourth_order && i >= 2 && i + 2 < n) {
                v = (-at(i - 2) + 16.0 * at(i - 1) - 30.0 * at(i) + 16.0 * at(i + 1) - at(i + 2)) / (12.0 * h2);
            } else {
                v = (at(i - 1) - 2.0 * at(i) + at(i + 1)) / h2;
            }
            out[off + i * s] = v;
        }
        out[off] = (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3)) / h2;
        out[off + (n - 1) * s] = (2.0 * at(n - 1) - 5.0 * at(n - 2) + 4.0 * at(n - 3) - at(n - 4)) / h2;
    });
    return out;
}

struct VectorField {
    GridDomain domain;
    std::array<std::vector<double>, 2> components;  // second is empty in 1D

    [[nodiscard]] std::span<const double> operator[](int axis) const { return components[axis]; }
};

inline VectorField gradient(const DensityGrid& g, Stencil stencil = Stencil::second_order) {
    VectorField out{g.domain(), {}};
    for (int ax = 0; ax < g.dim(); ++ax) {
        out.components[ax] = derivative(g.domain(), g.values(), ax, stencil);
    }
    return out;
}

/// Hessian of log f. Nodes whose stencil touches f < floor * max f are masked out.
struct SymmetricMatrixField {
    GridDomain domain;
    std::vector<double> xx, xy, yy;   // xy, yy empty in 1D
    std::vector<std::uint8_t> mask;   // 1 = node included in quadrature

    [[nodiscard]] double entry(int i, int j, std::size_t k) const {
        if (i == 0 && j == 0) {
            return xx[k];
        }
        if (i == 1 && j == 1) {
            return yy[k];
        }
        return xy[k];
    }
};

inline SymmetricMatrixField hessian_log(const DensityGrid& g, double floor = default_log_floor,
                                        Stencil stencil = Stencil::second_order) {
    if (!(floor > 0.0)) {
        throw ValidationError("log floor must be positive");
    }
    const auto& d = g.domain();
    const double cutoff = floor * g.max_value();
    std::vector<double> logf(g.size());
    SymmetricMatrixField out{d, {}, {}, {}, std::vector<std::uint8_t>(g.size())};
    for (std::size_t k = 0; k < g.size(); ++k) {
        logf[k] = std::log(std::max(g[k], cutoff));
    }
    // A node counts only if its whole stencil box lies above the floor.
    const std::ptrdiff_t reach = stencil == Stencil::fourth_order ? 2 : 1;
    const auto n0 = static_cast<std::ptrdiff_t>(d.points[0]);
    const auto n1 = static_cast<std::ptrdiff_t>(d.points[1]);
    const std::ptrdiff_t reach1 = d.dim == 2 ? reach : 0;
    for (std::ptrdiff_t i = 0; i < n0; ++i) {
        for (std::ptrdiff_t j = 0; j < n1; ++j) {
            bool inside = true;
            for (std::ptrdiff_t di = -reach; inside && di <= reach; ++di) {
                for (std::ptrdiff_t dj = -reach1; inside && dj <= reach1; ++dj) {
                    const std::ptrdiff_t a = std::clamp<std::ptrdiff_t>(i + di, 0, n0 - 1);
                    const std::ptrdiff_t b = std::clamp<std::ptrdiff_t>(j + dj, 0, n1 - 1);
                    inside = g[static_cast<std::size_t>(a * n1 + b)] >= cutoff;
                }
            }
            out.mask[static_cast<std::size_t>(i * n1 + j)] = inside ? 1 : 0;
        }
    }
    out.xx = second_derivative(d, logf, 0, stencil);
    if (d.dim == 2) {
        out.yy = second_derivative(d, logf, 1, stencil);
        const auto dx = derivative(d, logf, 0, stencil);
        out.xy = derivative(d, dx, 1, stencil);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Distances
// ---------------------------------------------------------------------------

namespace detail {

/// Union lattice of two grids sharing spacing and node parity. Returns the
/// union domain and, per grid, the index offset of its first node per axis.
struct AlignedPair {
    GridDomain union_domain;
    std::array<std::size_t, 2> offset1{0, 0};
    std::array<std::size_t, 2> offset2{0, 0};
};

inline AlignedPair align(const GridDomain& a, const GridDomain& b) {
    if (a.dim != b.dim) {
        throw GridMismatch("grids have different dimensions");
    }
    AlignedPair out;
    out.union_domain = a;
    for (int ax = 0; ax < a.dim; ++ax) {
        const double ha = a.spacing(ax);
        const double hb = b.spacing(ax);
        if (std::abs(ha - hb) > 1e-12 * std::max(ha, hb)) {
            throw GridMismatch("grids have different spacing");
        }
        if ((a.points[ax] - b.points[ax]) % 2 != 0) {
            throw GridMismatch("grid nodes are not aligned (point-count parity differs)");
        }
        if (a.points[ax] >= b.points[ax]) {
            out.offset2[ax] = (a.points[ax] - b.points[ax]) / 2;
        } else {
            out.offset1[ax] = (b.points[ax] - a.points[ax]) / 2;
            out.union_domain.points[ax] = b.points[ax];
            out.union_domain.half_width[ax] = b.half_width[ax];
        }
    }
    return out;
}

inline double value_at(const DensityGrid& g, const std::array<std::size_t, 2>& offset, std::size_t u0,
                        std::size_t u1) {
    if (u0 < offset[0] || u1 < offset[1]) {
        return 0.0;
    }
    const std::size_t i0 = u0 - offset[0];
    const std::size_t i1 = u1 - offset[1];
    const auto& p = g.domain().points;
    if (i0 >= p[0] || i1 >= p[1]) {
        return 0.0;
    }
    return g[i0 * p[1] + i1];
}

template <typename Op>
std::vector<double> pointwise_on_union(const DensityGrid& g1, const DensityGrid& g2, GridDomain& domain, Op&& op) {
    const auto al = align(g1.domain(), g2.domain());
    domain = al.union_domain;
    std::vector<double> out(domain.size());
    for (std::size_t u0 = 0; u0 < domain.points[0]; ++u0) {
        for (std::size_t u1 = 0; u1 < domain.points[1]; ++u1) {
            out[u0 * domain.points[1] + u1] =
                op(value_at(g1, al.offset1, u0, u1), value_at(g2, al.offset2, u0, u1));
        }
    }
    return out;
}

}  // namespace detail

/// ∫ |g1 - g2|. Grids must share spacing and node alignment; a node missing
/// from one grid counts as zero there.
inline double l1_distance(const DensityGrid& g1, const DensityGrid& g2) {
    GridDomain d;
    const auto diff = detail::pointwise_on_union(g1, g2, d, [](double a, double b) { return std::abs(a - b); });
    return integrate(d, diff);
}

/// max |g1 - g2| over the union of nodes (same alignment rules as l1_distance).
inline double sup_distance(const DensityGrid& g1, const DensityGrid& g2) {
    GridDomain d;
    const auto diff = detail::pointwise_on_union(g1, g2, d, [](double a, double b) { return std::abs(a - b); });
    return diff.empty() ? 0.0 : *std::max_element(diff.begin(), diff.end());
}

}  // namespace entropy_flow

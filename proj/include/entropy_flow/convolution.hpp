#pragma once

// Linear (non-circular) convolution through zero-padded FFTW transforms.

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "entropy_flow/grid.hpp"
#include "entropy_flow/parallel.hpp"

namespace entropy_flow {

namespace detail {

/// Smallest n' >= n of the form 2^a 3^b 5^c 7^d.
inline std::size_t fft_size(std::size_t n) {
    for (std::size_t m = std::max<std::size_t>(n, 1);; ++m) {
        std::size_t r = m;
        for (const std::size_t p : {2u, 3u, 5u, 7u}) {
            while (r % p == 0) {
                r /= p;
            }
        }
        if (r == 1) {
            return m;
        }
    }
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double[], FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

inline RealBuffer alloc_real(std::size_t n) {
    return RealBuffer(fftw_alloc_real(n));
}
inline ComplexBuffer alloc_complex(std::size_t n) {
    return ComplexBuffer(fftw_alloc_complex(n));
}

/// Forward/backward plan pair for a real transform of shape (n0, n1); n1 == 0 means 1D.
/// Plans are created once under a lock and executed through the new-array
/// interface, which FFTW documents as thread safe. FFTW_ESTIMATE never times
/// candidate algorithms, so the chosen plan (and hence the result bits) is
/// the same on every run.
class FftPlans {
public:
    static const FftPlans& get(std::size_t n0, std::size_t n1) {
        static std::mutex mutex;
        static std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<FftPlans>> cache;
        std::lock_guard lock(mutex);
        auto& slot = cache[{n0, n1}];
        if (!slot) {
            slot.reset(new FftPlans(n0, n1));
        }
        return *slot;
    }

    FftPlans(const FftPlans&) = delete;
    FftPlans& operator=(const FftPlans&) = delete;
    ~FftPlans() {
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
    }

    [[nodiscard]] std::size_t real_size() const { return n1_ == 0 ? n0_ : n0_ * n1_; }
    [[nodiscard]] std::size_t complex_size() const { return n1_ == 0 ? n0_ / 2 + 1 : n0_ * (n1_ / 2 + 1); }

    void forward(double* in, fftw_complex* out) const { fftw_execute_dft_r2c(forward_, in, out); }
    void backward(fftw_complex* in, double* out) const { fftw_execute_dft_c2r(backward_, in, out); }

private:
    FftPlans(std::size_t n0, std::size_t n1) : n0_(n0), n1_(n1) {
        auto r = alloc_real(real_size());
        auto c = alloc_complex(complex_size());
        const unsigned flags = FFTW_ESTIMATE;
        if (n1 == 0) {
            forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n0), r.get(), c.get(), flags);
            backward_ = fftw_plan_dft_c2r_1d(static_cast<int>(n0), c.get(), r.get(), flags);
        } else {
            forward_ = fftw_plan_dft_r2c_2d(static_cast<int>(n0), static_cast<int>(n1), r.get(), c.get(), flags);
            backward_ = fftw_plan_dft_c2r_2d(static_cast<int>(n0), static_cast<int>(n1), c.get(), r.get(), flags);
        }
    }

    std::size_t n0_;
    std::size_t n1_;
    fftw_plan forward_{};
    fftw_plan backward_{};
};

}  // namespace detail

/// Full linear convolution of two sequences: length a.size() + b.size() - 1.
inline std::vector<double> linear_convolve(std::span<const double> a, std::span<const double> b) {
    const std::size_t out_len = a.size() + b.size() - 1;
    const std::size_t n = detail::fft_size(out_len);
    const auto& plans = detail::FftPlans::get(n, 0);
    auto ra = detail::alloc_real(n);
    auto rb = detail::alloc_real(n);
    auto ca = detail::alloc_complex(plans.complex_size());
    auto cb = detail::alloc_complex(plans.complex_size());
    std::fill_n(ra.get(), n, 0.0);
    std::fill_n(rb.get(), n, 0.0);
    std::copy(a.begin(), a.end(), ra.get());
    std::copy(b.begin(), b.end(), rb.get());
    plans.forward(ra.get(), ca.get());
    plans.forward(rb.get(), cb.get());
    for (std::size_t k = 0; k < plans.complex_size(); ++k) {
        const double re = ca[k][0] * cb[k][0] - ca[k][1] * cb[k][1];
        const double im = ca[k][0] * cb[k][1] + ca[k][1] * cb[k][0];
        ca[k][0] = re;
        ca[k][1] = im;
    }
    plans.backward(ca.get(), ra.get());
    const double inv = 1.0 / static_cast<double>(n);
    std::vector<double> out(out_len);
    for (std::size_t k = 0; k < out_len; ++k) {
        out[k] = ra[k] * inv;
    }
    return out;
}

/// Full 2D linear convolution of row-major arrays; output shape (a0+b0-1, a1+b1-1).
inline std::vector<double> linear_convolve_2d(std::span<const double> a, std::array<std::size_t, 2> shape_a,
                                              std::span<const double> b, std::array<std::size_t, 2> shape_b) {
    const std::array<std::size_t, 2> out_shape{shape_a[0] + shape_b[0] - 1, shape_a[1] + shape_b[1] - 1};
    const std::size_t n0 = detail::fft_size(out_shape[0]);
    const std::size_t n1 = detail::fft_size(out_shape[1]);
    const auto& plans = detail::FftPlans::get(n0, n1);
    auto ra = detail::alloc_real(n0 * n1);
    auto rb = detail::alloc_real(n0 * n1);
    auto ca = detail::alloc_complex(plans.complex_size());
    auto cb = detail::alloc_complex(plans.complex_size());
    std::fill_n(ra.get(), n0 * n1, 0.0);
    std::fill_n(rb.get(), n0 * n1, 0.0);
    for (std::size_t i = 0; i < shape_a[0]; ++i) {
        std::copy_n(a.data() + i * shape_a[1], shape_a[1], ra.get() + i * n1);
    }
    for (std::size_t i = 0; i < shape_b[0]; ++i) {
        std::copy_n(b.data() + i * shape_b[1], shape_b[1], rb.get() + i * n1);
    }
    plans.forward(ra.get(), ca.get());
    plans.forward(rb.get(), cb.get());
    for (std::size_t k = 0; k < plans.complex_size(); ++k) {
        const double re = ca[k][0] * cb[k][0] - ca[k][1] * cb[k][1];
        const double im = ca[k][0] * cb[k][1] + ca[k][1] * cb[k][0];
        ca[k][0] = re;
        ca[k][1] = im;
    }
    plans.backward(ca.get(), ra.get());
    const double inv = 1.0 / static_cast<double>(n0 * n1);
    std::vector<double> out(out_shape[0] * out_shape[1]);
    for (std::size_t i = 0; i < out_shape[0]; ++i) {
        for (std::size_t j = 0; j < out_shape[1]; ++j) {
            out[i * out_shape[1] + j] = ra[i * n1 + j] * inv;
        }
    }
    return out;
}

namespace detail {

/// FFT round-off leaves values of order 1e-16 * max that may be negative.
inline void clamp_roundoff(std::vector<double>& v) {
    for (auto& x : v) {
        x = std::max(x, 0.0);
    }
}

}  // namespace detail

/// Convolution of two grid densities (g1 * g2)(v) = ∫ g1(w) g2(v - w) dw.
///
/// Both grids must share dimension and spacing. The output covers the
/// Minkowski sum of the two domains with N1 + N2 - 1 points per axis.
inline DensityGrid convolve(const DensityGrid& g1, const DensityGrid& g2) {
    const auto& d1 = g1.domain();
    const auto& d2 = g2.domain();
    if (d1.dim != d2.dim) {
        throw GridMismatch("cannot convolve grids of different dimension");
    }
    GridDomain out = d1;
    for (int ax = 0; ax < d1.dim; ++ax) {
        const double h1 = d1.spacing(ax);
        const double h2 = d2.spacing(ax);
        if (std::abs(h1 - h2) > 1e-12 * std::max(h1, h2)) {
            throw GridMismatch("cannot convolve grids with different spacing");
        }
        out.points[ax] = d1.points[ax] + d2.points[ax] - 1;
        out.half_width[ax] = d1.half_width[ax] + d2.half_width[ax];
    }
    std::vector<double> values = d1.dim == 1
                                     ? linear_convolve(g1.values(), g2.values())
                                     : linear_convolve_2d(g1.values(), d1.points, g2.values(), d2.points);
    const double vol = d1.cell_volume();
    for (auto& x : values) {
        x *= vol;
    }
    detail::clamp_roundoff(values);
    return DensityGrid(out, std::move(values), std::numeric_limits<double>::infinity());
}

}  // namespace entropy_flow

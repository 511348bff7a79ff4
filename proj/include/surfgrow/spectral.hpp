#pragma once

// Mean-zero real 2pi-periodic fields stored as truncated Fourier series in the
// orthonormal basis e_k(x) = exp(ikx) / sqrt(2 pi).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include <fftw3.h>

#include "surfgrow/errors.hpp"

namespace surfgrow {

using Complex = std::complex<double>;

inline const double kSqrt2Pi = std::sqrt(2.0 * std::numbers::pi);

/// Real mean-zero field sum_{0 < |k| <= n} a_k e_k with a_{-k} = conj(a_k).
///
/// Only a_1..a_n are stored; the negative modes are implied by Hermitian
/// symmetry and there is no k = 0 slot, so realness and zero mean hold by
/// construction. Values are immutable once built.
class FourierField {
public:
    /// Zero field with `n_modes` modes.
    explicit FourierField(std::size_t n_modes) : coeffs_(checked_size(n_modes)) {}

    /// `positive[k-1]` is a_k.
    explicit FourierField(std::vector<Complex> positive) : coeffs_(std::move(positive)) {
        checked_size(coeffs_.size());
        for (const auto& a : coeffs_) {
            if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
                throw NonFiniteError("FourierField: non-finite coefficient");
            }
        }
    }

    /// Field sum_k (cos_coeffs[k-1] cos(kx) + sin_coeffs[k-1] sin(kx)).
    static FourierField from_real(std::span<const double> cos_coeffs,
                                  std::span<const double> sin_coeffs) {
        const std::size_t n = std::max(cos_coeffs.size(), sin_coeffs.size());
        std::vector<Complex> a(n);
        // cos(kx) = sqrt(2pi)/2 (e_k + e_-k), sin(kx) = sqrt(2pi)/(2i) (e_k - e_-k)
        for (std::size_t i = 0; i < n; ++i) {
            const double c = i < cos_coeffs.size() ? cos_coeffs[i] : 0.0;
            const double s = i < sin_coeffs.size() ? sin_coeffs[i] : 0.0;
            a[i] = 0.5 * kSqrt2Pi * Complex(c, -s);
        }
        return FourierField(std::move(a));
    }

    [[nodiscard]] std::size_t n_modes() const noexcept { return coeffs_.size(); }

    /// a_k for any integer k; zero outside 1 <= |k| <= n and at k = 0.
    [[nodiscard]] Complex coeff(long k) const noexcept {
        if (k == 0) return {};
        const auto idx = static_cast<std::size_t>(k > 0 ? k : -k);
        if (idx > coeffs_.size()) return {};
        const Complex a = coeffs_[idx - 1];
        return k > 0 ? a : std::conj(a);
    }

    [[nodiscard]] std::span<const Complex> positive() const noexcept { return coeffs_; }

    /// Coefficient of cos(kx) in the real expansion.
    [[nodiscard]] double cos_coeff(long k) const noexcept {
        return 2.0 * coeff(k).real() / kSqrt2Pi;
    }
    /// Coefficient of sin(kx) in the real expansion.
    [[nodiscard]] double sin_coeff(long k) const noexcept {
        return -2.0 * coeff(k).imag() / kSqrt2Pi;
    }

    /// Point evaluation by direct summation.
    [[nodiscard]] double evaluate(double x) const noexcept {
        double sum = 0.0;
        for (std::size_t i = 0; i < coeffs_.size(); ++i) {
            const double kx = static_cast<double>(i + 1) * x;
            sum += coeffs_[i].real() * std::cos(kx) - coeffs_[i].imag() * std::sin(kx);
        }
        return 2.0 * sum / kSqrt2Pi;
    }

    /// Zero-padded copy with `n` modes. Throws if that would drop a nonzero mode.
    [[nodiscard]] FourierField padded(std::size_t n) const {
        if (n < coeffs_.size()) {
            for (std::size_t i = n; i < coeffs_.size(); ++i) {
                if (coeffs_[i] != Complex{}) {
                    throw InvalidArgumentError("FourierField::padded: would truncate nonzero modes");
                }
            }
        }
        std::vector<Complex> a(coeffs_.begin(),
                               coeffs_.begin() + static_cast<std::ptrdiff_t>(std::min(n, coeffs_.size())));
        a.resize(checked_size(n));
        return FourierField(std::move(a));
    }

    /// Galerkin projection onto the first `n` modes.
    [[nodiscard]] FourierField truncated(std::size_t n) const {
        std::vector<Complex> a(checked_size(n));
        std::copy_n(coeffs_.begin(), std::min(n, coeffs_.size()), a.begin());
        return FourierField(std::move(a));
    }

    friend FourierField operator+(const FourierField& f, const FourierField& g) {
        return combine(1.0, f, 1.0, g);
    }
    friend FourierField operator-(const FourierField& f, const FourierField& g) {
        return combine(1.0, f, -1.0, g);
    }
    friend FourierField operator*(double s, const FourierField& f) {
        std::vector<Complex> a(f.coeffs_);
        for (auto& c : a) c *= s;
        return FourierField(std::move(a));
    }

    /// s * f + t * g, with bandwidth max(n_f, n_g).
    static FourierField combine(double s, const FourierField& f, double t, const FourierField& g) {
        std::vector<Complex> a(std::max(f.n_modes(), g.n_modes()));
        for (std::size_t i = 0; i < a.size(); ++i) {
            const Complex x = i < f.n_modes() ? f.coeffs_[i] : Complex{};
            const Complex y = i < g.n_modes() ? g.coeffs_[i] : Complex{};
            a[i] = s * x + t * y;
        }
        return FourierField(std::move(a));
    }

    friend bool operator==(const FourierField&, const FourierField&) = default;

private:
    static std::size_t checked_size(std::size_t n) {
        if (n == 0) throw InvalidArgumentError("FourierField: n_modes must be positive");
        return n;
    }

    std::vector<Complex> coeffs_;
};

namespace detail {

/// (ik)^order with the power of i reduced exactly.
inline Complex ik_power(long k, unsigned order) {
    const double mag = std::pow(static_cast<double>(k), static_cast<int>(order));
    switch (order % 4) {
        case 0: return {mag, 0.0};
        case 1: return {0.0, mag};
        case 2: return {-mag, 0.0};
        default: return {0.0, -mag};
    }
}

}  // namespace detail

/// d^order f / dx^order.
inline FourierField derivative(const FourierField& f, unsigned order) {
    if (order == 0) return f;
    std::vector<Complex> a(f.positive().begin(), f.positive().end());
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] *= detail::ik_power(static_cast<long>(i + 1), order);
    }
    return FourierField(std::move(a));
}

/// Real L2 inner product over [0, 2pi].
inline double inner_product(const FourierField& f, const FourierField& g) {
    const std::size_t n = std::min(f.n_modes(), g.n_modes());
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum += (f.positive()[i] * std::conj(g.positive()[i])).real();
    }
    return 2.0 * sum;
}

/// sqrt(sum_k |k|^{2s} |a_k|^2), for s in {-1, ..., 3}.
inline double sobolev_norm(const FourierField& f, int s) {
    if (s < -1 || s > 3) throw InvalidArgumentError("sobolev_norm: order must lie in [-1, 3]");
    double sum = 0.0;
    const auto a = f.positive();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double k = static_cast<double>(i + 1);
        sum += std::pow(k, 2 * s) * std::norm(a[i]);
    }
    return std::sqrt(2.0 * sum);
}

inline double l2_norm(const FourierField& f) { return sobolev_norm(f, 0); }

/// sum_k |a_k| / sqrt(2pi), an upper bound on sup_x |f(x)|.
inline double sup_norm_bound(const FourierField& f) {
    double sum = 0.0;
    for (const auto& a : f.positive()) sum += std::abs(a);
    return 2.0 * sum / kSqrt2Pi;
}

/// Exact convolution of the two coefficient sequences, i.e. the coefficients
/// of the pointwise product, projected onto modes 1..out_modes.
inline FourierField product(const FourierField& f, const FourierField& g, std::size_t out_modes) {
    if (out_modes == 0) throw InvalidArgumentError("product: out_modes must be positive");
    const long nf = static_cast<long>(f.n_modes());
    const long ng = static_cast<long>(g.n_modes());
    const long nout = std::min<long>(static_cast<long>(out_modes), nf + ng);
    std::vector<Complex> c(out_modes);
    for (long k = 1; k <= nout; ++k) {
        Complex sum{};
        // s + l = k with 1 <= |s| <= nf, 1 <= |l| <= ng
        const long s_lo = std::max(-nf, k - ng);
        const long s_hi = std::min(nf, k + ng);
        for (long s = s_lo; s <= s_hi; ++s) {
            if (s == 0 || s == k) continue;
            sum += f.coeff(s) * g.coeff(k - s);
        }
        c[static_cast<std::size_t>(k - 1)] = sum / kSqrt2Pi;
    }
    return FourierField(std::move(c));
}

/// Grid transform path for products of band-limited fields.
///
/// A transform of size M multiplies fields of bandwidth n_f, n_g without
/// aliasing into modes |k| <= out as long as M > n_f + n_g + out. Results agree
/// with `product` up to rounding; plans use FFTW_ESTIMATE so repeated runs are
/// bitwise reproducible.
class GridTransform {
public:
    explicit GridTransform(std::size_t grid_size) : m_(grid_size) {
        if (m_ < 4 || m_ % 2 != 0) throw InvalidArgumentError("GridTransform: grid size must be even and >= 4");
        real_ = static_cast<double*>(fftw_malloc(sizeof(double) * m_));
        spec_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (m_ / 2 + 1)));
        std::lock_guard lock(planner_mutex());
        forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(m_), real_, spec_, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_c2r_1d(static_cast<int>(m_), spec_, real_, FFTW_ESTIMATE);
    }

    /// Smallest FFT-friendly even size strictly above `min_exclusive`.
    static std::size_t size_for_bandwidth(std::size_t min_exclusive) { return good_size(min_exclusive + 1); }

    GridTransform(const GridTransform&) = delete;
    GridTransform& operator=(const GridTransform&) = delete;

    ~GridTransform() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
        fftw_free(real_);
        fftw_free(spec_);
    }

    [[nodiscard]] std::size_t size() const noexcept { return m_; }

    /// Values f(2 pi j / M), j = 0..M-1. Modes above M/2 - 1 are dropped.
    std::vector<double> to_grid(const FourierField& f) {
        load_spectrum(f);
        fftw_execute(backward_);
        return {real_, real_ + m_};
    }

    /// Coefficients of the trigonometric interpolant of grid values, modes 1..out_modes.
    FourierField from_grid(std::span<const double> values, std::size_t out_modes) {
        std::copy(values.begin(), values.end(), real_);
        fftw_execute(forward_);
        return unload_spectrum(out_modes);
    }

    /// Pointwise product, projected to modes 1..out_modes.
    FourierField multiply(const FourierField& f, const FourierField& g, std::size_t out_modes) {
        check_bandwidth(f.n_modes() + g.n_modes() + std::min(out_modes, f.n_modes() + g.n_modes()));
        const std::vector<double> fg = to_grid(f);
        load_spectrum(g);
        fftw_execute(backward_);
        for (std::size_t j = 0; j < m_; ++j) real_[j] *= fg[j];
        fftw_execute(forward_);
        return unload_spectrum(out_modes);
    }

    /// f^2 projected to modes 1..out_modes.
    FourierField square(const FourierField& f, std::size_t out_modes) {
        check_bandwidth(2 * f.n_modes() + std::min(out_modes, 2 * f.n_modes()));
        load_spectrum(f);
        fftw_execute(backward_);
        for (std::size_t j = 0; j < m_; ++j) real_[j] *= real_[j];
        fftw_execute(forward_);
        return unload_spectrum(out_modes);
    }

    static std::size_t good_size(std::size_t at_least) {
        std::size_t n = std::max<std::size_t>(at_least, 4);
        for (;; ++n) {
            if (n % 2 != 0) continue;
            std::size_t r = n;
            for (std::size_t p : {2u, 3u, 5u}) {
                while (r % p == 0) r /= p;
            }
            if (r == 1) return n;
        }
    }

private:
    static std::mutex& planner_mutex() {
        static std::mutex m;
        return m;
    }

    void check_bandwidth(std::size_t needed) const {
        if (m_ <= needed) throw InvalidArgumentError("GridTransform: grid too small for alias-free product");
    }

    void load_spectrum(const FourierField& f) {
        const std::size_t half = m_ / 2;
        for (std::size_t k = 0; k <= half; ++k) {
            spec_[k][0] = 0.0;
            spec_[k][1] = 0.0;
        }
        const auto a = f.positive();
        const std::size_t n = std::min(a.size(), half - 1);
        for (std::size_t k = 1; k <= n; ++k) {
            spec_[k][0] = a[k - 1].real() / kSqrt2Pi;
            spec_[k][1] = a[k - 1].imag() / kSqrt2Pi;
        }
    }

    FourierField unload_spectrum(std::size_t out_modes) const {
        std::vector<Complex> c(out_modes);
        const double scale = kSqrt2Pi / static_cast<double>(m_);
        const std::size_t n = std::min(out_modes, m_ / 2 - 1);
        for (std::size_t k = 1; k <= n; ++k) {
            c[k - 1] = scale * Complex(spec_[k][0], spec_[k][1]);
        }
        return FourierField(std::move(c));
    }

    std::size_t m_;
    double* real_ = nullptr;
    fftw_complex* spec_ = nullptr;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

}  // namespace surfgrow

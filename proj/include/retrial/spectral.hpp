#pragma once
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace retrial {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

/// Uniform periodic grid phi_j = (j + 1/2) 2 pi / n. The half-step offset keeps phi = 0 and phi = pi off the nodes.
inline std::vector<double> offset_grid(std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t j = 0; j < n; ++j) g[j] = (static_cast<double>(j) + 0.5) * 2.0 * std::numbers::pi / static_cast<double>(n);
    return g;
}

inline CVec fft_forward(const CVec& f) {
    Eigen::FFT<double> fft;
    CVec c;
    fft.fwd(c, f);
    return c;
}

inline CVec fft_inverse(const CVec& c) {
    Eigen::FFT<double> fft;
    CVec f;
    fft.inv(f, c);
    return f;
}

inline int wavenumber(std::size_t k, std::size_t n) {
    return k <= n / 2 ? static_cast<int>(k) : static_cast<int>(k) - static_cast<int>(n);
}

/// d/dphi of a periodic sample vector; the Nyquist mode is dropped.
inline CVec spectral_derivative(const CVec& f) {
    const std::size_t n = f.size();
    CVec c = fft_forward(f);
    for (std::size_t k = 0; k < n; ++k) {
        if (n % 2 == 0 && k == n / 2) c[k] = 0.0;
        else c[k] *= cplx(0.0, wavenumber(k, n));
    }
    return fft_inverse(c);
}

/// Trigonometric interpolant of samples on the offset grid, evaluated at phi (Nyquist mode split as a cosine).
inline cplx spectral_interpolate(const CVec& f, double phi) {
    const std::size_t n = f.size();
    const CVec c = fft_forward(f);
    const double h = 2.0 * std::numbers::pi / static_cast<double>(n);
    const double t = phi - h / 2;
    cplx s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (n % 2 == 0 && k == n / 2) s += c[k] * std::cos(static_cast<double>(n / 2) * t);
        else s += c[k] * std::exp(cplx(0.0, wavenumber(k, n) * t));
    }
    return s / static_cast<double>(n);
}

/// Derivative of the trigonometric interpolant at phi.
inline cplx spectral_interpolate_derivative(const CVec& f, double phi) {
    const std::size_t n = f.size();
    const CVec c = fft_forward(f);
    const double h = 2.0 * std::numbers::pi / static_cast<double>(n);
    const double t = phi - h / 2;
    cplx s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (n % 2 == 0 && k == n / 2) continue;
        const int m = wavenumber(k, n);
        s += c[k] * cplx(0.0, m) * std::exp(cplx(0.0, m * t));
    }
    return s / static_cast<double>(n);
}

/// Resample offset-grid data of size n onto the offset grid of size m (spectral).
inline CVec spectral_resample(const CVec& f, std::size_t m) {
    CVec out(m);
    const auto g = offset_grid(m);
    for (std::size_t j = 0; j < m; ++j) out[j] = spectral_interpolate(f, g[j]);
    return out;
}

/// Continuous argument along a closed sequence; returns per-node unwrapped angles.
inline std::vector<double> unwrap_arg(const CVec& f) {
    std::vector<double> a(f.size());
    if (f.empty()) return a;
    a[0] = std::arg(f[0]);
    for (std::size_t j = 1; j < f.size(); ++j) a[j] = a[j - 1] + std::arg(f[j] / f[j - 1]);
    return a;
}

/// Branch-continuous logarithm along the grid.
inline CVec continuous_log(const CVec& f) {
    const auto a = unwrap_arg(f);
    CVec out(f.size());
    for (std::size_t j = 0; j < f.size(); ++j) out[j] = cplx(std::log(std::abs(f[j])), a[j]);
    return out;
}

struct OriginProximityError : std::runtime_error {
    std::size_t node;
    OriginProximityError(const std::string& m, std::size_t k) : std::runtime_error(m), node(k) {}
};

/// Winding number about 0 of the closed polyline through the points, as the raw sum of argument increments / 2 pi.
inline double winding_number_raw(const CVec& pts, double min_modulus = 1e-12) {
    if (pts.size() < 3) throw std::invalid_argument("winding: need at least 3 points");
    std::size_t nearest = 0;
    for (std::size_t j = 0; j < pts.size(); ++j)
        if (std::abs(pts[j]) < std::abs(pts[nearest])) nearest = j;
    if (std::abs(pts[nearest]) < min_modulus)
        throw OriginProximityError("winding: polyline passes within " + std::to_string(min_modulus) + " of the origin at node " +
                                       std::to_string(nearest),
                                   nearest);
    double total = 0.0;
    for (std::size_t j = 0; j < pts.size(); ++j) total += std::arg(pts[(j + 1) % pts.size()] / pts[j]);
    return total / (2.0 * std::numbers::pi);
}

inline int winding_index(const CVec& pts, double min_modulus = 1e-12) {
    return static_cast<int>(std::lround(winding_number_raw(pts, min_modulus)));
}

} // namespace retrial

#pragma once
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "retrial/spectral.hpp"

namespace retrial {

/// Smooth closed curve sampled on the offset phi grid, with d/dphi at the nodes.
/// Cauchy sums use the trapezoid rule, which is spectrally accurate for periodic integrands.
class Curve {
public:
    Curve() = default;
    Curve(CVec z, CVec dz) : z_(std::move(z)), dz_(std::move(dz)) {
        if (z_.size() != dz_.size() || z_.size() < 8) throw std::invalid_argument("Curve: bad node arrays");
        h_ = 2.0 * std::numbers::pi / static_cast<double>(z_.size());
    }
    explicit Curve(CVec z) : Curve(z, spectral_derivative(z)) {}

    static Curve unit_circle(std::size_t n) {
        CVec z(n), dz(n);
        const auto g = offset_grid(n);
        for (std::size_t j = 0; j < n; ++j) {
            z[j] = std::exp(cplx(0.0, g[j]));
            dz[j] = cplx(0.0, 1.0) * z[j];
        }
        return Curve(z, dz);
    }

    std::size_t size() const { return z_.size(); }
    const CVec& nodes() const { return z_; }
    const CVec& tangents() const { return dz_; }
    double step() const { return h_; }

    /// (1/2 pi i) * integral of dz/(z - x): +1 inside a counterclockwise curve, -1 inside a clockwise one, 0 outside.
    double winding_about(cplx x) const {
        cplx s = 0.0;
        for (std::size_t j = 0; j < size(); ++j) s += dz_[j] / (z_[j] - x);
        return (s * h_ / cplx(0.0, 2.0 * std::numbers::pi)).real();
    }

    double distance_to(cplx x) const {
        double d = std::abs(z_[0] - x);
        for (const auto& v : z_) d = std::min(d, std::abs(v - x));
        return d;
    }

    /// Smooth part S f at the nodes: (h/2 pi i)[sum_{j != i} (f_j - f_i) z'_j/(z_j - z_i) + f'_i].
    /// For a counterclockwise curve the interior limit of the Cauchy integral is S f + f, the exterior limit S f,
    /// and the principal value S f + f/2.
    CVec smooth_part(const CVec& f) const {
        const std::size_t n = size();
        if (f.size() != n) throw std::invalid_argument("Curve: density size mismatch");
        const CVec df = spectral_derivative(f);
        CVec out(n);
        const cplx scale = h_ / cplx(0.0, 2.0 * std::numbers::pi);
        for (std::size_t i = 0; i < n; ++i) {
            cplx s = df[i];
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) s += (f[j] - f[i]) * dz_[j] / (z_[j] - z_[i]);
            out[i] = s * scale;
        }
        return out;
    }

    CVec plus_limit(const CVec& f) const {
        CVec s = smooth_part(f);
        for (std::size_t i = 0; i < s.size(); ++i) s[i] += f[i];
        return s;
    }
    CVec minus_limit(const CVec& f) const { return smooth_part(f); }
    CVec principal_value(const CVec& f) const {
        CVec s = smooth_part(f);
        for (std::size_t i = 0; i < s.size(); ++i) s[i] += 0.5 * f[i];
        return s;
    }

    /// Value at an interior point x of the analytic function with boundary values f.
    /// Barycentric form sum f q / sum q, q = z'/(z - x), stays accurate close to the curve and is orientation free.
    cplx interior_value(const CVec& f, cplx x) const {
        cplx num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < size(); ++j) {
            const cplx d = z_[j] - x;
            if (std::abs(d) == 0.0) return f[j];
            const cplx q = dz_[j] / d;
            num += f[j] * q;
            den += q;
        }
        return num / den;
    }

    /// Derivative at an interior point; subtracting the point value removes most of the cancellation.
    cplx interior_derivative(const CVec& f, cplx x) const {
        const cplx F = interior_value(f, x);
        cplx s = 0.0, w = 0.0;
        for (std::size_t j = 0; j < size(); ++j) {
            const cplx d = z_[j] - x;
            s += (f[j] - F) * dz_[j] / (d * d);
            w += dz_[j] / d;
        }
        // w * h/(2 pi i) is the orientation sign (+1 or -1) of the curve about x
        return s / w;
    }

    /// Plain Cauchy integral (1/2 pi i) * integral f(z)/(z - x) dz along the node order, for x off the curve.
    cplx cauchy_integral(const CVec& f, cplx x) const {
        cplx s = 0.0;
        for (std::size_t j = 0; j < size(); ++j) s += f[j] * dz_[j] / (z_[j] - x);
        return s * h_ / cplx(0.0, 2.0 * std::numbers::pi);
    }

    /// Cauchy integral at an exterior point with the density shifted by its nearest-node value;
    /// exact for constants and better conditioned near the curve.
    cplx exterior_cauchy(const CVec& f, cplx x) const {
        std::size_t k = 0;
        for (std::size_t j = 1; j < size(); ++j)
            if (std::abs(z_[j] - x) < std::abs(z_[k] - x)) k = j;
        cplx s = 0.0;
        for (std::size_t j = 0; j < size(); ++j) s += (f[j] - f[k]) * dz_[j] / (z_[j] - x);
        return s * h_ / cplx(0.0, 2.0 * std::numbers::pi);
    }

private:
    CVec z_, dz_;
    double h_ = 0.0;
};

enum class CauchySide { Interior, Exterior, OnContour };

struct CauchyValue {
    cplx value;
    bool ill_conditioned;  // target within half a grid step of the circle but side != OnContour
};

/// Cauchy integral of unit-circle data. Interior/exterior: value of (1/2 pi i) * integral f(s)/(s - z) ds.
/// OnContour: z must lie on the circle; returns the principal value, i.e. the average of the two Plemelj limits.
inline CauchyValue cauchy_boundary(const CVec& values, cplx z, CauchySide side) {
    const std::size_t n = values.size();
    const Curve c = Curve::unit_circle(n);
    const double half_step = std::numbers::pi / static_cast<double>(n);
    CauchyValue out{0.0, false};
    if (side == CauchySide::OnContour) {
        if (std::abs(std::abs(z) - 1.0) > 1e-12) throw std::invalid_argument("cauchy_boundary: point not on the unit circle");
        const double phi = std::arg(z) < 0 ? std::arg(z) + 2 * std::numbers::pi : std::arg(z);
        const CVec pv = c.principal_value(values);
        out.value = spectral_interpolate(pv, phi);
        return out;
    }
    out.ill_conditioned = std::abs(std::abs(z) - 1.0) < half_step;
    if (side == CauchySide::Interior) {
        if (std::abs(z) >= 1.0) throw std::invalid_argument("cauchy_boundary: interior point expected");
        out.value = c.interior_value(values, z);
    } else {
        if (std::abs(z) <= 1.0) throw std::invalid_argument("cauchy_boundary: exterior point expected");
        out.value = c.exterior_cauchy(values, z);
    }
    return out;
}

/// Plemelj limits at node k of unit-circle data: interior (plus) and exterior (minus).
inline std::pair<cplx, cplx> plemelj_limits(const CVec& values, std::size_t k) {
    const Curve c = Curve::unit_circle(values.size());
    const CVec s = c.smooth_part(values);
    return {s[k] + values[k], s[k]};
}

} // namespace retrial

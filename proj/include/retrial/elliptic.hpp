#pragma once
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/jacobi_elliptic.hpp>

#include "retrial/kernel.hpp"

namespace retrial {

struct EccentricityError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Jacobi sn at a complex argument, modulus k in [0,1), from real-argument values by the addition formula.
inline cplx jacobi_sn(cplx u, double k) {
    const double kp = std::sqrt(1.0 - k * k);
    double c, d, c1, d1;
    const double s = boost::math::jacobi_elliptic(k, u.real(), &c, &d);
    const double s1 = boost::math::jacobi_elliptic(kp, u.imag(), &c1, &d1);
    const double den = c1 * c1 + k * k * s * s * s1 * s1;
    return cplx(s * d1, c * d * s1 * c1) / den;
}

/// Squared modulus from the nome: 16 q prod ((1 + q^{2n})/(1 + q^{2n-1}))^8, truncated once factors are 1 to 1e-15.
inline std::pair<double, int> modulus_squared_from_nome(double q) {
    if (q < 0.0 || q >= 1.0) throw std::invalid_argument("nome must lie in [0,1)");
    double prod = 1.0;
    int n = 1;
    for (; n <= 200; ++n) {
        const double f = (1.0 + std::pow(q, 2 * n)) / (1.0 + std::pow(q, 2 * n - 1));
        prod *= std::pow(f, 8);
        if (std::abs(f - 1.0) < 1e-16) break;
    }
    return {16.0 * q * prod, n};
}

/// Complete elliptic integral of the first kind by adaptive Gauss-Kronrod on the sine-substituted integrand.
inline double complete_k(double k) {
    auto f = [k](double u) { return 1.0 / std::sqrt(1.0 - k * k * std::sin(u) * std::sin(u)); };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, std::numbers::pi / 2, 15, 1e-15);
}

/// Conformal map of the ellipse with semi-axes a > b (centred at `center`, axes along the real and imaginary
/// directions) onto the unit disk, eps(center) = 0, eps(center + a) = 1.
struct EllipticMap {
    double center = 0.0, a = 0.0, b = 0.0;
    double q = 0.0, k = 0.0, quarter_period = 0.0;
    int product_factors = 0;

    cplx operator()(cplx z) const {
        if (k == 0.0) return (z - center) / a;
        const double focal = std::sqrt(a * a - b * b);
        const cplx u = (2.0 * quarter_period / std::numbers::pi) * std::asin((z - center) / focal);
        return std::sqrt(k) * jacobi_sn(u, k);
    }
};

inline EllipticMap make_elliptic_map(double center, double a, double b) {
    if (!(b > 0.0)) throw EccentricityError("elliptic map: minor semi-axis must be positive");
    if (b > a) throw EccentricityError("elliptic map: semi-axis along the real direction must be the larger one");
    EllipticMap m;
    m.center = center;
    m.a = a;
    m.b = b;
    m.q = std::pow((a - b) / (a + b), 2);
    const auto [k2, factors] = modulus_squared_from_nome(m.q);
    m.k = std::sqrt(k2);
    m.product_factors = factors;
    m.quarter_period = complete_k(m.k);
    return m;
}

/// Ellipse fitted to a contour: centre at the midpoint of the real crossings, semi-axes from the real extent
/// and the largest imaginary excursion.
inline EllipticMap elliptic_map_for(const CVec& nodes) {
    const double x0 = spectral_interpolate(nodes, 0.0).real(), xpi = spectral_interpolate(nodes, std::numbers::pi).real();
    double b = 0.0;
    for (const auto& z : nodes) b = std::max(b, std::abs(z.imag()));
    const double a = 0.5 * std::abs(x0 - xpi);
    if (b >= a) throw EccentricityError("elliptic map: contour is not elongated along the real axis (rho(pi/2) >= rho(0))");
    return make_elliptic_map(0.5 * (x0 + xpi), a, b);
}

struct EllipticApprox {
    EllipticMap map1, map2;
};

inline EllipticApprox elliptic_approx_maps(const ContourSet& c) { return {elliptic_map_for(c.z1), elliptic_map_for(c.z2)}; }

/// Sup over the L1 nodes of |eps(z1_j) - w_j| against an exact boundary correspondence w.
inline double elliptic_deviation(const EllipticMap& m, const CVec& z1, const CVec& w) {
    double d = 0.0;
    for (std::size_t j = 0; j < z1.size(); ++j) d = std::max(d, std::abs(m(z1[j]) - w[j]));
    return d;
}

} // namespace retrial

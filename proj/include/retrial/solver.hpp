#pragma once
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "retrial/cauchy.hpp"
#include "retrial/kernel.hpp"

namespace retrial {

namespace detail {
constexpr double kNoDomainCheck = std::numeric_limits<double>::infinity();

inline cplx value_at_phi0(const CVec& f) { return spectral_interpolate(f, 0.0); }
inline cplx value_at_pi(const CVec& f) { return spectral_interpolate(f, std::numbers::pi); }
} // namespace detail

/// Where the origin sits relative to the two contours. Exactly one case occurs for a stable model:
/// on both contours (symmetric), inside L1+ only, or inside L2+ only.
enum class OriginLocation { OnContours, InsideL1, InsideL2 };

inline const char* to_string(OriginLocation o) {
    switch (o) {
    case OriginLocation::OnContours: return "on-contours";
    case OriginLocation::InsideL1: return "inside-L1";
    case OriginLocation::InsideL2: return "inside-L2";
    }
    return "?";
}

inline OriginLocation locate_origin(const ContourSet& c) {
    const double at_pi = std::abs(detail::value_at_pi(c.z1));
    if (at_pi < 1e-9) return OriginLocation::OnContours;
    if (winding_index(c.z1) == 1) return OriginLocation::InsideL1;
    if (winding_index(c.z2) == -1) return OriginLocation::InsideL2;
    throw NumericalError("locate_origin: origin is neither on nor inside the contours");
}

// ---------------------------------------------------------------- conformal maps

/// Common contour L (a curve w(phi), w(0) = 1) with the conformal maps f1 : L+ -> L1+, f2 : L- -> L2+.
/// Boundary correspondence is nodewise: f1(w_j) = z1_j and f2(w_j) = z2_j.
/// Normalization: f1(0) = p1, f2(infinity) = p2, with p_k the midpoint of the real crossings of L_k.
struct ConformalMaps {
    CVec w, dw;
    std::vector<double> psi;  // unwrapped arg w(phi_j): the circle angle attached to phi_j
    double p1 = 0.0, p2 = 0.0;
    int iterations = 0;
    double last_change = 0.0;
    double modulus_deviation = 0.0;  // max | |w| - 1 |, zero when L is the unit circle
    double d_const = 0.0;            // |f1'(0)|
    CVec chi1, chi2;                 // log((z1 - p1)/w), log((z2 - p2) w) on the nodes
    Curve curve;

    /// f1 at a point inside L.
    cplx f1(cplx x) const { return p1 + x * std::exp(curve.interior_value(chi1, x)); }

    /// f2 at a point outside L (|x| large allowed).
    cplx f2(cplx x) const {
        const cplx at_inf = curve.cauchy_integral(chi2, 0.0);
        const cplx chi = at_inf - curve.exterior_cauchy(chi2, x);
        return p2 + std::exp(chi) / x;
    }

    /// Inverse of f1 for z inside L1+, by Newton iteration.
    cplx w1(cplx z) const {
        cplx x = (z - p1) / std::exp(curve.interior_value(chi1, 0.0));
        for (int it = 0; it < 60; ++it) {
            const cplx fx = f1(x) - z;
            if (std::abs(fx) < 1e-14) return x;
            const cplx e = std::exp(curve.interior_value(chi1, x));
            const cplx d = e * (1.0 + x * curve.interior_derivative(chi1, x));
            cplx step = fx / d;
            while (std::abs(step) > 0.25) step *= 0.5;
            x -= step;
        }
        if (std::abs(f1(x) - z) > 1e-10) throw NumericalError("w1: Newton iteration did not converge");
        return x;
    }
};

/// Computes the common contour by fixed-point iteration on
///   w = exp( (log(z1 - p1) - log(z2 - p2))/2 - PV C_L[log(z1 - p1) + log(z2 - p2)] ),
/// renormalized to w(0) = 1 after each sweep. Damping starts at 1/2 and halves whenever the update grows.
inline ConformalMaps solve_psi(const ContourSet& c, double tol = 1e-13, int max_iter = 500) {
    const std::size_t n = c.size();
    ConformalMaps m;
    m.p1 = 0.5 * (detail::value_at_phi0(c.z1).real() + detail::value_at_pi(c.z1).real());
    m.p2 = 0.5 * (detail::value_at_phi0(c.z2).real() + detail::value_at_pi(c.z2).real());
    CVec s1(n), s2(n);
    for (std::size_t j = 0; j < n; ++j) {
        s1[j] = c.z1[j] - m.p1;
        s2[j] = c.z2[j] - m.p2;
    }
    const CVec l1 = continuous_log(s1), l2 = continuous_log(s2);
    CVec lam(n), half(n);
    for (std::size_t j = 0; j < n; ++j) {
        lam[j] = l1[j] + l2[j];
        half[j] = 0.5 * (l1[j] - l2[j]);
    }
    if (std::abs(lam[n - 1] - lam[0]) > 0.5)
        throw NumericalError("solve_psi: log(z1 - p1) + log(z2 - p2) is not periodic (contour windings do not cancel)");

    const auto g = offset_grid(n);
    CVec w(n);
    for (std::size_t j = 0; j < n; ++j) w[j] = std::exp(cplx(0.0, g[j]));
    double omega = 0.5, prev = std::numeric_limits<double>::infinity(), change = 0.0;
    int it = 0;
    for (; it < max_iter; ++it) {
        const Curve L(w);
        const CVec pv = L.principal_value(lam);
        CVec wn(n);
        for (std::size_t j = 0; j < n; ++j) wn[j] = std::exp(half[j] - pv[j]);
        const cplx norm = detail::value_at_phi0(wn);
        change = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            wn[j] /= norm;
            change = std::max(change, std::abs(wn[j] - w[j]));
        }
        if (change > prev) omega = std::max(omega / 2, 1.0 / 64);
        prev = change;
        for (std::size_t j = 0; j < n; ++j) w[j] += omega * (wn[j] - w[j]);
        const cplx renorm = detail::value_at_phi0(w);
        for (auto& v : w) v /= renorm;
        if (!std::isfinite(change)) throw NumericalError("solve_psi: iteration diverged");
        if (change < tol) break;
        // Once contracting, undamped steps converge fastest.
        if (change < 1e-3) omega = std::min(1.0, omega * 2);
    }
    if (change >= tol) throw NumericalError("solve_psi: no convergence after " + std::to_string(max_iter) + " iterations (change " +
                                            std::to_string(change) + ")");
    m.iterations = it + 1;
    m.last_change = change;
    m.w = w;
    m.curve = Curve(w);
    m.dw = m.curve.tangents();
    m.psi = unwrap_arg(w);
    for (const auto& v : w) m.modulus_deviation = std::max(m.modulus_deviation, std::abs(std::abs(v) - 1.0));
    CVec r1(n), r2(n);
    for (std::size_t j = 0; j < n; ++j) {
        r1[j] = s1[j] / w[j];
        r2[j] = s2[j] * w[j];
    }
    m.chi1 = continuous_log(r1);
    m.chi2 = continuous_log(r2);
    m.d_const = std::abs(std::exp(m.curve.interior_value(m.chi1, 0.0)));
    return m;
}

// ---------------------------------------------------------------- boundary functions

/// Pi(z1,0)/Pi(0,0) on the L1 nodes and Pi(0,z2)/Pi(0,0) on the L2 nodes, with the constants that follow from them.
class BoundarySolution {
public:
    ContourSet contours;
    CVec hat1, hat2;
    OriginLocation origin = OriginLocation::OnContours;
    double pi00 = 0.0, pi10 = 0.0, pi01 = 0.0;
    double ratio10 = 0.0, ratio01 = 0.0;  // Pi(1,0)/Pi(0,0), Pi(0,1)/Pi(0,0)
    std::array<double, 2> relation_residual{};
    std::string ratio_source;  // which of the two ratios came from the boundary data

    const SystemParams& params() const { return contours.params; }

    /// Pi(z,0)/Pi(0,0) (k = 1) or Pi(0,z)/Pi(0,0) (k = 2) at z in the closure of L_k+,
    /// or at real z between the phi = 0 crossing of L_k and 1 by analytic continuation through the kernel.
    cplx hat(int k, cplx z) const {
        const CVec& nodes = k == 1 ? contours.z1 : contours.z2;
        const CVec& f = k == 1 ? hat1 : hat2;
        const cplx at0 = detail::value_at_phi0(nodes);
        if (std::abs(z - at0) < 1e-12) return detail::value_at_phi0(f);
        if (std::abs(z - detail::value_at_pi(nodes)) < 1e-12) return detail::value_at_pi(f);
        const Curve& cv = curve(k);
        if (std::abs(cv.winding_about(z)) > 0.5) return cv.interior_value(f, z);
        if (std::abs(z.imag()) < 1e-14) return continue_real(k, z.real());
        throw DomainError("boundary function evaluated outside the closure of its contour interior");
    }

    cplx pi1(cplx z1) const { return pi00 * hat(1, z1); }
    cplx pi2(cplx z2) const { return pi00 * hat(2, z2); }

    bool inside_or_on(int k, cplx z) const {
        const CVec& nodes = k == 1 ? contours.z1 : contours.z2;
        if (std::abs(z - detail::value_at_phi0(nodes)) < 1e-9) return true;
        return std::abs(curve(k).winding_about(z)) > 0.5;
    }

    /// d/dz of Pi(z,0) (k = 1) or Pi(0,z) (k = 2) at z = 1, with an error estimate.
    std::pair<double, double> derivative_at_one(int k) const {
        const CVec& nodes = k == 1 ? contours.z1 : contours.z2;
        const CVec& f = k == 1 ? hat1 : hat2;
        const Curve& cv = curve(k);
        if (std::abs(detail::value_at_phi0(nodes) - 1.0) < 1e-9) {
            const cplx d = spectral_interpolate_derivative(f, 0.0) / spectral_interpolate_derivative(nodes, 0.0);
            return {pi00 * d.real(), 0.0};
        }
        if (std::abs(cv.winding_about(1.0)) > 0.5 && cv.distance_to(1.0) > 1e-3) return {pi00 * cv.interior_derivative(f, 1.0).real(), 0.0};
        // Backward differences from z = 1 along the real axis, two levels of Richardson extrapolation.
        const double r = k == 1 ? ratio10 : ratio01;
        const std::array<double, 3> hs{1e-2, 5e-3, 2.5e-3};
        std::array<double, 3> d{};
        for (int i = 0; i < 3; ++i) d[i] = (r - hat(k, 1.0 - hs[i]).real()) / hs[i];
        const double e1 = 2 * d[1] - d[0], e2 = 2 * d[2] - d[1];
        const double best = (4 * e2 - e1) / 3;
        return {pi00 * best, pi00 * std::abs(best - e2)};
    }

    const Curve& curve(int k) const {
        if (!curves_) curves_ = std::array<Curve, 2>{Curve(contours.z1, contours.dz1), Curve(contours.z2, contours.dz2)};
        return (*curves_)[k - 1];
    }

    /// Fixes Pi(0,0) from the two linear relations once the boundary data are known.
    void normalize() {
        origin = locate_origin(contours);
        const auto rel = boundary_relations(params());
        const bool have1 = inside_or_on(1, 1.0), have2 = inside_or_on(2, 1.0);
        if (have1 && have2) {
            ratio10 = hat(1, 1.0).real();
            ratio01 = hat(2, 1.0).real();
            double num = 0.0, den = 0.0;
            for (int i = 0; i < 2; ++i) {
                const double m = rel.a[i][0] * ratio10 + rel.a[i][1] * ratio01 + rel.a[i][2];
                num += m * rel.rhs[i];
                den += m * m;
            }
            pi00 = num / den;
            ratio_source = "both";
        } else if (have1 || have2) {
            const int k = have1 ? 1 : 2;
            const double r = hat(k, 1.0).real();
            // unknowns (Pi00, Pi_other); known column folds into the Pi00 coefficient
            const int known = k == 1 ? 0 : 1, other = k == 1 ? 1 : 0;
            Eigen::Matrix2d M;
            Eigen::Vector2d b;
            for (int i = 0; i < 2; ++i) {
                M(i, 0) = rel.a[i][known] * r + rel.a[i][2];
                M(i, 1) = rel.a[i][other];
                b(i) = rel.rhs[i];
            }
            const Eigen::Vector2d x = M.partialPivLu().solve(b);
            pi00 = x(0);
            (k == 1 ? ratio10 : ratio01) = r;
            (k == 1 ? ratio01 : ratio10) = x(1) / x(0);
            ratio_source = k == 1 ? "L1" : "L2";
        } else {
            throw NumericalError("normalize: z = 1 lies outside both contour interiors; Pi(1,0) and Pi(0,1) are not reachable");
        }
        pi10 = ratio10 * pi00;
        pi01 = ratio01 * pi00;
        relation_residual = boundary_relations_residual(params(), pi10, pi01, pi00);
        if (!(pi00 > 0.0) || !std::isfinite(pi00)) throw NumericalError("normalize: nonpositive Pi(0,0)");
    }

private:
    mutable std::optional<std::array<Curve, 2>> curves_;

    // Real analytic continuation: K(x, s) = 0 with s real inside the other contour gives
    // Pi_hat_1(x) = -(B Pi_hat_2(s) + C)/A (k = 1), and symmetrically for k = 2.
    cplx continue_real(int k, double x) const {
        if (std::abs(x - 1.0) < 1e-6) throw NumericalError("analytic continuation is degenerate at z = 1");
        const CVec& own = k == 1 ? contours.z1 : contours.z2;
        const CVec& oth = k == 1 ? contours.z2 : contours.z1;
        const double x0 = detail::value_at_phi0(own).real(), s0 = detail::value_at_phi0(oth).real();
        const SystemParams& p = params();
        auto kern = [&](double s) {
            const cplx a = k == 1 ? cplx(x) : cplx(s), b = k == 1 ? cplx(s) : cplx(x);
            return kernel_eval(p, a, b, detail::kNoDomainCheck);
        };
        double s = s0 + (x - x0) * (1.0 - s0) / (1.0 - x0);
        for (int it = 0; it < 60; ++it) {
            const double f = kern(s).value.real();
            const double hs = 1e-7 * std::max(1.0, std::abs(s));
            const double df = (kern(s + hs).value.real() - kern(s - hs).value.real()) / (2 * hs);
            const double step = f / df;
            s -= step;
            if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(s))) break;
        }
        const auto kp = kern(s);
        if (std::abs(kp.value) > 1e-11) throw NumericalError("analytic continuation: no real kernel zero found");
        const int other = k == 1 ? 2 : 1;
        if (!inside_or_on(other, s)) throw DomainError("analytic continuation: kernel zero lies outside the other contour");
        const cplx ho = hat(other, s);
        return k == 1 ? -(kp.B * ho + kp.C) / kp.A : -(kp.A * ho + kp.C) / kp.B;
    }
};

// ---------------------------------------------------------------- Riemann boundary value problem

struct BvpSolution : BoundarySolution {
    ConformalMaps maps;
    int chi = 0;
    CVec G, g;
    CVec gamma_plus, gamma_minus, psi_plus, psi_minus;
    cplx c0 = 0.0;
    std::string constant_source;

    /// Pi_hat1 at a point inside L (w-plane) and Pi_hat2 at a point outside L.
    cplx hat1_w(cplx x) const {
        const cplx gam = maps.curve.cauchy_integral(log_G_, x), ps = maps.curve.cauchy_integral(h_, x);
        return std::exp(gam) * (ps + c0);
    }
    cplx hat2_w(cplx x) const {
        const cplx gam = maps.curve.exterior_cauchy(log_G_, x), ps = maps.curve.exterior_cauchy(h_, x);
        return std::exp(gam) * (ps + c0);
    }

    CVec log_G_, h_;
};

/// Riemann problem Pi_hat1 = G Pi_hat2 + g on L (G = -B/A, g = -C/A) solved by Cauchy integrals.
/// Only index zero is supported: Pi_hat = 1 at the preimage of the origin then determines the single free constant.
inline BvpSolution riemann_solve(const ContourSet& c, const ConformalMaps& maps) {
    const std::size_t n = c.size();
    if (maps.w.size() != n) throw std::invalid_argument("riemann_solve: map and contour sizes differ");
    BvpSolution s;
    s.contours = c;
    s.maps = maps;
    s.G.resize(n);
    s.g.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const auto k = kernel_eval(c.params, c.z1[j], c.z2[j], detail::kNoDomainCheck);
        s.G[j] = -k.B / k.A;
        s.g[j] = -k.C / k.A;
    }
    s.chi = winding_index(s.G, 1e-14);
    if (s.chi != 0)
        throw NumericalError("riemann_solve: index of G is " + std::to_string(s.chi) +
                             "; only index 0 has a fully determined normalization");
    const Curve& L = maps.curve;
    s.log_G_ = continuous_log(s.G);
    s.gamma_plus = L.plus_limit(s.log_G_);
    s.gamma_minus = L.minus_limit(s.log_G_);
    s.h_.resize(n);
    for (std::size_t j = 0; j < n; ++j) s.h_[j] = s.g[j] * std::exp(-s.gamma_plus[j]);
    s.psi_plus = L.plus_limit(s.h_);
    s.psi_minus = L.minus_limit(s.h_);

    CVec ep(n), em(n), epp(n), emp(n);
    for (std::size_t j = 0; j < n; ++j) {
        ep[j] = std::exp(s.gamma_plus[j]);
        em[j] = std::exp(s.gamma_minus[j]);
        epp[j] = ep[j] * s.psi_plus[j];
        emp[j] = em[j] * s.psi_minus[j];
    }
    const OriginLocation origin = locate_origin(c);
    switch (origin) {
    case OriginLocation::InsideL2: {
        const Curve L2(c.z2, c.dz2);
        s.c0 = (1.0 - L2.interior_value(emp, 0.0)) / L2.interior_value(em, 0.0);
        s.constant_source = "origin inside L2";
        break;
    }
    case OriginLocation::InsideL1: {
        const Curve L1(c.z1, c.dz1);
        s.c0 = (1.0 - L1.interior_value(epp, 0.0)) / L1.interior_value(ep, 0.0);
        s.constant_source = "origin inside L1";
        break;
    }
    case OriginLocation::OnContours:
        s.c0 = std::exp(-detail::value_at_pi(s.gamma_plus)) - detail::value_at_pi(s.psi_plus);
        s.constant_source = "origin on contours";
        break;
    }
    s.hat1.resize(n);
    s.hat2.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        s.hat1[j] = ep[j] * (s.psi_plus[j] + s.c0);
        s.hat2[j] = em[j] * (s.psi_minus[j] + s.c0);
    }
    s.normalize();
    return s;
}

// ---------------------------------------------------------------- Fredholm route

struct FredholmSolution : BoundarySolution {
    CVec omega1, omega2;      // Pi_hat1 - 1 on L1, (Pi_hat2 - 1)/z2 on L2
    double condition = 0.0;   // 1-norm condition estimate of I - K
    int index_z1T = 0;        // winding of z1 T along L1
    double omega1_at_origin = 0.0;
};

/// Nystrom discretization of the second-kind equation for Omega1 = Pi_hat1 - 1 on L1.
/// Omega2 = T Omega1 + t then follows from the boundary relation, with
/// T = (At - z1)/(z1 (z2 - Bt)) and t = (beta3 - 1)/(z2 - Bt).
inline FredholmSolution fredholm_solve(const ContourSet& c) {
    const std::size_t n = c.size();
    const SystemParams& p = c.params;
    const double h = 2.0 * std::numbers::pi / static_cast<double>(n);
    const cplx scale = h / cplx(0.0, 2.0 * std::numbers::pi);
    CVec T(n), t(n), Tz(n);
    for (std::size_t j = 0; j < n; ++j) {
        const auto k = kernel_eval(p, c.z1[j], c.z2[j], detail::kNoDomainCheck);
        const cplx den = c.z2[j] - k.Bt;
        if (std::abs(den) < 1e-14) throw NumericalError("fredholm_solve: z2 - Bt vanishes on the contour");
        Tz[j] = (k.At - c.z1[j]) / den;
        T[j] = Tz[j] / c.z1[j];
        t[j] = (k.beta3 - 1.0) / den;
    }
    FredholmSolution s;
    s.contours = c;
    s.index_z1T = winding_index(Tz, 1e-14);
    // log-derivative of T through the smooth product z1 T
    const CVec dTz = spectral_derivative(Tz), dt = spectral_derivative(t);
    const CVec d2z1 = spectral_derivative(c.dz1), d2z2 = spectral_derivative(c.dz2);
    Eigen::MatrixXcd M(n, n);
    Eigen::VectorXcd f(n);
    for (std::size_t i = 0; i < n; ++i) {
        cplx force = dt[i];
        for (std::size_t j = 0; j < n; ++j) {
            cplx kij;
            if (i == j) {
                const cplx dlogT = dTz[i] / Tz[i] - c.dz1[i] / c.z1[i];
                kij = d2z1[i] / (2.0 * c.dz1[i]) - d2z2[i] / (2.0 * c.dz2[i]) - dlogT;
            } else {
                kij = c.dz1[j] / (c.z1[j] - c.z1[i]) - (T[j] / T[i]) * c.dz2[j] / (c.z2[j] - c.z2[i]);
                force += (t[j] - t[i]) * c.dz2[j] / (c.z2[j] - c.z2[i]);
            }
            kij -= c.dz1[j] / c.z1[j];
            M(i, j) = (i == j ? 1.0 : 0.0) - scale * kij;
        }
        f(i) = -scale * force / T[i];
    }
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
    const double rc = lu.rcond();
    s.condition = rc > 0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
    if (!(rc > 1e-14)) throw NumericalError("fredholm_solve: I - K is numerically singular");
    const Eigen::VectorXcd x = lu.solve(f);
    s.omega1.resize(n);
    s.omega2.resize(n);
    s.hat1.resize(n);
    s.hat2.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        s.omega1[j] = x(static_cast<Eigen::Index>(j));
        s.omega2[j] = (Tz[j] * s.omega1[j]) / c.z1[j] + t[j];
        s.hat1[j] = 1.0 + s.omega1[j];
        s.hat2[j] = 1.0 + c.z2[j] * s.omega2[j];
    }
    s.normalize();
    if (s.origin == OriginLocation::InsideL1) s.omega1_at_origin = std::abs(s.curve(1).interior_value(s.omega1, 0.0));
    else if (s.origin == OriginLocation::OnContours) s.omega1_at_origin = std::abs(detail::value_at_pi(s.omega1));
    return s;
}

enum class SolveMethod { Riemann, Fredholm };

// ---------------------------------------------------------------- derived quantities

/// Pi(z1,z2) from the functional equation.
inline cplx joint_pgf(const BoundarySolution& s, cplx z1, cplx z2) {
    const auto k = kernel_eval(s.params(), z1, z2, 1e-12);
    if (std::abs(k.value) < 1e-10) throw NumericalError("joint_pgf: kernel vanishes at the requested point");
    return (k.A * s.pi1(z1) + k.B * s.pi2(z2) + k.C * s.pi00) / k.value;
}

/// Pi(1,1) from the functional equation along the diagonal, where K vanishes at the end point:
/// Pi(1-h,1-h) at h = 4e-3, 2e-3, 1e-3 with quadratic Richardson extrapolation.
inline double reconstructed_total_mass(const BoundarySolution& s) {
    auto f = [&](double h) { return joint_pgf(s, 1.0 - h, 1.0 - h).real(); };
    return (8 * f(1e-3) - 6 * f(2e-3) + f(4e-3)) / 3;
}

/// First coefficients of Pi(z,0) (k = 1) or Pi(0,z) (k = 2), when the origin lies inside L_k+.
/// Trapezoid rule on a circle about 0 of half the distance to the contour; values there come from the interior formula,
/// which stays accurate when the origin is close to L_k.
inline std::vector<double> boundary_coefficients(const BoundarySolution& s, int k, std::size_t count) {
    const Curve& cv = s.curve(k);
    if (std::abs(cv.winding_about(0.0)) < 0.5) throw DomainError("boundary_coefficients: origin is not inside the contour");
    const CVec& f = k == 1 ? s.hat1 : s.hat2;
    const double r = 0.5 * cv.distance_to(0.0);
    const std::size_t m = 64;
    if (count > m / 2) throw std::invalid_argument("boundary_coefficients: at most 32 coefficients");
    CVec vals(m);
    for (std::size_t j = 0; j < m; ++j) vals[j] = cv.interior_value(f, r * std::exp(cplx(0.0, 2.0 * std::numbers::pi * j / m)));
    const CVec c = fft_forward(vals);
    std::vector<double> out(count);
    for (std::size_t q = 0; q < count; ++q) out[q] = (s.pi00 * c[q] / (static_cast<double>(m) * std::pow(r, static_cast<double>(q)))).real();
    return out;
}

/// First and second derivatives of K, A, B, C along z_dir at (1,1), the other variable held at 1.
struct CoefficientDerivatives {
    std::array<double, 4> d1{}, d2{};  // order K, A, B, C
};

inline CoefficientDerivatives coefficient_derivatives(const SystemParams& p, int dir) {
    double mu_min = std::numeric_limits<double>::infinity();
    for (const ServiceDist* b : {&p.b1, &p.b2, &p.b3})
        for (double r : b->rates()) mu_min = std::min(mu_min, r);
    const double rd = dir == 1 ? p.r1() : p.r2();
    const double radius = std::min(0.25, 0.25 * mu_min / (p.lambda() * rd));
    const int m = 64;
    CoefficientDerivatives out;
    for (int j = 0; j < m; ++j) {
        const double a = 2.0 * std::numbers::pi * j / m;
        const cplx e = std::exp(cplx(0.0, a));
        const cplx z = 1.0 + radius * e;
        const auto k = dir == 1 ? kernel_eval(p, z, 1.0, detail::kNoDomainCheck) : kernel_eval(p, 1.0, z, detail::kNoDomainCheck);
        const std::array<cplx, 4> v{k.value, k.A, k.B, k.C};
        for (int q = 0; q < 4; ++q) {
            out.d1[q] += (v[q] / e).real();
            out.d2[q] += (v[q] / (e * e)).real();
        }
    }
    for (int q = 0; q < 4; ++q) {
        out.d1[q] /= m * radius;
        out.d2[q] *= 2.0 / (m * radius * radius);
    }
    return out;
}

struct MeanOrbitSizes {
    double ex1 = 0.0, ex2 = 0.0;
    double dpi1 = 0.0, dpi2 = 0.0;          // d/dz Pi(z,0), d/dz Pi(0,z) at 1
    double dpi1_error = 0.0, dpi2_error = 0.0;
    double expected_delay = 0.0;            // (E X1 + E X2)/lambda
};

/// Second-order expansion of the functional equation at (1,1):
/// E(X1) = [A'' Pi(1,0) + 2 A' dPi(z,0)/dz + B'' Pi(0,1) + C'' Pi(0,0) - K''] / (2 K'), derivatives in z1 along z2 = 1.
inline MeanOrbitSizes mean_orbit_sizes(const BoundarySolution& s) {
    const SystemParams& p = s.params();
    MeanOrbitSizes r;
    std::tie(r.dpi1, r.dpi1_error) = s.derivative_at_one(1);
    std::tie(r.dpi2, r.dpi2_error) = s.derivative_at_one(2);
    const auto c1 = coefficient_derivatives(p, 1);
    r.ex1 = (c1.d2[1] * s.pi10 + 2 * c1.d1[1] * r.dpi1 + c1.d2[2] * s.pi01 + c1.d2[3] * s.pi00 - c1.d2[0]) / (2 * c1.d1[0]);
    const auto c2 = coefficient_derivatives(p, 2);
    r.ex2 = (c2.d2[1] * s.pi10 + c2.d2[2] * s.pi01 + 2 * c2.d1[2] * r.dpi2 + c2.d2[3] * s.pi00 - c2.d2[0]) / (2 * c2.d1[0]);
    r.expected_delay = (r.ex1 + r.ex2) / p.lambda();
    return r;
}

/// Readings of rho for the printed symmetric-regime mean formula.
enum class PrintedRho { RhoHat, HalfLambdaB, HalfLambdaBPlusB3 };

/// The W-coefficient expression for E(X1) as printed for the symmetric regimes, evaluated at given boundary values.
/// Kept for comparison only; mean_orbit_sizes is the reference.
inline double printed_mean_formula(const SystemParams& p, double pi10, double pi01, double pi00, double dpi1, PrintedRho reading) {
    if (!is_symmetric(classify(p))) throw std::invalid_argument("printed_mean_formula: symmetric regimes only");
    const double lam = p.lambda(), th = p.theta();
    const double b = p.b1.moment(1), b2 = p.b1.moment(2), b3 = p.b3.moment(1), b32 = p.b3.moment(2);
    double rho = 0.0;
    switch (reading) {
    case PrintedRho::RhoHat: rho = rho_hat(p, 1); break;
    case PrintedRho::HalfLambdaB: rho = lam * b / 2; break;
    case PrintedRho::HalfLambdaBPlusB3: rho = lam * (b + b3) / 2; break;
    }
    const double kh = -lam * (lam / 2 * (th * b2 + lam * b32) + th * b + 2 * lam * b3) / (2 * (lam + th));
    const double q = 2 * lam + th, one = 1 - rho;
    const double w0 = th * lam * (2 * b3 - b + lam / 2 * (b32 - b2)) / (q * one) - kh * (lam + th) / (one * one) * (1 + lam * (b3 - b)) / q;
    const double w1 = lam * (2 * lam * (b3 - b) - th * b + lam * lam / 2 * (b32 - b2)) / (q * one) -
                      kh * (lam + th) / (th * one * one) * (lam * lam * (b3 - b) - th) / q;
    const double w2 = lam * (2 * lam * b3 + th * b + lam * lam / 2 * (b32 - b2)) / (q * one) -
                      kh * (lam + th) / (one * one) * (th + lam * (2 + lam * (b3 - b))) / q;
    const double coef = th * (lam * lam * (b3 - b) - th) / (2 * (lam + th) * q);
    return w1 * pi10 + w2 * pi01 + w0 * pi00 + coef * dpi1;
}

} // namespace retrial

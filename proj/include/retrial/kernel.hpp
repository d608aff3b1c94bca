#pragma once
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "retrial/model.hpp"
#include "retrial/spectral.hpp"

namespace retrial {

struct RootError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One evaluation of the kernel and of the coefficient functions of the functional equation
///   K Pi(z1,z2) = A Pi(z1,0) + B Pi(0,z2) + C Pi(0,0).
struct KernelPoint {
    cplx z1, z2;
    cplx y;      // lambda (1 - r1 z1 - r2 z2)
    cplx value;  // K(z1, z2)
    cplx A, B, C;
    cplx Kt, At, Bt;  // the tilde parts
    cplx beta1, beta2, beta3;
};

inline KernelPoint kernel_eval(const SystemParams& p, cplx z1, cplx z2, double eps = 1e-6) {
    const double lam = p.lambda(), th = p.theta(), t1 = p.theta1, t2 = p.theta2;
    KernelPoint k;
    k.z1 = z1;
    k.z2 = z2;
    k.y = lam * (1.0 - p.r1() * z1 - p.r2() * z2);
    if (k.y.real() < -eps) throw DomainError("kernel_eval: Re(y) < 0, transform outside its domain");
    k.beta1 = p.b1.lst_unchecked(k.y);
    k.beta2 = p.b2.lst_unchecked(k.y);
    k.beta3 = p.b3.lst_unchecked(k.y);
    k.Kt = (t1 * z2 * k.beta1 + t2 * z1 * k.beta2 + lam * z1 * z2 * k.beta3) / (lam + th);
    k.At = (t1 * k.beta1 + lam * z1 * k.beta3) / (lam + t1);
    k.Bt = (t2 * k.beta2 + lam * z2 * k.beta3) / (lam + t2);
    k.value = z1 * z2 - k.Kt;
    k.A = z2 * k.At - k.Kt;
    k.B = z1 * k.Bt - k.Kt;
    k.C = k.Kt - z2 * k.At - z1 * k.Bt + z1 * z2 * k.beta3;
    return k;
}

enum class AuxPgf { BetaCheck, BetaHat, STilde1, STilde2, BetaTilde1, BetaTilde2 };

/// Auxiliary transforms at s = 0 (guarded against vanishing denominators).
inline cplx aux_pgf(const SystemParams& p, AuxPgf which, cplx z1, cplx z2) {
    const double lam = p.lambda(), th = p.theta(), t1 = p.theta1, t2 = p.theta2;
    const cplx y = lam * (1.0 - p.r1() * z1 - p.r2() * z2);
    const cplx b1 = p.b1.lst(y), b2 = p.b2.lst(y), b3 = p.b3.lst(y);
    cplx num, den;
    switch (which) {
    case AuxPgf::BetaCheck: num = th * b1; den = th + lam * (1.0 - b3); break;
    case AuxPgf::BetaHat: num = th * b1; den = 2.0 * (th / 2 + lam * (1.0 - b3)); break;
    case AuxPgf::STilde1: num = t1 * b1; den = t1 + t2 * (1.0 - b2) + lam * (1.0 - b3); break;
    case AuxPgf::STilde2: num = t2 * b2; den = t2 + t1 * (1.0 - b1) + lam * (1.0 - b3); break;
    case AuxPgf::BetaTilde1: num = t1 * b1; den = t1 + lam * (1.0 - b3); break;
    case AuxPgf::BetaTilde2: num = t2 * b2; den = t2 + lam * (1.0 - b3); break;
    }
    if (std::abs(den) < 1e-14) throw NumericalError("aux_pgf: singular transform (denominator below 1e-14)");
    return num / den;
}

namespace detail {
struct HalfWeights {
    double a1, a2, Delta;
};
// a_i = theta_i r_i beta_i(lambda(1-delta)) / Delta, the halves of w_i at phi where cos terms vanish.
inline HalfWeights half_weights(const SystemParams& p, double delta) {
    const double s = p.lambda() * (1.0 - delta);
    const double Delta = p.theta() + p.lambda() * (1.0 - p.b3.lst(s));
    return {p.theta1 * p.r1() * p.b1.lst(s) / Delta, p.theta2 * p.r2() * p.b2.lst(s) / Delta, Delta};
}
} // namespace detail

/// k(delta) = delta - (a1 + a2) - 2 cos(phi) sqrt(a1 a2); branch = -1 selects the negative square root.
inline double delta_equation(const SystemParams& p, double delta, double phi, int branch = 1) {
    const auto h = detail::half_weights(p, delta);
    return delta - (h.a1 + h.a2) - 2.0 * branch * std::cos(phi) * std::sqrt(h.a1 * h.a2);
}

/// Unique real zero of k in [0,1]; 256-point scan guards against multiple sign changes.
inline double delta_root(const SystemParams& p, double phi, int branch = 1) {
    p.require_two_class();
    auto k = [&](double d) { return delta_equation(p, d, phi, branch); };
    const int scan = 256;
    std::vector<double> vals(scan + 1);
    for (int i = 0; i <= scan; ++i) vals[i] = k(static_cast<double>(i) / scan);
    if (std::abs(vals[scan]) < 1e-15) return 1.0;
    if (std::abs(vals[0]) < 1e-15) return 0.0;
    int changes = 0, where = -1;
    for (int i = 0; i < scan; ++i)
        if ((vals[i] < 0) != (vals[i + 1] < 0)) {
            ++changes;
            where = i;
        }
    if (changes == 0) throw RootError("delta_root: no sign change of k(delta) on [0,1] at phi = " + std::to_string(phi));
    if (changes > 1) throw RootError("delta_root: multiple sign changes of k(delta) on [0,1] at phi = " + std::to_string(phi));
    double lo = static_cast<double>(where) / scan, hi = static_cast<double>(where + 1) / scan;
    std::uintmax_t iters = 200;
    auto tol = boost::math::tools::eps_tolerance<double>(52);
    auto r = boost::math::tools::toms748_solve(k, lo, hi, vals[where], vals[where + 1], tol, iters);
    double d = 0.5 * (r.first + r.second);
    // Newton polish with a central-difference slope
    for (int it = 0; it < 3; ++it) {
        const double f = k(d);
        if (f == 0.0) break;
        const double hstep = 1e-7;
        const double slope = (k(std::min(1.0, d + hstep)) - k(std::max(0.0, d - hstep))) / (std::min(1.0, d + hstep) - std::max(0.0, d - hstep));
        const double nd = d - f / slope;
        if (!(nd >= lo && nd <= hi) || std::abs(k(nd)) >= std::abs(f)) break;
        d = nd;
    }
    return d;
}

struct ContourNode {
    double delta;
    cplx w1, w2, z1, z2;
};

inline ContourNode contour_point(const SystemParams& p, double phi) {
    const double d = delta_root(p, phi);
    const auto h = detail::half_weights(p, d);
    const double g = std::sqrt(h.a1 * h.a2);
    ContourNode c;
    c.delta = d;
    c.w1 = 2.0 * h.a1 + 2.0 * std::exp(cplx(0.0, phi)) * g;
    c.w2 = 2.0 * h.a2 + 2.0 * std::exp(cplx(0.0, -phi)) * g;
    c.z1 = c.w1 / (2.0 * p.r1());
    c.z2 = c.w2 / (2.0 * p.r2());
    return c;
}

/// Discretized contours L1 (z1 nodes, counterclockwise in phi) and L2 (z2 nodes, clockwise in phi).
struct ContourSet {
    SystemParams params;
    RegimeTag regime = RegimeTag::Asymmetric;
    std::vector<double> phi, delta, rho1, rho2, u1, u2;
    CVec w1, w2, z1, z2;
    CVec dz1, dz2;  // d/dphi
    std::size_t size() const { return phi.size(); }
};

inline ContourSet build_contours(const SystemParams& p, std::size_t n) {
    p.require_two_class();
    if (n < 64 || (n & (n - 1)) != 0) throw std::invalid_argument("build_contours: n must be a power of two >= 64");
    ContourSet c;
    c.params = p;
    c.regime = classify(p);
    c.phi = offset_grid(n);
    c.delta.resize(n);
    c.w1.resize(n);
    c.w2.resize(n);
    c.z1.resize(n);
    c.z2.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        ContourNode node;
        try {
            node = contour_point(p, c.phi[j]);
        } catch (const RootError& e) {
            throw RootError(std::string(e.what()) + " (contour node " + std::to_string(j) + ")");
        }
        c.delta[j] = node.delta;
        c.w1[j] = node.w1;
        c.w2[j] = node.w2;
        c.z1[j] = node.z1;
        c.z2[j] = node.z2;
    }
    c.dz1 = spectral_derivative(c.z1);
    c.dz2 = spectral_derivative(c.z2);
    c.u1 = unwrap_arg(c.w1);
    c.u2 = unwrap_arg(c.w2);
    c.rho1.resize(n);
    c.rho2.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        c.rho1[j] = std::abs(c.w1[j]);
        c.rho2[j] = std::abs(c.w2[j]);
    }
    return c;
}

inline double max_kernel_residual(const ContourSet& c) {
    double m = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) m = std::max(m, std::abs(kernel_eval(c.params, c.z1[j], c.z2[j]).value));
    return m;
}

enum class PositionCase { BothOnUnit, Z1InZ2In, Z1InZ2Out, Z1InZ2On };

inline const char* to_string(PositionCase c) {
    switch (c) {
    case PositionCase::BothOnUnit: return "both-on-unit";
    case PositionCase::Z1InZ2In: return "z1-in-z2-in";
    case PositionCase::Z1InZ2Out: return "z1-in-z2-out";
    case PositionCase::Z1InZ2On: return "z1-in-z2-on";
    }
    return "?";
}

struct PositionReport {
    PositionCase position;
    bool relabeled;            // classes swapped to enforce theta2 r1 >= theta1 r2
    double z1_at_0, z2_at_0;   // contour points at phi = 0, in the (possibly relabeled) numbering
    double lhs;                // r1 theta2 / theta
    double rhs_printed;        // r2 c^2 / theta1_hat with the printed c
    double rhs_direct;         // same with c solved from z2(1) = 1
};

inline SystemParams swap_classes(const SystemParams& p) {
    SystemParams q = p;
    std::swap(q.lambda1, q.lambda2);
    std::swap(q.theta1, q.theta2);
    std::swap(q.b1, q.b2);
    return q;
}

/// Position of the phi = 0 contour points relative to the unit circle.
/// The decision uses z2 at phi = 0 directly; both forms of the threshold c are reported.
inline PositionReport classify_position(const SystemParams& p0, double tol = 1e-10) {
    p0.require_two_class();
    PositionReport r{};
    r.relabeled = p0.theta2 * p0.r1() < p0.theta1 * p0.r2();
    const SystemParams p = r.relabeled ? swap_classes(p0) : p0;
    const auto node = contour_point(p, 0.0);
    r.z1_at_0 = node.z1.real();
    r.z2_at_0 = node.z2.real();
    const double s = p.lambda() * (1.0 - node.delta);
    const auto h = detail::half_weights(p, node.delta);
    const double bhat = p.b1.lst(s) * p.b2.lst(s);
    const double th1 = p.theta1 / p.theta(), th2 = p.theta2 / p.theta();
    const double c_printed = (1.0 - th2 * p.b2.lst(s)) * h.Delta / std::sqrt(bhat);
    const double c_direct = (h.Delta / p.theta() - th2 * p.b2.lst(s)) / std::sqrt(bhat);
    r.lhs = p.r1() * th2;
    r.rhs_printed = p.r2() * c_printed * c_printed / th1;
    r.rhs_direct = p.r2() * c_direct * c_direct / th1;
    const bool balanced = std::abs(p.theta2 * p.r1() - p.theta1 * p.r2()) <= tol * std::max(p.theta2 * p.r1(), p.theta1 * p.r2());
    if (balanced) r.position = PositionCase::BothOnUnit;
    else if (std::abs(r.z2_at_0 - 1.0) <= tol) r.position = PositionCase::Z1InZ2On;
    else r.position = r.z2_at_0 > 1.0 ? PositionCase::Z1InZ2Out : PositionCase::Z1InZ2In;
    return r;
}

/// Hypotheses of the positive-index claim (with the printed threshold c), in the relabeled numbering.
struct IndexHypotheses {
    bool ordering, threshold, extra;
    bool all() const { return ordering && threshold && extra; }
};

inline IndexHypotheses index_hypotheses(const SystemParams& p) {
    IndexHypotheses out{};
    out.ordering = p.theta1 * p.r2() <= p.theta2 * p.r1();
    const auto pos = classify_position(p);
    out.threshold = !pos.relabeled && pos.lhs >= pos.rhs_printed;
    const auto node = contour_point(p, 0.0);
    const double s = p.lambda() * (1.0 - node.delta);
    const double Delta1 = p.theta1 + p.lambda() * (1.0 - p.b3.lst(s));
    const double bt1 = aux_pgf(p, AuxPgf::BetaTilde1, node.z1, node.z2).real();
    out.extra = p.theta2 * p.r1() * bt1 > Delta1 * p.r2() * p.b2.lst(s);
    return out;
}

} // namespace retrial

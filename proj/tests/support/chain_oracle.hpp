#pragma once
// Stationary law of the orbit sizes at departure epochs, from the embedded Markov chain truncated at M per orbit.
// Independent of the analytic code: it only uses the service laws through their arrival-count probabilities.
#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "retrial/model.hpp"

namespace oracle {

// P(n Poisson(lambda) arrivals during one service), n = 0..nmax.
inline std::vector<double> count_pmf(const retrial::ServiceDist& d, double lambda, int nmax) {
    using retrial::DistKind;
    std::vector<double> p(nmax + 1, 0.0);
    auto negbin = [&](int k, double mu, double weight) {
        const double q = mu / (mu + lambda);
        double t = std::pow(q, k);
        for (int n = 0; n <= nmax; ++n) {
            p[n] += weight * t;
            t *= (n + k) * (1.0 - q) / (n + 1);
        }
    };
    switch (d.kind()) {
    case DistKind::Exponential: negbin(1, d.rates()[0], 1.0); break;
    case DistKind::Erlang: negbin(d.shape(), d.rates()[0], 1.0); break;
    case DistKind::HyperExponential:
        for (std::size_t i = 0; i < d.rates().size(); ++i) negbin(1, d.rates()[i], d.probs()[i]);
        break;
    case DistKind::Deterministic: {
        const double a = lambda * d.value();
        double t = std::exp(-a);
        for (int n = 0; n <= nmax; ++n) {
            p[n] = t;
            t *= a / (n + 1);
        }
        break;
    }
    }
    return p;
}

struct ChainSolution {
    int M = 0;
    std::vector<double> pi;  // pi[m * M + l], m = class-1 orbit, l = class-2 orbit

    double at(int m, int l) const { return pi[static_cast<std::size_t>(m) * M + l]; }
    double p00() const { return at(0, 0); }
    double p_x2_zero() const {
        double s = 0;
        for (int m = 0; m < M; ++m) s += at(m, 0);
        return s;
    }
    double p_x1_zero() const {
        double s = 0;
        for (int l = 0; l < M; ++l) s += at(0, l);
        return s;
    }
    double mean1() const {
        double s = 0;
        for (int m = 0; m < M; ++m)
            for (int l = 0; l < M; ++l) s += m * at(m, l);
        return s;
    }
    double mean2() const {
        double s = 0;
        for (int m = 0; m < M; ++m)
            for (int l = 0; l < M; ++l) s += l * at(m, l);
        return s;
    }
    // sum_m m P(m, 0): derivative of Pi(z,0) at z = 1
    double dpi1_at_1() const {
        double s = 0;
        for (int m = 0; m < M; ++m) s += m * at(m, 0);
        return s;
    }
    // Pi(z1, z2) for real or complex arguments inside the unit bidisk
    retrial::cplx pgf(retrial::cplx z1, retrial::cplx z2) const {
        retrial::cplx s = 0, a = 1;
        for (int m = 0; m < M; ++m, a *= z1) {
            retrial::cplx b = 1;
            for (int l = 0; l < M; ++l, b *= z2) s += at(m, l) * a * b;
        }
        return s;
    }
    // mass on the truncation boundary, a measure of truncation error
    double edge_mass() const {
        double s = 0;
        for (int k = 0; k < M; ++k) s += at(M - 1, k) + at(k, M - 1);
        return s;
    }
};

inline ChainSolution solve_chain(const retrial::SystemParams& p, int M = 60, int nmax = 60) {
    const double lam = p.lambda(), r1 = p.lambda1 / lam, r2 = p.lambda2 / lam;
    // D[a][c]: a class-1 and c class-2 arrivals during a service of the given law
    auto split_counts = [&](const retrial::ServiceDist& d) {
        const auto pn = count_pmf(d, lam, nmax);
        std::vector<std::vector<double>> D(nmax + 1, std::vector<double>(nmax + 1, 0.0));
        for (int n = 0; n <= nmax; ++n) {
            double binom = 1.0;  // C(n, a)
            for (int a = 0; a <= n; ++a) {
                D[a][n - a] = pn[n] * binom * std::pow(r1, a) * std::pow(r2, n - a);
                binom = binom * (n - a) / (a + 1);
            }
        }
        return D;
    };
    const auto d1 = split_counts(p.b1), d2 = split_counts(p.b2), d3 = split_counts(p.b3);
    const int S = M * M;
    std::vector<Eigen::Triplet<double>> trips;
    auto idx = [M](int m, int l) { return m * M + l; };
    auto add = [&](int src, int m0, int l0, const std::vector<std::vector<double>>& D, double w) {
        for (int a = 0; a <= nmax; ++a)
            for (int c = 0; a + c <= nmax; ++c) {
                if (D[a][c] < 1e-18) continue;
                const int m = std::min(m0 + a, M - 1), l = std::min(l0 + c, M - 1);
                const int dst = idx(m, l);
                if (dst != 0) trips.emplace_back(dst, src, w * D[a][c]);
            }
    };
    for (int m = 0; m < M; ++m)
        for (int l = 0; l < M; ++l) {
            const int s = idx(m, l);
            const double den = lam + (m > 0 ? p.theta1 : 0.0) + (l > 0 ? p.theta2 : 0.0);
            if (m > 0) add(s, m - 1, l, d1, p.theta1 / den);
            if (l > 0) add(s, m, l - 1, d2, p.theta2 / den);
            add(s, m, l, d3, lam / den);
        }
    // (P - I) pi = 0 with row 0 replaced by the normalization
    for (int s = 1; s < S; ++s) trips.emplace_back(s, s, -1.0);
    for (int s = 0; s < S; ++s) trips.emplace_back(0, s, 1.0);
    Eigen::SparseMatrix<double> A(S, S);
    A.setFromTriplets(trips.begin(), trips.end());
    A.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(S);
    rhs[0] = 1.0;
    const Eigen::VectorXd x = lu.solve(rhs);
    ChainSolution out;
    out.M = M;
    out.pi.assign(x.data(), x.data() + S);
    return out;
}

} // namespace oracle

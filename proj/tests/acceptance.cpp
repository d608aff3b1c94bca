// Acceptance run: one PASS/FAIL line per criterion, details indented below it.
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "retrial/sim.hpp"
#include "retrial/solver.hpp"
#include "support/chain_oracle.hpp"

using namespace retrial;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    }
    void info(const std::string& what) { notes.push_back("info " + what); }
};

std::string f(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

std::string est(const Estimate& e) { return f(e.mean) + " +- " + f(e.ci_halfwidth, 3); }

SystemParams make(double l1, double l2, double t1, double t2, ServiceDist b1, ServiceDist b2, ServiceDist b3) {
    SystemParams p;
    p.lambda1 = l1;
    p.lambda2 = l2;
    p.theta1 = t1;
    p.theta2 = t2;
    p.b1 = std::move(b1);
    p.b2 = std::move(b2);
    p.b3 = std::move(b3);
    return p;
}

const SystemParams kSym = SystemParams::symmetric(1.0, 2.0, ServiceDist::erlang(2, 4.0), ServiceDist::erlang(2, 4.0));
const SystemParams kModSym = SystemParams::symmetric(1.0, 2.0, ServiceDist::erlang(2, 4.0), ServiceDist::exponential(3.0));
const SystemParams kAsym = make(0.6, 0.4, 1.5, 2.0, ServiceDist::exponential(3), ServiceDist::exponential(4), ServiceDist::erlang(2, 6));

SimConfig sim_config(const SystemParams& p, std::uint64_t measured, std::uint32_t reps, std::uint64_t seed) {
    SimConfig c;
    c.params = p;
    c.measured_departures = measured;
    c.replications = reps;
    c.seed = seed;
    return c;
}

// Shared by criteria 1 and 2.
struct SymmetricRun {
    SimEstimates est;
    double seconds = 0;
    oracle::ChainSolution chain;
};

const SymmetricRun& symmetric_run() {
    static const SymmetricRun r = [] {
        SymmetricRun s;
        const auto t0 = std::chrono::steady_clock::now();
        s.est = run(sim_config(kSym, 1'000'000, 30, 20240601));
        s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        s.chain = oracle::solve_chain(kSym);
        return s;
    }();
    return r;
}

Outcome criterion1() {
    Outcome o;
    const auto& r = symmetric_run();
    // Little's law on the exact chain: departure-epoch number in system over lambda
    const double target = (r.chain.mean1() + r.chain.mean2()) / kSym.lambda();
    const double closed = symmetric_expected_delay(kSym);
    o.check(std::abs(closed - target) < 1e-6, "closed form " + f(closed, 10) + " vs chain oracle " + f(target, 10));
    o.check(std::abs(closed - 3.625) < 1e-12, "closed form equals 3.625");
    const auto& d = r.est.mean_delay;
    o.check(d.brackets(closed), "simulated orbit delay " + est(d) + " brackets " + f(closed));
    o.check(std::abs(d.mean - closed) / closed < 0.01, "relative error " + f(std::abs(d.mean - closed) / closed, 3) + " < 1%");
    o.check(r.seconds < 60, "runtime " + f(r.seconds, 3) + " s for 30 x 10^6 departures");
    const auto& s = r.est.mean_sojourn;
    o.info("simulated sojourn (orbit delay plus service) " + est(s) + (s.brackets(closed) ? " brackets " : " misses ") + f(closed));
    return o;
}

Outcome criterion2() {
    Outcome o;
    const auto& r = symmetric_run();
    const double target = r.chain.mean1();
    o.check(std::abs(symmetric_mean_orbit(kSym) - target) < 1e-6, "closed form " + f(symmetric_mean_orbit(kSym), 10) + " vs chain " + f(target, 10));
    o.check(r.est.mean_orbit1_dep.brackets(target), "orbit 1 at departures " + est(r.est.mean_orbit1_dep) + " vs " + f(target));
    o.check(r.est.mean_orbit2_dep.brackets(target), "orbit 2 at departures " + est(r.est.mean_orbit2_dep) + " vs " + f(target));
    return o;
}

// Random parameter set whose max rho_hat equals `target`, found by scaling both arrival rates.
SystemParams random_params(RandomStream& rng, double target) {
    auto draw = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
    SystemParams p = make(draw(0.2, 1.0), draw(0.2, 1.0), draw(0.5, 3.0), draw(0.5, 3.0), ServiceDist::exponential(draw(1.0, 4.0)),
                          ServiceDist::erlang(2, draw(2.0, 8.0)), ServiceDist::exponential(draw(1.0, 4.0)));
    const double l1 = p.lambda1, l2 = p.lambda2;
    double lo = 1e-6, hi = 1.0;
    auto at = [&](double s) {
        SystemParams q = p;
        q.lambda1 = s * l1;
        q.lambda2 = s * l2;
        return q;
    };
    auto rmax = [&](double s) { return std::max(rho_hat(at(s), 1), rho_hat(at(s), 2)); };
    while (rmax(hi) < target) hi *= 2;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (rmax(mid) < target ? lo : hi) = mid;
    }
    return at(0.5 * (lo + hi));
}

Outcome criterion3() {
    Outcome o;
    RandomStream rng(777, 0);
    int up = 0, flat = 0;
    for (int i = 0; i < 10; ++i) {
        const double target = 1.05 + 0.45 * rng.uniform();
        const auto p = random_params(rng, target);
        const auto e = run(sim_config(p, 100'000, 4, 1000 + i));
        const bool ok = e.slope_total.mean > 0.0;
        up += ok;
        o.check(ok, "unstable rho_hat " + f(target, 4) + ": slope " + f(e.slope_total.mean, 4) + " per departure");
    }
    for (int i = 0; i < 10; ++i) {
        const double target = 0.5 + 0.45 * rng.uniform();
        const auto p = random_params(rng, target);
        const auto e = run(sim_config(p, 200'000, 10, 2000 + i));
        const bool ok = std::abs(e.slope_total.mean) < 10 * e.slope_total.std_error;
        flat += ok;
        o.check(ok, "stable rho_hat " + f(target, 4) + ": |slope| " + f(std::abs(e.slope_total.mean), 3) + " vs 10 SE " +
                        f(10 * e.slope_total.std_error, 3));
    }
    o.info(std::to_string(up) + "/10 unstable sets drift upward, " + std::to_string(flat) + "/10 stable sets are flat");
    return o;
}

Outcome criterion4() {
    Outcome o;
    for (const auto* p : {&kModSym, &kAsym}) {
        const auto c = build_contours(*p, 256);
        const double r = max_kernel_residual(c);
        o.check(r < 1e-10, std::string(to_string(c.regime)) + ": max |K| on 256 nodes = " + f(r, 3));
    }
    return o;
}

Outcome criterion5() {
    Outcome o;
    const SystemParams lemma = make(1.0611, 0.1018, 0.7994, 0.1911, ServiceDist::exponential(17.39), ServiceDist::exponential(6.930),
                                    ServiceDist::exponential(10.66));
    const auto hyp = index_hypotheses(lemma);
    o.info(std::string("hypotheses of the asymmetric case: ordering ") + (hyp.ordering ? "yes" : "no") + ", threshold " +
           (hyp.threshold ? "yes" : "no") + ", extra " + (hyp.extra ? "yes" : "no"));
    for (const auto* p : {&kModSym, &lemma}) {
        const auto c = build_contours(*p, 512);
        CVec G(c.size());
        for (std::size_t j = 0; j < c.size(); ++j) {
            const auto k = kernel_eval(*p, c.z1[j], c.z2[j], detail::kNoDomainCheck);
            G[j] = -k.B / k.A;
        }
        const int chi = winding_index(G, 1e-14);
        const std::string name = to_string(c.regime);
        o.check(chi == 1, name + ": index of G = " + std::to_string(chi) + ", expected 1");
        const auto maps = solve_psi(c);
        CVec s1(c.size()), s2(c.size());
        for (std::size_t j = 0; j < c.size(); ++j) {
            s1[j] = c.z1[j] - maps.p1;
            s2[j] = c.z2[j] - maps.p2;
        }
        const int wf1 = winding_index(s1), wf2 = winding_index(s2);
        o.check(wf1 == 1, name + ": winding of f1 along L = " + std::to_string(wf1));
        o.check(wf2 == -1, name + ": winding of f2 along L = " + std::to_string(wf2));
    }
    return o;
}

// Shared modified-symmetric simulation for criterion 6.
Outcome criterion6() {
    Outcome o;
    const auto c = build_contours(kModSym, 512);
    const auto s = riemann_solve(c, solve_psi(c));
    const double mass = reconstructed_total_mass(s);
    o.check(std::abs(mass - 1.0) < 1e-4, "reconstructed Pi(1,1) = " + f(mass, 12));
    o.check(std::abs(s.pi10 - s.pi01) < 1e-6, "Pi(1,0) - Pi(0,1) = " + f(s.pi10 - s.pi01, 3));
    const double res = symmetric_identity_residual(kModSym, s.pi10, s.pi00);
    o.check(std::abs(res) < 1e-6, "symmetric linear relation residual " + f(res, 3));
    const auto m = mean_orbit_sizes(s);
    const double printed = printed_mean_formula(kModSym, s.pi10, s.pi01, s.pi00, m.dpi1, PrintedRho::RhoHat);
    const auto e = run(sim_config(kModSym, 1'000'000, 30, 4242));
    o.check(e.mean_orbit1_dep.brackets(printed), "printed-coefficient E(X1) = " + f(printed) + " vs simulation " + est(e.mean_orbit1_dep));
    o.info("expansion of the functional equation gives E(X1) = " + f(m.ex1, 10) +
           (e.mean_orbit1_dep.brackets(m.ex1) ? ", bracketed by the simulation" : ", outside the simulation CI"));
    return o;
}

Outcome criterion7() {
    Outcome o;
    for (const auto* p : {&kModSym, &kAsym}) {
        const auto c = build_contours(*p, 512);
        const auto r = riemann_solve(c, solve_psi(c));
        const auto fr = fredholm_solve(c);
        double d = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j) d = std::max(d, std::abs(r.pi1(c.z1[j]) - fr.pi1(c.z1[j])));
        o.check(d < 1e-4, std::string(to_string(c.regime)) + ": sup |Pi1 riemann - Pi1 fredholm| on L1 = " + f(d, 3));
        const auto coarse = fredholm_solve(build_contours(*p, 256));
        const auto up = spectral_resample(coarse.hat1, 512);
        double dn = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j) dn = std::max(dn, std::abs(coarse.pi00 * up[j] - fr.pi00 * fr.hat1[j]));
        o.check(dn < 1e-5, std::string(to_string(c.regime)) + ": Nystrom change 256 -> 512 = " + f(dn, 3));
    }
    return o;
}

Outcome criterion8() {
    Outcome o;
    const std::size_t n = 1024;
    const auto g = offset_grid(n);
    auto sample = [&](const std::function<cplx(cplx)>& fn) {
        CVec v(n);
        for (std::size_t j = 0; j < n; ++j) v[j] = fn(std::exp(cplx(0.0, g[j])));
        return v;
    };
    const CVec one(n, 1.0);
    double e_const = std::abs(cauchy_boundary(one, cplx(0.3, -0.4), CauchySide::Interior).value - 1.0);
    e_const = std::max(e_const, std::abs(cauchy_boundary(one, cplx(1.7, 0.5), CauchySide::Exterior).value));
    o.check(e_const < 1e-6, "constant density: interior 1 and exterior 0, error " + f(e_const, 3));
    const auto fn = [](cplx z) { return std::exp(z) / (z - 3.0); };
    const auto fv = sample(fn);
    double e_int = 0.0;
    for (cplx x : {cplx(0.0), cplx(0.5, 0.5), cplx(-0.95, 0.0), cplx(0.1, 0.9)})
        e_int = std::max(e_int, std::abs(cauchy_boundary(fv, x, CauchySide::Interior).value - fn(x)));
    o.check(e_int < 1e-6, "interior reproduction of exp(z)/(z-3), error " + f(e_int, 3));
    const auto mixed = sample([](cplx z) { return std::exp(z) + 1.0 / (z - 0.4) + 0.3 * std::conj(z); });
    double e_jump = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto [plus, minus] = plemelj_limits(mixed, k);
        e_jump = std::max(e_jump, std::abs(plus - minus - mixed[k]));
    }
    o.check(e_jump < 1e-6, "Plemelj jump recovery on all 1024 nodes, error " + f(e_jump, 3));
    return o;
}

Outcome criterion9() {
    Outcome o;
    std::vector<double> lams, thetas, mus;
    for (int i = 0; i < 10; ++i) lams.push_back(0.1 + 0.1 * i);
    for (int i = 0; i < 11; ++i) thetas.push_back(1.0 + 0.5 * i);
    for (int i = 0; i < 7; ++i) mus.push_back(2.0 + i);
    auto ed = [](double l, double t, double mu) {
        const auto b = ServiceDist::erlang(2, mu);
        const auto p = SystemParams::symmetric(l, t, b, b);
        if (!is_stable(p)) return std::numeric_limits<double>::quiet_NaN();
        try {
            return symmetric_expected_delay(p);
        } catch (const InstabilityError&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    int lines = 0, bad = 0, cells = 0;
    auto scan = [&](const std::vector<double>& vals, int sign) {
        ++lines;
        double prev = std::numeric_limits<double>::quiet_NaN();
        for (double v : vals) {
            if (std::isnan(v)) continue;
            ++cells;
            if (!std::isnan(prev) && !(sign * (v - prev) > 0)) ++bad;
            prev = v;
        }
    };
    for (double t : thetas)
        for (double mu : mus) {
            std::vector<double> v;
            for (double l : lams) v.push_back(ed(l, t, mu));
            scan(v, +1);
        }
    for (double l : lams)
        for (double mu : mus) {
            std::vector<double> v;
            for (double t : thetas) v.push_back(ed(l, t, mu));
            scan(v, -1);
        }
    for (double l : lams)
        for (double t : thetas) {
            std::vector<double> v;
            for (double mu : mus) v.push_back(ed(l, t, mu));
            scan(v, -1);
        }
    o.check(bad == 0, std::to_string(lines) + " grid lines, " + std::to_string(bad) + " monotonicity violations (" + std::to_string(cells) +
                           " stable cells visited)");
    return o;
}

Outcome criterion10() {
    Outcome o;
    const std::vector<SystemParams> sets{
        kSym,
        kModSym,
        kAsym,
        make(0.3, 0.5, 1.0, 2.5, ServiceDist::deterministic(0.5), ServiceDist::hyperexponential({0.4, 0.6}, {2.0, 5.0}), ServiceDist::exponential(2)),
        make(0.4, 0.3, 2.0, 1.0, ServiceDist::exponential(2.0), ServiceDist::erlang(2, 5.0), ServiceDist::deterministic(0.3)),
    };
    for (std::size_t i = 0; i < sets.size(); ++i) {
        const auto e = retrial_success_pgf_check(sim_config(sets[i], 1'000'000, 10, 31 + i));
        const double r = rho_hat(sets[i], 1);
        o.check(e.brackets(r), std::string(to_string(classify(sets[i]))) + ": estimate " + est(e) + " vs rho_hat1 " + f(r));
    }
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, Outcome (*)()>> all{
        {"symmetric closed form vs simulation", criterion1},
        {"mean orbit identity", criterion2},
        {"stability boundary", criterion3},
        {"kernel zero residual", criterion4},
        {"index reproduction", criterion5},
        {"boundary solution consistency", criterion6},
        {"method cross-agreement", criterion7},
        {"Cauchy machinery", criterion8},
        {"closed-form sweep monotonicity", criterion9},
        {"retrial-success transform sanity", criterion10},
    };
    int failed = 0;
    for (std::size_t i = 0; i < all.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = all[i].second();
        } catch (const std::exception& e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << (i + 1) << ": " << all[i].first << " (" << f(sec, 3) << " s)\n";
        for (const auto& n : o.notes) std::cout << "    " << n << '\n';
        std::cout.flush();
    }
    std::cout << (all.size() - failed) << "/" << all.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}

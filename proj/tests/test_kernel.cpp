#include <catch_amalgamated.hpp>

#include "retrial/kernel.hpp"
#include "support/chain_oracle.hpp"

using namespace retrial;
using Catch::Approx;

namespace {
SystemParams asym() {
    SystemParams p;
    p.lambda1 = 0.3;
    p.lambda2 = 0.2;
    p.theta1 = 2.5;
    p.theta2 = 1.5;
    p.b1 = ServiceDist::exponential(2.0);
    p.b2 = ServiceDist::erlang(2, 3.0);
    p.b3 = ServiceDist::exponential(1.5);
    return p;
}
SystemParams modsym() { return SystemParams::symmetric(1, 2, ServiceDist::erlang(2, 4), ServiceDist::exponential(3)); }
} // namespace

TEST_CASE("Functional equation holds for the exact chain PGF") {
    for (const auto& p : {asym(), modsym()}) {
        const auto ch = oracle::solve_chain(p, 50, 50);
        for (cplx z1 : {cplx(0.3, 0.2), cplx(-0.5, 0.1), cplx(0.8, 0.0)})
            for (cplx z2 : {cplx(0.1, -0.4), cplx(0.6, 0.3), cplx(0.0, 0.0)}) {
                const auto k = kernel_eval(p, z1, z2);
                const cplx lhs = k.value * ch.pgf(z1, z2);
                const cplx rhs = k.A * ch.pgf(z1, 0.0) + k.B * ch.pgf(0.0, z2) + k.C * ch.p00();
                CHECK(std::abs(lhs - rhs) < 1e-9);
            }
    }
}

TEST_CASE("Kernel vanishes at (1,1) and rejects y outside the transform domain") {
    CHECK(std::abs(kernel_eval(asym(), 1.0, 1.0).value) < 1e-15);
    CHECK_THROWS_AS(kernel_eval(asym(), 3.0, 3.0), DomainError);
}

TEST_CASE("Auxiliary transforms are PGFs: one at (1,1), and s-tilde derivatives give rho_hat") {
    const auto p = asym();
    for (auto w : {AuxPgf::BetaCheck, AuxPgf::STilde1, AuxPgf::STilde2, AuxPgf::BetaTilde1, AuxPgf::BetaTilde2})
        CHECK(std::abs(aux_pgf(p, w, 1.0, 1.0) - 1.0) < 1e-14);
    const double h = 1e-5;
    const double d1 = (aux_pgf(p, AuxPgf::STilde1, 1.0, 1.0) - aux_pgf(p, AuxPgf::STilde1, 1.0 - h, 1.0)).real() / h;
    const double d2 = (aux_pgf(p, AuxPgf::STilde2, 1.0, 1.0) - aux_pgf(p, AuxPgf::STilde2, 1.0, 1.0 - h)).real() / h;
    CHECK(d1 == Approx(rho_hat(p, 1)).epsilon(1e-4));
    CHECK(d2 == Approx(rho_hat(p, 2)).epsilon(1e-4));
}

TEST_CASE("Contour nodes are kernel zeros in every regime") {
    const auto e = ServiceDist::erlang(2, 4);
    for (const auto& p : {asym(), modsym(), SystemParams::symmetric(1, 2, e, e)}) {
        const auto c = build_contours(p, 256);
        CHECK(max_kernel_residual(c) < 1e-12);
        for (double d : c.delta) {
            CHECK(d >= 0.0);
            CHECK(d <= 1.0);
        }
        // L1 runs counterclockwise around its interior, L2 clockwise
        CHECK(winding_index(c.z1, 0.0) >= 0);
    }
}

TEST_CASE("Symmetric contours mirror each other and pass through 0 and 1") {
    const auto c = build_contours(modsym(), 128);
    for (std::size_t j = 0; j < c.size(); ++j) CHECK(std::abs(c.z2[j] - std::conj(c.z1[j])) < 1e-12);
    CHECK(std::abs(spectral_interpolate(c.z1, 0.0) - 1.0) < 1e-10);
    CHECK(std::abs(spectral_interpolate(c.z1, std::numbers::pi)) < 1e-9);
}

TEST_CASE("Contour grid validation") {
    CHECK_THROWS_AS(build_contours(asym(), 100), std::invalid_argument);
    CHECK_THROWS_AS(build_contours(asym(), 32), std::invalid_argument);
}

TEST_CASE("Position classification") {
    CHECK(classify_position(modsym()).position == PositionCase::BothOnUnit);
    const auto r = classify_position(asym());
    CHECK(r.position == PositionCase::Z1InZ2Out);
    CHECK(r.relabeled);
    // contour crossings at phi = 0 in the relabeled numbering
    CHECK(r.z1_at_0 < 1.0);
    CHECK(r.z2_at_0 > 1.0);
    const auto s = swap_classes(asym());
    CHECK(s.lambda1 == 0.2);
    CHECK(s.b1.equals(ServiceDist::erlang(2, 3.0)));
}

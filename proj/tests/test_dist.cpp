#include <catch_amalgamated.hpp>

#include <numeric>

#include "retrial/dist.hpp"
#include "support/lst_oracle.hpp"

using namespace retrial;
using Catch::Approx;

TEST_CASE("LST at zero is one for every law") {
    for (const auto& d : {ServiceDist::exponential(2.0), ServiceDist::erlang(3, 5.0), ServiceDist::deterministic(0.7),
                          ServiceDist::hyperexponential({0.3, 0.7}, {1.0, 4.0})})
        CHECK(std::abs(d.lst(cplx(0.0)) - 1.0) < 1e-15);
}

TEST_CASE("Erlang LST and moments agree with quadrature of the density") {
    for (int k : {1, 2, 4})
        for (double mu : {0.5, 4.0}) {
            const auto d = k == 1 ? ServiceDist::exponential(mu) : ServiceDist::erlang(k, mu);
            for (cplx s : {cplx(0.3, 0.0), cplx(1.0, 2.0), cplx(0.0, 5.0), cplx(2.5, -1.0)})
                CHECK(std::abs(d.lst(s) - oracle::erlang_lst_quadrature(k, mu, s)) < 1e-10);
            CHECK(d.moment(1) == Approx(oracle::erlang_moment_quadrature(k, mu, 1)).epsilon(1e-10));
            CHECK(d.moment(2) == Approx(oracle::erlang_moment_quadrature(k, mu, 2)).epsilon(1e-10));
        }
}

TEST_CASE("Mean equals minus the LST derivative at zero") {
    const double h = 1e-5;
    for (const auto& d : {ServiceDist::exponential(3.0), ServiceDist::erlang(2, 4.0), ServiceDist::deterministic(1.3),
                          ServiceDist::hyperexponential({0.5, 0.5}, {1.0, 3.0})}) {
        const double fd = -(4 * d.lst(h) - d.lst(2 * h) - 3.0) / (2 * h);
        CHECK(fd == Approx(d.moment(1)).epsilon(1e-7));
    }
}

TEST_CASE("LST rejects the left half plane") {
    CHECK_THROWS_AS(ServiceDist::exponential(1.0).lst(cplx(-0.1, 0.0)), DomainError);
    CHECK_NOTHROW(ServiceDist::exponential(1.0).lst_unchecked(cplx(-0.1, 0.0)));
}

TEST_CASE("Constructors validate their parameters") {
    CHECK_THROWS(ServiceDist::exponential(0.0));
    CHECK_THROWS(ServiceDist::exponential(-1.0));
    CHECK_THROWS(ServiceDist::erlang(0, 1.0));
    CHECK_THROWS(ServiceDist::deterministic(-1.0));
    CHECK_THROWS(ServiceDist::hyperexponential({0.5, 0.6}, {1.0, 2.0}));
    CHECK_THROWS(ServiceDist::hyperexponential({0.5}, {1.0, 2.0}));
}

TEST_CASE("Parsing round-trips through to_string") {
    for (const std::string s : {"exp:2.5", "erlang:3:4", "det:0.25", "hyper:0.25,1;0.75,3"}) {
        const auto d = parse_dist(s);
        CHECK(parse_dist(d.to_string()).equals(d));
    }
    CHECK(parse_dist("erlang:2:4").equals(ServiceDist::erlang(2, 4.0)));
    CHECK_THROWS(parse_dist("gamma:2"));
    CHECK_THROWS(parse_dist("exp:abc"));
    CHECK_THROWS(parse_dist("erlang:2.5:1"));
}

TEST_CASE("Sample means match moments") {
    for (const auto& d : {ServiceDist::exponential(2.0), ServiceDist::erlang(2, 4.0), ServiceDist::deterministic(0.4),
                          ServiceDist::hyperexponential({0.2, 0.8}, {0.5, 5.0})}) {
        RandomStream rng(7, 0);
        const int n = 200000;
        double s = 0, s2 = 0;
        for (int i = 0; i < n; ++i) {
            const double x = d.sample(rng);
            s += x;
            s2 += x * x;
        }
        const double mean = s / n, var = s2 / n - mean * mean;
        CHECK(std::abs(mean - d.moment(1)) <= 5 * std::sqrt(std::max(var, 1e-30) / n) + 1e-12);
    }
}

TEST_CASE("Random streams are reproducible and distinct") {
    RandomStream a(42, 3), b(42, 3), c(42, 4);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const double x = a.uniform();
        CHECK(x == b.uniform());
        CHECK(x > 0.0);
        CHECK(x < 1.0);
        differs = differs || x != c.uniform();
    }
    CHECK(differs);
}

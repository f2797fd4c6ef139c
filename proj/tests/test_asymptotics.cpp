#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "ptm/asymptotics.hpp"
#include "ptm/perturbation.hpp"

using namespace ptm;

TEST_CASE("delta-limit constants match their gamma-function identities") {
    const auto c = delta_limit_constants();
    CHECK(std::abs(c.gamma - c.gamma_identity) < 1e-8);
    CHECK(std::abs(c.gamma_prime - c.gamma_prime_identity) < 1e-8);
    CHECK(c.gamma_identity == doctest::Approx(2 * std::tgamma(1.25)));
    CHECK(c.gamma_prime_identity == doctest::Approx(2 * std::tgamma(4.0 / 3) * std::cos(M_PI / 6)));
}

TEST_CASE("first-order coefficient is antisymmetric and T-free") {
    const auto sys = fixtures::benchmark();
    const auto p = fixtures::params(1e4);
    CHECK(K1(0, sys, p) == doctest::Approx(-K1(1, sys, p)));
    const auto s1 = coefficients_AbBb(sys, p, 1.0), s2 = coefficients_AbBb(sys, p, 2.0);
    CHECK(s1.A1[1] == doctest::Approx(s2.A1[1]).epsilon(1e-14));
    CHECK(s1.A1.sum() == doctest::Approx(0.0));
}

TEST_CASE("first-order coefficient is the large-N limit of N J1") {
    auto p = fixtures::params(1e5);
    for (auto sys : {fixtures::benchmark(), fixtures::three_channel()})
        for (int b = 0; b < sys.d(); ++b) {
            const double lim = K1(b, sys, p);
            const double nj = p.N * J1_weight(b, 1.0, sys, p);
            CHECK(std::abs(nj - lim) < 0.01 * std::abs(lim) + 1e-3);
        }
}

TEST_CASE("diagonal second-order coefficient is the large-N limit") {
    const auto sys = fixtures::three_channel();
    const auto p = fixtures::params(1e5);
    const auto lim = second_order_limit(sys, p, 1.0);
    const auto v = J2_1_decomposition(1.0, sys, p);
    for (int b = 0; b < 3; ++b) {
        CHECK(lim.diagonal(b) == doctest::Approx(K2_diag(b, sys, p)).epsilon(1e-12));
        CHECK(p.N * v.diagonal(b) == doctest::Approx(lim.diagonal(b)).epsilon(0.01));
    }
}

TEST_CASE("one-sided ridge form tracks the finite-N off-diagonal part") {
    const auto sys = fixtures::three_channel();
    const auto p = fixtures::params(1e5);
    const auto lim = second_order_limit(sys, p, 1.0, nullptr, RidgeForm::one_sided);
    const auto v = J2_1_decomposition(1.0, sys, p);
    const double scale = std::pow(p.N, 4.0 / 3);
    CHECK(scale * v.offdiagonal(0) == doctest::Approx(lim.offdiagonal(0)).epsilon(1e-3));
    CHECK(scale * v.offdiagonal(2) == doctest::Approx(lim.offdiagonal(2)).epsilon(1e-3));
    CHECK(lim.offdiagonal(0) == doctest::Approx(-0.0837494).epsilon(1e-5));
    CHECK(lim.offdiagonal(1) == 0.0);
}

TEST_CASE("zero channel force is rejected by the quartic limit") {
    auto sys = fixtures::three_channel();
    sys.lambdas << 2, 0, -1;
    CHECK_THROWS_AS(K2_diag(0, sys, fixtures::params(1e4)), std::domain_error);
}

TEST_CASE("cubic coefficient vanishes for equal outer forces") {
    CHECK(cubic_coefficient(1.0, 1.0, -1.0, 1.0) == 0.0);
    CHECK(cubic_coefficient(2.0, 1.0, -1.0, 1.0) == doctest::Approx(-cubic_coefficient(1.0, 2.0, -1.0, 1.0)));
}

TEST_CASE("detector estimates in cgs units") {
    ModelParams cgs;
    cgs.hbar = 1.0546e-27;
    cgs.m = 9.1e-28;
    cgs.Delta = 1e-3;
    cgs.units = UnitSystem::cgs;
    const auto e = detector_estimates(cgs, 1e-7, 1.6e-12);
    CHECK(e.kinetic_energy == doctest::Approx(1.0546e-27 * 1.0546e-27 / (9.1e-28 * 1e-14)));
    CHECK(e.first_order == doctest::Approx(1e-4));
    CHECK(e.second_order == doctest::Approx(0.036182).epsilon(1e-4));
    CHECK(e.cubic_order == doctest::Approx(2.3568e-4).epsilon(1e-4));
    CHECK(e.min_time == doctest::Approx(3.37268e-13).epsilon(1e-4));
}

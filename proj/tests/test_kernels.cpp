#include "doctest.h"

#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "ptm/kernels.hpp"

using namespace ptm;

TEST_CASE("displacements agree with classical motion from rest") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int i = 0; i < 50; ++i) {
        const double fa = u(rng), fb = u(rng), T = 1 + 0.5 * u(rng), s = T * (0.5 + 0.2 * u(rng)), m = 1.3;
        const auto tr = classical_trajectory(ForceSchedule::two_segment(fa, fb, T, s), m, 0.0, 0.0);
        CHECK(tr.final_position() == doctest::Approx(xi_two_segment(fa, fb, T, s, m)).epsilon(1e-13));
        CHECK(tr.final_velocity() == doctest::Approx((fa * s + fb * (T - s)) / m).epsilon(1e-13));
    }
    CHECK(xi_two_segment(0.7, 0.7, 2.0, 0.6, 1.0) == doctest::Approx(xi_const(0.7, 2.0, 1.0)));
}

TEST_CASE("two-segment action decomposes into gaussian, linear and constant parts") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 50; ++i) {
        const double fa = 2 * u(rng), fb = 2 * u(rng), T = 1.1 + 0.9 * u(rng), s = T * (0.5 + 0.3 * u(rng));
        const double m = 0.8, X = u(rng), Y = u(rng);
        const auto qp = qp_coefficients(fa, fb, T, s, m);
        const double r = X - Y - xi_two_segment(fa, fb, T, s, m);
        const double S = m * r * r / (2 * T) + X * qp.Q + qp.P;
        const double path = classical_path(ForceSchedule::two_segment(fa, fb, T, s), m, Y, X).action();
        CHECK(std::abs(S - path) < 1e-12 * std::max(1.0, std::abs(path)));
    }
}

TEST_CASE("constant-force action and its split") {
    const double X = 0.3, Y = -0.2, T = 1.7, f = 0.9, m = 1.2;
    const double S = m * (X - Y) * (X - Y) / (2 * T) + f * (X + Y) * T / 2 - f * f * T * T * T / (24 * m);
    CHECK(action_const_force(X, Y, T, f, m) == doctest::Approx(S).epsilon(1e-14));
    const auto sp = action_split(X, Y, T, f, m);
    CHECK(sp.gaussian + sp.remainder == doctest::Approx(S).epsilon(1e-14));
    const double r = X - Y - xi_const(f, T, m);
    CHECK(sp.gaussian == doctest::Approx(m * r * r / (2 * T)).epsilon(1e-14));
}

TEST_CASE("split points outside the interval are rejected") {
    CHECK_THROWS_AS(xi_two_segment(1.0, 1.0, 1.0, 1.5, 1.0), std::domain_error);
    CHECK_THROWS_AS(qp_coefficients(1.0, 1.0, 1.0, -0.1, 1.0), std::domain_error);
}

TEST_CASE("constant-force kernels form a semigroup") {
    const auto p = fixtures::params(50);
    for (double s : {0.2, 0.5, 1.1}) {
        const auto whole = kernel_exponent_const(1.5, 0.7, p);
        const auto composed = compose(kernel_exponent_const(1.5 - s, 0.7, p), kernel_exponent_const(s, 0.7, p));
        for (double X : {-0.1, 0.8})
            for (double Y : {0.0, 0.3}) CHECK(std::abs(composed(X, Y) - whole(X, Y)) < 1e-10 * std::abs(whole(X, Y)));
    }
}

TEST_CASE("closed-form kernel values agree with the quadratic exponent") {
    const auto p = fixtures::params(20);
    const auto k = kernel_const_force(0.4, -0.1, 1.3, 0.6, p);
    CHECK(std::abs(k.value - kernel_exponent_const(1.3, 0.6, p)(0.4, -0.1)) < 1e-12 * std::abs(k.value));
    CHECK(std::abs(k.value) == doctest::Approx(std::abs(kernel_prefactor(1.3, p))).epsilon(1e-13));

    ForceSchedule three({{0.3, 1.0}, {0.5, -0.5}, {0.4, 2.0}});
    const auto v = kernel_schedule(0.2, 0.1, three, p);
    const auto c = compose(kernel_exponent_const(0.4, 2.0, p),
                           compose(kernel_exponent_const(0.5, -0.5, p), kernel_exponent_const(0.3, 1.0, p)));
    CHECK(std::abs(v.value - c(0.2, 0.1)) < 1e-10 * std::abs(v.value));
}

TEST_CASE("delta limit follows the classical trajectory from rest") {
    const auto p = fixtures::params(1e4);
    const auto sched = ForceSchedule::two_segment(1.0, -0.5, 2.0, 0.8);
    const auto dl = kernel_delta_limit(0.1, sched, p);
    CHECK(dl.peak == doctest::Approx(0.1 + xi_two_segment(1.0, -0.5, 2.0, 0.8, 1.0)).epsilon(1e-14));
}

TEST_CASE("kernel identity battery") {
    const auto rep = kernel_checks(fixtures::params(1e4), 20, 3, 4096);
    CHECK(rep.cases == 20);
    CHECK(rep.composition < 1e-8);
    CHECK(rep.qp_identity < 1e-8);
    CHECK(rep.newton < 1e-8);
    CHECK(rep.numeric_composition < 1e-8);
    CHECK(rep.unitarity < 1e-8);
}

TEST_CASE("kernel table layout") {
    std::ostringstream os;
    write_kernel_csv(os, {0.0, 0.1}, {0.0}, ForceSchedule::constant(1.0, 1.0), fixtures::params(10));
    const auto s = os.str();
    CHECK(s.rfind("X,Y,Re,Im\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 3);
}

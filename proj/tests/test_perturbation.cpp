#include "doctest.h"

#include <algorithm>

#include "fixtures.hpp"
#include "ptm/oracle.hpp"
#include "ptm/perturbation.hpp"

using namespace ptm;

namespace {

double peak(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

TEST_CASE("order-zero signal carries |C_b|^2 at the classical peaks") {
    const auto sys = fixtures::three_channel();
    const auto p = fixtures::params(1e3);
    const PointerContext ctx(sys, p, 1.0);
    const auto f = J0(1.0, sys, p, default_grid(ctx));
    CHECK(integrate(f.X, f.total) == doctest::Approx(1.0).epsilon(1e-12));
    for (int b = 0; b < 3; ++b) {
        CHECK(integrate(f.X, f.per_channel[b]) == doctest::Approx(std::norm(sys.C[b])).epsilon(1e-12));
        CHECK(f.peaks[b] == doctest::Approx(sys.lambdas[b] * 0.5).epsilon(1e-14));
        for (double X : {f.peaks[b] - 0.03, f.peaks[b] + 0.01})
            CHECK(std::abs(psi0(ctx, b, X) - dyson_psi(0, b, X, sys, p, 1.0)) < 1e-12);
    }
}

TEST_CASE("order-one wave function matches the Dyson oracle") {
    for (auto sys : {fixtures::benchmark(), fixtures::three_channel()}) {
        const auto p = fixtures::params(300);
        const PointerContext ctx(sys, p, 1.0);
        for (int b = 0; b < sys.d(); ++b)
            for (double X : {ctx.xi[b], ctx.xi[b] + 0.04, 0.5 * (ctx.xi[0] + ctx.xi[1])}) {
                const auto r = psi1(ctx, b, X, {1e-11, 1e-15});
                const auto o = dyson_psi(1, b, X, sys, p, 1.0, 1e-11);
                CHECK(std::abs(r.value - o) < 1e-9 * std::max(std::abs(o), 1e-3));
            }
    }
}

TEST_CASE("order-one channel weights agree with the oracle overlap") {
    const auto sys = fixtures::three_channel();
    const auto p = fixtures::params(1e3);
    for (int b = 0; b < 3; ++b) {
        const double w = J1_weight(b, 1.0, sys, p);
        CHECK(w == doctest::Approx(2 * dyson_overlap(1, b, sys, p, 1.0).real()).epsilon(1e-9));
    }
}

TEST_CASE("frozen order-one and order-two weights") {
    const auto p = fixtures::params(1e3);
    const auto bench = fixtures::benchmark();
    CHECK(J1_weight(0, 1.0, bench, p) == doctest::Approx(-1.772432582948e-03).epsilon(1e-10));
    CHECK(J1_weight(1, 1.0, bench, p) == doctest::Approx(1.772432582948e-03).epsilon(1e-10));
    const auto v = J2_1_decomposition(1.0, bench, p);
    const auto w = J2_2_from_sum_rule(v);
    for (int b = 0; b < 2; ++b) {
        CHECK(v.weight(b) == doctest::Approx(4.990281978809e-05).epsilon(1e-9));
        CHECK(w.weights[b] == doctest::Approx(-4.990281978809e-05).epsilon(1e-9));
    }

    const auto sys = fixtures::three_channel();
    const double j1[] = {3.725730019539e-04, 2.130340130284e-05, -3.938764032567e-04};
    const double j21[] = {6.235667415387e-05, 6.869271881709e-05, 2.091164921247e-05};
    const auto v3 = J2_1_decomposition(1.0, sys, p);
    for (int b = 0; b < 3; ++b) {
        CHECK(J1_weight(b, 1.0, sys, p) == doctest::Approx(j1[b]).epsilon(1e-9));
        CHECK(v3.weight(b) == doctest::Approx(j21[b]).epsilon(1e-9));
    }
}

TEST_CASE("two-channel order-two weights equal the exact Dyson overlap") {
    const auto sys = fixtures::benchmark();
    const auto p = fixtures::params(1e3);
    const auto w = J2_2_from_sum_rule(J2_1_decomposition(1.0, sys, p));
    for (int b = 0; b < 2; ++b)
        CHECK(w.weights[b] == doctest::Approx(2 * dyson_overlap(2, b, sys, p, 1.0).real()).epsilon(1e-9));
}

TEST_CASE("order-two channel sum agrees with the Dyson overlap for three channels") {
    const auto sys = fixtures::three_channel();
    const auto p = fixtures::params(1e3);
    const auto w = J2_2_from_sum_rule(J2_1_decomposition(1.0, sys, p));
    double dyson = 0;
    for (int b = 0; b < 3; ++b) dyson += 2 * dyson_overlap(2, b, sys, p, 1.0).real();
    CHECK(w.weights.sum() == doctest::Approx(dyson).epsilon(1e-8));
}

TEST_CASE("signal fields integrate to zero and reproduce channel weights") {
    const auto sys = fixtures::benchmark();
    const auto p = fixtures::params(1e3);
    const PointerContext ctx(sys, p, 1.0);
    const auto grid = default_grid(ctx);
    const auto f1 = J1_field(1.0, sys, p, grid);
    CHECK(std::abs(integrate(f1.X, f1.total)) < 1e-6 * peak(f1.total));
    const auto raw = J1_field(1.0, sys, p, grid, {}, J1Route::raw);
    for (size_t i = 0; i < f1.total.size(); i += 97)
        CHECK(std::abs(raw.total[i] - f1.total[i]) < 1e-8 * peak(f1.total));

    const auto f2 = J2_1_field(1.0, sys, p, grid);
    const auto v = J2_1_decomposition(1.0, sys, p);
    const auto w = J2_2_from_sum_rule(v);
    CHECK(std::abs(integrate(f2.X, f2.total) + w.weights.sum()) < 1e-6 * peak(f2.total));
    for (int b = 0; b < 2; ++b) {
        CHECK(integrate(f1.X, f1.per_channel[b]) == doctest::Approx(J1_weight(b, 1.0, sys, p)).epsilon(1e-8));
        CHECK(integrate(f2.X, f2.per_channel[b]) == doctest::Approx(v.weight(b)).epsilon(1e-8));
        const double delta = default_half_width(f1);
        CHECK(channel_weight(f1, b, delta) == doctest::Approx(J1_weight(b, 1.0, sys, p)).epsilon(1e-3));
    }
}

TEST_CASE("weights scale with powers of the object Hamiltonian") {
    auto sys = fixtures::three_channel();
    const auto p = fixtures::params(1e3);
    const double j1 = J1_weight(0, 1.0, sys, p);
    const double j2 = J2_1_decomposition(1.0, sys, p).weight(0);
    sys.H *= 2.0;
    CHECK(J1_weight(0, 1.0, sys, p) == doctest::Approx(2 * j1).epsilon(1e-9));
    CHECK(J2_1_decomposition(1.0, sys, p).weight(0) == doctest::Approx(4 * j2).epsilon(1e-9));
}

TEST_CASE("diagonal object Hamiltonian gives no corrections") {
    const auto sys = fixtures::commuting_three_channel();
    const auto p = fixtures::params(1e3);
    for (int b = 0; b < 3; ++b) {
        CHECK(J1_weight(b, 1.0, sys, p) == 0.0);
        CHECK(J2_1_decomposition(1.0, sys, p).weight(b) == 0.0);
    }
}

TEST_CASE("channel regions must be separated and resolved") {
    const auto sys = fixtures::benchmark();
    const auto p = fixtures::params(1e3);
    const auto f = J0(1.0, sys, p, uniform_grid(-2, 2, 0.005));
    CHECK_THROWS_AS(channel_weight(f, 0, 0.6), std::invalid_argument);
    CHECK_THROWS_AS(channel_weight(f, 0, 0.1, 0.05), std::invalid_argument);
    CHECK(channel_weight(f, 0, 0.5) == doctest::Approx(0.5).epsilon(1e-9));
}

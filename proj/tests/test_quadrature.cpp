#include "doctest.h"

#include <cmath>
#include <complex>

#include "ptm/gaussian.hpp"
#include "ptm/quadrature.hpp"

using namespace ptm;

TEST_CASE("Gauss-Legendre is exact for polynomials of degree 2n-1") {
    GaussLegendre<> g(8);
    for (int k = 0; k <= 15; ++k) {
        const double v = g.integrate([k](double x) { return std::pow(x, k); }, -1.0, 1.0);
        const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
        CHECK(v == doctest::Approx(exact).epsilon(1e-14));
    }
}

TEST_CASE("adaptive integration of a peaked integrand") {
    auto f = [](double x) { return 1e-3 / (x * x + 1e-6); };
    const auto r = adaptive_integrate(f, -1.0, 1.0, 1e-12);
    CHECK(r.value == doctest::Approx(2 * std::atan(1000.0)).epsilon(1e-11));
}

TEST_CASE("doubling integration of an oscillatory complex integrand") {
    auto f = [](double x) { return std::exp(std::complex<double>(0, 50 * x)); };
    const auto r = doubling_integrate(f, 0.0, 1.0, 4, 1e-13);
    const auto exact = (std::exp(std::complex<double>(0, 50)) - 1.0) / std::complex<double>(0, 50);
    CHECK(std::abs(r.value - exact) < 1e-13);
}

TEST_CASE("Wynn epsilon accelerates an alternating series") {
    std::vector<double> s;
    double acc = 0;
    for (int k = 1; k <= 12; ++k) {
        acc += (k % 2 ? 1.0 : -1.0) / k;
        s.push_back(acc);
    }
    CHECK(std::abs(wynn_epsilon(s) - std::log(2.0)) < 1e-8);
    CHECK(std::abs(s.back() - std::log(2.0)) > 1e-2);
}

TEST_CASE("Gaussian integrals match quadrature") {
    Gaussian1<> g{{-2.0, 0.7}, {0.3, -1.1}, {0.2, 0.1}};
    const auto q = adaptive_integrate([&](double x) { return g(x); }, -12.0, 12.0, 1e-13);
    CHECK(std::abs(std::exp(g.log_integral()) - q.value) < 1e-12 * std::abs(q.value));
}

TEST_CASE("kernel composition matches numeric integration over the middle point") {
    Quadratic2<> a{{-1.0, 0.5}, {0.4, -0.2}, {-0.8, 0.3}, {0.1, 0.2}, {0.0, -0.3}, {0.05, 0}};
    Quadratic2<> b{{-0.7, -0.2}, {0.3, 0.1}, {-1.2, 0.4}, {0.0, 0.1}, {0.2, 0.0}, {-0.1, 0.2}};
    const auto c = compose(a, b);
    for (double X : {-0.5, 0.0, 0.7})
        for (double Y : {-0.3, 0.4}) {
            const auto q = adaptive_integrate([&](double Z) { return a(X, Z) * b(Z, Y); }, -15.0, 15.0, 1e-13);
            CHECK(std::abs(c(X, Y) - q.value) < 1e-12 * std::abs(q.value));
        }
}

TEST_CASE("composition refuses divergent integrals") {
    Quadratic2<> a{{-1.0, 0}, {0, 0}, {1.0, 0}, {0, 0}, {0, 0}, {0, 0}};
    Quadratic2<> b{{0.5, 0}, {0, 0}, {-1.0, 0}, {0, 0}, {0, 0}, {0, 0}};
    CHECK_THROWS_AS(compose(a, b), std::domain_error);
}

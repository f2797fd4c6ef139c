#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

namespace ptm {

/// exp(a x^2 + b x + c) with complex coefficients. Prefactors are carried
/// in c as a logarithm, so products of Gaussians are sums of exponents.
template <class S = double>
struct Gaussian1 {
    using C = std::complex<S>;
    C a{}, b{}, c{};

    C exponent(S x) const { return (a * x + b) * x + c; }
    C operator()(S x) const { return std::exp(exponent(x)); }

    Gaussian1 operator*(const Gaussian1& o) const { return {a + o.a, b + o.b, c + o.c}; }
    Gaussian1 conj() const { return {std::conj(a), std::conj(b), std::conj(c)}; }
    Gaussian1 scaled(C factor) const { return {a, b, c + std::log(factor)}; }

    /// log of the integral over the real line. Needs Re a < 0, or Re a = 0
    /// with Im a != 0 (Fresnel limit); principal root of -a is then correct.
    C log_integral() const {
        if (a.real() > 0 || (a.real() == 0 && a.imag() == 0))
            throw std::domain_error("Gaussian integral diverges");
        const S pi = S(3.14159265358979323846264338327950288L);
        return S(0.5) * std::log(pi / (-a)) + c - b * b / (S(4) * a);
    }
    C integral() const { return std::exp(log_integral()); }
};

/// exp(xx X^2 + xy X Y + yy Y^2 + x X + y Y + c): the exponent of a
/// propagation kernel, or of any joint Gaussian in two real variables.
template <class S = double>
struct Quadratic2 {
    using C = std::complex<S>;
    C xx{}, xy{}, yy{}, x{}, y{}, c{};

    C exponent(S X, S Y) const { return xx * X * X + xy * X * Y + yy * Y * Y + x * X + y * Y + c; }
    C operator()(S X, S Y) const { return std::exp(exponent(X, Y)); }

    /// As a Gaussian in Y with X fixed.
    Gaussian1<S> in_y(S X) const { return {yy, xy * X + y, xx * X * X + x * X + c}; }

    /// Integrate out Y against g(Y); result is a Gaussian in X.
    Gaussian1<S> apply(const Gaussian1<S>& g) const {
        const C A = yy + g.a;
        // exponent in Y: A Y^2 + (xy X + y + g.b) Y + rest(X)
        const S pi = S(3.14159265358979323846264338327950288L);
        const C lg = S(0.5) * std::log(pi / (-A));
        const C B1 = xy, B0 = y + g.b;
        return {xx - B1 * B1 / (S(4) * A), x - S(2) * B1 * B0 / (S(4) * A), c + g.c + lg - B0 * B0 / (S(4) * A)};
    }
};

/// Compose kernels: result(X, Y) = integral dZ outer(X, Z) inner(Z, Y).
template <class S>
Quadratic2<S> compose(const Quadratic2<S>& outer, const Quadratic2<S>& inner) {
    using C = std::complex<S>;
    const S pi = S(3.14159265358979323846264338327950288L);
    // exponent in Z: A Z^2 + (u X + v Y + w) Z + (remaining)
    const C A = outer.yy + inner.xx;
    if (A.real() > 0 || (A.real() == 0 && A.imag() == 0)) throw std::domain_error("kernel composition diverges");
    const C u = outer.xy, v = inner.xy, w = outer.y + inner.x;
    const C k = S(-1) / (S(4) * A);
    Quadratic2<S> r;
    r.xx = outer.xx + k * u * u;
    r.xy = k * S(2) * u * v;
    r.yy = inner.yy + k * v * v;
    r.x = outer.x + k * S(2) * u * w;
    r.y = inner.y + k * S(2) * v * w;
    r.c = outer.c + inner.c + k * w * w + S(0.5) * std::log(pi / (-A));
    return r;
}

}  // namespace ptm

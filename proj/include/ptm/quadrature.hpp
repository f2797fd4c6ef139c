#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

namespace ptm {

template <class T>
inline double magnitude(const T& v) {
    return std::abs(v);
}

template <class T>
struct QuadResult {
    T value{};
    double error = 0.0;
    int evaluations = 0;
    int panels = 0;
    bool converged = true;
};

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
template <class S = double>
struct GaussLegendre {
    std::vector<S> x, w;

    explicit GaussLegendre(int n) : x(n), w(n) {
        const S pi = S(3.14159265358979323846264338327950288L);
        for (int i = 0; i < (n + 1) / 2; ++i) {
            S z = std::cos(pi * (S(i) + S(0.75)) / (S(n) + S(0.5)));
            S dp = 0;
            for (int it = 0; it < 100; ++it) {
                S p0 = 1, p1 = 0;
                for (int k = 1; k <= n; ++k) {
                    S p2 = p1;
                    p1 = p0;
                    p0 = ((2 * k - 1) * z * p1 - (k - 1) * p2) / k;
                }
                dp = n * (z * p0 - p1) / (z * z - 1);
                S dz = p0 / dp;
                z -= dz;
                if (std::abs(dz) < S(4) * std::numeric_limits<S>::epsilon()) break;
            }
            // recompute derivative at the converged node
            S p0 = 1, p1 = 0;
            for (int k = 1; k <= n; ++k) {
                S p2 = p1;
                p1 = p0;
                p0 = ((2 * k - 1) * z * p1 - (k - 1) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1);
            x[i] = -z;
            x[n - 1 - i] = z;
            w[i] = w[n - 1 - i] = 2 / ((1 - z * z) * dp * dp);
        }
    }

    template <class F>
    auto integrate(F&& f, double a, double b) const {
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        decltype(f(a)) acc{};
        for (size_t i = 0; i < x.size(); ++i) acc += w[i] * f(c + h * x[i]);
        return acc * h;
    }
};

/// Composite Gauss-Legendre rule over `panels` equal panels.
template <class F>
auto panel_integrate(F&& f, double a, double b, int panels, const GaussLegendre<>& rule) {
    const double h = (b - a) / panels;
    decltype(f(a)) acc{};
    for (int p = 0; p < panels; ++p) acc += rule.integrate(f, a + p * h, a + (p + 1) * h);
    return acc;
}

/// Composite Gauss-Legendre with panel doubling until the relative change
/// drops below rel_tol (or the absolute change below abs_tol).
template <class F>
auto doubling_integrate(F&& f, double a, double b, int initial_panels, double rel_tol, double abs_tol = 0.0,
                        int max_panels = 1 << 16, int order = 16) {
    using T = decltype(f(a));
    static thread_local std::vector<GaussLegendre<>> rules;
    auto it = std::find_if(rules.begin(), rules.end(), [&](const auto& r) { return int(r.x.size()) == order; });
    if (it == rules.end()) {
        rules.emplace_back(order);
        it = rules.end() - 1;
    }
    const GaussLegendre<>& rule = *it;
    QuadResult<T> r;
    int n = std::max(1, initial_panels);
    T prev = panel_integrate(f, a, b, n, rule);
    r.evaluations = n * order;
    for (;;) {
        const int n2 = 2 * n;
        T cur = panel_integrate(f, a, b, n2, rule);
        r.evaluations += n2 * order;
        r.error = magnitude(cur - prev);
        r.value = cur;
        r.panels = n2;
        if (r.error <= std::max(rel_tol * magnitude(cur), abs_tol)) return r;
        if (n2 >= max_panels) {
            r.converged = false;
            return r;
        }
        prev = cur;
        n = n2;
    }
}

namespace detail {
// Gauss-Kronrod (7, 15) abscissae and weights.
inline constexpr std::array<double, 8> xgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851, 0.864864423359769072789712788640926,
    0.741531185599394439863864773280788, 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> wgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
    0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> wg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                             0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F, class T>
void gk15(F& f, double a, double b, T& result, double& err) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const T fc = f(c);
    T rk = fc * wgk[7];
    T rg = fc * wg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * xgk[j];
        const T f1 = f(c - dx), f2 = f(c + dx);
        rk += wgk[j] * (f1 + f2);
        if (j % 2 == 1) rg += wg[j / 2] * (f1 + f2);
    }
    result = rk * h;
    err = magnitude((rk - rg) * h);
}
}  // namespace detail

/// Globally adaptive Gauss-Kronrod 15 on [a, b] with optional interior
/// breakpoints. Intervals with the largest error estimate are bisected first.
template <class F>
auto adaptive_integrate(F&& f, double a, double b, double rel_tol, double abs_tol = 0.0,
                        const std::vector<double>& breakpoints = {}, int max_intervals = 20000) {
    using T = decltype(f(a));
    struct Piece {
        double a, b;
        T val;
        double err;
    };
    std::vector<double> edges{a};
    for (double p : breakpoints)
        if (p > a && p < b) edges.push_back(p);
    edges.push_back(b);
    std::sort(edges.begin(), edges.end());
    std::vector<Piece> pieces;
    QuadResult<T> r;
    for (size_t i = 0; i + 1 < edges.size(); ++i) {
        if (!(edges[i + 1] > edges[i])) continue;
        Piece p{edges[i], edges[i + 1], T{}, 0.0};
        detail::gk15(f, p.a, p.b, p.val, p.err);
        r.evaluations += 15;
        pieces.push_back(p);
    }
    auto by_err = [&](size_t i, size_t j) { return pieces[i].err < pieces[j].err; };
    std::vector<size_t> heap(pieces.size());
    for (size_t i = 0; i < heap.size(); ++i) heap[i] = i;
    std::make_heap(heap.begin(), heap.end(), by_err);
    T total{};
    double err = 0, mass = 0;
    for (const auto& p : pieces) {
        total += p.val;
        err += p.err;
        mass += magnitude(p.val);
    }
    // below this the error estimate is roundoff in a cancelling sum
    const double eps = std::numeric_limits<double>::epsilon();
    for (;;) {
        if (err <= std::max({rel_tol * magnitude(total), abs_tol, 64 * eps * mass}) || pieces.empty()) break;
        std::pop_heap(heap.begin(), heap.end(), by_err);
        const size_t worst = heap.back();
        heap.pop_back();
        const Piece w = pieces[worst];
        if (int(pieces.size()) >= max_intervals || w.b - w.a < 1e-15 * (1 + std::abs(b - a))) {
            r.converged = false;
            break;
        }
        const double mid = 0.5 * (w.a + w.b);
        Piece l{w.a, mid, T{}, 0.0}, u{mid, w.b, T{}, 0.0};
        detail::gk15(f, l.a, l.b, l.val, l.err);
        detail::gk15(f, u.a, u.b, u.val, u.err);
        r.evaluations += 30;
        total += l.val + u.val - w.val;
        err += l.err + u.err - w.err;
        mass += magnitude(l.val) + magnitude(u.val) - magnitude(w.val);
        pieces[worst] = l;
        pieces.push_back(u);
        heap.push_back(worst);
        std::push_heap(heap.begin(), heap.end(), by_err);
        heap.push_back(pieces.size() - 1);
        std::push_heap(heap.begin(), heap.end(), by_err);
    }
    // final sums in interval order so the result does not depend on the
    // history of running updates
    std::sort(pieces.begin(), pieces.end(), [](const Piece& p, const Piece& q) { return p.a < q.a; });
    r.value = T{};
    r.error = 0;
    for (const auto& p : pieces) {
        r.value += p.val;
        r.error += p.err;
    }
    r.panels = int(pieces.size());
    return r;
}

/// Wynn epsilon acceleration of a sequence of partial sums; returns the
/// best estimate of the limit from the last full diagonal.
inline double wynn_epsilon(const std::vector<double>& s) {
    const size_t n = s.size();
    if (n < 3) return n ? s.back() : 0.0;
    std::vector<std::vector<double>> e(n + 1, std::vector<double>(n + 1, 0.0));
    for (size_t i = 0; i < n; ++i) e[i][1] = s[i];
    for (size_t k = 2; k <= n; ++k)
        for (size_t i = 0; i + k <= n; ++i) {
            const double diff = e[i + 1][k - 1] - e[i][k - 1];
            e[i][k] = e[i + 1][k - 2] + (diff != 0.0 ? 1.0 / diff : 1e300);
        }
    // Odd columns hold the accelerated sums. Deep columns lose everything to
    // roundoff, so take the entry whose last two values agree best.
    double best = s.back(), spread = std::abs(s[n - 1] - s[n - 2]);
    for (size_t k = 3; k + 1 <= n; k += 2) {
        const double a = e[n - k][k], b = e[n - k - 1][k];
        if (!std::isfinite(a) || !std::isfinite(b)) continue;
        if (std::abs(a - b) < spread) {
            spread = std::abs(a - b);
            best = a;
        }
    }
    return best;
}

}  // namespace ptm

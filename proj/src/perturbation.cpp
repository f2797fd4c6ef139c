#include "ptm/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ptm/kernels.hpp"
#include "ptm/parallel.hpp"

namespace ptm {

namespace {
constexpr double kPi = 3.14159265358979323846;
const Complex I(0.0, 1.0);
}  // namespace

void QuadDiagnostics::add(const QuadResult<Complex>& r) {
    evaluations += r.evaluations;
    max_panels = std::max(max_panels, r.panels);
    max_error = std::max(max_error, r.error);
    if (!r.converged) ++failures;
}

void QuadDiagnostics::merge(const QuadDiagnostics& o) {
    evaluations += o.evaluations;
    max_panels = std::max(max_panels, o.max_panels);
    max_error = std::max(max_error, o.max_error);
    failures += o.failures;
}

PointerContext::PointerContext(const ObjectSystem& s, const ModelParams& prm, double T_)
    : sys(s), p(prm), T(T_) {
    if (!(T > 0)) throw std::domain_error("evaluation time must be positive");
    const int n = sys.d();
    f = channel_forces(sys, p);
    theta.resize(n);
    xi.resize(n);
    for (int a = 0; a < n; ++a) {
        theta[a] = diagonal_phase_rate(sys, p, a);
        xi[a] = xi_const(f[a], T, p.m);
    }
    rho = p.rho(T);
    const double r = T * p.hbar / (p.Delta * p.Delta * p.N * p.m);
    // -N^2 m^2 / (2 hbar^2 T^2 D) + i N m / (2 hbar T), written without the
    // cancellation between its two large imaginary parts
    alpha = Complex(-1.0 / (2 * p.Delta * p.Delta * rho), p.N * p.m * (r * r / rho) / (2 * p.hbar * T));
    const Complex D(1.0 / (p.Delta * p.Delta), -p.N * p.m / (p.hbar * T));
    log_pre = -0.25 * std::log(kPi * p.Delta * p.Delta) + std::log(kernel_prefactor(T, p)) +
              0.5 * std::log(2 * kPi / D);
}

double PointerContext::width() const { return p.Delta * std::sqrt(rho); }

Gaussian1<double> PointerContext::transition(int a, int b, double s) const {
    const double x = xi_two_segment(f[a], f[b], T, s, p.m);
    const auto qp = qp_coefficients(f[a], f[b], T, s, p.m);
    const double k = p.N / p.hbar;
    Gaussian1<double> g;
    g.a = alpha;
    g.b = -2.0 * alpha * x + I * (k * qp.Q);
    g.c = alpha * x * x + I * (k * qp.P + theta[a] * s + theta[b] * (T - s)) + log_pre;
    return g;
}

std::pair<double, double> PointerContext::s_window(int a, int b, double X, double cut) const {
    const double df = f[a] - f[b];
    if (df == 0) return {0.0, T};
    // xi_ba(T, s) - xi_b = df (2 T s - s^2) / 2m, monotone in s on [0, T]
    double lo = (X - cut - xi[b]) * 2 * p.m / df, hi = (X + cut - xi[b]) * 2 * p.m / df;
    if (lo > hi) std::swap(lo, hi);
    lo = std::max(lo, 0.0);
    hi = std::min(hi, T * T);
    if (lo > hi) return {1.0, 0.0};
    auto s_of = [&](double g) { return g / (T + std::sqrt(std::max(0.0, T * T - g))); };
    return {s_of(lo), s_of(hi)};
}

double PointerContext::phase_rate(int a, int b, double X) const {
    const double df = std::abs(f[a] - f[b]);
    const double span = std::abs(X) + 2 * std::max(std::abs(xi[a]), std::abs(xi[b])) + 10 * width();
    return p.N * df * span / p.hbar + std::abs(theta[a] - theta[b]);
}

XGrid uniform_grid(double lo, double hi, double h) {
    if (!(hi > lo) || !(h > 0)) throw std::invalid_argument("bad grid specification");
    const long n = long(std::ceil((hi - lo) / h)) + 1;
    XGrid g;
    g.X.resize(n);
    const double step = (hi - lo) / double(n - 1);
    for (long i = 0; i < n; ++i) g.X[i] = lo + step * double(i);
    return g;
}

XGrid default_grid(const PointerContext& ctx) {
    const double w = ctx.width();
    double gap = INFINITY;
    for (int a = 0; a < ctx.d(); ++a)
        for (int b = a + 1; b < ctx.d(); ++b) gap = std::min(gap, std::abs(ctx.xi[a] - ctx.xi[b]));
    const double pad = std::max(8 * w, std::isfinite(gap) ? 3 * gap : 0.0);
    const double lo = ctx.xi.minCoeff() - pad, hi = ctx.xi.maxCoeff() + pad;
    // order-one cross terms near a peak oscillate with wavenumber up to
    // N m cut / (hbar T); resolve each period with 16 samples
    const double kmax = ctx.p.N * ctx.p.m * 9.5 * w / (ctx.p.hbar * ctx.T);
    const double h = std::min(ctx.p.Delta / 8, 2 * kPi / (16 * kmax));
    return uniform_grid(lo, hi, h);
}

Complex psi0(const PointerContext& ctx, int b, double X) {
    return ctx.sys.C[b] * ctx.transition(b, b, 0.0)(X);
}

Complex psi0(int b, double X, double T, const ObjectSystem& sys, const ModelParams& p) {
    if (T == 0) {
        const double D = p.Delta;
        return sys.C[b] * std::pow(kPi * D * D, -0.25) * std::exp(-X * X / (2 * D * D));
    }
    return psi0(PointerContext(sys, p, T), b, X);
}

SignalField J0(double T, const ObjectSystem& sys, const ModelParams& p, const XGrid& grid) {
    SignalField out;
    out.X = grid.X;
    out.order_tag = "0";
    const int d = sys.d();
    const RVector f = channel_forces(sys, p);
    for (int b = 0; b < d; ++b) out.peaks.push_back(xi_const(f[b], T, p.m));
    const double w = p.Delta * std::sqrt(p.rho(T));
    const double lo = *std::min_element(out.peaks.begin(), out.peaks.end()) - 8 * w;
    const double hi = *std::max_element(out.peaks.begin(), out.peaks.end()) + 8 * w;
    if (grid.X.empty() || grid.X.front() > lo || grid.X.back() < hi)
        throw std::invalid_argument("grid does not cover every peak +- 8 Delta sqrt(rho)");
    out.per_channel.assign(d, std::vector<double>(grid.X.size()));
    out.total.assign(grid.X.size(), 0.0);
    std::unique_ptr<PointerContext> ctx;
    if (T > 0) ctx = std::make_unique<PointerContext>(sys, p, T);
    for (size_t i = 0; i < grid.X.size(); ++i)
        for (int b = 0; b < d; ++b) {
            const Complex v = ctx ? psi0(*ctx, b, grid.X[i]) : psi0(b, grid.X[i], 0.0, sys, p);
            out.per_channel[b][i] = std::norm(v);
            out.total[i] += std::norm(v);
        }
    return out;
}

QuadResult<Complex> psi1_from(const PointerContext& ctx, int a, int b, double X, const QuadOptions& q) {
    QuadResult<Complex> r;
    const Complex h = ctx.sys.H(b, a);
    if (a == b || h == 0.0 || ctx.sys.C[a] == 0.0) return r;
    const auto [s0, s1] = ctx.s_window(a, b, X, q.cut_sigmas * ctx.width());
    if (!(s1 > s0)) return r;
    const int panels = 2 + int(std::ceil(ctx.phase_rate(a, b, X) * (s1 - s0) / (2 * kPi)));
    const double scale = std::exp(ctx.log_pre.real()) * (s1 - s0);
    r = doubling_integrate([&](double s) { return ctx.transition(a, b, s)(X); }, s0, s1, panels, q.rel_tol,
                           q.abs_tol * scale, q.max_panels);
    const Complex coef = -I / ctx.p.hbar * h * ctx.sys.C[a];
    r.value *= coef;
    r.error *= std::abs(coef);
    return r;
}

QuadResult<Complex> psi1(const PointerContext& ctx, int b, double X, const QuadOptions& q) {
    QuadResult<Complex> total;
    for (int a = 0; a < ctx.d(); ++a) {
        const auto r = psi1_from(ctx, a, b, X, q);
        total.value += r.value;
        total.error += r.error;
        total.evaluations += r.evaluations;
        total.panels = std::max(total.panels, r.panels);
        total.converged = total.converged && r.converged;
    }
    return total;
}

QuadResult<Complex> psi1(int b, double X, double T, const ObjectSystem& sys, const ModelParams& p,
                         const QuadOptions& q) {
    return psi1(PointerContext(sys, p, T), b, X, q);
}

namespace {

// Order-one cross term for channel b from source a, integrated over s in the
// exponent form: both Gaussian envelopes plus the phase difference.
QuadResult<Complex> phi_integral(const PointerContext& ctx, int a, int b, double X, RhoMode mode,
                                 const QuadOptions& q) {
    QuadResult<Complex> r;
    const double cut = q.cut_sigmas * ctx.width();
    const double R0 = X - ctx.xi[b];
    if (std::abs(R0) > cut) return r;
    const auto [s0, s1] = ctx.s_window(a, b, X, cut);
    if (!(s1 > s0)) return r;
    const auto& p = ctx.p;
    const double T = ctx.T, m = p.m, k = p.N / p.hbar;
    const double rho = mode == RhoMode::exact ? ctx.rho : 1.0;
    const double twoD2 = 2 * p.Delta * p.Delta * rho;
    const double crho = mode == RhoMode::exact ? ctx.alpha.imag() : 0.0;
    const double fa = ctx.f[a], fb = ctx.f[b];
    const double Pb = -fb * fb * T * T * T / (6 * m);
    const double dtheta = ctx.theta[a] - ctx.theta[b];
    const double lognorm = -0.5 * std::log(kPi * p.Delta * p.Delta * rho);
    auto integrand = [&](double s) {
        const double Rs = X - xi_two_segment(fa, fb, T, s, m);
        const auto qp = qp_coefficients(fa, fb, T, s, m);
        const double omega = X * (fa - fb) * s + (qp.P - Pb);
        const double re = -(Rs * Rs + R0 * R0) / twoD2 + lognorm;
        const double im = crho * (Rs * Rs - R0 * R0) + k * omega + dtheta * s;
        return std::exp(Complex(re, im));
    };
    const int panels = 2 + int(std::ceil(ctx.phase_rate(a, b, X) * (s1 - s0) / (2 * kPi)));
    r = doubling_integrate(integrand, s0, s1, panels, q.rel_tol, q.abs_tol * std::exp(lognorm) * (s1 - s0),
                           q.max_panels);
    return r;
}

}  // namespace

SignalField J1_field(double T, const ObjectSystem& sys, const ModelParams& p, const XGrid& grid,
                     const QuadOptions& q, J1Route route, RhoMode mode, int threads) {
    const PointerContext ctx(sys, p, T);
    const int d = sys.d();
    SignalField out;
    out.X = grid.X;
    out.order_tag = "1";
    out.peaks.assign(ctx.xi.data(), ctx.xi.data() + d);
    const size_t n = grid.X.size();
    out.per_channel.assign(d, std::vector<double>(n, 0.0));
    out.total.assign(n, 0.0);
    std::vector<QuadDiagnostics> diag(std::max(1, threads));
    parallel_chunks(n, threads, [&](size_t i0, size_t i1, int w) {
        for (size_t i = i0; i < i1; ++i) {
            const double X = grid.X[i];
            for (int b = 0; b < d; ++b) {
                double v = 0;
                if (route == J1Route::raw) {
                    const auto r = psi1(ctx, b, X, q);
                    diag[w].add(r);
                    v = 2 * (std::conj(psi0(ctx, b, X)) * r.value).real();
                } else {
                    for (int a = 0; a < d; ++a) {
                        if (a == b || sys.H(b, a) == 0.0) continue;
                        const auto r = phi_integral(ctx, a, b, X, mode, q);
                        diag[w].add(r);
                        const Complex coef = -I / p.hbar * std::conj(sys.C[b]) * sys.H(b, a) * sys.C[a];
                        v += 2 * (coef * r.value).real();
                    }
                }
                out.per_channel[b][i] = v;
                out.total[i] += v;
            }
        }
    });
    for (const auto& dg : diag) out.diagnostics.merge(dg);
    return out;
}

double J1_weight(int b, double T, const ObjectSystem& sys, const ModelParams& p, double rel_tol) {
    const PointerContext ctx(sys, p, T);
    const auto g0 = ctx.transition(b, b, 0.0).conj();
    double total = 0;
    for (int a = 0; a < ctx.d(); ++a) {
        const Complex h = sys.H(b, a);
        if (a == b || h == 0.0) continue;
        const double df = std::abs(ctx.f[a] - ctx.f[b]);
        // momentum mismatch damps the integrand as exp(-Delta^2 rho df^2 y^2 / 4 hbar^2)
        const double ycut = std::min(p.N * T, 14 * p.hbar / (p.Delta * df));
        std::vector<double> bp;
        for (double y = ycut / 64; y < ycut; y *= 2) bp.push_back(y);
        auto integrand = [&](double y) { return (g0 * ctx.transition(a, b, y / p.N)).integral(); };
        const auto r = adaptive_integrate(integrand, 0.0, ycut, rel_tol, 1e-15, bp);
        const Complex coef = -I / p.hbar * std::conj(sys.C[b]) * h * sys.C[a];
        total += 2 * (coef * r.value / p.N).real();
    }
    return total;
}

SignalField J2_1_field(double T, const ObjectSystem& sys, const ModelParams& p, const XGrid& grid,
                       const QuadOptions& q, int threads) {
    const PointerContext ctx(sys, p, T);
    const int d = sys.d();
    SignalField out;
    out.X = grid.X;
    out.order_tag = "2.1";
    out.peaks.assign(ctx.xi.data(), ctx.xi.data() + d);
    const size_t n = grid.X.size();
    out.per_channel.assign(d, std::vector<double>(n, 0.0));
    out.total.assign(n, 0.0);
    std::vector<double> dsum(n, 0.0), osum(n, 0.0);
    std::vector<QuadDiagnostics> diag(std::max(1, threads));
    parallel_chunks(n, threads, [&](size_t i0, size_t i1, int w) {
        std::vector<Complex> amp(d);
        for (size_t i = i0; i < i1; ++i) {
            for (int b = 0; b < d; ++b) {
                Complex s = 0;
                double dg = 0;
                for (int a = 0; a < d; ++a) {
                    const auto r = psi1_from(ctx, a, b, grid.X[i], q);
                    diag[w].add(r);
                    s += r.value;
                    dg += std::norm(r.value);
                }
                const double v = std::norm(s);
                out.per_channel[b][i] = v;
                out.total[i] += v;
                dsum[i] += dg;
                osum[i] += v - dg;
            }
        }
    });
    for (const auto& dg : diag) out.diagnostics.merge(dg);
    out.parts = {{"diagonal", dsum}, {"offdiagonal", osum}};
    return out;
}

double SecondOrderDecomposition::weight(int b) const { return terms[b].sum().real(); }

double SecondOrderDecomposition::diagonal(int b) const { return terms[b].diagonal().sum().real(); }

double SecondOrderDecomposition::offdiagonal(int b) const { return weight(b) - diagonal(b); }

namespace {

// Full-line overlap of the order-one amplitudes from sources a2 (conjugated)
// and a1 into channel b, integrated over both insertion times.
Complex pair_overlap(const PointerContext& ctx, int a2, int a1, int b, double rel_tol) {
    const auto& p = ctx.p;
    const double T = ctx.T;
    const double df1 = ctx.f[a1] - ctx.f[b], df2 = ctx.f[a2] - ctx.f[b];
    // momentum mismatch |Q_1(s) - Q_2(s')| > wq damps the overlap below exp(-36)
    const double wq = 12 * p.hbar / (p.N * p.Delta);
    auto inner = [&](double s) -> Complex {
        double lo = (df1 * s - wq) / df2, hi = (df1 * s + wq) / df2;
        if (lo > hi) std::swap(lo, hi);
        lo = std::max(lo, 0.0);
        hi = std::min(hi, T);
        if (!(hi > lo)) return 0.0;
        const auto g1 = ctx.transition(a1, b, s);
        auto f = [&](double s2) { return (ctx.transition(a2, b, s2).conj() * g1).integral(); };
        const double mid = std::clamp(df1 * s / df2, lo, hi);
        const double scale = std::abs(f(mid)) * (hi - lo);
        return adaptive_integrate(f, lo, hi, rel_tol * 1e-2, rel_tol * 1e-3 * scale, {mid}).value;
    };
    std::vector<double> bp;
    for (double s = wq / std::abs(df1); s < T; s *= 2) bp.push_back(s);
    return adaptive_integrate(inner, 0.0, T, rel_tol, 1e-14 / p.N, bp, 200000).value;
}

}  // namespace

SecondOrderDecomposition J2_1_decomposition(double T, const ObjectSystem& sys, const ModelParams& p,
                                            double rel_tol) {
    const PointerContext ctx(sys, p, T);
    const int d = sys.d();
    SecondOrderDecomposition out;
    out.positions = ctx.xi;
    out.terms.assign(d, CMatrix::Zero(d, d));
    const double h2 = p.hbar * p.hbar;
    for (int b = 0; b < d; ++b)
        for (int a1 = 0; a1 < d; ++a1) {
            if (a1 == b || sys.H(b, a1) == 0.0) continue;
            for (int a2 = 0; a2 <= a1; ++a2) {
                if (a2 == b || sys.H(b, a2) == 0.0) continue;
                const Complex v = pair_overlap(ctx, a2, a1, b, rel_tol);
                const Complex m = std::conj(sys.H(b, a2) * sys.C[a2]) * sys.H(b, a1) * sys.C[a1];
                out.terms[b](a2, a1) = m * v / h2;
                if (a2 != a1) out.terms[b](a1, a2) = std::conj(m * v) / h2;
            }
        }
    return out;
}

SignalSummary J2_2_from_sum_rule(const SecondOrderDecomposition& v) {
    const int d = int(v.terms.size());
    SignalSummary s;
    s.order_tag = "2.2";
    s.positions = v.positions;
    s.weights = RVector::Zero(d);
    s.diagonal = RVector::Zero(d);
    s.offdiagonal = RVector::Zero(d);
    for (int b = 0; b < d; ++b)
        for (int a2 = 0; a2 < d; ++a2)
            for (int a1 = 0; a1 < d; ++a1) {
                const double w = -v.terms[b](a2, a1).real();
                s.weights[a2] += w;
                (a1 == a2 ? s.diagonal : s.offdiagonal)[a2] += w;
            }
    return s;
}

double integrate(const std::vector<double>& X, const std::vector<double>& y) {
    double acc = 0;
    for (size_t i = 1; i < X.size(); ++i) acc += 0.5 * (X[i] - X[i - 1]) * (y[i] + y[i - 1]);
    return acc;
}

double default_half_width(const SignalField& field) {
    double gap = INFINITY;
    for (size_t a = 0; a < field.peaks.size(); ++a)
        for (size_t b = a + 1; b < field.peaks.size(); ++b)
            gap = std::min(gap, std::abs(field.peaks[a] - field.peaks[b]));
    return 0.5 * gap;
}

double channel_weight(const SignalField& field, int b, double delta, double width,
                      const std::vector<double>* values) {
    const auto& y = values ? *values : field.total;
    const double c = field.peaks.at(b);
    for (size_t a = 0; a < field.peaks.size(); ++a)
        if (int(a) != b && std::abs(field.peaks[a] - c) < 2 * delta * (1 - 1e-12))
            throw std::invalid_argument("channel regions overlap: peaks closer than 2 delta");
    if (width > 0 && delta < 5 * width) throw std::invalid_argument("half-width not large against the peak width");
    const double lo = c - delta, hi = c + delta;
    const auto& X = field.X;
    if (X.front() > lo || X.back() < hi) throw std::invalid_argument("grid does not cover the channel region");
    auto interp = [&](double x) {
        const size_t j = std::upper_bound(X.begin(), X.end(), x) - X.begin();
        if (j == 0) return y.front();
        if (j >= X.size()) return y.back();
        const double t = (x - X[j - 1]) / (X[j] - X[j - 1]);
        return (1 - t) * y[j - 1] + t * y[j];
    };
    double acc = 0, xp = lo, yp = interp(lo);
    for (size_t i = 0; i < X.size(); ++i) {
        if (X[i] <= lo || X[i] >= hi) continue;
        acc += 0.5 * (X[i] - xp) * (y[i] + yp);
        xp = X[i];
        yp = y[i];
    }
    acc += 0.5 * (hi - xp) * (interp(hi) + yp);
    return acc;
}

void write_csv(std::ostream& os, const SignalField& field) {
    os << "X,J_total";
    for (size_t b = 0; b < field.per_channel.size(); ++b) os << ",J_ch" << b;
    os << ",order_tag\n" << std::setprecision(17);
    for (size_t i = 0; i < field.X.size(); ++i) {
        os << field.X[i] << ',' << field.total[i];
        for (const auto& ch : field.per_channel) os << ',' << ch[i];
        os << ',' << field.order_tag << '\n';
    }
}

std::string sidecar_json(const SignalField& field, const PointerContext& ctx) {
    nlohmann::ordered_json j;
    j["order_tag"] = field.order_tag;
    j["params"] = {{"hbar", ctx.p.hbar}, {"m", ctx.p.m}, {"f", ctx.p.f}, {"N", ctx.p.N},
                   {"Delta", ctx.p.Delta}, {"T", ctx.T}, {"rho", ctx.rho}};
    j["peaks"] = field.peaks;
    j["grid"] = {{"points", field.X.size()}, {"lo", field.X.front()}, {"hi", field.X.back()}};
    j["quadrature"] = {{"evaluations", field.diagnostics.evaluations},
                       {"max_panels", field.diagnostics.max_panels},
                       {"max_error_estimate", field.diagnostics.max_error},
                       {"failures", field.diagnostics.failures}};
    j["integral"] = integrate(field.X, field.total);
    return j.dump(2);
}

}  // namespace ptm

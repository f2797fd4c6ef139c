#include "ptm/kernels.hpp"

#include <array>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>

#include "ptm/quadrature.hpp"

namespace ptm {

namespace {
constexpr double kPi = 3.14159265358979323846;
const Complex I(0.0, 1.0);
}  // namespace

ClassicalTrajectory::ClassicalTrajectory(ForceSchedule schedule, double m, double X0, double V0)
    : schedule_(std::move(schedule)), m_(m) {
    double t = 0, x = X0, v = V0;
    for (const auto& seg : schedule_.segments()) {
        t0_.push_back(t);
        x0_.push_back(x);
        v0_.push_back(v);
        const double tau = seg.duration, F = seg.force;
        // integral of m v^2/2 + F x over the segment
        action_ += 0.5 * m * v * v * tau + F * x * tau + F * v * tau * tau + F * F * tau * tau * tau / (3 * m);
        x += v * tau + 0.5 * F / m * tau * tau;
        v += F / m * tau;
        t += tau;
    }
    t0_.push_back(t);
    x0_.push_back(x);
    v0_.push_back(v);
}

std::pair<double, double> ClassicalTrajectory::at(double t) const {
    const auto& segs = schedule_.segments();
    size_t k = 0;
    while (k < segs.size() && t > t0_[k + 1]) ++k;
    if (k == segs.size()) return {x0_.back(), v0_.back()};
    const double tau = t - t0_[k], F = segs[k].force;
    return {x0_[k] + v0_[k] * tau + 0.5 * F / m_ * tau * tau, v0_[k] + F / m_ * tau};
}

ClassicalTrajectory classical_trajectory(const ForceSchedule& schedule, double m, double X0, double V0) {
    return ClassicalTrajectory(schedule, m, X0, V0);
}

ClassicalTrajectory classical_path(const ForceSchedule& schedule, double m, double Y, double X) {
    const double D = ClassicalTrajectory(schedule, m, 0.0, 0.0).final_position();
    return ClassicalTrajectory(schedule, m, Y, (X - Y - D) / schedule.duration());
}

Complex kernel_prefactor(double T, const ModelParams& p) {
    if (!(T > 0)) throw std::domain_error("kernel needs T > 0");
    return std::sqrt(Complex(p.N * p.m / (2 * kPi * p.hbar * T), 0.0) / I);
}

double action_const_force(double X, double Y, double T, double f, double m) {
    const double dx = X - Y;
    return m * dx * dx / (2 * T) + 0.5 * f * T * (X + Y) - f * f * T * T * T / (24 * m);
}

ActionSplit action_split(double X, double Y, double T, double f, double m) {
    const double r = X - Y - xi_const(f, T, m);
    const double g = m * r * r / (2 * T);
    return {g, action_const_force(X, Y, T, f, m) - g};
}

KernelValue kernel_const_force(double X, double Y, double T, double fa, const ModelParams& p) {
    const Complex pre = kernel_prefactor(T, p);
    const double ph = p.N * action_const_force(X, Y, T, fa, p.m) / p.hbar;
    return {pre, ph, pre * std::polar(1.0, ph)};
}

Quadratic2<double> kernel_exponent_const(double T, double f, const ModelParams& p) {
    const double k = p.N / p.hbar;
    Quadratic2<double> q;
    q.xx = I * k * p.m / (2 * T);
    q.xy = -I * k * p.m / T;
    q.yy = q.xx;
    q.x = I * k * 0.5 * f * T;
    q.y = q.x;
    q.c = -I * k * f * f * T * T * T / (24 * p.m) + std::log(kernel_prefactor(T, p));
    return q;
}

Quadratic2<double> kernel_exponent(const ForceSchedule& schedule, const ModelParams& p) {
    if (schedule.empty()) throw std::invalid_argument("empty force schedule");
    const auto& segs = schedule.segments();
    Quadratic2<double> acc = kernel_exponent_const(segs[0].duration, segs[0].force, p);
    for (size_t i = 1; i < segs.size(); ++i)
        acc = compose(kernel_exponent_const(segs[i].duration, segs[i].force, p), acc);
    return acc;
}

KernelValue kernel_schedule(double X, double Y, const ForceSchedule& schedule, const ModelParams& p) {
    if (schedule.empty()) throw std::invalid_argument("empty force schedule");
    const auto& segs = schedule.segments();
    const double T = schedule.duration();
    if (segs.size() == 1) return kernel_const_force(X, Y, T, segs[0].force, p);
    const Complex pre = kernel_prefactor(T, p);
    if (segs.size() == 2) {
        const double fa = segs[0].force, fb = segs[1].force, s = segs[0].duration;
        const double r = X - Y - xi_two_segment(fa, fb, T, s, p.m);
        const auto qp = qp_coefficients(fa, fb, T, s, p.m);
        const double ph = p.N / p.hbar * (p.m * r * r / (2 * T) + X * qp.Q + qp.P);
        return {pre, ph, pre * std::polar(1.0, ph)};
    }
    const Complex e = kernel_exponent(schedule, p).exponent(X, Y) - std::log(pre);
    return {pre, e.imag(), pre * std::exp(e)};
}

DeltaLimit kernel_delta_limit(double Y, const ForceSchedule& schedule, const ModelParams& p) {
    const auto tr = classical_trajectory(schedule, p.m, Y, 0.0);
    return {tr.final_position(), p.N * tr.action() / p.hbar};
}

void write_kernel_csv(std::ostream& os, const std::vector<double>& Xs, const std::vector<double>& Ys,
                      const ForceSchedule& schedule, const ModelParams& p) {
    os << "X,Y,Re,Im\n" << std::setprecision(17);
    for (double X : Xs)
        for (double Y : Ys) {
            const auto k = kernel_schedule(X, Y, schedule, p);
            os << X << ',' << Y << ',' << k.value.real() << ',' << k.value.imag() << '\n';
        }
}

}  // namespace ptm

namespace ptm {

namespace {

// Classical endpoint action by RK4 on (x, v, S) with steps aligned to the
// segments; exact up to roundoff for piecewise-constant force.
std::pair<double, double> newton_action(const ForceSchedule& sched, double m, double x, double v) {
    double S = 0;
    for (const auto& seg : sched.segments()) {
        const int steps = 16;
        const double h = seg.duration / steps, F = seg.force;
        auto rhs = [&](double, const std::array<double, 3>& y) {
            return std::array<double, 3>{y[1], F / m, 0.5 * m * y[1] * y[1] + F * y[0]};
        };
        std::array<double, 3> y{x, v, S};
        for (int k = 0; k < steps; ++k) {
            auto add = [](const std::array<double, 3>& a, const std::array<double, 3>& b, double c) {
                return std::array<double, 3>{a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2]};
            };
            const auto k1 = rhs(0, y), k2 = rhs(0, add(y, k1, h / 2)), k3 = rhs(0, add(y, k2, h / 2)),
                       k4 = rhs(0, add(y, k3, h));
            for (int i = 0; i < 3; ++i) y[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        }
        x = y[0];
        v = y[1];
        S = y[2];
    }
    return {x, S};
}

}  // namespace

KernelCheckReport kernel_checks(const ModelParams& p, int cases, std::uint64_t seed, int panels) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uni = [&](double a, double b) { return a + (b - a) * unit(rng); };
    KernelCheckReport r;
    r.cases = cases;
    const GaussLegendre<> rule(16);
    const Gaussian1<double> phi{Complex(-1 / (2 * p.Delta * p.Delta)), 0.0,
                                Complex(-0.25 * std::log(3.14159265358979323846 * p.Delta * p.Delta))};
    for (int c = 0; c < cases; ++c) {
        const double fa = p.f * uni(-2, 2), fb = p.f * uni(-2, 2), T = uni(0.2, 2.0), s = T * uni(0.2, 0.8);
        const auto sched = ForceSchedule::two_segment(fa, fb, T, s);
        const double xi = xi_two_segment(fa, fb, T, s, p.m);
        const double scale = std::max(p.Delta, std::abs(xi));
        const double Y = p.Delta * uni(-3, 3), X = xi + Y + scale * uni(-1, 1);

        // composed quadratic form against the closed form
        const Complex closed = kernel_schedule(X, Y, sched, p).value;
        const Complex composed = kernel_exponent(sched, p)(X, Y);
        r.composition = std::max(r.composition, std::abs(composed - closed) / std::abs(closed));

        // closed-form action against classical mechanics
        const auto qp = qp_coefficients(fa, fb, T, s, p.m);
        const double dx = X - Y - xi;
        const double S_closed = p.m * dx * dx / (2 * T) + X * qp.Q + qp.P;
        const double S_path = classical_path(sched, p.m, Y, X).action();
        const double S_scale = std::max({std::abs(S_closed), p.m * X * X / T, p.m * Y * Y / T, 1e-300});
        r.qp_identity = std::max(r.qp_identity, std::abs(S_path - S_closed) / S_scale);
        const auto [xN, SN] = newton_action(sched, p.m, Y, dx / T);
        r.newton = std::max(r.newton, std::max(std::abs(xN - X) / std::max(std::abs(X), p.Delta),
                                               std::abs(SN - S_closed) / S_scale));

        // Gaussian probe: analytic first leg, numerical integral over the
        // split point for the second leg
        const auto mid = kernel_exponent_const(s, fa, p).apply(phi);
        const auto second = kernel_exponent_const(T - s, fb, p);
        const auto direct = kernel_exponent(sched, p).apply(phi);
        const double zc = xi_const(fa, s, p.m), zw = p.Delta * std::sqrt(p.rho(s));
        const double Xp = xi + p.Delta * std::sqrt(p.rho(T)) * uni(-1, 1);
        auto integrand = [&](double Z) { return second(Xp, Z) * mid(Z); };
        const Complex num = panel_integrate(integrand, zc - 12 * zw, zc + 12 * zw, panels, rule);
        const Complex ref = direct(Xp);
        // maximum of |probe| over real X
        const double peak =
            std::exp(direct.c.real() - direct.b.real() * direct.b.real() / (4 * direct.a.real()));
        r.numeric_composition = std::max(r.numeric_composition, std::abs(num - ref) / peak);

        r.unitarity = std::max(r.unitarity, std::abs((direct.conj() * direct).integral() - 1.0));
    }
    return r;
}

}  // namespace ptm

#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ptm/gaussian.hpp"
#include "ptm/model.hpp"

namespace ptm {

/// Displacement from rest under constant force: f T^2 / 2m.
template <class S>
S xi_const(S f, S T, S m) {
    return f * T * T / (S(2) * m);
}

/// Displacement from rest with force fa on [0, s] and fb on [s, T].
template <class S>
S xi_two_segment(S fa, S fb, S T, S s, S m) {
    if (s < S(0) || s > T) throw std::domain_error("split point outside [0, T]");
    return fa / (S(2) * m) * (S(2) * T * s - s * s) + fb / (S(2) * m) * (T - s) * (T - s);
}

template <class S = double>
struct QP {
    S Q, P;
};

/// Linear and constant parts of the two-segment action, X Q + P.
template <class S>
QP<S> qp_coefficients(S fa, S fb, S T, S s, S m) {
    if (s < S(0) || s > T) throw std::domain_error("split point outside [0, T]");
    const S r = T - s;
    return {fa * s + fb * r, -fa * fa / (S(6) * m) * s * s * (S(3) * T - S(2) * s) - fb * fb / (S(6) * m) * r * r * r -
                                 fa * fb / (S(2) * m) * s * r * r};
}

/// Piecewise-quadratic classical motion under a force schedule.
class ClassicalTrajectory {
public:
    ClassicalTrajectory(ForceSchedule schedule, double m, double X0, double V0);

    /// Position and velocity at time t in [0, T].
    std::pair<double, double> at(double t) const;
    double action() const { return action_; }
    double final_position() const { return at(schedule_.duration()).first; }
    double final_velocity() const { return at(schedule_.duration()).second; }

private:
    ForceSchedule schedule_;
    double m_;
    std::vector<double> t0_, x0_, v0_;
    double action_ = 0.0;
};

ClassicalTrajectory classical_trajectory(const ForceSchedule& schedule, double m, double X0, double V0);
/// The classical path from Y at t = 0 to X at t = T (initial velocity solved for).
ClassicalTrajectory classical_path(const ForceSchedule& schedule, double m, double Y, double X);

struct KernelValue {
    Complex prefactor;  // sqrt(N m / (2 pi i hbar T))
    double phase;       // N S_cl / hbar
    Complex value;
};

/// Split of the per-particle classical action S_cl = gaussian + remainder
/// with gaussian = m (X - Y - xi_a)^2 / 2T.
struct ActionSplit {
    double gaussian;
    double remainder;
};

Complex kernel_prefactor(double T, const ModelParams& p);
/// Exact per-particle action for constant force, endpoints Y -> X.
double action_const_force(double X, double Y, double T, double f, double m);
ActionSplit action_split(double X, double Y, double T, double f, double m);

KernelValue kernel_const_force(double X, double Y, double T, double fa, const ModelParams& p);
KernelValue kernel_schedule(double X, double Y, const ForceSchedule& schedule, const ModelParams& p);

/// Exponent (log of the full kernel, prefactor included) for a constant
/// force, as a quadratic form in the final point X and initial point Y.
Quadratic2<double> kernel_exponent_const(double T, double f, const ModelParams& p);
/// Same for an arbitrary schedule, composed segment by segment.
Quadratic2<double> kernel_exponent(const ForceSchedule& schedule, const ModelParams& p);

struct DeltaLimit {
    double peak;
    double phase;  // N S_cl / hbar on the trajectory starting at rest from Y
};

DeltaLimit kernel_delta_limit(double Y, const ForceSchedule& schedule, const ModelParams& p);

/// Kernel table with columns X, Y, Re, Im.
void write_kernel_csv(std::ostream& os, const std::vector<double>& Xs, const std::vector<double>& Ys,
                      const ForceSchedule& schedule, const ModelParams& p);

/// Largest residuals of the kernel identities over a randomized battery of
/// two-segment schedules. All residuals are relative.
struct KernelCheckReport {
    int cases = 0;
    double composition = 0.0;          // composed exponent vs closed-form two-segment kernel
    double qp_identity = 0.0;          // closed-form action vs piecewise classical action
    double newton = 0.0;               // closed-form action vs RK4 integration of the motion
    double numeric_composition = 0.0;  // Gaussian probe propagated by quadrature over the split point
    double unitarity = 0.0;            // norm of the propagated probe
};

/// Forces in [-2, 2] f, durations in [0.2, 2], split points inside the
/// middle 60% of the interval. `panels` Gauss-Legendre panels per
/// intermediate-point integral.
KernelCheckReport kernel_checks(const ModelParams& p, int cases, std::uint64_t seed, int panels);

}  // namespace ptm

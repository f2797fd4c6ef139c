#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ptm {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

enum class UnitSystem { dimensionless, cgs };

struct ModelParams {
    double hbar = 1.0;
    double m = 1.0;
    double f = 1.0;  // force per unit eigenvalue, per particle
    double N = 1.0;  // real-valued so sweeps can use geometric grids
    double Delta = 0.05;
    UnitSystem units = UnitSystem::dimensionless;

    /// Diffusion broadening 1 + T^2 hbar^2 / (Delta^4 N^2 m^2).
    double rho(double T) const;
    /// Every violated constraint, empty when valid.
    std::vector<std::string> problems() const;
};

/// Object observable spectrum, object Hamiltonian (in the eigenbasis of the
/// observable) and initial amplitudes.
struct ObjectSystem {
    RVector lambdas;
    CMatrix H;
    CVector C;

    int d() const { return static_cast<int>(lambdas.size()); }
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
    std::string str() const;
};

ValidationReport validate(const ObjectSystem& sys);
ValidationReport validate(const ObjectSystem& sys, const ModelParams& p);

double channel_force(const ObjectSystem& sys, const ModelParams& p, int a);
/// theta_a = -(H_O)_aa / hbar.
double diagonal_phase_rate(const ObjectSystem& sys, const ModelParams& p, int a);
/// min_{a != b} |f_a - f_b|; every asymptotic coefficient divides by it.
double min_force_gap(const ObjectSystem& sys, const ModelParams& p);
/// Forces f * lambda as a vector.
RVector channel_forces(const ObjectSystem& sys, const ModelParams& p);

/// Piecewise-constant per-particle force history.
class ForceSchedule {
public:
    struct Segment {
        double duration;
        double force;
    };

    ForceSchedule() = default;
    explicit ForceSchedule(std::vector<Segment> segments);

    static ForceSchedule constant(double force, double T);
    /// force fa on [0, s], fb on [s, T]; zero-length pieces are dropped.
    static ForceSchedule two_segment(double fa, double fb, double T, double s);

    const std::vector<Segment>& segments() const { return segs_; }
    double duration() const { return T_; }
    bool empty() const { return segs_.empty(); }
    /// Force at time t (right-continuous).
    double force_at(double t) const;

private:
    std::vector<Segment> segs_;
    double T_ = 0.0;
};

/// Mass, length and time scales for converting between unit systems. The
/// dimensionless system has hbar = m = 1 when time = mass * length^2 / hbar.
struct UnitScales {
    double mass = 1.0;
    double length = 1.0;
    double time = 1.0;

    double energy() const { return mass * length * length / (time * time); }
    double action() const { return energy() * time; }
    double force() const { return energy() / length; }

    /// Natural scales: mass m, length Delta, time m Delta^2 / hbar.
    static UnitScales natural(const ModelParams& p);
};

/// Divide every dimensional quantity by its scale. The object Hamiltonian is
/// an energy and scales accordingly.
ModelParams to_scaled(const ModelParams& p, const UnitScales& u);
ModelParams from_scaled(const ModelParams& p, const UnitScales& u);
ObjectSystem to_scaled(const ObjectSystem& s, const UnitScales& u);
ObjectSystem from_scaled(const ObjectSystem& s, const UnitScales& u);

}  // namespace ptm

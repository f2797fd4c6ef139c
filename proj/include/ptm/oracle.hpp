#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ptm/model.hpp"
#include "ptm/perturbation.hpp"

namespace ptm {

struct GridSpec {
    double lo = 0.0;
    double h = 0.0;
    long n = 0;

    double x(long i) const { return lo + h * double(i); }
    double hi() const { return x(n - 1); }
};

/// Power-of-two periodic grid wide enough for every classical excursion plus
/// 12 spread widths, with Nyquist wavenumber above the largest accumulated
/// momentum plus 12 / Delta.
GridSpec auto_grid(const ObjectSystem& sys, const ModelParams& p, double T);

struct GridState {
    GridSpec grid;
    CMatrix psi;  // n x d, column b is channel b
    double t = 0.0;

    int d() const { return int(psi.cols()); }
    double norm() const;
    RVector populations() const;
    /// Mass in the outermost five points at each end.
    double boundary_mass() const;
};

GridState initial_state(const ObjectSystem& sys, const ModelParams& p, const GridSpec& grid);

/// Raised when an invariant of the evolution is violated.
struct OracleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EvolveOptions {
    double dt = 0.0;  // 0 selects default_dt
    double norm_tol = 1e-10;
    double boundary_tol = 1e-10;
    double spectral_tol = 1e-10;
    std::string checkpoint_path;  // written at the end when non-empty
};

struct EvolveReport {
    double dt = 0.0;
    long steps = 0;
    double norm_drift = 0.0;
    double boundary_mass = 0.0;
    double spectral_edge_mass = 0.0;
};

/// min(hbar / (20 max|spec H_O|), T / 2000).
double default_dt(const ObjectSystem& sys, const ModelParams& p, double T);

/// Strang splitting for i hbar dPsi/dt = [H_O + P^2/2Nm - N f Lambda X] Psi.
GridState evolve(const ObjectSystem& sys, const ModelParams& p, const GridSpec& grid, double T,
                 const EvolveOptions& opt = {}, EvolveReport* report = nullptr);
/// Continue an existing state up to time T_end.
GridState evolve_from(GridState state, const ObjectSystem& sys, const ModelParams& p, double T_end,
                      const EvolveOptions& opt = {}, EvolveReport* report = nullptr);

/// Single-channel pointer wave function propagated under a force schedule
/// (no object dynamics).
GridState propagate_schedule(const GridState& start, const ForceSchedule& schedule, const ModelParams& p, double dt);

/// Gaussian of width Delta at the origin on the grid (one channel).
GridState gaussian_state(const ModelParams& p, const GridSpec& grid);

SignalField signal_from_state(const GridState& s, const ObjectSystem& sys, const ModelParams& p);

/// Fraction of the squared norm in the top 5% of wavenumbers.
double spectral_edge_mass(const GridState& s);

/// Matrix of U^(k)_{ba}(X, Y) for k = 0, 1, 2 by nested time quadrature of
/// multi-segment kernels.
CMatrix dyson_term(int k, const ObjectSystem& sys, const ModelParams& p, double X, double Y, double T,
                   double rel_tol = 1e-9);

/// Order-k wave function of channel b at X with the initial Gaussian
/// integrated out analytically (k = 0, 1).
Complex dyson_psi(int k, int b, double X, const ObjectSystem& sys, const ModelParams& p, double T,
                  double rel_tol = 1e-10);

/// <Psi^(0)_b | Psi^(k)_b> over the full line for k = 1, 2; the order-k
/// channel weight is twice its real part (k = 2 adds |Psi^(1)_b|^2 separately).
Complex dyson_overlap(int k, int b, const ObjectSystem& sys, const ModelParams& p, double T, double rel_tol = 1e-10);

struct ScalingFit {
    std::vector<std::pair<double, double>> samples;
    double slope = 0.0;
    double intercept = 0.0;  // prefactor: value ~ intercept * N^slope
    double residual = 0.0;   // max relative deviation from the fit
};

ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& samples);

/// Hash of every parameter that influences an evolution.
std::string parameter_hash(const ObjectSystem& sys, const ModelParams& p);

void save_checkpoint(const std::string& path, const GridState& s, const std::string& hash);
/// Throws OracleError when the stored hash differs from `expected_hash`.
GridState load_checkpoint(const std::string& path, const std::string& expected_hash);

}  // namespace ptm

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ptm/model.hpp"
#include "ptm/perturbation.hpp"

namespace ptm {

/// Malformed or inconsistent configuration (CLI exit code 3).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SignalConfig {
    std::vector<int> orders{0, 1};
    bool oracle = false;
    double grid_lo = 0.0, grid_hi = 0.0, grid_h = 0.0;  // all zero selects default_grid
    J1Route route = J1Route::phi;
    RhoMode rho_mode = RhoMode::exact;
    double sum_rule_tol = 1e-6;  // relative to the largest |J| of the order
};

struct SweepConfig {
    std::vector<double> N{1e3, 3e3, 1e4, 3e4, 1e5};
    /// J1_weight | J2_diagonal | J2_offdiagonal | oracle_residual | synthetic
    std::string quantity = "J1_weight";
    int channel = 0;
    double expected_slope = 0.0;
    double slope_tol = 0.0;  // zero disables the slope check
    double synthetic_prefactor = 3.0;
    double synthetic_exponent = -1.0;
};

struct KernelsConfig {
    int cases = 100;
    std::uint64_t seed = 1;
    double residual_tol = 1e-8;
    int composition_panels = 4096;  // Gauss-Legendre panels per intermediate-point integral
};

/// Inputs of the order-of-magnitude chain, cgs.
struct EstimatesConfig {
    double hbar = 1.0546e-27;
    double m = 9.1e-28;
    double Delta = 1e-3;
    double a = 1e-7;
    double energy = 1.6e-12;
};

struct OracleConfig {
    double dt = 0.0;
    double norm_tol = 1e-10;
    double boundary_tol = 1e-10;
    double spectral_tol = 1e-10;
    std::string checkpoint;
    double compare_tol = 1e-6;  // |oracle - expansion| allowed by oracle-compare
};

struct RunConfig {
    ModelParams params;
    ObjectSystem system;
    bool has_system = false;  // estimates needs none
    double T = 1.0;
    QuadOptions quadrature;
    SignalConfig signal;
    SweepConfig sweep;
    KernelsConfig kernels;
    EstimatesConfig estimates;
    OracleConfig oracle;
};

/// Every key is optional; unknown keys are rejected.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// Fully resolved configuration, defaults filled in.
nlohmann::ordered_json to_json(const RunConfig& c);

}  // namespace ptm

#pragma once

#include <string>
#include <vector>

#include "ptm/model.hpp"
#include "ptm/perturbation.hpp"

namespace ptm {

struct DeltaConstants {
    double gamma;        // integral of exp(-z^4) over the real line
    double gamma_prime;  // integral of cos(z^3) over the real line
    double gamma_identity;        // 2 Gamma(5/4)
    double gamma_prime_identity;  // 2 Gamma(4/3) cos(pi/6)
};

DeltaConstants delta_limit_constants();

/// How the cubic stationary point of an off-diagonal pair is integrated.
/// symmetric: both sides of the peak, giving the real constant gamma'.
/// one_sided: insertion times are non-negative, so only one side contributes
/// (factor exp(i sigma pi/6) / 2cos(pi/6)) and pairs whose forces straddle
/// f_b have no momentum-matching ridge at all.
enum class RidgeForm { symmetric, one_sided };

double K1(int b, const ObjectSystem& sys, const ModelParams& p);
double K2_diag(int b, const ObjectSystem& sys, const ModelParams& p);
double K2_offdiag(int b, const ObjectSystem& sys, const ModelParams& p, std::vector<std::string>* warnings = nullptr,
                  RidgeForm form = RidgeForm::symmetric);

/// Cubic coefficient of the off-diagonal stationary point (T-independent form).
double cubic_coefficient(double fa2, double fa, double fb, double m);

/// Leading second-order terms in the same (a', a) layout as the finite-N
/// decomposition, scaled so that the N-dependence is removed: diagonal
/// entries multiply 1/N, off-diagonal entries 1/N^(4/3).
SecondOrderDecomposition second_order_limit(const ObjectSystem& sys, const ModelParams& p, double T,
                                            std::vector<std::string>* warnings = nullptr,
                                            RidgeForm form = RidgeForm::symmetric);

struct AsymptoticSummary {
    RVector position;
    RVector C2;  // |C_b|^2
    RVector A1, A2, B;
    std::vector<std::string> warnings;

    double weight(int b, double N) const;
};

AsymptoticSummary coefficients_AbBb(const ObjectSystem& sys, const ModelParams& p, double T,
                                    RidgeForm form = RidgeForm::symmetric);

struct DetectorEstimates {
    double kinetic_energy;     // hbar^2 / (m a^2), erg
    double min_time;           // T >> sqrt(2 m Delta a / (f_a a)), s
    double first_order;        // A_b1 / N ~ (a / Delta) / N
    double second_order;       // A_b2 / N ~ sqrt(f_a a / E_kin) sqrt(a / Delta) / N
    double cubic_order;        // B_b / N^(4/3) ~ (f_a a / E_kin)^(1/3) (a / Delta) / N^(4/3)
};

/// Order-of-magnitude chain in cgs units: m [g], hbar [erg s], Delta and a
/// [cm], energy = f_a a [erg].
DetectorEstimates detector_estimates(const ModelParams& cgs, double a_atomic, double energy);

std::string to_json(const AsymptoticSummary& s, double N);
std::string to_json(const DetectorEstimates& e);

}  // namespace ptm

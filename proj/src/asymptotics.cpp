#include "ptm/asymptotics.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "ptm/kernels.hpp"
#include "ptm/quadrature.hpp"

namespace ptm {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

DeltaConstants delta_limit_constants() {
    DeltaConstants c{};
    // exp(-z^4) is below 1e-300 beyond z = 6.5
    c.gamma = 2 * adaptive_integrate([](double z) { return std::exp(-z * z * z * z); }, 0.0, 6.5, 1e-14).value;

    // cos(z^3) between consecutive zeros z_k = ((k + 1/2) pi)^(1/3) gives an
    // alternating series; sum it with Wynn's epsilon.
    auto piece = [](double a, double b) {
        return adaptive_integrate([](double z) { return std::cos(z * z * z); }, a, b, 1e-15, 1e-17).value;
    };
    auto zero = [](int k) { return std::cbrt((k + 0.5) * kPi); };
    std::vector<double> partial;
    double acc = piece(0.0, zero(0));
    for (int k = 0; k < 60; ++k) {
        acc += piece(zero(k), zero(k + 1));
        partial.push_back(acc);
    }
    c.gamma_prime = 2 * wynn_epsilon(partial);

    c.gamma_identity = 2 * std::tgamma(1.25);
    c.gamma_prime_identity = 2 * std::tgamma(4.0 / 3.0) * std::cos(kPi / 6);
    return c;
}

namespace {

const DeltaConstants& constants() {
    static const DeltaConstants c = delta_limit_constants();
    return c;
}

double diag_prefactor(const ModelParams& p) {
    return std::sqrt(2.0) * constants().gamma * std::sqrt(p.m * kPi) / (std::sqrt(p.Delta) * p.hbar);
}

double offdiag_prefactor(const ModelParams& p) {
    return 2 * constants().gamma_prime * p.m * std::sqrt(kPi) / (p.Delta * p.hbar);
}

void require_valid(const ObjectSystem& sys, const ModelParams& p) {
    const auto r = validate(sys, p);
    if (!r.ok()) throw std::invalid_argument("invalid system: " + r.str());
}

}  // namespace

double K1(int b, const ObjectSystem& sys, const ModelParams& p) {
    require_valid(sys, p);
    const RVector f = channel_forces(sys, p);
    double acc = 0;
    for (int a = 0; a < sys.d(); ++a) {
        if (a == b) continue;
        acc += 2 * (std::conj(sys.C[b]) * sys.H(b, a) * sys.C[a]).imag() / std::abs(f[a] - f[b]);
    }
    return std::sqrt(kPi) / p.Delta * acc;
}

double K2_diag(int b, const ObjectSystem& sys, const ModelParams& p) {
    require_valid(sys, p);
    const RVector f = channel_forces(sys, p);
    double acc = 0;
    for (int a = 0; a < sys.d(); ++a) {
        if (a == b || sys.H(b, a) == 0.0 || sys.C[a] == 0.0) continue;
        if (f[a] == 0) throw std::domain_error("zero channel force: quartic delta limit degenerates");
        acc += std::norm(sys.H(b, a)) * std::norm(sys.C[a]) / (std::abs(f[a] - f[b]) * std::sqrt(std::abs(f[a])));
    }
    return diag_prefactor(p) * acc;
}

double cubic_coefficient(double fa2, double fa, double fb, double m) {
    const double d1 = fa - fb, d2 = fa2 - fb;
    return m * m / 6 * (fa - fa2) * (fa * fb + fa2 * fb - 2 * fa * fa2) / (d1 * d1 * d2 * d2);
}

SecondOrderDecomposition second_order_limit(const ObjectSystem& sys, const ModelParams& p, double T,
                                            std::vector<std::string>* warnings, RidgeForm form) {
    require_valid(sys, p);
    const int d = sys.d();
    const RVector f = channel_forces(sys, p);
    SecondOrderDecomposition out;
    out.positions.resize(d);
    for (int b = 0; b < d; ++b) out.positions[b] = xi_const(f[b], T, p.m);
    out.terms.assign(d, CMatrix::Zero(d, d));
    const double kd = diag_prefactor(p), ko = offdiag_prefactor(p);
    for (int b = 0; b < d; ++b)
        for (int a = 0; a < d; ++a) {
            if (a == b || sys.H(b, a) == 0.0) continue;
            for (int a2 = 0; a2 < d; ++a2) {
                if (a2 == b || sys.H(b, a2) == 0.0) continue;
                const Complex mono = std::conj(sys.H(b, a2) * sys.C[a2]) * sys.H(b, a) * sys.C[a];
                if (mono == 0.0) continue;
                if (a2 == a) {
                    if (f[a] == 0) throw std::domain_error("zero channel force: quartic delta limit degenerates");
                    out.terms[b](a, a) = kd * mono / (std::abs(f[a] - f[b]) * std::sqrt(std::abs(f[a])));
                    continue;
                }
                const double c = cubic_coefficient(f[a2], f[a], f[b], p.m);
                if (c == 0) {
                    if (warnings)
                        warnings->push_back("vanishing cubic coefficient for triple (" + std::to_string(a2) + "," +
                                            std::to_string(a) + ";" + std::to_string(b) + "), excluded");
                    continue;
                }
                Complex t = ko * mono * std::cbrt(p.hbar) /
                            (std::abs(f[a] - f[b]) * std::abs(f[a2] - f[b]) * std::cbrt(std::abs(c)));
                if (form == RidgeForm::one_sided) {
                    if ((f[a] - f[b]) * (f[a2] - f[b]) < 0) continue;
                    // sign of the ridge phase s^3 coefficient
                    const double sigma = (c > 0) == (f[a] > f[b]) ? 1.0 : -1.0;
                    t *= std::polar(1.0, sigma * kPi / 6) / (2 * std::cos(kPi / 6));
                }
                out.terms[b](a2, a) = t;
            }
        }
    return out;
}

double K2_offdiag(int b, const ObjectSystem& sys, const ModelParams& p, std::vector<std::string>* warnings,
                  RidgeForm form) {
    return second_order_limit(sys, p, 1.0, warnings, form).offdiagonal(b);
}

double AsymptoticSummary::weight(int b, double N) const {
    return C2[b] + (A1[b] + A2[b]) / N + B[b] / std::pow(N, 4.0 / 3.0);
}

AsymptoticSummary coefficients_AbBb(const ObjectSystem& sys, const ModelParams& p, double T, RidgeForm form) {
    const int d = sys.d();
    AsymptoticSummary s;
    const auto v = second_order_limit(sys, p, T, &s.warnings, form);
    const auto w = J2_2_from_sum_rule(v);
    s.position = v.positions;
    s.C2.resize(d);
    s.A1.resize(d);
    s.A2.resize(d);
    s.B.resize(d);
    for (int b = 0; b < d; ++b) {
        s.C2[b] = std::norm(sys.C[b]);
        s.A1[b] = K1(b, sys, p);
        s.A2[b] = v.diagonal(b) + w.diagonal[b];
        s.B[b] = v.offdiagonal(b) + w.offdiagonal[b];
    }
    return s;
}

DetectorEstimates detector_estimates(const ModelParams& cgs, double a, double energy) {
    DetectorEstimates e{};
    e.kinetic_energy = cgs.hbar * cgs.hbar / (cgs.m * a * a);
    e.min_time = std::sqrt(2 * cgs.m * cgs.Delta * a / energy);
    e.first_order = a / cgs.Delta;
    e.second_order = std::sqrt(energy / e.kinetic_energy) * std::sqrt(a / cgs.Delta);
    e.cubic_order = std::cbrt(energy / e.kinetic_energy) * (a / cgs.Delta);
    return e;
}

std::string to_json(const AsymptoticSummary& s, double N) {
    nlohmann::ordered_json j;
    j["N"] = N;
    j["units"] = "weights are pure numbers; A multiplies 1/N, B multiplies 1/N^(4/3)";
    for (int b = 0; b < int(s.C2.size()); ++b)
        j["channels"].push_back({{"b", b},
                                 {"position", s.position[b]},
                                 {"C2", s.C2[b]},
                                 {"A1", s.A1[b]},
                                 {"A2", s.A2[b]},
                                 {"B", s.B[b]},
                                 {"weight", s.weight(b, N)}});
    j["warnings"] = s.warnings;
    return j.dump(2);
}

std::string to_json(const DetectorEstimates& e) {
    nlohmann::ordered_json j;
    j["kinetic_energy"] = {{"value", e.kinetic_energy}, {"unit", "erg"}};
    j["min_time"] = {{"value", e.min_time}, {"unit", "s"}};
    j["first_order"] = {{"value", e.first_order}, {"unit", "1 (times 1/N)"}};
    j["second_order"] = {{"value", e.second_order}, {"unit", "1 (times 1/N)"}};
    j["cubic_order"] = {{"value", e.cubic_order}, {"unit", "1 (times 1/N^(4/3))"}};
    return j.dump(2);
}

}  // namespace ptm

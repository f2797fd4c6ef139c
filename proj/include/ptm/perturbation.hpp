#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ptm/gaussian.hpp"
#include "ptm/model.hpp"
#include "ptm/quadrature.hpp"

namespace ptm {

struct QuadOptions {
    double rel_tol = 1e-7;  // relative change between panel doublings
    double abs_tol = 1e-12;
    int max_panels = 1 << 16;
    /// Envelope cut: integrand windows keep |R| <= cut_sigmas * Delta sqrt(rho).
    double cut_sigmas = 9.5;
};

struct QuadDiagnostics {
    long evaluations = 0;
    int max_panels = 0;
    double max_error = 0.0;
    int failures = 0;

    void add(const QuadResult<Complex>& r);
    void merge(const QuadDiagnostics& o);
};

enum class RhoMode { exact, unity };

/// Precomputed per-(system, params, T) quantities shared by all evaluators.
struct PointerContext {
    ObjectSystem sys;
    ModelParams p;
    double T;
    RVector f;       // channel forces
    RVector theta;   // diagonal phase rates
    RVector xi;      // xi_b(T)
    double rho;
    Complex alpha;   // X^2 coefficient of the propagated Gaussian exponent
    Complex log_pre; // log of (pi Delta^2)^(-1/4) sqrt(Nm/2 pi i hbar T) sqrt(2 pi / D)

    PointerContext(const ObjectSystem& sys, const ModelParams& p, double T);
    int d() const { return sys.d(); }
    double width() const;  // Delta sqrt(rho)

    /// Exponent in X of the order-one integrand for a transition a -> b at
    /// time s, phases theta_a s + theta_b (T - s) included; a == b gives the
    /// order-zero wave function divided by C_b.
    Gaussian1<double> transition(int a, int b, double s) const;
    /// Window [s0, s1] in which |X - xi_ba(T, s)| <= cut; empty when s0 > s1.
    std::pair<double, double> s_window(int a, int b, double X, double cut) const;
    /// Rough bound on the s-derivative of the integrand phase at X.
    double phase_rate(int a, int b, double X) const;
};

struct XGrid {
    std::vector<double> X;
    double h() const { return X.size() > 1 ? X[1] - X[0] : 0.0; }
};

XGrid uniform_grid(double lo, double hi, double h);
/// Spacing <= Delta/8 (finer when order-one cross terms oscillate faster),
/// extent covering all peaks +- max(8 Delta sqrt(rho), 3 min-gap).
XGrid default_grid(const PointerContext& ctx);

struct SignalField {
    std::vector<double> X;
    std::vector<std::vector<double>> per_channel;  // d densities
    std::vector<double> total;
    std::string order_tag;
    std::vector<double> peaks;  // xi_b(T)
    /// Optional split of the total (second order: diagonal / off-diagonal).
    std::vector<std::pair<std::string, std::vector<double>>> parts;
    QuadDiagnostics diagnostics;
};

Complex psi0(int b, double X, double T, const ObjectSystem& sys, const ModelParams& p);
Complex psi0(const PointerContext& ctx, int b, double X);
SignalField J0(double T, const ObjectSystem& sys, const ModelParams& p, const XGrid& grid);

/// Order-one wave function for channel b, contribution of source channel a only.
QuadResult<Complex> psi1_from(const PointerContext& ctx, int a, int b, double X, const QuadOptions& q = {});
QuadResult<Complex> psi1(const PointerContext& ctx, int b, double X, const QuadOptions& q = {});
QuadResult<Complex> psi1(int b, double X, double T, const ObjectSystem& sys, const ModelParams& p,
                         const QuadOptions& q = {});

enum class J1Route { raw, phi };

SignalField J1_field(double T, const ObjectSystem& sys, const ModelParams& p, const XGrid& grid,
                     const QuadOptions& q = {}, J1Route route = J1Route::phi, RhoMode mode = RhoMode::exact,
                     int threads = 1);

/// Channel weight of the order-one signal by analytic X integration and a
/// one-dimensional quadrature in y = N s.
double J1_weight(int b, double T, const ObjectSystem& sys, const ModelParams& p, double rel_tol = 1e-11);

SignalField J2_1_field(double T, const ObjectSystem& sys, const ModelParams& p, const XGrid& grid,
                       const QuadOptions& q = {}, int threads = 1);

/// Per-channel decomposition of the full-line |Psi^(1)|^2 weight: entry
/// (a', a) of terms[b] is conj(H_ba' C_a') H_ba C_a V_{a'a;b} / hbar^2, so the
/// channel-b weight is the real part of the sum of all entries.
struct SecondOrderDecomposition {
    std::vector<CMatrix> terms;
    RVector positions;

    double weight(int b) const;
    double diagonal(int b) const;
    double offdiagonal(int b) const;
};

SecondOrderDecomposition J2_1_decomposition(double T, const ObjectSystem& sys, const ModelParams& p,
                                            double rel_tol = 1e-9);

/// Delta-limit representation: weights at peak positions.
struct SignalSummary {
    RVector positions;
    RVector weights;
    RVector diagonal;
    RVector offdiagonal;
    std::string order_tag;
};

/// Order-two signal from the normalization identity W = -V: the term with
/// outer index a' moves to channel a' with the opposite sign.
SignalSummary J2_2_from_sum_rule(const SecondOrderDecomposition& v);

/// Trapezoid integral of a chosen array over [xi_b - delta, xi_b + delta].
double channel_weight(const SignalField& field, int b, double delta, double width = 0.0,
                      const std::vector<double>* values = nullptr);
double default_half_width(const SignalField& field);

/// Trapezoid integral over the whole grid.
double integrate(const std::vector<double>& X, const std::vector<double>& y);

void write_csv(std::ostream& os, const SignalField& field);
std::string sidecar_json(const SignalField& field, const PointerContext& ctx);

}  // namespace ptm

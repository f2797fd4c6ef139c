#include "ptm/oracle.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#define EIGEN_FFTW_DEFAULT
#include <unsupported/Eigen/FFT>

#include <json.hpp>

#include "ptm/hash.hpp"
#include "ptm/kernels.hpp"
#include "ptm/quadrature.hpp"

namespace ptm {

namespace {

constexpr double kPi = 3.14159265358979323846;
const Complex I(0.0, 1.0);

long next_pow2(double x) {
    long n = 64;
    while (double(n) < x) n *= 2;
    return n;
}

/// Strang stepper: kinetic phases in wavenumber space, potential as a
/// pointwise d x d unitary.
class Stepper {
public:
    Stepper(const GridSpec& g, int d, const ModelParams& p, double dt) : g_(g), d_(d), dt_(dt), buf_(g.n) {
        kin_half_.resize(g.n);
        kin_full_.resize(g.n);
        const double dk = 2 * kPi / (double(g.n) * g.h);
        for (long j = 0; j < g.n; ++j) {
            const double k = dk * double(j < g.n / 2 ? j : j - g.n);
            const double w = p.hbar * k * k / (2 * p.N * p.m);
            kin_half_[j] = std::polar(1.0, -0.5 * w * dt);
            kin_full_[j] = std::polar(1.0, -w * dt);
        }
    }

    /// Potential H - N diag(forces) X for the next stretch of steps.
    void set_potential(const CMatrix& H, const RVector& forces, const ModelParams& p) {
        const long n = g_.n;
        U_.resize(size_t(n) * d_ * d_);
        const double tau = dt_ / p.hbar;
        if (d_ == 1) {
            for (long i = 0; i < n; ++i)
                U_[i] = std::polar(1.0, -(H(0, 0).real() - p.N * forces[0] * g_.x(i)) * tau);
            return;
        }
        if (d_ == 2) {
            const Complex h12 = H(0, 1), h21 = H(1, 0);
            const double a12 = std::abs(h12);
            for (long i = 0; i < n; ++i) {
                const double X = g_.x(i);
                const double v1 = H(0, 0).real() - p.N * forces[0] * X;
                const double v2 = H(1, 1).real() - p.N * forces[1] * X;
                const double mean = 0.5 * (v1 + v2), half = 0.5 * (v1 - v2);
                const double w = std::hypot(half, a12);
                const double c = std::cos(w * tau);
                const double sw = w > 0 ? std::sin(w * tau) / w : tau;
                const Complex ph = std::polar(1.0, -mean * tau);
                Complex* u = &U_[size_t(i) * 4];
                u[0] = ph * (c - I * sw * half);
                u[1] = ph * (-I * sw * h12);
                u[2] = ph * (-I * sw * h21);
                u[3] = ph * (c + I * sw * half);
            }
            return;
        }
        Eigen::SelfAdjointEigenSolver<CMatrix> es;
        CMatrix M(d_, d_);
        for (long i = 0; i < n; ++i) {
            M = H;
            for (int a = 0; a < d_; ++a) M(a, a) -= p.N * forces[a] * g_.x(i);
            es.compute(M);
            const CVector ph = (-I * tau * es.eigenvalues().cast<Complex>()).array().exp();
            const CMatrix u = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
            for (int r = 0; r < d_; ++r)
                for (int c = 0; c < d_; ++c) U_[size_t(i) * d_ * d_ + r * d_ + c] = u(r, c);
        }
    }

    void kinetic(CMatrix& psi, bool half) {
        const auto& ph = half ? kin_half_ : kin_full_;
        for (int b = 0; b < d_; ++b) {
            Complex* col = psi.data() + size_t(b) * g_.n;
            fft_.fwd(buf_.data(), col, g_.n);
            for (long j = 0; j < g_.n; ++j) buf_[j] *= ph[j];
            fft_.inv(col, buf_.data(), g_.n);
        }
    }

    void potential(CMatrix& psi) const {
        const long n = g_.n;
        if (d_ == 1) {
            for (long i = 0; i < n; ++i) psi(i, 0) *= U_[i];
            return;
        }
        if (d_ == 2) {
            for (long i = 0; i < n; ++i) {
                const Complex* u = &U_[size_t(i) * 4];
                const Complex a = psi(i, 0), b = psi(i, 1);
                psi(i, 0) = u[0] * a + u[1] * b;
                psi(i, 1) = u[2] * a + u[3] * b;
            }
            return;
        }
        CVector v(d_);
        for (long i = 0; i < n; ++i) {
            const Complex* u = &U_[size_t(i) * d_ * d_];
            for (int r = 0; r < d_; ++r) {
                Complex acc = 0;
                for (int c = 0; c < d_; ++c) acc += u[r * d_ + c] * psi(i, c);
                v[r] = acc;
            }
            psi.row(i) = v.transpose();
        }
    }

    /// `steps` Strang steps with adjacent kinetic half-steps merged.
    void run(CMatrix& psi, long steps) {
        if (steps <= 0) return;
        kinetic(psi, true);
        for (long s = 0; s < steps; ++s) {
            potential(psi);
            kinetic(psi, s + 1 == steps);
        }
    }

private:
    GridSpec g_;
    int d_;
    double dt_;
    std::vector<Complex> kin_half_, kin_full_, U_;
    std::vector<Complex> buf_;
    Eigen::FFT<double> fft_;
};

void check_state(const GridState& s, const EvolveOptions& opt, EvolveReport& rep, double norm0) {
    rep.norm_drift = std::abs(s.norm() - norm0);
    rep.boundary_mass = s.boundary_mass();
    rep.spectral_edge_mass = spectral_edge_mass(s);
    std::ostringstream os;
    os.precision(3);
    if (rep.norm_drift > opt.norm_tol) {
        os << "norm drift " << rep.norm_drift << " exceeds " << opt.norm_tol;
        throw OracleError(os.str());
    }
    if (rep.boundary_mass > opt.boundary_tol) {
        os << "boundary mass " << rep.boundary_mass << " exceeds " << opt.boundary_tol << " at t = " << s.t
           << "; enlarge the domain";
        throw OracleError(os.str());
    }
    if (rep.spectral_edge_mass > opt.spectral_tol) {
        os << "spectral edge mass " << rep.spectral_edge_mass << " exceeds " << opt.spectral_tol << " at t = " << s.t
           << "; refine the grid";
        throw OracleError(os.str());
    }
}

}  // namespace

GridSpec auto_grid(const ObjectSystem& sys, const ModelParams& p, double T) {
    const RVector f = channel_forces(sys, p);
    double xmin = 0, xmax = 0;
    for (int a = 0; a < sys.d(); ++a) {
        xmin = std::min(xmin, xi_const(f[a], T, p.m));
        xmax = std::max(xmax, xi_const(f[a], T, p.m));
    }
    const double pad = 12 * p.Delta * std::sqrt(p.rho(T));
    const double lo = xmin - pad, hi = xmax + pad;
    const double kmax = p.N * f.cwiseAbs().maxCoeff() * T / p.hbar + 12 / p.Delta;
    const long n = next_pow2((hi - lo) * kmax / kPi);
    return {lo, (hi - lo) / double(n), n};
}

double GridState::norm() const { return psi.squaredNorm() * grid.h; }

RVector GridState::populations() const { return psi.colwise().squaredNorm().transpose() * grid.h; }

double GridState::boundary_mass() const {
    const long n = grid.n, k = std::min<long>(5, n);
    return (psi.topRows(k).squaredNorm() + psi.bottomRows(k).squaredNorm()) * grid.h;
}

GridState gaussian_state(const ModelParams& p, const GridSpec& grid) {
    GridState s;
    s.grid = grid;
    s.psi.resize(grid.n, 1);
    const double D = p.Delta, c = std::pow(kPi * D * D, -0.25);
    for (long i = 0; i < grid.n; ++i) {
        const double x = grid.x(i);
        s.psi(i, 0) = c * std::exp(-x * x / (2 * D * D));
    }
    return s;
}

GridState initial_state(const ObjectSystem& sys, const ModelParams& p, const GridSpec& grid) {
    const GridState g = gaussian_state(p, grid);
    GridState s;
    s.grid = grid;
    s.psi = g.psi.col(0) * sys.C.transpose();
    return s;
}

double default_dt(const ObjectSystem& sys, const ModelParams& p, double T) {
    double dt = T / 2000;
    const double e = Eigen::SelfAdjointEigenSolver<CMatrix>(sys.H, Eigen::EigenvaluesOnly)
                         .eigenvalues()
                         .cwiseAbs()
                         .maxCoeff();
    if (e > 0) dt = std::min(dt, p.hbar / (20 * e));
    return dt;
}

GridState evolve_from(GridState state, const ObjectSystem& sys, const ModelParams& p, double T_end,
                      const EvolveOptions& opt, EvolveReport* report) {
    EvolveReport rep;
    const double span = T_end - state.t;
    if (span < 0) throw std::invalid_argument("target time precedes the state time");
    const double dt0 = opt.dt > 0 ? opt.dt : default_dt(sys, p, T_end);
    rep.steps = span > 0 ? long(std::ceil(span / dt0 - 1e-9)) : 0;
    rep.dt = rep.steps ? span / double(rep.steps) : dt0;
    const double norm0 = state.norm();
    if (state.boundary_mass() > opt.boundary_tol) throw OracleError("initial state touches the domain boundary");
    if (rep.steps > 0) {
        Stepper st(state.grid, state.d(), p, rep.dt);
        st.set_potential(sys.H, channel_forces(sys, p), p);
        st.run(state.psi, rep.steps);
        state.t = T_end;
    }
    check_state(state, opt, rep, norm0);
    if (!opt.checkpoint_path.empty()) save_checkpoint(opt.checkpoint_path, state, parameter_hash(sys, p));
    if (report) *report = rep;
    return state;
}

GridState evolve(const ObjectSystem& sys, const ModelParams& p, const GridSpec& grid, double T,
                 const EvolveOptions& opt, EvolveReport* report) {
    return evolve_from(initial_state(sys, p, grid), sys, p, T, opt, report);
}

GridState propagate_schedule(const GridState& start, const ForceSchedule& schedule, const ModelParams& p, double dt) {
    if (start.d() != 1) throw std::invalid_argument("schedule propagation acts on one channel");
    GridState s = start;
    const CMatrix H = CMatrix::Zero(1, 1);
    for (const auto& seg : schedule.segments()) {
        const long steps = std::max(1L, long(std::ceil(seg.duration / dt - 1e-9)));
        Stepper st(s.grid, 1, p, seg.duration / double(steps));
        RVector f(1);
        f[0] = seg.force;
        st.set_potential(H, f, p);
        st.run(s.psi, steps);
        s.t += seg.duration;
    }
    return s;
}

SignalField signal_from_state(const GridState& s, const ObjectSystem& sys, const ModelParams& p) {
    SignalField out;
    out.order_tag = "exact";
    const long n = s.grid.n;
    out.X.resize(n);
    for (long i = 0; i < n; ++i) out.X[i] = s.grid.x(i);
    const RVector f = channel_forces(sys, p);
    out.per_channel.assign(s.d(), std::vector<double>(n));
    out.total.assign(n, 0.0);
    for (int b = 0; b < s.d(); ++b) {
        out.peaks.push_back(xi_const(f[b], s.t, p.m));
        for (long i = 0; i < n; ++i) {
            const double v = std::norm(s.psi(i, b));
            out.per_channel[b][i] = v;
            out.total[i] += v;
        }
    }
    return out;
}

double spectral_edge_mass(const GridState& s) {
    const long n = s.grid.n;
    Eigen::FFT<double> fft;
    std::vector<Complex> buf(n);
    double edge = 0, total = 0;
    const long cut = long(0.95 * double(n / 2));
    for (int b = 0; b < s.d(); ++b) {
        fft.fwd(buf.data(), s.psi.data() + size_t(b) * n, n);
        for (long j = 0; j < n; ++j) {
            const long k = j < n / 2 ? j : n - j;
            const double v = std::norm(buf[j]);
            total += v;
            if (k > cut) edge += v;
        }
    }
    return total > 0 ? edge / total : 0.0;
}

namespace {

ForceSchedule schedule_of(std::initializer_list<std::pair<double, double>> pieces) {
    std::vector<ForceSchedule::Segment> segs;
    for (auto [dur, force] : pieces)
        if (dur > 0) segs.push_back({dur, force});
    return ForceSchedule(std::move(segs));
}

int panels_for(const ModelParams& p, double df, double span, double len) {
    return 4 + int(std::ceil(p.N * std::abs(df) * span * len / (2 * kPi * p.hbar)));
}

Gaussian1<double> initial_gaussian(const ModelParams& p) {
    return {Complex(-1 / (2 * p.Delta * p.Delta)), 0.0, Complex(-0.25 * std::log(kPi * p.Delta * p.Delta))};
}

}  // namespace

CMatrix dyson_term(int k, const ObjectSystem& sys, const ModelParams& p, double X, double Y, double T, double rel_tol) {
    const int d = sys.d();
    const RVector f = channel_forces(sys, p);
    RVector th(d);
    for (int a = 0; a < d; ++a) th[a] = diagonal_phase_rate(sys, p, a);
    const double span = std::abs(X) + std::abs(Y) + f.cwiseAbs().maxCoeff() * T * T / p.m + 1.0;
    CMatrix U = CMatrix::Zero(d, d);
    if (k == 0) {
        for (int a = 0; a < d; ++a) U(a, a) = std::polar(1.0, th[a] * T) * kernel_const_force(X, Y, T, f[a], p).value;
        return U;
    }
    if (k == 1) {
        for (int b = 0; b < d; ++b)
            for (int a = 0; a < d; ++a) {
                if (a == b || sys.H(b, a) == 0.0) continue;
                auto g = [&](double s) {
                    return std::polar(1.0, th[a] * s + th[b] * (T - s)) *
                           kernel_schedule(X, Y, schedule_of({{s, f[a]}, {T - s, f[b]}}), p).value;
                };
                const auto r = doubling_integrate(g, 0.0, T, panels_for(p, f[a] - f[b], span, T), rel_tol, 0.0);
                U(b, a) = -I / p.hbar * sys.H(b, a) * r.value;
            }
        return U;
    }
    if (k == 2) {
        for (int b = 0; b < d; ++b)
            for (int a = 0; a < d; ++a)
                for (int c = 0; c < d; ++c) {
                    if (c == a || c == b || sys.H(b, c) == 0.0 || sys.H(c, a) == 0.0) continue;
                    const double df = std::max(std::abs(f[a] - f[c]), std::abs(f[c] - f[b]));
                    auto outer = [&](double s2) {
                        auto inner = [&](double s1) {
                            return std::polar(1.0, th[a] * s1 + th[c] * (s2 - s1) + th[b] * (T - s2)) *
                                   kernel_schedule(X, Y, schedule_of({{s1, f[a]}, {s2 - s1, f[c]}, {T - s2, f[b]}}), p)
                                       .value;
                        };
                        return doubling_integrate(inner, 0.0, s2, panels_for(p, df, span, s2), rel_tol, 0.0).value;
                    };
                    const auto r = doubling_integrate(outer, 0.0, T, panels_for(p, df, span, T), rel_tol, 0.0);
                    U(b, a) += -1.0 / (p.hbar * p.hbar) * sys.H(b, c) * sys.H(c, a) * r.value;
                }
        return U;
    }
    throw std::invalid_argument("Dyson order must be 0, 1 or 2");
}

Complex dyson_psi(int k, int b, double X, const ObjectSystem& sys, const ModelParams& p, double T, double rel_tol) {
    const int d = sys.d();
    const RVector f = channel_forces(sys, p);
    RVector th(d);
    for (int a = 0; a < d; ++a) th[a] = diagonal_phase_rate(sys, p, a);
    const auto phi = initial_gaussian(p);
    if (k == 0)
        return sys.C[b] * std::polar(1.0, th[b] * T) * kernel_exponent(ForceSchedule::constant(f[b], T), p).apply(phi)(X);
    if (k != 1) throw std::invalid_argument("wave-function oracle covers orders 0 and 1");
    const double span = std::abs(X) + f.cwiseAbs().maxCoeff() * T * T / p.m + 10 * p.Delta * std::sqrt(p.rho(T));
    Complex acc = 0;
    for (int a = 0; a < d; ++a) {
        if (a == b || sys.H(b, a) == 0.0) continue;
        auto g = [&](double s) {
            return std::polar(1.0, th[a] * s + th[b] * (T - s)) *
                   kernel_exponent(schedule_of({{s, f[a]}, {T - s, f[b]}}), p).apply(phi)(X);
        };
        const auto r = doubling_integrate(g, 0.0, T, panels_for(p, f[a] - f[b], span, T), rel_tol, 1e-16);
        acc += -I / p.hbar * sys.H(b, a) * sys.C[a] * r.value;
    }
    return acc;
}

Complex dyson_overlap(int k, int b, const ObjectSystem& sys, const ModelParams& p, double T, double rel_tol) {
    const int d = sys.d();
    if (sys.C[b] == 0.0) return 0.0;
    const RVector f = channel_forces(sys, p);
    RVector th(d);
    for (int a = 0; a < d; ++a) th[a] = diagonal_phase_rate(sys, p, a);
    const auto phi = initial_gaussian(p);
    const auto g0 = kernel_exponent(ForceSchedule::constant(f[b], T), p)
                        .apply(phi)
                        .scaled(sys.C[b] * std::polar(1.0, th[b] * T))
                        .conj();
    // a momentum mismatch N |df| s beyond w / Delta suppresses the overlap below exp(-49)
    const double w = 14 * p.hbar / (p.N * p.Delta);
    auto geometric = [](double lo, double hi) {
        std::vector<double> bp;
        for (double x = lo; x < hi; x *= 2) bp.push_back(x);
        return bp;
    };
    Complex acc = 0;
    if (k == 1) {
        for (int a = 0; a < d; ++a) {
            if (a == b || sys.H(b, a) == 0.0) continue;
            const double df = std::abs(f[a] - f[b]);
            const double smax = std::min(T, w / df);
            auto g = [&](double s) {
                const auto gs = kernel_exponent(schedule_of({{s, f[a]}, {T - s, f[b]}}), p).apply(phi);
                return std::polar(1.0, th[a] * s + th[b] * (T - s)) * (g0 * gs).integral();
            };
            const auto r = adaptive_integrate(g, 0.0, smax, rel_tol, 1e-16, geometric(smax / 64, smax));
            acc += -I / p.hbar * sys.H(b, a) * sys.C[a] * r.value;
        }
        return acc;
    }
    if (k != 2) throw std::invalid_argument("overlap oracle covers orders 1 and 2");
    for (int c = 0; c < d; ++c) {
        if (c == b || sys.H(b, c) == 0.0) continue;
        for (int a = 0; a < d; ++a) {
            if (a == c || sys.H(c, a) == 0.0 || sys.C[a] == 0.0) continue;
            // mismatch relative to channel b: (f_a - f_c) s1 + (f_c - f_b) s2
            const double dac = f[a] - f[c], dcb = f[c] - f[b];
            auto outer = [&](double s2) -> Complex {
                const double centre = -dcb * s2 / dac, half = w / std::abs(dac);
                const double lo = std::max(0.0, centre - half), hi = std::min(s2, centre + half);
                if (!(hi > lo)) return 0.0;
                auto inner = [&](double s1) {
                    const auto gs =
                        kernel_exponent(schedule_of({{s1, f[a]}, {s2 - s1, f[c]}, {T - s2, f[b]}}), p).apply(phi);
                    return std::polar(1.0, th[a] * s1 + th[c] * (s2 - s1) + th[b] * (T - s2)) * (g0 * gs).integral();
                };
                const double mid = std::clamp(centre, lo, hi);
                const double scale = std::abs(inner(mid)) * (hi - lo);
                return adaptive_integrate(inner, lo, hi, rel_tol * 1e-2, rel_tol * 1e-3 * scale, {mid}).value;
            };
            const auto r = adaptive_integrate(outer, 0.0, T, rel_tol, 1e-16 / p.N, geometric(w / 64, T), 200000);
            acc += -1.0 / (p.hbar * p.hbar) * sys.H(b, c) * sys.H(c, a) * sys.C[a] * r.value;
        }
    }
    return acc;
}

ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& samples) {
    if (samples.size() < 4) throw std::invalid_argument("scaling fit needs at least 4 samples");
    double nmin = INFINITY, nmax = 0;
    for (auto [N, v] : samples) {
        if (!(v > 0) || !(N > 0)) throw std::invalid_argument("scaling fit needs positive N and values");
        nmin = std::min(nmin, N);
        nmax = std::max(nmax, N);
    }
    if (std::log10(nmax / nmin) < 1.5 - 1e-9) throw std::invalid_argument("scaling fit needs 1.5 decades of N");
    const double n = double(samples.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [N, v] : samples) {
        const double x = std::log(N), y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    ScalingFit fit;
    fit.samples = samples;
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double b = (sy - fit.slope * sx) / n;
    fit.intercept = std::exp(b);
    for (auto [N, v] : samples) {
        const double pred = fit.intercept * std::pow(N, fit.slope);
        fit.residual = std::max(fit.residual, std::abs(pred - v) / v);
    }
    return fit;
}

std::string parameter_hash(const ObjectSystem& sys, const ModelParams& p) {
    std::ostringstream os;
    os.precision(17);
    os << p.hbar << ' ' << p.m << ' ' << p.f << ' ' << p.N << ' ' << p.Delta << ' ' << int(p.units);
    for (int a = 0; a < sys.d(); ++a) os << ' ' << sys.lambdas[a] << ' ' << sys.C[a].real() << ' ' << sys.C[a].imag();
    for (int r = 0; r < sys.d(); ++r)
        for (int c = 0; c < sys.d(); ++c) os << ' ' << sys.H(r, c).real() << ' ' << sys.H(r, c).imag();
    return fnv1a_hex(os.str());
}

void save_checkpoint(const std::string& path, const GridState& s, const std::string& hash) {
    nlohmann::json j;
    j["parameter_hash"] = hash;
    j["t"] = s.t;
    j["grid"] = {{"lo", s.grid.lo}, {"h", s.grid.h}, {"n", s.grid.n}};
    j["channels"] = s.d();
    for (int b = 0; b < s.d(); ++b) {
        std::vector<double> v(2 * s.grid.n);
        for (long i = 0; i < s.grid.n; ++i) {
            v[2 * i] = s.psi(i, b).real();
            v[2 * i + 1] = s.psi(i, b).imag();
        }
        j["amplitudes"].push_back(std::move(v));
    }
    std::ofstream out(path);
    if (!out) throw OracleError("cannot write checkpoint " + path);
    out << j.dump();
}

GridState load_checkpoint(const std::string& path, const std::string& expected_hash) {
    std::ifstream in(path);
    if (!in) throw OracleError("cannot read checkpoint " + path);
    const auto j = nlohmann::json::parse(in);
    if (j.at("parameter_hash").get<std::string>() != expected_hash)
        throw OracleError("checkpoint parameter hash mismatch: stored " + j.at("parameter_hash").get<std::string>() +
                          ", expected " + expected_hash);
    GridState s;
    s.t = j.at("t");
    s.grid = {j.at("grid").at("lo"), j.at("grid").at("h"), j.at("grid").at("n")};
    const int d = j.at("channels");
    s.psi.resize(s.grid.n, d);
    for (int b = 0; b < d; ++b) {
        const auto& v = j.at("amplitudes").at(b);
        for (long i = 0; i < s.grid.n; ++i) s.psi(i, b) = Complex(v.at(2 * i).get<double>(), v.at(2 * i + 1).get<double>());
    }
    return s;
}

}  // namespace ptm

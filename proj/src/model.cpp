#include "ptm/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ptm {

double ModelParams::rho(double T) const {
    const double r = T * hbar / (Delta * Delta * N * m);
    return 1.0 + r * r;
}

std::vector<std::string> ModelParams::problems() const {
    std::vector<std::string> out;
    if (!(hbar > 0)) out.push_back("hbar must be positive");
    if (!(m > 0)) out.push_back("m must be positive");
    if (!(Delta > 0)) out.push_back("Delta must be positive");
    if (!(N >= 1)) out.push_back("N must be >= 1");
    if (!std::isfinite(f)) out.push_back("f must be finite");
    return out;
}

std::string ValidationReport::str() const {
    std::ostringstream os;
    for (size_t i = 0; i < violations.size(); ++i) os << (i ? "; " : "") << violations[i];
    return os.str();
}

ValidationReport validate(const ObjectSystem& sys) {
    ValidationReport r;
    const int d = sys.d();
    if (d < 2) r.violations.push_back("dimension must be at least 2");
    if (sys.H.rows() != d || sys.H.cols() != d) {
        r.violations.push_back("H_O must be d x d");
    } else {
        const double scale = std::max(1.0, sys.H.cwiseAbs().maxCoeff());
        const double asym = (sys.H - sys.H.adjoint()).cwiseAbs().maxCoeff();
        if (asym > 1e-12 * scale) r.violations.push_back("H_O not Hermitian");
    }
    if (sys.C.size() != d) {
        r.violations.push_back("C must have d entries");
    } else if (std::abs(sys.C.squaredNorm() - 1.0) > 1e-12) {
        r.violations.push_back("norm != 1");
    }
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b)
            if (sys.lambdas[a] == sys.lambdas[b]) {
                r.violations.push_back("degenerate eigenvalues");
                a = d;
                break;
            }
    return r;
}

ValidationReport validate(const ObjectSystem& sys, const ModelParams& p) {
    auto r = validate(sys);
    for (auto& s : p.problems()) r.violations.push_back(s);
    return r;
}

double channel_force(const ObjectSystem& sys, const ModelParams& p, int a) {
    if (a < 0 || a >= sys.d()) throw std::out_of_range("channel index out of range");
    return p.f * sys.lambdas[a];
}

RVector channel_forces(const ObjectSystem& sys, const ModelParams& p) { return p.f * sys.lambdas; }

double diagonal_phase_rate(const ObjectSystem& sys, const ModelParams& p, int a) {
    if (a < 0 || a >= sys.d()) throw std::out_of_range("channel index out of range");
    return -sys.H(a, a).real() / p.hbar;
}

double min_force_gap(const ObjectSystem& sys, const ModelParams& p) {
    double gap = INFINITY;
    for (int a = 0; a < sys.d(); ++a)
        for (int b = a + 1; b < sys.d(); ++b)
            gap = std::min(gap, std::abs(p.f * (sys.lambdas[a] - sys.lambdas[b])));
    return gap;
}

ForceSchedule::ForceSchedule(std::vector<Segment> segments) : segs_(std::move(segments)) {
    for (const auto& s : segs_) {
        if (!(s.duration > 0)) throw std::invalid_argument("schedule segment with non-positive duration");
        T_ += s.duration;
    }
}

ForceSchedule ForceSchedule::constant(double force, double T) { return ForceSchedule({{T, force}}); }

ForceSchedule ForceSchedule::two_segment(double fa, double fb, double T, double s) {
    if (s < 0 || s > T) throw std::invalid_argument("split point outside [0, T]");
    std::vector<Segment> v;
    if (s > 0) v.push_back({s, fa});
    if (T - s > 0) v.push_back({T - s, fb});
    return ForceSchedule(std::move(v));
}

double ForceSchedule::force_at(double t) const {
    double acc = 0;
    for (const auto& s : segs_) {
        acc += s.duration;
        if (t < acc) return s.force;
    }
    return segs_.empty() ? 0.0 : segs_.back().force;
}

UnitScales UnitScales::natural(const ModelParams& p) {
    return {p.m, p.Delta, p.m * p.Delta * p.Delta / p.hbar};
}

ModelParams to_scaled(const ModelParams& p, const UnitScales& u) {
    ModelParams q = p;
    q.hbar = p.hbar / u.action();
    q.m = p.m / u.mass;
    q.f = p.f / u.force();
    q.Delta = p.Delta / u.length;
    q.units = UnitSystem::dimensionless;
    return q;
}

ModelParams from_scaled(const ModelParams& p, const UnitScales& u) {
    ModelParams q = p;
    q.hbar = p.hbar * u.action();
    q.m = p.m * u.mass;
    q.f = p.f * u.force();
    q.Delta = p.Delta * u.length;
    q.units = UnitSystem::cgs;
    return q;
}

ObjectSystem to_scaled(const ObjectSystem& s, const UnitScales& u) {
    ObjectSystem o = s;
    o.H = s.H / u.energy();
    return o;
}

ObjectSystem from_scaled(const ObjectSystem& s, const UnitScales& u) {
    ObjectSystem o = s;
    o.H = s.H * u.energy();
    return o;
}

}  // namespace ptm

#include "ptm/config.hpp"

#include <fstream>
#include <set>

namespace ptm {

namespace {

using json = nlohmann::json;

// Reads keys from one JSON object and remembers them, so that anything left
// over can be reported as unknown.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + " must be an object");
    }
    ~Section() noexcept(false) {
        if (std::uncaught_exceptions()) return;
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError("unknown key " + path_ + "." + it.key());
    }

    bool has(const std::string& k) {
        seen_.insert(k);
        return j_.contains(k);
    }

    template <class T>
    void read(const std::string& k, T& out) {
        if (!has(k)) return;
        try {
            out = j_.at(k).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(path_ + "." + k + ": " + e.what());
        }
    }

    const json& at(const std::string& k) {
        seen_.insert(k);
        return j_.at(k);
    }
    std::string child(const std::string& k) const { return path_ + "." + k; }

private:
    std::string where() const { return path_.empty() ? "config" : path_; }
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

Complex complex_of(const json& v, const std::string& path) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw ConfigError(path + ": expected a number or [re, im]");
}

void read_system(const json& j, const std::string& path, ObjectSystem& sys) {
    Section s(j, path);
    if (!s.has("lambdas") || !s.has("H_O") || !s.has("C")) throw ConfigError(path + " needs lambdas, H_O and C");
    const auto& l = s.at("lambdas");
    if (!l.is_array() || l.empty()) throw ConfigError(path + ".lambdas must be a non-empty array");
    const int d = int(l.size());
    sys.lambdas.resize(d);
    for (int a = 0; a < d; ++a) {
        if (!l[a].is_number()) throw ConfigError(path + ".lambdas entries must be numbers");
        sys.lambdas[a] = l[a].get<double>();
    }
    const auto& H = s.at("H_O");
    if (!H.is_array() || int(H.size()) != d) throw ConfigError(path + ".H_O must have d rows");
    sys.H.resize(d, d);
    for (int r = 0; r < d; ++r) {
        if (!H[r].is_array() || int(H[r].size()) != d) throw ConfigError(path + ".H_O must be d x d");
        for (int c = 0; c < d; ++c) sys.H(r, c) = complex_of(H[r][c], path + ".H_O");
    }
    const auto& C = s.at("C");
    if (!C.is_array() || int(C.size()) != d) throw ConfigError(path + ".C must have d entries");
    sys.C.resize(d);
    for (int a = 0; a < d; ++a) sys.C[a] = complex_of(C[a], path + ".C");
}

}  // namespace

RunConfig parse_config(const json& j) {
    RunConfig c;
    Section top(j, "");
    if (top.has("system")) {
        read_system(top.at("system"), "system", c.system);
        c.has_system = true;
    }
    top.read("T", c.T);

    if (top.has("params")) {
        Section s(top.at("params"), "params");
        s.read("hbar", c.params.hbar);
        s.read("m", c.params.m);
        s.read("f", c.params.f);
        s.read("N", c.params.N);
        s.read("Delta", c.params.Delta);
        std::string units = "dimensionless";
        s.read("units", units);
        if (units == "dimensionless")
            c.params.units = UnitSystem::dimensionless;
        else if (units == "cgs")
            c.params.units = UnitSystem::cgs;
        else
            throw ConfigError("params.units must be dimensionless or cgs");
    }
    if (top.has("quadrature")) {
        Section s(top.at("quadrature"), "quadrature");
        s.read("rel_tol", c.quadrature.rel_tol);
        s.read("abs_tol", c.quadrature.abs_tol);
        s.read("max_panels", c.quadrature.max_panels);
        s.read("cut_sigmas", c.quadrature.cut_sigmas);
    }
    if (top.has("signal")) {
        Section s(top.at("signal"), "signal");
        s.read("orders", c.signal.orders);
        s.read("oracle", c.signal.oracle);
        s.read("sum_rule_tol", c.signal.sum_rule_tol);
        if (s.has("grid")) {
            Section g(s.at("grid"), "signal.grid");
            g.read("lo", c.signal.grid_lo);
            g.read("hi", c.signal.grid_hi);
            g.read("h", c.signal.grid_h);
        }
        std::string route = "phi", rho = "exact";
        s.read("route", route);
        s.read("rho_mode", rho);
        if (route != "phi" && route != "raw") throw ConfigError("signal.route must be phi or raw");
        if (rho != "exact" && rho != "unity") throw ConfigError("signal.rho_mode must be exact or unity");
        c.signal.route = route == "phi" ? J1Route::phi : J1Route::raw;
        c.signal.rho_mode = rho == "exact" ? RhoMode::exact : RhoMode::unity;
        for (int k : c.signal.orders)
            if (k < 0 || k > 2) throw ConfigError("signal.orders entries must be 0, 1 or 2");
    }
    if (top.has("sweep")) {
        Section s(top.at("sweep"), "sweep");
        s.read("N", c.sweep.N);
        s.read("quantity", c.sweep.quantity);
        s.read("channel", c.sweep.channel);
        s.read("expected_slope", c.sweep.expected_slope);
        s.read("slope_tol", c.sweep.slope_tol);
        s.read("synthetic_prefactor", c.sweep.synthetic_prefactor);
        s.read("synthetic_exponent", c.sweep.synthetic_exponent);
        static const std::set<std::string> known{"J1_weight", "J2_diagonal", "J2_offdiagonal", "oracle_residual",
                                                 "synthetic"};
        if (!known.count(c.sweep.quantity)) throw ConfigError("unknown sweep.quantity " + c.sweep.quantity);
    }
    if (top.has("kernels")) {
        Section s(top.at("kernels"), "kernels");
        s.read("cases", c.kernels.cases);
        s.read("seed", c.kernels.seed);
        s.read("residual_tol", c.kernels.residual_tol);
        s.read("composition_panels", c.kernels.composition_panels);
    }
    if (top.has("estimates")) {
        Section s(top.at("estimates"), "estimates");
        s.read("hbar", c.estimates.hbar);
        s.read("m", c.estimates.m);
        s.read("Delta", c.estimates.Delta);
        s.read("a", c.estimates.a);
        s.read("energy", c.estimates.energy);
    }
    if (top.has("oracle")) {
        Section s(top.at("oracle"), "oracle");
        s.read("dt", c.oracle.dt);
        s.read("norm_tol", c.oracle.norm_tol);
        s.read("boundary_tol", c.oracle.boundary_tol);
        s.read("spectral_tol", c.oracle.spectral_tol);
        s.read("checkpoint", c.oracle.checkpoint);
        s.read("compare_tol", c.oracle.compare_tol);
    }

    if (!(c.T >= 0)) throw ConfigError("T must be non-negative");
    if (c.has_system) {
        const auto report = validate(c.system, c.params);
        if (!report.ok()) throw ConfigError("invalid model: " + report.str());
        if (c.sweep.channel < 0 || c.sweep.channel >= c.system.d()) throw ConfigError("sweep.channel out of range");
    } else {
        const auto problems = c.params.problems();
        if (!problems.empty()) throw ConfigError("invalid params: " + problems.front());
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_config(j);
}

nlohmann::ordered_json to_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    const auto& p = c.params;
    j["params"] = {{"hbar", p.hbar},
                   {"m", p.m},
                   {"f", p.f},
                   {"N", p.N},
                   {"Delta", p.Delta},
                   {"units", p.units == UnitSystem::cgs ? "cgs" : "dimensionless"}};
    if (c.has_system) {
        const int d = c.system.d();
        nlohmann::ordered_json sys;
        sys["lambdas"] = std::vector<double>(c.system.lambdas.data(), c.system.lambdas.data() + d);
        for (int r = 0; r < d; ++r) {
            nlohmann::ordered_json row = nlohmann::ordered_json::array();
            for (int k = 0; k < d; ++k) row.push_back({c.system.H(r, k).real(), c.system.H(r, k).imag()});
            sys["H_O"].push_back(row);
        }
        for (int a = 0; a < d; ++a) sys["C"].push_back({c.system.C[a].real(), c.system.C[a].imag()});
        j["system"] = sys;
    }
    j["T"] = c.T;
    j["quadrature"] = {{"rel_tol", c.quadrature.rel_tol},
                       {"abs_tol", c.quadrature.abs_tol},
                       {"max_panels", c.quadrature.max_panels},
                       {"cut_sigmas", c.quadrature.cut_sigmas}};
    j["signal"] = {{"orders", c.signal.orders},
                   {"oracle", c.signal.oracle},
                   {"grid", {{"lo", c.signal.grid_lo}, {"hi", c.signal.grid_hi}, {"h", c.signal.grid_h}}},
                   {"route", c.signal.route == J1Route::phi ? "phi" : "raw"},
                   {"rho_mode", c.signal.rho_mode == RhoMode::exact ? "exact" : "unity"},
                   {"sum_rule_tol", c.signal.sum_rule_tol}};
    j["sweep"] = {{"N", c.sweep.N},
                  {"quantity", c.sweep.quantity},
                  {"channel", c.sweep.channel},
                  {"expected_slope", c.sweep.expected_slope},
                  {"slope_tol", c.sweep.slope_tol},
                  {"synthetic_prefactor", c.sweep.synthetic_prefactor},
                  {"synthetic_exponent", c.sweep.synthetic_exponent}};
    j["kernels"] = {{"cases", c.kernels.cases},
                    {"seed", c.kernels.seed},
                    {"residual_tol", c.kernels.residual_tol},
                    {"composition_panels", c.kernels.composition_panels}};
    j["estimates"] = {{"hbar", c.estimates.hbar},
                      {"m", c.estimates.m},
                      {"Delta", c.estimates.Delta},
                      {"a", c.estimates.a},
                      {"energy", c.estimates.energy}};
    j["oracle"] = {{"dt", c.oracle.dt},
                   {"norm_tol", c.oracle.norm_tol},
                   {"boundary_tol", c.oracle.boundary_tol},
                   {"spectral_tol", c.oracle.spectral_tol},
                   {"checkpoint", c.oracle.checkpoint},
                   {"compare_tol", c.oracle.compare_tol}};
    return j;
}

}  // namespace ptm

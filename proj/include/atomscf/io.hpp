#pragma once

#include "atomscf/bounds.hpp"
#include "atomscf/config.hpp"
#include "atomscf/fixedpoint.hpp"
#include "atomscf/grid.hpp"
#include "atomscf/hartree.hpp"
#include "atomscf/oracle.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace atomscf {

// --- run configuration ---------------------------------------------------------

struct SolverParams {
    double tol = 1e-10;
    int max_iter = 50;
    double damping = -1.0; // -1: auto (0 in the theorem regime, 0.3 otherwise)
    std::uint64_t seed = 20240901ULL;
};

struct ExperimentParams {
    std::string name; // solve | scan-z | verify | restricted | unrestricted | segregation-scan
    std::vector<double> z_values;
};

struct RunConfig {
    Configuration config;
    GridScheme grid_scheme = GridScheme::LogLinear;
    double grid_r_max = 60.0;
    int grid_count = 2000;
    SolverParams solver;
    ExperimentParams experiment;

    double effective_damping() const {
        if (solver.damping >= 0.0) return solver.damping;
        auto gr = z_thresholds(config);
        return (config.z > gr.z_threshold_thm1) ? 0.0 : 0.3;
    }

    std::shared_ptr<const RadialGrid> make_grid() const {
        return std::make_shared<const RadialGrid>(build_grid(grid_scheme, grid_r_max, grid_count));
    }
};

inline RunConfig parse_run_config(const nlohmann::json& j) {
    RunConfig rc;
    auto need = [&](const char* key) {
        if (!j.contains(key)) throw invalid_config_error(key, "missing");
        return j.at(key);
    };

    std::string mode = need("mode").is_string() ? j.at("mode").get<std::string>()
                                                : throw invalid_config_error("mode", "must be a string");
    if (mode == "uhf")
        rc.config.mode = Mode::Unrestricted;
    else if (mode == "rhf")
        rc.config.mode = Mode::Restricted;
    else if (mode == "hartree")
        rc.config.mode = Mode::Hartree;
    else
        throw invalid_config_error("mode", "expected \"uhf\", \"rhf\" or \"hartree\"");

    if (!need("z").is_number()) throw invalid_config_error("z", "must be a number");
    rc.config.z = j.at("z").get<double>();

    if (j.contains("q")) {
        if (!j.at("q").is_number_integer()) throw invalid_config_error("q", "must be an integer");
        rc.config.q = j.at("q").get<int>();
    }

    auto shells = need("shells");
    if (!shells.is_array() || shells.empty()) throw invalid_config_error("shells", "must be a non-empty array");
    if (rc.config.mode == Mode::Restricted) {
        for (auto& e : shells) {
            if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
                throw invalid_config_error("shells", "rhf shells are [n, l] integer pairs");
            rc.config.shells_r.push_back({e[0].get<int>(), e[1].get<int>()});
        }
    } else {
        for (auto& e : shells) {
            if (!e.is_number_integer()) throw invalid_config_error("shells", "must be integers");
            rc.config.shells_u.push_back(e.get<int>());
        }
    }
    validate(rc.config);

    if (j.contains("grid")) {
        auto g = j.at("grid");
        if (g.contains("scheme")) {
            std::string s = g.at("scheme").get<std::string>();
            if (s == "log-linear")
                rc.grid_scheme = GridScheme::LogLinear;
            else if (s == "uniform")
                rc.grid_scheme = GridScheme::Uniform;
            else
                throw invalid_config_error("grid.scheme", "expected \"log-linear\" or \"uniform\"");
        }
        if (g.contains("r_max")) rc.grid_r_max = g.at("r_max").get<double>();
        if (g.contains("count")) rc.grid_count = g.at("count").get<int>();
    }
    if (j.contains("solver")) {
        auto s = j.at("solver");
        if (s.contains("tol")) rc.solver.tol = s.at("tol").get<double>();
        if (s.contains("max_iter")) rc.solver.max_iter = s.at("max_iter").get<int>();
        if (s.contains("damping")) rc.solver.damping = s.at("damping").get<double>();
        if (s.contains("seed")) rc.solver.seed = s.at("seed").get<std::uint64_t>();
        if (rc.solver.damping >= 1.0) throw invalid_config_error("solver.damping", "must be < 1");
        if (rc.solver.tol <= 0.0) throw invalid_config_error("solver.tol", "must be positive");
        if (rc.solver.max_iter < 1) throw invalid_config_error("solver.max_iter", "must be >= 1");
    }
    if (j.contains("experiment")) {
        auto e = j.at("experiment");
        if (e.contains("name")) rc.experiment.name = e.at("name").get<std::string>();
        if (e.contains("z_values"))
            for (auto& z : e.at("z_values")) rc.experiment.z_values.push_back(z.get<double>());
    }
    // grid construction validates r_max/count ranges
    build_grid(rc.grid_scheme, rc.grid_r_max, rc.grid_count);
    return rc;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_config_error("config", "cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw invalid_config_error("config", std::string("JSON parse failure: ") + e.what());
    }
    return parse_run_config(j);
}

// --- deterministic serialization ------------------------------------------------

/// Fixed 17-significant-digit float formatting so identical runs produce
/// byte-identical artifacts.
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Tiny ordered JSON writer; report shapes are fixed, so this keeps full
/// control over number formatting and key order.
class JsonWriter {
  public:
    JsonWriter& begin_object() { return token("{"); }
    JsonWriter& end_object() { fresh_ = false; return raw("}"); }
    JsonWriter& begin_array() { return token("["); }
    JsonWriter& end_array() { fresh_ = false; return raw("]"); }

    JsonWriter& key(const std::string& k) {
        comma();
        raw("\"" + k + "\":");
        fresh_ = true;
        return *this;
    }
    JsonWriter& value(double v) { comma(); return raw(fmt17(v)); }
    JsonWriter& value(int v) { comma(); return raw(std::to_string(v)); }
    JsonWriter& value(std::uint64_t v) { comma(); return raw(std::to_string(v)); }
    JsonWriter& value(bool v) { comma(); return raw(v ? "true" : "false"); }
    JsonWriter& value(const std::string& s) {
        comma();
        std::string esc;
        for (char c : s) {
            if (c == '"' || c == '\\') esc += '\\';
            esc += c;
        }
        return raw("\"" + esc + "\"");
    }

    std::string str() const { return out_.str(); }

  private:
    JsonWriter& token(const char* t) {
        comma();
        raw(t);
        fresh_ = true;
        return *this;
    }
    void comma() {
        if (!fresh_) out_ << ",";
        fresh_ = false;
    }
    JsonWriter& raw(const std::string& s) {
        out_ << s;
        return *this;
    }
    std::ostringstream out_;
    bool fresh_ = true;
};

inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

// --- report serializers -----------------------------------------------------------

inline void write_gap_report(JsonWriter& w, const GapReport& gr) {
    w.begin_object();
    w.key("delta_s").value(gr.delta_s);
    w.key("delta").value(gr.delta);
    w.key("delta_valid").value(gr.delta_valid);
    w.key("z_threshold_thm1").value(gr.z_threshold_thm1);
    w.key("z_threshold_thm2").value(gr.z_threshold_thm2);
    w.key("z_threshold_thm3").value(gr.z_threshold_thm3);
    w.key("contraction_bound").value(gr.contraction_bound);
    w.key("above_thm1").value(gr.above_thm1);
    w.end_object();
}

inline void write_iteration_report(JsonWriter& w, const IterationReport& rep) {
    w.begin_object();
    w.key("converged").value(rep.converged);
    w.key("iterations").value(rep.iterations);
    w.key("final_residual").value(rep.final_residual);
    w.key("hf_energy").value(rep.hf_energy);
    w.key("empirical_lipschitz").value(rep.empirical_lipschitz);
    w.key("theoretical_lipschitz").value(rep.theoretical_lipschitz);
    w.key("occupied_eigenvalues").begin_array();
    for (auto& lv : rep.occupied) w.value(lv.eps);
    w.end_array();
    w.key("occupied").begin_array();
    for (auto& lv : rep.occupied) {
        w.begin_object();
        w.key("n").value(lv.n);
        w.key("l").value(lv.ell);
        w.key("eps").value(lv.eps);
        w.key("occupancy").value(lv.occupancy);
        w.key("in_window").value(lv.in_window);
        w.key("in_ev_bounds").value(lv.in_ev_bounds);
        w.end_object();
    }
    w.end_array();
    w.key("trace").begin_array();
    for (auto& st : rep.iterates) {
        w.begin_object();
        w.key("residual").value(st.residual);
        w.key("step").value(st.step);
        w.key("hf_energy").value(st.hf_energy);
        w.end_object();
    }
    w.end_array();
    w.end_object();
}

inline void write_bound_report(JsonWriter& w, const BoundReport& r) {
    w.begin_object();
    w.key("name").value(r.name);
    w.key("lhs").value(r.lhs);
    w.key("rhs").value(r.rhs);
    w.key("margin").value(r.margin);
    w.key("tolerance").value(r.tolerance);
    w.key("pass").value(r.pass);
    w.key("applicable").value(r.applicable);
    w.end_object();
}

inline void write_oracle_report(JsonWriter& w, const OracleReport& r) {
    w.begin_object();
    w.key("subject").value(r.subject);
    w.key("oracle_value").value(r.oracle_value);
    w.key("kernel_value").value(r.kernel_value);
    w.key("rel_error").value(r.rel_error);
    w.key("tolerance").value(r.tolerance);
    w.key("pass").value(r.pass);
    w.end_object();
}

/// orbitals.csv: r then one column per occupied orbital labeled "u(n,l)".
inline std::string orbitals_csv(const DensityState& s) {
    std::ostringstream os;
    std::vector<std::pair<std::pair<int, int>, const Vec*>> cols;
    for (auto& [ell, orbs] : s.channels)
        for (auto& o : orbs) cols.push_back({{o.n_label, ell}, &o.u});
    std::sort(cols.begin(), cols.end(), [](auto& a, auto& b) { return a.first < b.first; });
    os << "r";
    for (auto& c : cols) os << ",u(" << c.first.first << "," << c.first.second << ")";
    os << "\n";
    for (int i = 0; i < s.grid->size(); ++i) {
        os << fmt17(s.grid->points[i]);
        for (auto& c : cols) os << "," << fmt17((*c.second)[i]);
        os << "\n";
    }
    return os.str();
}

} // namespace atomscf

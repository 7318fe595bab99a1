// Copyright 2026 The hotgate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "hotgate/cli.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <ostream>
#include <set>
#include <sstream>

#ifndef HOTGATE_VERSION
#define HOTGATE_VERSION "0.0.0"
#endif

namespace hotgate::cli {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char *kFidelityNote =
    "F = (4 F_e + 1) / 5 with F_e the entanglement fidelity of the internal channel "
    "against the target CNOT (ion 2 controls, flips ion 1 when ion 2 is |0>)";
constexpr const char *kPurityNote = "P = mean Tr rho^2 of the output over a 2-design of pure inputs";
constexpr const char *kFcorNote = "F_cor = 1 - Var of the period-averaged anharmonic coupling";
constexpr const char *kUnits = "hbar = m = nu_c = 1, lengths in sqrt(hbar / (m nu_c))";

[[noreturn]] void config_error(const std::string &what) {
    throw Error(ErrorKind::Config, what);
}

std::string num(double x, int precision) {
    if (x == 0.0) {
        x = 0.0;
    }
    return fmt::format("{:.{}g}", x, precision);
}

double rounded(double x, int precision) {
    return std::isfinite(x) ? std::stod(num(x, precision)) : x;
}

// --- YAML ---------------------------------------------------------------------------

void check_keys(const YAML::Node &node, const std::string &where,
                const std::set<std::string> &allowed) {
    if (!node.IsMap()) {
        config_error(fmt::format("'{}' must be a mapping", where));
    }
    for (const auto &kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.contains(key)) {
            config_error(fmt::format("unknown key '{}' in '{}'", key, where));
        }
    }
}

template <class T>
void read(const YAML::Node &section, const char *key, T &target) {
    if (const YAML::Node n = section[key]) {
        target = n.as<T>();
    }
}

template <class T>
void read(const YAML::Node &section, const char *key, std::optional<T> &target) {
    if (const YAML::Node n = section[key]) {
        if (n.IsNull()) {
            target.reset();
        } else {
            target = n.as<T>();
        }
    }
}

ExpectationMode parse_mode(const std::string &s) {
    if (s == "initial") {
        return ExpectationMode::Initial;
    }
    if (s == "kicked") {
        return ExpectationMode::Kicked;
    }
    config_error("anharmonic.mode must be 'initial' or 'kicked', got '" + s + "'");
}

const char *mode_name(ExpectationMode m) {
    return m == ExpectationMode::Kicked ? "kicked" : "initial";
}

void apply_yaml(const YAML::Node &root, RunConfig &c) {
    if (!root || root.IsNull()) {
        return;
    }
    check_keys(root, "<root>",
               {"trap", "gate", "truncation", "conditions", "separation", "scan", "anharmonic",
                "output"});
    if (const auto s = root["trap"]) {
        check_keys(s, "trap", {"exponent", "coulomb"});
        read(s, "exponent", c.gate.exponent);
        read(s, "coulomb", c.gate.coulomb);
    }
    if (const auto s = root["gate"]) {
        check_keys(s, "gate",
                   {"eta", "eta_single", "n_pulses", "n_bar_c", "cycles", "idealized_flip",
                    "omega0", "control_phase"});
        read(s, "eta", c.gate.eta);
        read(s, "eta_single", c.eta_single);
        read(s, "n_pulses", c.n_pulses);
        read(s, "n_bar_c", c.gate.n_bar_c);
        read(s, "cycles", c.gate.cycles);
        read(s, "idealized_flip", c.gate.idealized_flip);
        read(s, "omega0", c.gate.omega0);
        read(s, "control_phase", c.gate.control_phase);
    }
    if (const auto s = root["truncation"]) {
        check_keys(s, "truncation",
                   {"dim_c", "dim_r", "weight_cutoff", "check_convergence", "tolerance",
                    "max_doublings"});
        read(s, "dim_c", c.gate.dim_c);
        read(s, "dim_r", c.gate.dim_r);
        read(s, "weight_cutoff", c.gate.weight_cutoff);
        read(s, "check_convergence", c.gate.check_convergence);
        read(s, "tolerance", c.gate.convergence_tol);
        read(s, "max_doublings", c.gate.max_doublings);
    }
    if (const auto s = root["conditions"]) {
        check_keys(s, "conditions", {"margin", "duration_fraction", "min_cycles"});
        read(s, "margin", c.gate.conditions.margin);
        read(s, "duration_fraction", c.gate.conditions.duration_fraction);
        read(s, "min_cycles", c.gate.conditions.min_cycles);
    }
    if (const auto s = root["separation"]) {
        check_keys(s, "separation", {"samples"});
        read(s, "samples", c.separation_samples);
    }
    if (const auto s = root["scan"]) {
        check_keys(s, "scan", {"eta", "n_bar_c"});
        read(s, "eta", c.scan.eta);
        read(s, "n_bar_c", c.scan.n_bar_c);
    }
    if (const auto s = root["anharmonic"]) {
        check_keys(s, "anharmonic", {"enabled", "order", "quadrature_points", "mode", "scale"});
        read(s, "enabled", c.gate.anharmonic.enabled);
        read(s, "order", c.gate.anharmonic.order);
        read(s, "quadrature_points", c.gate.anharmonic.quadrature_points);
        if (const auto m = s["mode"]) {
            c.gate.anharmonic.mode = parse_mode(m.as<std::string>());
        }
        read(s, "scale", c.gate.anharmonic.scale);
    }
    if (const auto s = root["output"]) {
        check_keys(s, "output", {"path", "format", "precision"});
        read(s, "path", c.output.path);
        read(s, "format", c.output.format);
        read(s, "precision", c.output.precision);
    }
}

std::string yaml_number(double x) {
    return fmt::format("{}", x);
}

void optional(YAML::Emitter &e, const char *key, const std::optional<double> &v) {
    e << YAML::Key << key << YAML::Value;
    if (v) {
        e << yaml_number(*v);
    } else {
        e << YAML::Null;
    }
}

std::string dump(const RunConfig &c, bool with_output_path) {
    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "trap" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "exponent" << YAML::Value << yaml_number(c.gate.exponent);
    e << YAML::Key << "coulomb" << YAML::Value << yaml_number(c.gate.coulomb);
    e << YAML::EndMap;

    e << YAML::Key << "gate" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "eta" << YAML::Value << yaml_number(c.gate.eta);
    optional(e, "eta_single", c.eta_single);
    e << YAML::Key << "n_pulses" << YAML::Value << c.n_pulses;
    e << YAML::Key << "n_bar_c" << YAML::Value << yaml_number(c.gate.n_bar_c);
    e << YAML::Key << "cycles" << YAML::Value << c.gate.cycles;
    e << YAML::Key << "idealized_flip" << YAML::Value << c.gate.idealized_flip;
    optional(e, "omega0", c.gate.omega0);
    optional(e, "control_phase", c.gate.control_phase);
    e << YAML::EndMap;

    e << YAML::Key << "truncation" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "dim_c" << YAML::Value << c.gate.dim_c;
    e << YAML::Key << "dim_r" << YAML::Value << c.gate.dim_r;
    e << YAML::Key << "weight_cutoff" << YAML::Value << yaml_number(c.gate.weight_cutoff);
    e << YAML::Key << "check_convergence" << YAML::Value << c.gate.check_convergence;
    e << YAML::Key << "tolerance" << YAML::Value << yaml_number(c.gate.convergence_tol);
    e << YAML::Key << "max_doublings" << YAML::Value << c.gate.max_doublings;
    e << YAML::EndMap;

    e << YAML::Key << "conditions" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "margin" << YAML::Value << yaml_number(c.gate.conditions.margin);
    e << YAML::Key << "duration_fraction" << YAML::Value
      << yaml_number(c.gate.conditions.duration_fraction);
    e << YAML::Key << "min_cycles" << YAML::Value << c.gate.conditions.min_cycles;
    e << YAML::EndMap;

    e << YAML::Key << "separation" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "samples" << YAML::Value << c.separation_samples;
    e << YAML::EndMap;

    auto grid = [&](const char *key, const std::vector<double> &v) {
        e << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (const double x : v) {
            e << yaml_number(x);
        }
        e << YAML::EndSeq;
    };
    e << YAML::Key << "scan" << YAML::Value << YAML::BeginMap;
    grid("eta", c.scan.eta);
    grid("n_bar_c", c.scan.n_bar_c);
    e << YAML::EndMap;

    const auto &a = c.gate.anharmonic;
    e << YAML::Key << "anharmonic" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "enabled" << YAML::Value << a.enabled;
    e << YAML::Key << "order" << YAML::Value << a.order;
    e << YAML::Key << "quadrature_points" << YAML::Value << a.quadrature_points;
    e << YAML::Key << "mode" << YAML::Value << mode_name(a.mode);
    e << YAML::Key << "scale" << YAML::Value << yaml_number(a.scale);
    e << YAML::EndMap;

    e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    if (with_output_path) {
        e << YAML::Key << "path" << YAML::Value << YAML::DoubleQuoted << c.output.path;
    }
    e << YAML::Key << "format" << YAML::Value << YAML::DoubleQuoted << c.output.format;
    e << YAML::Key << "precision" << YAML::Value << c.output.precision;
    e << YAML::EndMap;
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

// --- shared command plumbing --------------------------------------------------------

GateConfig gate_config(const RunConfig &c, double eta) {
    GateConfig g = c.gate;
    g.eta = eta;
    if (g.omega0 && *g.omega0 == 0.0 && !g.control_phase) {
        g.control_phase = 0.0;
    }
    return g;
}

ModeBasis basis_for(const GateConfig &g) {
    const TrapSpec spec = g.trap();
    auto [nc, nr] = default_dims(spec, g.n_bar_c, relative_mode_occupation(g.n_bar_c));
    if (g.dim_c > 0) {
        nc = g.dim_c;
    }
    if (g.dim_r > 0) {
        nr = g.dim_r;
    }
    return make_mode_basis(spec, FockDim(nc), FockDim(nr));
}

std::string hash_string(const RunConfig &c) {
    return fmt::format("fnv1a64:{:016x}", config_hash(c));
}

std::string stamp_now() {
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::time(nullptr)));
}

std::string format_for(const RunConfig &c, const char *fallback, bool tabular) {
    const std::string f = c.output.format.empty() ? fallback : c.output.format;
    if (f != "csv" && f != "json") {
        config_error("output.format must be 'csv' or 'json', got '" + f + "'");
    }
    if (!tabular && f != "json") {
        config_error("this command emits json only");
    }
    return f;
}

Json json_header(const char *command, const RunConfig &c, const CommandFlags &flags) {
    Json j;
    j["command"] = command;
    j["version"] = HOTGATE_VERSION;
    j["config_hash"] = hash_string(c);
    if (flags.stamp) {
        j["stamp"] = stamp_now();
    }
    return j;
}

std::string json_text(const Json &j) {
    return j.dump(2) + "\n";
}

class CsvWriter {
   public:
    CsvWriter(const char *command, const RunConfig &c, const CommandFlags &flags) {
        comment(fmt::format("hotgate {} {}", command, HOTGATE_VERSION));
        comment("config_hash: " + hash_string(c));
        if (flags.stamp) {
            comment("stamp: " + stamp_now());
        }
    }
    void comment(const std::string &line) {
        out_ << "# " << line << "\n";
    }
    void line(const std::string &row) {
        out_ << row << "\n";
    }
    std::string str() const {
        return out_.str();
    }

   private:
    std::ostringstream out_;
};

Json dims_json(int nc, int nr) {
    Json d;
    d["c"] = nc;
    d["r"] = nr;
    return d;
}

Json round_json(Json j, int precision) {
    if (j.is_number_float()) {
        return rounded(j.get<double>(), precision);
    }
    if (j.is_structured()) {
        for (auto &item : j) {
            item = round_json(item, precision);
        }
    }
    return j;
}

// --- scan resume ----------------------------------------------------------------------

struct ExistingScan {
    std::string hash;
    std::map<std::pair<std::string, std::string>, std::string> rows;
};

ExistingScan parse_existing(const std::string &text) {
    ExistingScan prev;
    std::istringstream in(text);
    std::string line;
    bool seen_columns = false;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        if (line.starts_with("# config_hash: ")) {
            prev.hash = line.substr(15);
            continue;
        }
        if (line.front() == '#') {
            continue;
        }
        if (!seen_columns) {
            seen_columns = true;
            continue;
        }
        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
        if (c2 == std::string::npos) {
            config_error("malformed row in existing scan output: " + line);
        }
        prev.rows[{line.substr(0, c1), line.substr(c1 + 1, c2 - c1 - 1)}] = line;
    }
    return prev;
}

}  // namespace

// --- RunConfig ------------------------------------------------------------------------

void RunConfig::validate() const {
    const auto &g = gate;
    auto require = [](bool ok, const std::string &what) {
        if (!ok) {
            config_error(what);
        }
    };
    auto finite_nonneg = [](double x) { return std::isfinite(x) && x >= 0.0; };
    require(std::isfinite(g.exponent) && g.exponent > 1.0, "trap.exponent must be > 1");
    require(finite_nonneg(g.coulomb), "trap.coulomb must be >= 0 (0 selects Ca-40 at 50 kHz)");
    require(finite_nonneg(g.eta), "gate.eta must be >= 0");
    require(finite_nonneg(g.n_bar_c), "gate.n_bar_c must be >= 0");
    require(g.cycles >= 1, "gate.cycles must be >= 1");
    require(!eta_single || finite_nonneg(*eta_single), "gate.eta_single must be >= 0");
    require(n_pulses >= 1, "gate.n_pulses must be >= 1");
    require(!eta_single || n_pulses % 2 == 1, "gate.n_pulses must be odd to leave a net flip");
    require(!g.omega0 || finite_nonneg(*g.omega0), "gate.omega0 must be >= 0");
    require(!g.control_phase || std::isfinite(*g.control_phase), "gate.control_phase must be finite");
    require(g.dim_c == 0 || g.dim_c >= 2, "truncation.dim_c must be 0 (auto) or >= 2");
    require(g.dim_r == 0 || g.dim_r >= 2, "truncation.dim_r must be 0 (auto) or >= 2");
    require(finite_nonneg(g.weight_cutoff) && g.weight_cutoff < 1.0,
            "truncation.weight_cutoff must lie in [0, 1)");
    require(std::isfinite(g.convergence_tol) && g.convergence_tol > 0.0,
            "truncation.tolerance must be > 0");
    require(g.max_doublings >= 1, "truncation.max_doublings must be >= 1");
    require(g.conditions.margin > 0.0, "conditions.margin must be > 0");
    require(g.conditions.duration_fraction > 0.0 && g.conditions.duration_fraction < 1.0,
            "conditions.duration_fraction must lie in (0, 1)");
    require(g.conditions.min_cycles >= 1, "conditions.min_cycles must be >= 1");
    require(separation_samples >= 2, "separation.samples must be >= 2");
    require(!scan.eta.empty() && !scan.n_bar_c.empty(), "scan grids must not be empty");
    for (const double x : scan.eta) {
        require(finite_nonneg(x), "scan.eta values must be >= 0");
    }
    for (const double x : scan.n_bar_c) {
        require(finite_nonneg(x), "scan.n_bar_c values must be >= 0");
    }
    const auto &a = g.anharmonic;
    require(a.order == 0 || a.order >= 3, "anharmonic.order must be 0 (off) or >= 3");
    require(a.quadrature_points >= 64 && a.quadrature_points % 2 == 0,
            "anharmonic.quadrature_points must be even and >= 64");
    require(std::isfinite(a.scale), "anharmonic.scale must be finite");
    require(output.format.empty() || output.format == "csv" || output.format == "json",
            "output.format must be 'csv' or 'json'");
    require(output.precision >= 1 && output.precision <= 17, "output.precision must lie in [1, 17]");
}

double RunConfig::effective_eta() const {
    return eta_single ? pulse_train(*eta_single, n_pulses).eta_effective : gate.eta;
}

RunConfig parse_config(const std::string &yaml) {
    RunConfig c;
    try {
        apply_yaml(YAML::Load(yaml), c);
    } catch (const YAML::Exception &e) {
        config_error(std::string("invalid configuration: ") + e.what());
    }
    c.validate();
    return c;
}

RunConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        config_error("cannot read configuration file " + path);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string dump_config(const RunConfig &config) {
    return dump(config, true);
}

std::uint64_t config_hash(const RunConfig &config) {
    std::uint64_t h = 14695981039346656037ull;
    for (const unsigned char ch : dump(config, false)) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InfeasibleRatio:
        case ErrorKind::NoEquilibrium:
            return kInfeasible;
        case ErrorKind::NotConverged:
        case ErrorKind::Numeric:
            return kNotConverged;
        default:
            return kConfigError;
    }
}

// --- commands ---------------------------------------------------------------------------

CommandOutput cmd_modes(const RunConfig &config, const CommandFlags &flags) {
    format_for(config, "json", false);
    RunConfig c = config;
    Json j = json_header("modes", c, flags);
    if (flags.solve_ratio) {
        c.gate.exponent = solve_exponent_for_ratio(*flags.solve_ratio);
        j["target_ratio"] = *flags.solve_ratio;
        j["solved_exponent"] = c.gate.exponent;
    }
    const GateConfig g = gate_config(c, c.effective_eta());
    const TrapSpec spec = g.trap();
    const ModeBasis b = make_mode_basis(spec, FockDim(2), FockDim(2));
    j["units"] = kUnits;
    j["exponent"] = spec.exponent;
    j["coulomb"] = spec.coulomb;
    j["stiffness"] = spec.stiffness;
    j["x_e"] = b.x_e;
    j["nu_c"] = b.nu_c;
    j["nu_r"] = b.nu_r;
    j["ratio"] = b.nu_r / b.nu_c;
    j["eta"] = g.eta;
    j["x0"] = b.x0;
    j["k"] = b.k;
    Json modes;
    modes["c"] = {{"mass", b.m_c}, {"frequency", b.nu_c}, {"width", b.width_c}, {"eta", b.eta_c}};
    modes["r"] = {{"mass", b.m_r}, {"frequency", b.nu_r}, {"width", b.width_r}, {"eta", b.eta_r}};
    j["modes"] = modes;
    return {kSuccess, json_text(round_json(j, c.output.precision)), {}};
}

CommandOutput cmd_separation(const RunConfig &config, const CommandFlags &flags) {
    const std::string format = format_for(config, "csv", true);
    const GateConfig g = gate_config(config, config.effective_eta());
    const ModeBasis basis = basis_for(g);
    const SeparationCurve curve = separation_curve(basis, g.eta, config.separation_samples,
                                                   g.n_bar_c, g.check_convergence,
                                                   g.convergence_tol);
    const int p = config.output.precision;
    CommandOutput result;
    if (format == "csv") {
        CsvWriter w("separation", config, flags);
        w.comment(fmt::format("dims: c={} r={}", curve.dim_c, curve.dim_r));
        w.comment(fmt::format("eta: {}  n_bar_c: {}  x0: {}", num(g.eta, p), num(g.n_bar_c, p),
                              num(basis.x0, p)));
        w.comment(std::string("units: ") + kUnits);
        w.comment("columns: t, d_analytic, d_numeric; d = <x1>_R - <x1>_L between the branches "
                  "with ion 2 in |0> (R) and |1> (L)");
        w.comment(fmt::format("convergence: checked={} converged={} max_change={}",
                              g.check_convergence, curve.converged, num(curve.max_change, p)));
        w.line("t,d_analytic,d_numeric");
        for (std::size_t i = 0; i < curve.times.size(); ++i) {
            w.line(fmt::format("{},{},{}", num(curve.times[i], p), num(curve.d_analytic[i], p),
                               num(curve.d_numeric[i], p)));
        }
        result.text = w.str();
    } else {
        Json j = json_header("separation", config, flags);
        j["dims"] = dims_json(curve.dim_c, curve.dim_r);
        j["eta"] = g.eta;
        j["n_bar_c"] = g.n_bar_c;
        j["x0"] = basis.x0;
        j["converged"] = curve.converged;
        j["max_change"] = curve.max_change;
        j["t"] = curve.times;
        j["d_analytic"] = curve.d_analytic;
        j["d_numeric"] = curve.d_numeric;
        result.text = json_text(round_json(j, p));
    }
    if (g.check_convergence && !curve.converged) {
        result.exit_code = kNotConverged;
        result.message = fmt::format(
            "separation not converged at dims c={} r={} (max change {:.3g}); raise the truncation",
            curve.dim_c, curve.dim_r, curve.max_change);
    }
    return result;
}

CommandOutput cmd_conditions(const RunConfig &config, const CommandFlags &flags) {
    format_for(config, "json", false);
    const GateConfig g = gate_config(config, config.effective_eta());
    const ModeBasis basis = basis_for(g);
    const ConditionSolution sol = condition_solver(basis, g.n_bar_c, g.cycles, g.conditions);
    const ConditionReport &r = sol.report;
    Json j = json_header("conditions", config, flags);
    j["units"] = kUnits;
    j["eta"] = r.eta;
    j["n_bar_c"] = r.n_bar_c;
    j["n_bar_r"] = r.n_bar_r;
    j["cycles"] = r.cycles;
    j["x0"] = basis.x0;
    j["D"] = r.D;
    j["delta"] = r.delta;
    j["W"] = r.W;
    j["l"] = r.center;
    j["omega0"] = r.omega0;
    j["t1"] = r.duration;
    j["omega0_t1"] = r.omega0 * r.duration;
    j["pulse_area"] = r.pulse_area;
    j["W_over_D"] = r.W_over_D;
    j["D_over_delta"] = r.D_over_delta;
    j["delta_over_x0"] = r.delta / basis.x0;
    j["angle_spread"] = r.angle_spread;
    j["eta_bound"] = r.eta_bound;
    j["eta_bound_ratio"] = r.eta_bound_ratio;
    j["margin"] = g.conditions.margin;
    j["flags"] = {{"separation_hierarchy", r.separation_hierarchy},
                  {"rabi_matching", r.rabi_matching},
                  {"uniform_illumination", r.uniform_illumination},
                  {"many_cycles", r.many_cycles},
                  {"eta_condition", r.eta_condition}};
    j["all_satisfied"] = r.all_satisfied();
    return {kSuccess, json_text(round_json(j, config.output.precision)), {}};
}

namespace {

Json report_json(const GateReport &r) {
    Json j;
    j["eta"] = r.eta;
    j["n_bar_c"] = r.n_bar_c;
    j["fidelity"] = r.fidelity;
    j["fidelity_vs_identity"] = r.fidelity_vs_identity;
    j["purity"] = r.purity;
    j["f_cor"] = r.f_cor ? Json(*r.f_cor) : Json(nullptr);
    j["f_cor_converged"] = r.f_cor_converged;
    j["dims"] = dims_json(r.dim_c, r.dim_r);
    j["convergence"] = {{"checked", r.convergence_checked},
                        {"converged", r.converged},
                        {"change", r.convergence_change}};
    j["motional_restoration"] =
        r.motional_restoration ? Json(*r.motional_restoration) : Json(nullptr);
    j["dropped_weight"] = r.dropped_weight;
    j["components"] = r.components;
    if (r.conditions) {
        j["conditions_satisfied"] = r.conditions->all_satisfied();
        j["omega0"] = r.conditions->omega0;
        j["t1"] = r.conditions->duration;
    }
    j["warnings"] = r.warnings;
    return j;
}

}  // namespace

CommandOutput cmd_gate(const RunConfig &config, const CommandFlags &flags) {
    format_for(config, "json", false);
    const GateConfig g = gate_config(config, config.effective_eta());
    const GateReport r = evaluate_gate(g);
    Json j = json_header("gate", config, flags);
    j["fidelity_definition"] = kFidelityNote;
    j["purity_definition"] = kPurityNote;
    j["flip"] = g.idealized_flip ? "idealized" : "addressed";
    j["anharmonic_order"] = (g.anharmonic.enabled ? g.anharmonic.order : 0);
    j.update(report_json(r));
    CommandOutput out{kSuccess, json_text(round_json(j, config.output.precision)), {}};
    for (const auto &w : r.warnings) {
        out.message += "warning: " + w + "\n";
    }
    if (r.convergence_checked && !r.converged) {
        out.exit_code = kNotConverged;
        out.message += fmt::format("gate fidelity not converged (change {:.3g} at dims c={} r={})\n",
                                   r.convergence_change, r.dim_c, r.dim_r);
    }
    if (!r.f_cor_converged) {
        out.exit_code = kNotConverged;
        out.message += "anharmonic quadrature not converged\n";
    }
    return out;
}

CommandOutput cmd_scan(const RunConfig &config, const CommandFlags &flags) {
    const std::string format = format_for(config, "csv", true);
    const int p = config.output.precision;
    if (flags.skip_existing && format != "csv") {
        config_error("--skip-existing needs csv output");
    }
    ExistingScan prev;
    if (flags.skip_existing && !flags.existing.empty()) {
        prev = parse_existing(flags.existing);
        if (!prev.hash.empty() && prev.hash != hash_string(config)) {
            config_error("existing scan output was produced by a different configuration (" +
                         prev.hash + ")");
        }
    }
    const GateConfig base = gate_config(config, config.gate.eta);

    std::vector<std::pair<double, double>> grid;
    std::vector<std::pair<double, double>> todo;
    for (const double eta : config.scan.eta) {
        for (const double nb : config.scan.n_bar_c) {
            grid.emplace_back(eta, nb);
            if (!prev.rows.contains({num(eta, p), num(nb, p)})) {
                todo.emplace_back(eta, nb);
            }
        }
    }
    std::map<std::pair<double, double>, ScanRow> computed;
    if (!todo.empty()) {
        for (auto &row : scan(todo, base, flags.jobs)) {
            computed[{row.eta, row.n_bar_c}] = std::move(row);
        }
    }

    CommandOutput result;
    int failures = 0;
    std::optional<ErrorKind> first_error;
    std::vector<std::string> lines;
    Json rows = Json::array();
    for (const auto &[eta, nb] : grid) {
        const auto key = std::make_pair(num(eta, p), num(nb, p));
        if (const auto it = prev.rows.find(key); it != prev.rows.end()) {
            lines.push_back(it->second);
            continue;
        }
        const ScanRow &row = computed.at({eta, nb});
        if (!row.report) {
            ++failures;
            if (!first_error) {
                first_error = row.error_kind;
            }
            result.message += fmt::format("row eta={} n_bar_c={} failed: {}\n", key.first,
                                          key.second, row.error);
            continue;
        }
        const GateReport &r = *row.report;
        const std::string fcor = r.f_cor ? num(*r.f_cor, p) : std::string();
        lines.push_back(fmt::format("{},{},{},{},{},{},{},{}", key.first, key.second,
                                    num(r.fidelity, p), num(r.purity, p), fcor, r.dim_c, r.dim_r,
                                    r.convergence_checked ? int(r.converged) : -1));
        rows.push_back(round_json(report_json(r), p));
    }

    if (format == "csv") {
        CsvWriter w("scan", config, flags);
        w.comment("dims: per row, see the dim_c and dim_r columns");
        w.comment(std::string("fidelity: ") + kFidelityNote);
        w.comment(std::string("purity: ") + kPurityNote);
        w.comment(std::string("f_cor: ") + kFcorNote + "; empty when disabled");
        w.comment("converged: 1 yes, 0 no, -1 not checked");
        w.comment(fmt::format("flip: {}  cycles: {}  exponent: {}",
                              base.idealized_flip ? "idealized" : "addressed", base.cycles,
                              num(base.exponent, p)));
        if (failures > 0) {
            w.comment(fmt::format("failed_rows: {}", failures));
        }
        w.line("eta,n_bar_c,F,P,F_cor,dim_c,dim_r,converged");
        for (const auto &l : lines) {
            w.line(l);
        }
        result.text = w.str();
    } else {
        Json j = json_header("scan", config, flags);
        j["fidelity_definition"] = kFidelityNote;
        j["purity_definition"] = kPurityNote;
        j["failed_rows"] = failures;
        j["rows"] = rows;
        result.text = json_text(j);
    }
    if (failures == static_cast<int>(grid.size())) {
        result.exit_code = exit_code_for(*first_error);
        result.message += "all scan rows failed\n";
    }
    return result;
}

CommandOutput cmd_anharmonic(const RunConfig &config, const CommandFlags &flags) {
    format_for(config, "json", false);
    const GateConfig g = gate_config(config, config.effective_eta());
    const ModeBasis basis = basis_for(g);
    const auto &a = g.anharmonic;
    const bool active = a.enabled && a.order > 0;
    const AnharmonicExpansion expansion =
        active ? anharmonic_expansion(basis.spec, a.order).scaled(a.scale) : AnharmonicExpansion{};
    const MotionalState motion = thermal_motion(basis, g.n_bar_c);
    AnharmonicOptions options;
    options.quadrature_points = a.quadrature_points;
    options.mode = a.mode;
    options.weight_cutoff = g.weight_cutoff;
    const AnharmonicResult pert = anharmonic_fidelity(basis, expansion, motion, options);
    const double exact = anharmonic_fidelity_exact(basis, expansion, motion, a.mode);
    const double gap = std::abs(pert.f_cor - exact);
    const double infidelity = 1.0 - pert.f_cor;

    Json j = json_header("anharmonic", config, flags);
    j["definition"] = kFcorNote;
    j["eta"] = g.eta;
    j["n_bar_c"] = g.n_bar_c;
    j["order"] = active ? a.order : 0;
    j["scale"] = a.scale;
    j["mode"] = mode_name(a.mode);
    j["dims"] = dims_json(basis.dim_c.levels(), basis.dim_r.levels());
    j["f_cor_perturbative"] = pert.f_cor;
    j["f_cor_exact"] = exact;
    j["delta"] = gap;
    j["delta_over_infidelity_1_5"] =
        infidelity > 0.0 ? Json(gap / std::pow(infidelity, 1.5)) : Json(nullptr);
    j["quadrature_change"] = pert.quadrature_change;
    j["quadrature_converged"] = pert.quadrature_converged;
    CommandOutput out{kSuccess, json_text(round_json(j, config.output.precision)), {}};
    if (!pert.quadrature_converged) {
        out.exit_code = kNotConverged;
        out.message = fmt::format("anharmonic quadrature not converged (change {:.3g})\n",
                                  pert.quadrature_change);
    }
    return out;
}

// --- argv ---------------------------------------------------------------------------------

namespace {

class Overrides {
   public:
    template <class T, class Apply>
    CLI::Option *add(CLI::App &app, const std::string &name, const std::string &desc,
                     Apply apply) {
        auto value = std::make_shared<T>();
        CLI::Option *opt = app.add_option(name, *value, desc);
        appliers_.push_back([opt, value, apply](RunConfig &c) {
            if (opt->count() > 0) {
                apply(c, *value);
            }
        });
        return opt;
    }

    template <class Apply>
    CLI::Option *flag(CLI::App &app, const std::string &name, const std::string &desc,
                      Apply apply) {
        auto value = std::make_shared<bool>(false);
        CLI::Option *opt = app.add_flag(name, *value, desc);
        appliers_.push_back([opt, value, apply](RunConfig &c) {
            if (opt->count() > 0) {
                apply(c, *value);
            }
        });
        return opt;
    }

    void apply(RunConfig &c) const {
        for (const auto &f : appliers_) {
            f(c);
        }
    }

   private:
    std::vector<std::function<void(RunConfig &)>> appliers_;
};

std::string join(const std::vector<double> &v) {
    std::string s;
    for (const double x : v) {
        s += (s.empty() ? "" : ",") + fmt::format("{}", x);
    }
    return s;
}

std::filesystem::path resolve_output(const std::string &path) {
    std::filesystem::path p(path);
    if (const char *dir = std::getenv("HOTGATE_OUTPUT_DIR"); dir != nullptr && *dir != '\0' &&
                                                             p.is_relative()) {
        p = std::filesystem::path(dir) / p;
    }
    return p;
}

}  // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    const RunConfig d;
    CLI::App app{"Two-ion wavepacket gate simulator"};
    app.require_subcommand(1);
    app.footer(
        "Precedence: built-in defaults < --config file < flags.\n"
        "Exit codes: 0 success, 1 configuration error, 2 infeasible request, 3 not converged.\n"
        "HOTGATE_OUTPUT_DIR prefixes relative --output paths.\n\n"
        "Configuration file with every default:\n\n" +
        dump_config(d));

    std::string config_path;
    app.add_option("-c,--config", config_path, "YAML configuration file")
        ->check(CLI::ExistingFile);
    bool dump_only = false;
    app.add_flag("--dump-config", dump_only, "print the resolved configuration and exit");
    CommandFlags flags;
    app.add_flag("--stamp", flags.stamp, "record the wall-clock time in the output metadata");

    Overrides o;
    o.add<double>(app, "--exponent", fmt::format("trap exponent p (default {:.7g})", d.gate.exponent),
                  [](RunConfig &c, double v) { c.gate.exponent = v; });
    o.add<double>(app, "--coulomb", "Coulomb constant, 0 selects Ca-40 at 50 kHz (default 0)",
                  [](RunConfig &c, double v) { c.gate.coulomb = v; });
    o.add<double>(app, "--eta", fmt::format("Lamb-Dicke parameter (default {})", d.gate.eta),
                  [](RunConfig &c, double v) { c.gate.eta = v; });
    o.add<double>(app, "--eta-single", "per-pulse eta of a kick train, replaces --eta (default off)",
                  [](RunConfig &c, double v) { c.eta_single = v; });
    o.add<int>(app, "--n-pulses", fmt::format("pulses in the kick train (default {})", d.n_pulses),
               [](RunConfig &c, int v) { c.n_pulses = v; });
    o.add<double>(app, "--n-bar-c",
                  fmt::format("centre-of-mass thermal occupation (default {})", d.gate.n_bar_c),
                  [](RunConfig &c, double v) { c.gate.n_bar_c = v; });
    o.add<int>(app, "--cycles", fmt::format("Rabi cycles N (default {})", d.gate.cycles),
               [](RunConfig &c, int v) { c.gate.cycles = v; });
    o.flag(app, "--idealized-flip", "use the idealized conditional flip (default off)",
           [](RunConfig &c, bool v) { c.gate.idealized_flip = v; });
    o.add<double>(app, "--omega0",
                  "peak Rabi frequency override; 0 also zeroes the control phase (default solved)",
                  [](RunConfig &c, double v) { c.gate.omega0 = v; });
    o.add<double>(app, "--control-phase", "control phase override (default from the flip)",
                  [](RunConfig &c, double v) { c.gate.control_phase = v; });
    o.add<int>(app, "--dim-c", "centre-of-mass Fock levels, 0 = auto (default 0)",
               [](RunConfig &c, int v) { c.gate.dim_c = v; });
    o.add<int>(app, "--dim-r", "relative-mode Fock levels, 0 = auto (default 0)",
               [](RunConfig &c, int v) { c.gate.dim_r = v; });
    o.add<double>(app, "--weight-cutoff",
                  fmt::format("drop mixture components below this weight (default {})",
                              d.gate.weight_cutoff),
                  [](RunConfig &c, double v) { c.gate.weight_cutoff = v; });
    o.flag(app, "--no-convergence-check", "skip the truncation doubling check (default checked)",
           [](RunConfig &c, bool v) { c.gate.check_convergence = !v; });
    o.add<double>(app, "--tolerance",
                  fmt::format("truncation convergence tolerance (default {})",
                              d.gate.convergence_tol),
                  [](RunConfig &c, double v) { c.gate.convergence_tol = v; });
    o.add<double>(app, "--margin",
                  fmt::format("factor standing in for >> (default {})", d.gate.conditions.margin),
                  [](RunConfig &c, double v) { c.gate.conditions.margin = v; });
    o.add<int>(app, "--samples",
               fmt::format("separation sample count (default {})", d.separation_samples),
               [](RunConfig &c, int v) { c.separation_samples = v; });
    o.add<std::vector<double>>(app, "--eta-grid",
                               "scan eta values, comma separated (default " + join(d.scan.eta) + ")",
                               [](RunConfig &c, const std::vector<double> &v) { c.scan.eta = v; })
        ->delimiter(',');
    o.add<std::vector<double>>(
         app, "--n-bar-grid",
         "scan n_bar_c values, comma separated (default " + join(d.scan.n_bar_c) + ")",
         [](RunConfig &c, const std::vector<double> &v) { c.scan.n_bar_c = v; })
        ->delimiter(',');
    o.flag(app, "--anharmonic,!--no-anharmonic", "compute F_cor (default on)",
           [](RunConfig &c, bool v) { c.gate.anharmonic.enabled = v; });
    o.add<int>(app, "--order",
               fmt::format("anharmonic Taylor order, 0 disables (default {})",
                           d.gate.anharmonic.order),
               [](RunConfig &c, int v) { c.gate.anharmonic.order = v; });
    o.add<int>(app, "--quadrature-points",
               fmt::format("Simpson intervals per period (default {})",
                           d.gate.anharmonic.quadrature_points),
               [](RunConfig &c, int v) { c.gate.anharmonic.quadrature_points = v; });
    o.flag(app, "--kicked", "take F_cor expectations in the kicked state (default initial)",
           [](RunConfig &c, bool v) {
               c.gate.anharmonic.mode = v ? ExpectationMode::Kicked : ExpectationMode::Initial;
           });
    o.add<double>(app, "--scale", "multiply all anharmonic coefficients (default 1)",
                  [](RunConfig &c, double v) { c.gate.anharmonic.scale = v; });
    o.add<std::string>(app, "-o,--output", "output file, stdout when empty (default empty)",
                       [](RunConfig &c, const std::string &v) { c.output.path = v; });
    o.add<std::string>(app, "--format", "csv or json (default csv for tables, json otherwise)",
                       [](RunConfig &c, const std::string &v) { c.output.format = v; });
    o.add<int>(app, "--precision",
               fmt::format("significant digits (default {})", d.output.precision),
               [](RunConfig &c, int v) { c.output.precision = v; });

    std::function<CommandOutput(const RunConfig &, const CommandFlags &)> command;
    auto sub = [&](const char *name, const char *desc, auto fn) {
        CLI::App *s = app.add_subcommand(name, desc);
        s->fallthrough();
        s->callback([&command, fn] { command = fn; });
        return s;
    };
    double solve_ratio = 0.0;
    CLI::Option *ratio_opt =
        sub("modes", "equilibrium, normal-mode frequencies, widths and eta per mode", cmd_modes)
            ->add_option("--solve-ratio", solve_ratio, "pick the exponent giving nu_r/nu_c = R");
    sub("separation", "branch separation d(t), numeric against the closed form", cmd_separation);
    sub("conditions", "addressing-laser parameters and condition checks", cmd_conditions);
    sub("gate", "one full gate simulation", cmd_gate);
    CLI::App *scan_cmd = sub("scan", "fidelity, purity and F_cor over an (eta, n_bar_c) grid", cmd_scan);
    scan_cmd->add_flag("--skip-existing", flags.skip_existing,
                       "keep rows already present in --output");
    scan_cmd->add_option("--jobs", flags.jobs, "worker threads (default 1)")
        ->check(CLI::PositiveNumber);
    sub("anharmonic", "perturbative F_cor against full propagation", cmd_anharmonic);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kConfigError;
    }

    try {
        RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
        o.apply(config);
        config.validate();
        if (dump_only) {
            out << dump_config(config);
            return kSuccess;
        }
        if (ratio_opt->count() > 0) {
            flags.solve_ratio = solve_ratio;
        }
        std::filesystem::path target;
        if (!config.output.path.empty()) {
            target = resolve_output(config.output.path);
            if (flags.skip_existing && std::filesystem::exists(target)) {
                std::ifstream in(target);
                std::stringstream buffer;
                buffer << in.rdbuf();
                flags.existing = buffer.str();
            }
        } else if (flags.skip_existing) {
            config_error("--skip-existing needs --output");
        }

        const CommandOutput result = command(config, flags);
        if (target.empty()) {
            out << result.text;
        } else {
            if (target.has_parent_path()) {
                std::filesystem::create_directories(target.parent_path());
            }
            std::ofstream file(target, std::ios::binary);
            file << result.text;
            if (!file) {
                config_error("cannot write " + target.string());
            }
        }
        err << result.message;
        return result.exit_code;
    } catch (const Error &e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }
}

}  // namespace hotgate::cli

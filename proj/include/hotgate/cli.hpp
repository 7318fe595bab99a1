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


// Command-line front end. Configuration is layered: built-in defaults, then a
// YAML file (--config), then flags.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hotgate/analysis.hpp"

namespace hotgate::cli {

enum ExitCode : int {
    kSuccess = 0,
    kConfigError = 1,
    kInfeasible = 2,
    kNotConverged = 3,
};

struct ScanGrid {
    std::vector<double> eta{2.0, 4.0, 7.0};
    std::vector<double> n_bar_c{0.0, 0.5, 1.0};
};

struct OutputConfig {
    std::string path;    // empty writes to stdout
    std::string format;  // csv | json, empty picks the command default
    int precision = 12;  // significant digits
};

struct RunConfig {
    GateConfig gate;
    std::optional<double> eta_single;  // with n_pulses, replaces gate.eta
    int n_pulses = 1;
    int separation_samples = 64;
    ScanGrid scan;
    OutputConfig output;

    /// Throws Error(Config) on out-of-range values.
    void validate() const;
    /// gate.eta, or the pulse-train total when eta_single is set.
    double effective_eta() const;
};

/// Parses YAML text. Unknown sections or keys are rejected.
RunConfig parse_config(const std::string &yaml);
RunConfig load_config(const std::string &path);

/// Fully resolved configuration as YAML; parse_config() reads it back.
std::string dump_config(const RunConfig &config);

/// FNV-1a 64 over the physics-relevant part of dump_config().
std::uint64_t config_hash(const RunConfig &config);

struct CommandOutput {
    int exit_code = kSuccess;
    std::string text;     // data written to the output target
    std::string message;  // diagnostics for stderr
};

struct CommandFlags {
    std::optional<double> solve_ratio;  // modes
    bool skip_existing = false;         // scan
    int jobs = 1;                       // scan
    bool stamp = false;
    std::string existing;  // previous scan output, read for skip_existing
};

CommandOutput cmd_modes(const RunConfig &config, const CommandFlags &flags = {});
CommandOutput cmd_separation(const RunConfig &config, const CommandFlags &flags = {});
CommandOutput cmd_conditions(const RunConfig &config, const CommandFlags &flags = {});
CommandOutput cmd_gate(const RunConfig &config, const CommandFlags &flags = {});
CommandOutput cmd_scan(const RunConfig &config, const CommandFlags &flags = {});
CommandOutput cmd_anharmonic(const RunConfig &config, const CommandFlags &flags = {});

/// Maps a library error onto the process exit code.
int exit_code_for(ErrorKind kind);

/// Full program: parses argv, runs the subcommand, writes the result.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace hotgate::cli

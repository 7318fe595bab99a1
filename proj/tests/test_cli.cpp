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


#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "hotgate/cli.hpp"
#include "test_util.hpp"

namespace hotgate::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Invocation {
    int code;
    std::string out;
    std::string err;
};

Invocation invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "hotgate");
    std::vector<const char *> argv;
    for (const auto &a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

json invoke_json(const std::vector<std::string> &args) {
    const Invocation r = invoke(args);
    EXPECT_EQ(r.code, 0) << r.err;
    return json::parse(r.out);
}

struct Csv {
    std::vector<std::string> comments;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split(const std::string &line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

Csv parse_csv(const std::string &text) {
    Csv csv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.starts_with("#")) {
            csv.comments.push_back(line);
        } else if (csv.columns.empty()) {
            csv.columns = split(line);
        } else {
            csv.rows.push_back(split(line));
        }
    }
    return csv;
}

class TempDir : public ::testing::Test {
   protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("hotgate_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override {
        fs::remove_all(dir_);
    }
    std::string path(const std::string &name) const {
        return (dir_ / name).string();
    }
    static std::string slurp(const std::string &p) {
        std::ifstream in(p);
        std::stringstream b;
        b << in.rdbuf();
        return b.str();
    }
    void write(const std::string &name, const std::string &text) const {
        std::ofstream(path(name)) << text;
    }
    fs::path dir_;
};

TEST(RunConfig, RejectsUnknownKeys) {
    EXPECT_ERROR_KIND(parse_config("gate:\n  etta: 3\n"), ErrorKind::Config);
    EXPECT_ERROR_KIND(parse_config("trapp:\n  exponent: 2\n"), ErrorKind::Config);
    EXPECT_ERROR_KIND(parse_config("gate: 3\n"), ErrorKind::Config);
    EXPECT_ERROR_KIND(parse_config("gate:\n  eta: [1, 2]\n"), ErrorKind::Config);
}

TEST(RunConfig, ValidatesRanges) {
    EXPECT_ERROR_KIND(parse_config("gate:\n  cycles: 0\n"), ErrorKind::Config);
    EXPECT_ERROR_KIND(parse_config("trap:\n  exponent: 1\n"), ErrorKind::Config);
    EXPECT_ERROR_KIND(parse_config("anharmonic:\n  quadrature_points: 63\n"), ErrorKind::Config);
    EXPECT_ERROR_KIND(parse_config("anharmonic:\n  mode: sideways\n"), ErrorKind::Config);
    EXPECT_ERROR_KIND(parse_config("output:\n  format: xml\n"), ErrorKind::Config);
    EXPECT_ERROR_KIND(parse_config("gate:\n  eta_single: 0.45\n  n_pulses: 16\n"),
                      ErrorKind::Config);
    EXPECT_ERROR_KIND(parse_config("truncation:\n  dim_c: 1\n"), ErrorKind::Config);
}

TEST(RunConfig, DumpRoundTripsAndHashIgnoresOutputPath) {
    RunConfig c = parse_config(
        "gate:\n  eta_single: 0.45\n  n_pulses: 15\n  omega0: 2.5\n"
        "scan:\n  eta: [1, 3]\n  n_bar_c: [0.25]\n"
        "anharmonic:\n  mode: kicked\n  scale: 4\n"
        "output:\n  path: out.csv\n");
    EXPECT_NEAR(c.effective_eta(), 6.75, 1e-12);
    const std::string text = dump_config(c);
    EXPECT_EQ(dump_config(parse_config(text)), text);
    EXPECT_EQ(config_hash(parse_config(text)), config_hash(c));
    RunConfig moved = c;
    moved.output.path = "elsewhere.csv";
    EXPECT_EQ(config_hash(moved), config_hash(c));
    moved.gate.n_bar_c = 0.5;
    EXPECT_NE(config_hash(moved), config_hash(c));
}

TEST(RunConfig, EmptyFileGivesDefaults) {
    EXPECT_EQ(dump_config(parse_config("")), dump_config(RunConfig{}));
}

TEST_F(TempDir, FlagsOverrideFile) {
    write("c.yaml", "gate:\n  eta: 3\n  n_bar_c: 0.5\n");
    const Invocation r = invoke({"--config", path("c.yaml"), "--eta", "5", "--dump-config", "gate"});
    ASSERT_EQ(r.code, 0) << r.err;
    const RunConfig c = parse_config(r.out);
    EXPECT_EQ(c.gate.eta, 5.0);
    EXPECT_EQ(c.gate.n_bar_c, 0.5);
}

TEST_F(TempDir, ConfigErrorsExitOne) {
    write("bad.yaml", "gate:\n  unknown: 1\n");
    EXPECT_EQ(invoke({"--config", path("bad.yaml"), "modes"}).code, kConfigError);
    EXPECT_EQ(invoke({"modes", "--bogus"}).code, kConfigError);
    EXPECT_EQ(invoke({}).code, kConfigError);
    EXPECT_EQ(invoke({"gate", "--cycles", "0"}).code, kConfigError);
}

TEST(Cli, HelpListsDefaults) {
    const Invocation r = invoke({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("(default 7)"), std::string::npos);
    EXPECT_NE(r.out.find("quadrature_points: 256"), std::string::npos);
    EXPECT_NE(r.out.find("Exit codes"), std::string::npos);
}

TEST(Cli, ExitCodeMapping) {
    EXPECT_EQ(exit_code_for(ErrorKind::Config), kConfigError);
    EXPECT_EQ(exit_code_for(ErrorKind::InvalidParameter), kConfigError);
    EXPECT_EQ(exit_code_for(ErrorKind::InfeasibleRatio), kInfeasible);
    EXPECT_EQ(exit_code_for(ErrorKind::NoEquilibrium), kInfeasible);
    EXPECT_EQ(exit_code_for(ErrorKind::NotConverged), kNotConverged);
}

TEST(CmdModes, RatioExamples) {
    EXPECT_NEAR(invoke_json({"modes", "--exponent", "1.6667"})["ratio"].get<double>(), 2.0, 1e-3);
    EXPECT_NEAR(invoke_json({"modes", "--exponent", "2"})["ratio"].get<double>(), 1.732051, 1e-6);
    const json solved = invoke_json({"modes", "--solve-ratio", "2"});
    EXPECT_NEAR(solved["solved_exponent"].get<double>(), 1.666667, 1e-6);
    EXPECT_NEAR(solved["ratio"].get<double>(), 2.0, 1e-9);
    const json m = invoke_json({"modes"});
    EXPECT_NEAR(m["modes"]["c"]["eta"].get<double>(), 7.0 / std::sqrt(2.0), 1e-9);
    EXPECT_NEAR(m["x_e"].get<double>(), 510.0, 5.0);
}

TEST(CmdModes, InfeasibleRatioExitsTwo) {
    const Invocation r = invoke({"modes", "--solve-ratio", "0.5"});
    EXPECT_EQ(r.code, kInfeasible);
    EXPECT_NE(r.err.find("ratio"), std::string::npos);
}

TEST(CmdSeparation, PeakAtOneThirdPeriod) {
    const Invocation r = invoke({"separation", "--eta", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    const Csv csv = parse_csv(r.out);
    ASSERT_EQ(csv.columns, (std::vector<std::string>{"t", "d_analytic", "d_numeric"}));
    ASSERT_EQ(csv.rows.size(), 64u);
    EXPECT_LT(std::abs(std::stod(csv.rows[0][2])), 1e-12);
    std::size_t peak = 0;
    for (std::size_t i = 0; i < csv.rows.size(); ++i) {
        if (std::stod(csv.rows[i][2]) > std::stod(csv.rows[peak][2])) {
            peak = i;
        }
    }
    EXPECT_EQ(peak, 21u);
    EXPECT_NEAR(std::stod(csv.rows[peak][0]), 2.0 * M_PI / 3.0, 1e-10);
    EXPECT_NEAR(std::stod(csv.rows[peak][2]) / (2.0 * std::sqrt(0.5)), 2.598076, 1e-6);
    bool dims = false;
    for (const auto &c : csv.comments) {
        dims = dims || c.starts_with("# dims: c=");
    }
    EXPECT_TRUE(dims);
}

TEST(CmdSeparation, TruncationFailureExitsThree) {
    const Invocation r = invoke({"separation", "--eta", "4", "--dim-c", "6", "--dim-r", "5"});
    EXPECT_EQ(r.code, kNotConverged);
    EXPECT_NE(r.err.find("not converged"), std::string::npos);
}

TEST(CmdSeparation, JsonFormat) {
    const json j = invoke_json({"separation", "--eta", "1", "--samples", "16", "--format", "json"});
    EXPECT_EQ(j["t"].size(), 16u);
    EXPECT_TRUE(j["converged"].get<bool>());
}

TEST(CmdConditions, Examples) {
    const json j = invoke_json({"conditions", "--eta", "7", "--n-bar-c", "0", "--cycles", "3"});
    EXPECT_EQ(j["W_over_D"].get<double>(), 12.5);
    EXPECT_NEAR(j["delta_over_x0"].get<double>(), std::sqrt(3.0) / 2.0, 1e-11);
    EXPECT_NEAR(j["eta_bound"].get<double>(), 1.0 / 3.0, 1e-11);
    EXPECT_TRUE(j["all_satisfied"].get<bool>());
    EXPECT_FALSE(invoke_json({"conditions", "--eta", "0.3"})["flags"]["eta_condition"].get<bool>());
    EXPECT_EQ(invoke({"conditions", "--format", "csv"}).code, kConfigError);
}

TEST(CmdGate, Examples) {
    const json ideal = invoke_json({"gate", "--idealized-flip", "--eta", "3", "--n-bar-c", "0.5"});
    EXPECT_GE(ideal["fidelity"].get<double>(), 1.0 - 1e-6);
    EXPECT_EQ(ideal["flip"], "idealized");
    const json off = invoke_json({"gate", "--omega0", "0", "--eta", "2"});
    EXPECT_NEAR(off["fidelity_vs_identity"].get<double>(), 1.0, 1e-9);
    const json full = invoke_json({"gate", "--eta", "7", "--n-bar-c", "0", "--cycles", "3"});
    EXPECT_GE(full["fidelity"].get<double>(), 0.99);
    EXPECT_LE(full["fidelity"].get<double>(), 1.0);
    EXPECT_TRUE(full["convergence"]["checked"].get<bool>());
    EXPECT_GT(full["dims"]["c"].get<int>(), 0);
    EXPECT_TRUE(full["f_cor"].is_number());
    EXPECT_TRUE(invoke_json({"gate", "--eta", "2", "--no-anharmonic"})["f_cor"].is_null());
}

TEST(CmdAnharmonic, DisabledAndScaling) {
    const json off = invoke_json({"anharmonic", "--order", "0", "--eta", "2"});
    EXPECT_EQ(off["f_cor_perturbative"].get<double>(), 1.0);
    EXPECT_EQ(off["f_cor_exact"].get<double>(), 1.0);

    RunConfig c;
    c.gate.eta = 1.0;
    c.gate.n_bar_c = 1.0;
    c.gate.dim_c = 12;
    c.gate.dim_r = 12;
    c.output.precision = 17;
    const json base = json::parse(cmd_anharmonic(c).text);
    c.gate.anharmonic.scale = 2.0;
    const json twice = json::parse(cmd_anharmonic(c).text);
    const double b = 1.0 - base["f_cor_perturbative"].get<double>();
    const double t = 1.0 - twice["f_cor_perturbative"].get<double>();
    EXPECT_NEAR(t / (4.0 * b), 1.0, 1e-10);
    EXPECT_LE(base["delta"].get<double>(), 5.0 * std::pow(b, 1.5));
}

TEST(Cli, TwelveSignificantDigits) {
    const Invocation r = invoke({"modes"});
    EXPECT_NE(r.out.find("\"x0\": 0.707106781187,"), std::string::npos) << r.out;
    const Invocation six = invoke({"modes", "--precision", "6"});
    EXPECT_NE(six.out.find("\"x0\": 0.707107,"), std::string::npos) << six.out;
}

TEST_F(TempDir, ScanGridOrderAndTrends) {
    const Invocation r = invoke({"scan", "--no-convergence-check", "-o", path("scan.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const Csv csv = parse_csv(slurp(path("scan.csv")));
    ASSERT_EQ(csv.rows.size(), 9u);
    EXPECT_EQ(csv.columns[0], "eta");
    EXPECT_EQ(csv.columns[4], "F_cor");
    const double etas[] = {2, 4, 7};
    const double nbars[] = {0, 0.5, 1};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const auto &row = csv.rows[i * 3 + j];
            EXPECT_EQ(std::stod(row[0]), etas[i]);
            EXPECT_EQ(std::stod(row[1]), nbars[j]);
            if (j > 0) {
                EXPECT_LE(std::stod(row[2]), std::stod(csv.rows[i * 3 + j - 1][2]));
            }
            if (i > 0) {
                EXPECT_GE(std::stod(row[2]), std::stod(csv.rows[(i - 1) * 3 + j][2]));
            }
            EXPECT_GE(std::stod(row[4]), std::stod(row[2]));
        }
    }
    bool hash = false;
    bool convention = false;
    for (const auto &c : csv.comments) {
        hash = hash || c.starts_with("# config_hash: fnv1a64:");
        convention = convention || c.starts_with("# fidelity: ");
        EXPECT_FALSE(c.starts_with("# stamp:"));
    }
    EXPECT_TRUE(hash);
    EXPECT_TRUE(convention);
}

TEST_F(TempDir, ScanIsByteIdenticalAndResumable) {
    const std::vector<std::string> common{"scan", "--no-convergence-check", "--eta-grid", "1,2",
                                          "--n-bar-grid", "0,0.5"};
    auto with = [&](std::vector<std::string> extra) {
        std::vector<std::string> args = common;
        args.insert(args.end(), extra.begin(), extra.end());
        return invoke(args);
    };
    ASSERT_EQ(with({"-o", path("a.csv")}).code, 0);
    ASSERT_EQ(with({"-o", path("b.csv"), "--jobs", "3"}).code, 0);
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));

    const std::string full = slurp(path("a.csv"));
    const std::string partial = full.substr(0, full.rfind('\n', full.size() - 2) + 1);
    write("c.csv", partial);
    ASSERT_EQ(with({"-o", path("c.csv"), "--skip-existing"}).code, 0);
    EXPECT_EQ(slurp(path("c.csv")), full);

    const Invocation mismatch = with({"-o", path("c.csv"), "--skip-existing", "--cycles", "4"});
    EXPECT_EQ(mismatch.code, kConfigError);
    EXPECT_EQ(with({"--skip-existing"}).code, kConfigError);

    const Invocation stamped = with({"--stamp"});
    EXPECT_NE(stamped.out.find("# stamp: "), std::string::npos);
}

TEST_F(TempDir, OutputDirectoryOverride) {
    ::setenv("HOTGATE_OUTPUT_DIR", dir_.c_str(), 1);
    const Invocation r = invoke({"conditions", "-o", "nested/cond.json"});
    ::unsetenv("HOTGATE_OUTPUT_DIR");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    EXPECT_EQ(json::parse(slurp(path("nested/cond.json")))["command"], "conditions");
}

TEST(CmdScan, FailingRowsAreReported) {
    RunConfig c;
    c.gate.check_convergence = false;
    c.scan.eta = {0.0, 1.0};
    c.scan.n_bar_c = {0.0};
    const CommandOutput partial = cmd_scan(c);
    EXPECT_EQ(partial.exit_code, kSuccess);
    EXPECT_NE(partial.message.find("failed"), std::string::npos);
    EXPECT_EQ(parse_csv(partial.text).rows.size(), 1u);
    c.scan.eta = {0.0};
    const CommandOutput all = cmd_scan(c);
    EXPECT_NE(all.exit_code, kSuccess);
}

}  // namespace
}  // namespace hotgate::cli

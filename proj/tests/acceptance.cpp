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


// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hotgate/cli.hpp"

namespace {

using namespace hotgate;

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string &what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
    void note(const std::string &what) {
        if (pass) {
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

TrapSpec calcium(double eta, double exponent = 5.0 / 3.0) {
    return natural_trap(exponent, natural_coulomb_constant(40.0, 50e3), eta);
}

ModeBasis auto_basis(double eta, double n_bar_c) {
    const TrapSpec spec = calcium(eta);
    const auto [nc, nr] = default_dims(spec, n_bar_c, relative_mode_occupation(n_bar_c));
    return make_mode_basis(spec, FockDim(nc), FockDim(nr));
}

double mean_occupation(const DensityOp &rho) {
    const int n = rho.dim();
    double mean = 0.0;
    for (int k = 0; k < n; ++k) {
        mean += k * rho.matrix()(k, k).real();
    }
    return mean;
}

Outcome separation_law() {
    Outcome o;
    for (const double eta : {0.5, 2.0, 7.0}) {
        const ModeBasis b = auto_basis(eta, 0.0);
        const SeparationCurve c = separation_curve(b, eta, 64);
        double err = 0.0;
        std::size_t peak = 0;
        for (std::size_t i = 0; i < c.times.size(); ++i) {
            err = std::max(err, std::abs(c.d_numeric[i] - c.d_analytic[i]));
            if (c.d_numeric[i] > c.d_numeric[peak]) {
                peak = i;
            }
        }
        const double expected = 3.0 * std::sqrt(3.0) * b.x0 * eta / 2.0;
        const double rel = std::abs(c.d_numeric[peak] - expected) / expected;
        o.check(c.times.size() == 64, "sample count");
        o.check(err < 1e-7 * b.x0, fmt::format("eta={} max err {:.3g} x0", eta, err / b.x0));
        o.check(std::abs(c.times[peak] - 2.0 * kPi / (3.0 * b.nu_c)) < 1e-12,
                fmt::format("eta={} peak at t={}", eta, c.times[peak]));
        o.check(rel < 1e-8, fmt::format("eta={} peak rel err {:.3g}", eta, rel));
        o.note(fmt::format("eta={}: err/x0={:.1e} peak rel={:.1e}", eta, err / b.x0, rel));
    }
    return o;
}

Outcome commensurability() {
    Outcome o;
    const double ratio = frequency_ratio(5.0 / 3.0);
    const ModeFrequencies f = mode_frequencies(calcium(0.0));
    const double p = solve_exponent_for_ratio(2.0);
    o.check(std::abs(ratio - 2.0) < 1e-9, fmt::format("ratio {:.15g}", ratio));
    o.check(std::abs(f.ratio() - 2.0) < 1e-9, fmt::format("natural trap ratio {:.15g}", f.ratio()));
    o.check(std::abs(p - 5.0 / 3.0) < 1e-6, fmt::format("solved p {:.12g}", p));
    o.note(fmt::format("|ratio-2|={:.1e} |p-5/3|={:.1e}", std::abs(ratio - 2.0),
                       std::abs(p - 5.0 / 3.0)));
    return o;
}

Outcome periodicity() {
    Outcome o;
    const ModeBasis b = make_mode_basis(calcium(1.0), FockDim(30), FockDim(20));
    const Matrix u = free_propagator(b, 2.0 * kPi / b.nu_c);
    const Complex phase = u(0, 0);
    double diag = 0.0;
    bool off_zero = true;
    for (int i = 0; i < u.rows(); ++i) {
        for (int j = 0; j < u.cols(); ++j) {
            if (i == j) {
                diag = std::max(diag, std::abs(u(i, i) / phase - 1.0));
            } else if (u(i, j) != Complex(0.0)) {
                off_zero = false;
            }
        }
    }
    o.check(diag < 1e-12, fmt::format("diagonal deviation {:.3g}", diag));
    o.check(off_zero, "nonzero off-diagonal");
    o.note(fmt::format("dim {} deviation {:.1e} phase {:.6g}{:+.6g}i", u.rows(), diag, phase.real(),
                       phase.imag()));
    return o;
}

Outcome gate_cancellation() {
    Outcome o;
    for (const double n_bar : {0.0, 1.0, 5.0}) {
        GateConfig config;
        config.eta = 4.0;
        config.n_bar_c = n_bar;
        config.idealized_flip = true;
        config.check_convergence = false;
        config.anharmonic.enabled = false;
        const GateReport r = evaluate_gate(config);
        const double restore = r.motional_restoration.value_or(1.0);
        o.check(r.fidelity >= 1.0 - 1e-6, fmt::format("n_bar={} F={:.12g}", n_bar, r.fidelity));
        o.check(restore <= 1e-6, fmt::format("n_bar={} restoration {:.3g}", n_bar, restore));
        o.note(fmt::format("n_bar={}: 1-F={:.1e} trace-distance bound {:.1e} dims {}x{}", n_bar,
                           1.0 - r.fidelity, restore, r.dim_c, r.dim_r));
    }
    return o;
}

Outcome thermal_relation() {
    Outcome o;
    const ModeBasis b = make_mode_basis(calcium(0.0), FockDim(160), FockDim(80));
    for (const double n_bar : {0.0, 0.5, 1.0, 3.0}) {
        const MotionalState m = thermal_motion(b, n_bar);
        const double expected = n_bar * n_bar / (2.0 * n_bar + 1.0);
        const double err_r = std::abs(mean_occupation(m.r) - expected);
        const double err_c = std::abs(mean_occupation(m.c) - n_bar);
        o.check(err_r < 1e-8, fmt::format("n_bar={} relative-mode error {:.3g}", n_bar, err_r));
        o.check(err_c < 1e-8, fmt::format("n_bar={} centre-of-mass error {:.3g}", n_bar, err_c));
        o.check(std::abs(relative_mode_occupation(n_bar) - expected) < 1e-15, "closed form");
        o.note(fmt::format("n_bar={}: err {:.1e}", n_bar, err_r));
    }
    return o;
}

Outcome conditions() {
    Outcome o;
    for (const int cycles : {1, 3, 5}) {
        const ModeBasis b = auto_basis(7.0, 0.0);
        const ConditionReport r = condition_solver(b, 0.0, cycles).report;
        const double w = (4.0 * cycles + 0.5) * r.D;
        const double area = (2.0 * cycles + 0.25) * kPi;
        o.check(std::abs(r.W - w) <= 1e-15 * w, fmt::format("N={} W {:.17g} vs {:.17g}", cycles, r.W, w));
        o.check(std::abs(r.pulse_area - area) <= 1e-12 * area,
                fmt::format("N={} area {:.17g} vs {:.17g}", cycles, r.pulse_area, area));
        o.check(std::abs(r.eta_bound - 1.0 / 3.0) < 1e-12,
                fmt::format("eta bound {:.17g}", r.eta_bound));
        o.check(r.W_over_D == 4.0 * cycles + 0.5, fmt::format("N={} W/D {}", cycles, r.W_over_D));
    }
    o.note("W=(4N+1/2)D, area=(2N+1/4)pi, eta bound 1/3");
    return o;
}

Outcome fidelity_trends() {
    Outcome o;
    const std::vector<double> etas{2.0, 4.0, 7.0};
    const std::vector<double> nbars{0.0, 0.5, 1.0};
    std::vector<std::pair<double, double>> grid;
    for (const double e : etas) {
        for (const double n : nbars) {
            grid.emplace_back(e, n);
        }
    }
    GateConfig config;
    config.cycles = 3;
    config.anharmonic.enabled = false;
    const int jobs = std::max(1u, std::thread::hardware_concurrency());
    const auto rows = scan(grid, config, jobs);
    auto f = [&](std::size_t i, std::size_t j) { return rows[i * 3 + j].report->fidelity; };
    for (const auto &row : rows) {
        if (!row.report) {
            o.check(false, fmt::format("row ({}, {}) failed: {}", row.eta, row.n_bar_c, row.error));
            return o;
        }
        o.check(row.report->converged,
                fmt::format("row ({}, {}) not converged", row.eta, row.n_bar_c));
    }
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            if (i > 0) {
                o.check(f(i, j) >= f(i - 1, j),
                        fmt::format("F decreases in eta at n_bar={}", nbars[j]));
            }
            if (j > 0) {
                o.check(f(i, j) <= f(i, j - 1),
                        fmt::format("F increases in n_bar at eta={}", etas[i]));
            }
        }
    }
    const double f70 = f(2, 0);
    constexpr double kGolden = 0.995563065905;
    o.check(f70 >= 0.99, fmt::format("F(7,0)={:.12g}", f70));
    o.check(std::abs(f70 - kGolden) < 1e-9, fmt::format("F(7,0)={:.12g} vs golden {}", f70, kGolden));
    std::string table;
    for (std::size_t i = 0; i < 3; ++i) {
        table += fmt::format(" eta={}:[{:.6f} {:.6f} {:.6f}]", etas[i], f(i, 0), f(i, 1), f(i, 2));
    }
    o.note("F" + table);
    return o;
}

Outcome anharmonic() {
    Outcome o;
    const TrapSpec spec = calcium(1.0);
    const ModeBasis b = make_mode_basis(spec, FockDim(16), FockDim(16));
    const MotionalState motion = thermal_motion(b, 1.0);
    const AnharmonicExpansion e = anharmonic_expansion(spec, 3);

    o.check(anharmonic_fidelity(b, AnharmonicExpansion{}, motion).f_cor == 1.0, "empty V_cor");
    const double base = 1.0 - anharmonic_fidelity(b, e, motion).f_cor;
    const double twice = 1.0 - anharmonic_fidelity(b, e.scaled(2.0), motion).f_cor;
    o.check(std::abs(twice / (4.0 * base) - 1.0) < 1e-10,
            fmt::format("scaling ratio {:.15g}", twice / base));

    double gaps[2];
    int k = 0;
    for (const double s : {1.0, 4.0}) {
        const auto es = e.scaled(s);
        const double f = anharmonic_fidelity(b, es, motion).f_cor;
        const double exact = anharmonic_fidelity_exact(b, es, motion, ExpectationMode::Initial);
        const double gap = std::abs(f - exact);
        const double bound = 5.0 * std::pow(1.0 - f, 1.5);
        o.check(gap <= bound, fmt::format("scale {} gap {:.3g} > {:.3g}", s, gap, bound));
        o.note(fmt::format("scale {}: 1-F={:.3e} gap/(1-F)^1.5={:.3f}", s, 1.0 - f,
                           gap / std::pow(1.0 - f, 1.5)));
        gaps[k++] = gap;
    }
    o.note(fmt::format("gap ratio {:.1f}", gaps[1] / gaps[0]));
    return o;
}

Outcome pulse_trains() {
    Outcome o;
    const PulseTrain t = pulse_train(0.45, 15);
    o.check(std::abs(t.eta_effective - 6.75) < 1e-12, fmt::format("eta_eff {}", t.eta_effective));
    o.check(t.net_flip, "odd train should flip");
    const int needed = static_cast<int>(std::ceil(7.0 / 0.45));
    o.check(needed == 16, fmt::format("pulses for eta 7: {}", needed));
    o.note(fmt::format("eta_eff={} pulses for eta 7: {}", t.eta_effective, needed));
    return o;
}

Outcome determinism() {
    Outcome o;
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "hotgate_acceptance";
    fs::create_directories(dir);
    std::string text[2];
    for (int i = 0; i < 2; ++i) {
        const std::string path = (dir / fmt::format("scan{}.csv", i)).string();
        const std::string jobs = i == 0 ? "1" : "2";
        const char *argv[] = {"hotgate", "scan", "--no-convergence-check", "--jobs", jobs.c_str(),
                              "-o", path.c_str()};
        std::ostringstream out;
        std::ostringstream err;
        const int code = cli::run(7, argv, out, err);
        o.check(code == 0, fmt::format("run {} exit {}: {}", i, code, err.str()));
        std::ifstream in(path, std::ios::binary);
        std::stringstream buf;
        buf << in.rdbuf();
        text[i] = buf.str();
    }
    fs::remove_all(dir);
    o.check(!text[0].empty() && text[0] == text[1], "scan outputs differ");
    o.note(fmt::format("{} bytes identical", text[0].size()));
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria{
        {"separation law", separation_law},
        {"commensurability", commensurability},
        {"periodicity", periodicity},
        {"gate cancellation", gate_cancellation},
        {"thermal relation", thermal_relation},
        {"conditions", conditions},
        {"fidelity trends", fidelity_trends},
        {"anharmonic fidelity", anharmonic},
        {"pulse train", pulse_trains},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception &e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failures += o.pass ? 0 : 1;
        std::printf("%s %2zu %-20s %7.2fs  %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    secs, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
                criteria.size());
    return failures == 0 ? 0 : 1;
}

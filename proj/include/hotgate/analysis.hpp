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


#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hotgate/channel.hpp"
#include "hotgate/gate.hpp"
#include "hotgate/trap.hpp"

namespace hotgate {

// --- wavepacket separation ------------------------------------------------------

/// d(t) = 2 x0 eta [sin(nu_c t) - sin(2 nu_c t)/2].
double separation_analytic(const ModeBasis &basis, double eta_eff, double t);

/// Signed centroid difference <x1>_R - <x1>_L of the two kicked branches after
/// free harmonic evolution for each t. The branches start from `motion`
/// (vacuum when null).
std::vector<double> separation_numeric(const ModeBasis &basis, double eta_eff,
                                       std::span<const double> times,
                                       const MotionalState *motion = nullptr);
double separation_numeric(const ModeBasis &basis, double eta_eff, double t);

/// `samples` equally spaced times over [0, t_g], endpoints included.
std::vector<double> sample_times(const ModeBasis &basis, int samples);

struct SeparationCurve {
    std::vector<double> times;
    std::vector<double> d_analytic;
    std::vector<double> d_numeric;
    int dim_c = 0;
    int dim_r = 0;
    double max_change = 0.0;  // under doubled truncation
    bool converged = true;
};

SeparationCurve separation_curve(const ModeBasis &basis, double eta_eff, int samples = 64,
                                 double n_bar_c = 0.0, bool check_convergence = true,
                                 double tolerance = 1e-6);

// --- channel figures of merit ------------------------------------------------------

/// <<U|J|U>> / d^2 with J the Choi matrix. Throws Numeric if the channel is
/// not completely positive within 1e-8.
double entanglement_fidelity(const InternalChannel &channel, const Matrix &target);
/// Haar-averaged fidelity (d F_e + 1) / (d + 1).
double average_fidelity(const InternalChannel &channel, const Matrix &target);
/// Mean output purity over the 36 product states of {|0>,|1>,|+>,|->,|+i>,|-i>}^2.
double average_purity(const InternalChannel &channel);

// --- anharmonic correction ------------------------------------------------------------

enum class ExpectationMode {
    Initial,  // the pre-kick motional state
    Kicked,   // each kicked branch, variances averaged
};

struct AnharmonicOptions {
    int quadrature_points = 256;  // Simpson intervals over [0, t_g], even, >= 64
    ExpectationMode mode = ExpectationMode::Initial;
    double weight_cutoff = 1e-14;
    double quadrature_tolerance = 1e-8;
};

struct AnharmonicResult {
    double f_cor = 1.0;
    double quadrature_change = 0.0;  // |F(2Q) - F(Q)|
    bool quadrature_converged = true;
};

/// 1 - (<V~^2> - <V~>^2) with V~ the Heisenberg-picture time average of V_cor
/// over one gate period, computed on the banded product structure of V_cor.
AnharmonicResult anharmonic_fidelity(const ModeBasis &basis, const AnharmonicExpansion &expansion,
                                     const MotionalState &motion,
                                     const AnharmonicOptions &options = {});

/// Dense route for arbitrary motional density matrices.
double anharmonic_fidelity(const ModeBasis &basis, const AnharmonicExpansion &expansion,
                           const DensityOp &initial_motional, int quadrature_points);

/// Dense V~ on the motional space.
Matrix interaction_average_matrix(const ModeBasis &basis, const AnharmonicExpansion &expansion,
                                  int quadrature_points);

/// |Tr(rho U_I)|^2 with U_I = exp(i H_ho t_g) exp(-i (H_ho + V_cor) t_g).
double anharmonic_fidelity_exact(const ModeBasis &basis, const AnharmonicExpansion &expansion,
                                 const DensityOp &motional);

/// Exact counterpart of `anharmonic_fidelity` for a product state and mode.
double anharmonic_fidelity_exact(const ModeBasis &basis, const AnharmonicExpansion &expansion,
                                 const MotionalState &motion, ExpectationMode mode);

// --- full gate evaluation --------------------------------------------------------------

struct AnharmonicConfig {
    bool enabled = true;
    int order = 3;  // 0 disables
    int quadrature_points = 256;
    ExpectationMode mode = ExpectationMode::Initial;
    double scale = 1.0;
};

struct GateConfig {
    double exponent = 5.0 / 3.0;
    double coulomb = 0.0;  // 0 selects two Ca-40 ions at nu_c = 2 pi 50 kHz
    double eta = 7.0;
    double n_bar_c = 0.0;
    int cycles = 3;
    bool idealized_flip = false;
    ConditionOptions conditions;
    std::optional<double> omega0;         // overrides the solved peak Rabi frequency
    std::optional<double> control_phase;  // overrides the schedule default
    int dim_c = 0;                        // 0 selects the default truncation
    int dim_r = 0;
    double weight_cutoff = 1e-14;
    bool check_convergence = true;
    double convergence_tol = 1e-6;
    int max_doublings = 1;
    AnharmonicConfig anharmonic;

    TrapSpec trap() const;
};

struct GateReport {
    double eta = 0.0;
    double n_bar_c = 0.0;
    double fidelity = 0.0;
    double fidelity_vs_identity = 0.0;
    double purity = 0.0;
    std::optional<double> f_cor;
    bool f_cor_converged = true;
    std::optional<ConditionReport> conditions;
    int dim_c = 0;
    int dim_r = 0;
    bool convergence_checked = false;
    bool converged = true;
    double convergence_change = 0.0;
    std::optional<double> motional_restoration;
    double dropped_weight = 0.0;
    int components = 0;
    std::vector<std::string> warnings;
};

GateReport evaluate_gate(const GateConfig &config);

struct ScanRow {
    double eta = 0.0;
    double n_bar_c = 0.0;
    std::optional<GateReport> report;
    std::string error;
    ErrorKind error_kind = ErrorKind::Numeric;
};

/// Evaluates each (eta, n_bar_c) point of `grid` with `base` on up to `jobs`
/// threads. Rows keep the grid order; a failing row records its error.
std::vector<ScanRow> scan(const std::vector<std::pair<double, double>> &grid,
                          const GateConfig &base, int jobs = 1);

}  // namespace hotgate

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

// The interferometric two-ion gate:
//
//   t = 0    state-dependent kick on ion 2:  s+_2 e^{ik x2} + s-_2 e^{-ik x2}
//   t0       position-dependent flip on ion 1
//   t_g      second kick on ion 2, undoing the momentum transfer
//
// with t0 = 2pi/(3 nu_c) (largest branch separation) and t_g = 2pi/nu_c. When
// nu_r = 2 nu_c the free motion returns to its start at t_g, so the motional
// factors cancel and the net internal action is a conditional NOT on ion 1
// controlled by ion 2 being in |0>.
//
// Two implementations live here. The dense routines build composite-space
// unitaries on qubit_1 (x) qubit_2 (x) mode_c (x) mode_r and are meant for
// small truncations. simulate_gate_channel() exploits the block structure of
// the protocol to reach the truncations needed for hot ions.

#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hotgate/channel.hpp"
#include "hotgate/fock.hpp"
#include "hotgate/trap.hpp"

namespace hotgate {

/// Instantaneous state-dependent kick on ion 2 along +x.
struct KickPulse {
    double eta_effective = 0.0;
};

/// Gaussian addressed beam on ion 1: Omega(x) = omega0 exp(-(x - center)^2 / (2 width^2)),
/// applied for `duration`. Treated as instantaneous at t0.
struct AddressedPulse {
    double omega0 = 0.0;
    double center = 0.0;
    double width = 1.0;
    double duration = 1.0;

    void validate() const;
    double rabi(double x) const;
};

/// Testing surrogate: sigma^x on ion 1 conditioned on ion 2 being in |1> at
/// t0, i.e. on the branch that was kicked to the right.
struct IdealizedFlip {};

using FlipPulse = std::variant<AddressedPulse, IdealizedFlip>;

struct GateSchedule {
    double t0 = 0.0;
    double t_g = 0.0;
    KickPulse kick;  // used for both the opening and the closing kick
    FlipPulse flip = IdealizedFlip{};
    /// Phase e^{i phi} applied to |0>_2 after the closing kick. An addressed
    /// pulse of area (2N + 1/2) pi acts as -i sigma^x on the flipped branch;
    /// phi = pi/2 removes that branch phase.
    double control_phase = 0.0;

    void validate() const;
    /// Soft violations, e.g. a flip duration that is not short against t_g.
    std::vector<std::string> warnings() const;
};

/// Default timing for `basis`: t0 = 2pi/(3 nu_c), t_g = 2pi/nu_c, kick from
/// the basis Lamb-Dicke parameter and control_phase = pi/2 for addressed
/// pulses, 0 for the idealized flip.
GateSchedule make_schedule(const ModeBasis &basis, const FlipPulse &flip);

// --- motional states ---------------------------------------------------------

/// Product state rho_c (x) rho_r of the two modes.
struct MotionalState {
    DensityOp c;
    DensityOp r;

    Matrix to_matrix() const;
};

/// n_r = n_c^2 / (2 n_c + 1).
double relative_mode_occupation(double n_bar_c);

/// Thermal centre-of-mass state with occupation n_bar_c and the relative mode
/// at relative_mode_occupation(n_bar_c), truncated to the basis dimensions.
MotionalState thermal_motion(const ModeBasis &basis, double n_bar_c);

MotionalState vacuum_motion(const ModeBasis &basis);

// --- laser conditions ----------------------------------------------------------

struct ConditionOptions {
    double margin = 3.0;              // factor standing in for ">>"
    double duration_fraction = 0.01;  // t1 / t_g
    int min_cycles = 3;               // smallest N accepted as 4N >> 1
};

struct ConditionReport {
    double n_bar_c = 0.0;
    double n_bar_r = 0.0;
    double eta = 0.0;
    int cycles = 0;           // N
    double D = 0.0;           // 3 sqrt(3) x0 eta / 2
    double delta = 0.0;       // sqrt(n_c + n_r/2 + 3/4) x0
    double W = 0.0;           // (4N + 1/2) D
    double center = 0.0;      // x_e/2 + W
    double omega0 = 0.0;
    double duration = 0.0;    // t1
    double pulse_area = 0.0;  // Omega(x_e/2) t1 / 2
    double W_over_D = 0.0;
    double D_over_delta = 0.0;
    double angle_spread = 0.0;  // (t1/2) |Omega'(x_e/2)| delta
    double eta_bound = 0.0;     // sqrt(4 n_c + 2 n_r + 3) / (3 sqrt 3)
    double eta_bound_ratio = 0.0;

    bool separation_hierarchy = false;  // W >> D >> delta
    bool rabi_matching = false;         // pulse area (2N + 1/4) pi
    bool uniform_illumination = false;  // angle_spread << 1
    bool many_cycles = false;           // 4N >> 1
    bool eta_condition = false;         // eta >> eta_bound

    bool all_satisfied() const {
        return separation_hierarchy && rabi_matching && uniform_illumination && many_cycles &&
               eta_condition;
    }
};

struct ConditionSolution {
    AddressedPulse pulse;
    ConditionReport report;
};

/// Laser parameters from the linearized Rabi-cycle conditions: W = (4N + 1/2) D,
/// center at the steepest point x_e/2 + W and Omega(x_e/2) t1/2 = (2N + 1/4) pi.
/// Violated conditions are reported, not thrown.
ConditionSolution condition_solver(const ModeBasis &basis, double n_bar_c, int cycles,
                                   const ConditionOptions &options = {});

struct PulseTrain {
    double eta_effective = 0.0;
    bool net_flip = true;  // odd number of pulses
};

PulseTrain pulse_train(double eta_single, int n_pulses);

// --- dense composite-space operators ---------------------------------------------

/// Ideal target P_2(|1>) (x) 1_1 + P_2(|0>) (x) sigma^x_1 on qubit_1 (x) qubit_2.
Matrix ideal_gate();

Matrix kick_unitary(const ModeBasis &basis, const KickPulse &pulse);

/// Diagonal harmonic propagator, identity on the qubits. Zero-point phases are
/// included, so at t_g with nu_r = 2 nu_c the result is -1.
Matrix free_propagator(const ModeBasis &basis, double t);

/// exp(-i (t1/2) Omega(x1) sigma^x_1) with Omega(x1) built from the spectral
/// decomposition of x1 = x_c + (x_r + x_e)/2 on the motional space.
Matrix addressed_flip_unitary(const ModeBasis &basis, const AddressedPulse &pulse);

Matrix idealized_flip_unitary(const ModeBasis &basis);

Matrix control_phase_unitary(const ModeBasis &basis, double phase);

/// x1 = x_c (x) 1 + 1 (x) x_r / 2 + x_e / 2 on Fock(dim_c) (x) Fock(dim_r).
Matrix ion1_position(const ModeBasis &basis);

/// H_ho (+ V_cor) on the motional space.
Matrix motional_hamiltonian(const ModeBasis &basis, const AnharmonicExpansion *anharmonic);

/// Full composite unitary of the schedule. With `anharmonic`, free evolution
/// uses exp(-i (H_ho + V_cor) t).
Matrix gate_unitary(const ModeBasis &basis, const GateSchedule &schedule,
                    const AnharmonicExpansion *anharmonic = nullptr);

SystemState run_gate(const ModeBasis &basis, const GateSchedule &schedule,
                     const SystemState &initial, const AnharmonicExpansion *anharmonic = nullptr);

/// Internal channel of the dense route: rho_int -> Tr_mot[U (rho_int (x) rho_mot) U^dag].
InternalChannel dense_gate_channel(const ModeBasis &basis, const GateSchedule &schedule,
                                   const MotionalState &motion,
                                   const AnharmonicExpansion *anharmonic = nullptr);

// --- structured simulation ----------------------------------------------------

struct ChannelOptions {
    /// Mixture components rho_c(i) rho_r(j) with weight below this are dropped.
    double weight_cutoff = 1e-14;
};

struct GateChannel {
    InternalChannel channel = InternalChannel::fully_depolarizing(4);
    /// Upper bound on the trace distance between the final and initial
    /// motional states, maximized over internal inputs. Available when the
    /// flip does not act on the motion (idealized flip).
    std::optional<double> motional_restoration;
    double dropped_weight = 0.0;
    int components = 0;
};

/// Harmonic evolution of the schedule for a product motional state.
///
/// The protocol keeps qubit 2 block diagonal and the flip diagonal in the
/// sigma^x_1 basis, so the gate is sum_b |b><b| (x) G_b over
/// b = (sigma^x_1 eigenvalue, initial qubit 2 value). The channel is the Schur
/// product rho_bb' -> rho_bb' Tr[G_b rho_mot G_b'^dag], and every G_b factors
/// into per-mode operators around the flip, which is diagonal in the product
/// eigenbasis of x_c and x_r.
GateChannel simulate_gate_channel(const ModeBasis &basis, const GateSchedule &schedule,
                                  const MotionalState &motion, const ChannelOptions &options = {});

}  // namespace hotgate

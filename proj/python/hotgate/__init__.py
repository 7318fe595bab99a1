# Copyright 2026 The hotgate Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Two-ion wavepacket gate simulator."""

from hotgate._hotgate import (
    GateConfig,
    GateReport,
    HotgateError,
    ModeBasis,
    TrapSpec,
    anharmonic_coefficients,
    anharmonic_fidelity,
    cli_main,
    condition_solver,
    default_dims,
    equilibrium_separation,
    evaluate_gate,
    free_propagator,
    frequency_ratio,
    ideal_gate,
    make_mode_basis,
    mode_frequencies,
    natural_coulomb_constant,
    natural_trap,
    pulse_train,
    relative_mode_occupation,
    scan,
    separation_analytic,
    separation_curve,
    solve_exponent_for_ratio,
)

__version__ = "0.1.0"


def calcium_trap(exponent=5.0 / 3.0, eta=7.0):
    """Natural-unit trap for two Ca-40 ions at a 50 kHz centre-of-mass frequency."""
    return natural_trap(exponent, natural_coulomb_constant(40.0, 50e3), eta)


__all__ = [
    "GateConfig",
    "GateReport",
    "HotgateError",
    "ModeBasis",
    "TrapSpec",
    "anharmonic_coefficients",
    "anharmonic_fidelity",
    "calcium_trap",
    "cli_main",
    "condition_solver",
    "default_dims",
    "equilibrium_separation",
    "evaluate_gate",
    "free_propagator",
    "frequency_ratio",
    "ideal_gate",
    "make_mode_basis",
    "mode_frequencies",
    "natural_coulomb_constant",
    "natural_trap",
    "pulse_train",
    "relative_mode_occupation",
    "scan",
    "separation_analytic",
    "separation_curve",
    "solve_exponent_for_ratio",
]

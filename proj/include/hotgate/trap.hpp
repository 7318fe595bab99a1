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

// Two ions in a symmetric power-law trap V(x) = K |x|^p along one axis.
//
// Mode coordinates:
//   x_c = (x1 + x2) / 2,   x_r = x1 - x2 - x_e
//   p_c = p1 + p2,         p_r = (p1 - p2) / 2
// with masses m_c = 2m and m_r = m/2. Ion 1 sits at +x_e/2 in equilibrium.

#pragma once

#include <map>
#include <utility>

#include "hotgate/fock.hpp"

namespace hotgate {

struct TrapSpec {
    double exponent = 5.0 / 3.0;  // p
    double stiffness = 1.0;       // K
    double coulomb = 1.0;         // C = e^2 / (4 pi eps0)
    double mass = 1.0;            // single-ion mass m
    double lamb_dicke = 0.0;      // eta = k x0, x0 = 1/sqrt(2 m nu_c)

    /// Throws InvalidParameter unless p > 1, K, C, m > 0 and eta >= 0.
    void validate() const;

    /// k-th derivative of K y^p at y > 0.
    double potential_derivative(int order, double y) const;
};

/// Coulomb constant expressed in natural units of a trap with single-ion mass
/// `mass_amu` and centre-of-mass frequency 2 pi * `nu_c_hz`: energy in
/// hbar nu_c and length in sqrt(hbar / (m nu_c)).
double natural_coulomb_constant(double mass_amu, double nu_c_hz);

/// TrapSpec with m = 1 and K chosen so that nu_c = 1.
TrapSpec natural_trap(double exponent, double coulomb, double lamb_dicke);

/// Separation x_e > 0 solving V'(x_e/2) = C / x_e^2.
double equilibrium_separation(const TrapSpec &spec);

struct ModeFrequencies {
    double nu_c = 0.0;
    double nu_r = 0.0;

    double ratio() const {
        return nu_r / nu_c;
    }
};

/// nu_c^2 = V''(x_e/2) / m,  nu_r^2 = nu_c^2 + 4 C / (m x_e^3).
ModeFrequencies mode_frequencies(const TrapSpec &spec);

/// nu_r / nu_c for exponent p, evaluated numerically at K = C = m = 1.
double frequency_ratio(double exponent);

/// Exponent p whose power-law trap gives nu_r / nu_c = target_ratio. Throws
/// InfeasibleRatio when the target lies outside the exponent bracket
/// [1 + 1e-6, 64].
double solve_exponent_for_ratio(double target_ratio);

struct ModeBasis {
    TrapSpec spec;
    double x_e = 0.0;
    double nu_c = 0.0;
    double nu_r = 0.0;
    double m_c = 0.0;
    double m_r = 0.0;
    double x0 = 0.0;  // single-ion ground-state size at nu_c
    double k = 0.0;   // laser wavenumber, eta / x0
    double width_c = 0.0;
    double width_r = 0.0;
    double eta_c = 0.0;  // k * width_c
    double eta_r = 0.0;  // (k/2) * width_r
    FockDim dim_c{2};
    FockDim dim_r{2};

    int motional_dim() const {
        return dim_c.levels() * dim_r.levels();
    }
    ModeBasis with_dims(FockDim c, FockDim r) const;
};

ModeBasis make_mode_basis(const TrapSpec &spec, FockDim dim_c, FockDim dim_r);

/// Dimensions from default_truncation() for the given thermal occupations and
/// the basis kick strengths.
std::pair<int, int> default_dims(const TrapSpec &spec, double n_bar_c, double n_bar_r);

/// Taylor coefficients of V(x1) + V(x2) + C/|x1 - x2| in (x_c, x_r) around
/// equilibrium, total degree 3..order. Keys are (power of x_c, power of x_r).
struct AnharmonicExpansion {
    int order = 3;
    std::map<std::pair<int, int>, double> coefficients;

    double coefficient(int a, int b) const;
    bool empty() const {
        return coefficients.empty();
    }
    AnharmonicExpansion scaled(double factor) const;
};

AnharmonicExpansion anharmonic_expansion(const TrapSpec &spec, int order);

/// Sum of coefficient * x_c^a (x) x_r^b on Fock(dim_c) (x) Fock(dim_r).
Matrix v_cor_operator(const AnharmonicExpansion &expansion, const ModeBasis &basis);

}  // namespace hotgate

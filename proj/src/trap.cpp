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

#include "hotgate/trap.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include <boost/math/tools/roots.hpp>

namespace hotgate {

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) {
        f *= i;
    }
    return f;
}

// Tolerance functor bits: 2^-45 ~ 3e-14 relative.
constexpr int kRootBits = 45;

}  // namespace

void TrapSpec::validate() const {
    if (!(exponent > 1.0) || !std::isfinite(exponent)) {
        throw Error(ErrorKind::InvalidParameter, "trap exponent must exceed 1");
    }
    if (!(stiffness > 0.0) || !std::isfinite(stiffness)) {
        throw Error(ErrorKind::InvalidParameter, "trap stiffness must be positive");
    }
    if (!(coulomb > 0.0) || !std::isfinite(coulomb)) {
        throw Error(ErrorKind::InvalidParameter, "Coulomb constant must be positive");
    }
    if (!(mass > 0.0) || !std::isfinite(mass)) {
        throw Error(ErrorKind::InvalidParameter, "ion mass must be positive");
    }
    if (!(lamb_dicke >= 0.0) || !std::isfinite(lamb_dicke)) {
        throw Error(ErrorKind::InvalidParameter, "Lamb-Dicke parameter must be >= 0");
    }
}

double TrapSpec::potential_derivative(int order, double y) const {
    double falling = 1.0;
    for (int i = 0; i < order; ++i) {
        falling *= exponent - i;
    }
    return stiffness * falling * std::pow(y, exponent - order);
}

double natural_coulomb_constant(double mass_amu, double nu_c_hz) {
    if (!(mass_amu > 0.0) || !(nu_c_hz > 0.0)) {
        throw Error(ErrorKind::InvalidParameter, "mass and trap frequency must be positive");
    }
    constexpr double kElementaryCharge = 1.602176634e-19;
    constexpr double kVacuumPermittivity = 8.8541878128e-12;
    constexpr double kHbar = 1.054571817e-34;
    constexpr double kAtomicMassUnit = 1.66053906660e-27;
    const double mass = mass_amu * kAtomicMassUnit;
    const double omega = 2.0 * M_PI * nu_c_hz;
    const double coulomb_si =
        kElementaryCharge * kElementaryCharge / (4.0 * M_PI * kVacuumPermittivity);
    const double length = std::sqrt(kHbar / (mass * omega));
    return coulomb_si / (kHbar * omega * length);
}

TrapSpec natural_trap(double exponent, double coulomb, double lamb_dicke) {
    TrapSpec spec;
    spec.exponent = exponent;
    spec.coulomb = coulomb;
    spec.mass = 1.0;
    spec.stiffness = 1.0;
    spec.lamb_dicke = lamb_dicke;
    spec.validate();
    // x_e ~ K^(-1/(p+1)) so nu_c ~ K^(3/(2(p+1))).
    const double nu_unit = mode_frequencies(spec).nu_c;
    spec.stiffness = std::pow(nu_unit, -2.0 * (exponent + 1.0) / 3.0);
    const double nu = mode_frequencies(spec).nu_c;
    if (std::abs(nu - 1.0) > 1e-10) {
        throw Error(ErrorKind::Numeric, "stiffness rescaling missed nu_c = 1");
    }
    return spec;
}

double equilibrium_separation(const TrapSpec &spec) {
    spec.validate();
    // Force balance g(x) = V'(x/2) - C/x^2, increasing in x for p > 1. Solved in
    // log(x) to keep the bracket scale-free.
    auto g = [&spec](double log_x) {
        const double x = std::exp(log_x);
        return spec.potential_derivative(1, 0.5 * x) - spec.coulomb / (x * x);
    };
    double lo = 0.0;
    double hi = 0.0;
    double g_lo = g(lo);
    double g_hi = g_lo;
    int expansions = 0;
    constexpr int kMaxExpansions = 200;
    while ((g_lo > 0.0) == (g_hi > 0.0)) {
        if (++expansions > kMaxExpansions) {
            throw Error(ErrorKind::NoEquilibrium, "force balance root not bracketed");
        }
        if (g_hi <= 0.0) {
            hi += 1.0;
            g_hi = g(hi);
        } else {
            lo -= 1.0;
            g_lo = g(lo);
        }
    }
    if (g_lo == 0.0) {
        return std::exp(lo);
    }
    if (g_hi == 0.0) {
        return std::exp(hi);
    }
    std::uintmax_t max_iter = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(
        g, lo, hi, g_lo, g_hi, boost::math::tools::eps_tolerance<double>(kRootBits), max_iter);
    // Polish in x itself; the log-space bracket leaves a relative error of a
    // few ulps times log(x).
    double x = std::exp(0.5 * (a + b));
    for (int k = 0; k < 3; ++k) {
        const double residual = spec.potential_derivative(1, 0.5 * x) - spec.coulomb / (x * x);
        const double slope =
            0.5 * spec.potential_derivative(2, 0.5 * x) + 2.0 * spec.coulomb / (x * x * x);
        const double step = residual / slope;
        if (!std::isfinite(step)) {
            break;
        }
        x -= step;
    }
    return x;
}

ModeFrequencies mode_frequencies(const TrapSpec &spec) {
    const double x_e = equilibrium_separation(spec);
    ModeFrequencies out;
    const double curvature = spec.potential_derivative(2, 0.5 * x_e);
    out.nu_c = std::sqrt(curvature / spec.mass);
    out.nu_r = std::sqrt(out.nu_c * out.nu_c +
                         4.0 * spec.coulomb / (spec.mass * x_e * x_e * x_e));
    return out;
}

double frequency_ratio(double exponent) {
    TrapSpec spec;
    spec.exponent = exponent;
    spec.stiffness = 1.0;
    spec.coulomb = 1.0;
    spec.mass = 1.0;
    return mode_frequencies(spec).ratio();
}

double solve_exponent_for_ratio(double target_ratio) {
    constexpr double kLowExponent = 1.0 + 1e-6;
    constexpr double kHighExponent = 64.0;
    if (!std::isfinite(target_ratio)) {
        throw Error(ErrorKind::InfeasibleRatio, "target ratio is not finite");
    }

    // The ratio must fall monotonically across the bracket for the root to be
    // unique; sample it on a log grid of (p - 1).
    constexpr int kSamples = 48;
    double previous = frequency_ratio(kLowExponent);
    const double ratio_max = previous;
    for (int i = 1; i <= kSamples; ++i) {
        const double frac = static_cast<double>(i) / kSamples;
        const double p = 1.0 + std::exp(std::log(kLowExponent - 1.0) +
                                        frac * (std::log(kHighExponent - 1.0) -
                                                std::log(kLowExponent - 1.0)));
        const double r = frequency_ratio(p);
        if (!(r < previous)) {
            throw Error(ErrorKind::Numeric, "frequency ratio is not monotone in the exponent");
        }
        previous = r;
    }
    const double ratio_min = previous;
    if (!(target_ratio > ratio_min && target_ratio < ratio_max)) {
        throw Error(ErrorKind::InfeasibleRatio,
                    "ratio " + std::to_string(target_ratio) + " outside achievable range (" +
                        std::to_string(ratio_min) + ", " + std::to_string(ratio_max) + ")");
    }

    auto f = [target_ratio](double p) { return frequency_ratio(p) - target_ratio; };
    std::uintmax_t max_iter = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(
        f, kLowExponent, kHighExponent, boost::math::tools::eps_tolerance<double>(50), max_iter);
    const double p = 0.5 * (a + b);

    TrapSpec stiff;
    stiff.exponent = p;
    stiff.stiffness = 7.0;
    const double r_stiff = mode_frequencies(stiff).ratio();
    if (std::abs(r_stiff - frequency_ratio(p)) > 1e-12 * r_stiff) {
        throw Error(ErrorKind::Numeric, "frequency ratio depends on stiffness");
    }
    return p;
}

ModeBasis ModeBasis::with_dims(FockDim c, FockDim r) const {
    ModeBasis out = *this;
    out.dim_c = c;
    out.dim_r = r;
    return out;
}

ModeBasis make_mode_basis(const TrapSpec &spec, FockDim dim_c, FockDim dim_r) {
    spec.validate();
    ModeBasis b;
    b.spec = spec;
    b.x_e = equilibrium_separation(spec);
    const ModeFrequencies freq = mode_frequencies(spec);
    b.nu_c = freq.nu_c;
    b.nu_r = freq.nu_r;
    b.m_c = 2.0 * spec.mass;
    b.m_r = 0.5 * spec.mass;
    b.x0 = 1.0 / std::sqrt(2.0 * spec.mass * b.nu_c);
    b.k = spec.lamb_dicke / b.x0;
    b.width_c = 1.0 / std::sqrt(2.0 * b.m_c * b.nu_c);
    b.width_r = 1.0 / std::sqrt(2.0 * b.m_r * b.nu_r);
    b.eta_c = b.k * b.width_c;
    b.eta_r = 0.5 * b.k * b.width_r;
    b.dim_c = dim_c;
    b.dim_r = dim_r;

    if (!(b.nu_r > b.nu_c && b.nu_c > 0.0)) {
        throw Error(ErrorKind::Numeric, "mode frequencies violate nu_r > nu_c > 0");
    }
    // width_c = x0 / sqrt(2) for any trap, hence eta_c = eta / sqrt(2).
    if (std::abs(b.eta_c - spec.lamb_dicke / std::sqrt(2.0)) > 1e-12 * (1.0 + spec.lamb_dicke)) {
        throw Error(ErrorKind::Numeric, "centre-of-mass kick parameter inconsistent");
    }
    return b;
}

std::pair<int, int> default_dims(const TrapSpec &spec, double n_bar_c, double n_bar_r) {
    const ModeBasis b = make_mode_basis(spec, FockDim(2), FockDim(2));
    return {default_truncation(n_bar_c, b.eta_c), default_truncation(n_bar_r, b.eta_r)};
}

double AnharmonicExpansion::coefficient(int a, int b) const {
    const auto it = coefficients.find({a, b});
    return it == coefficients.end() ? 0.0 : it->second;
}

AnharmonicExpansion AnharmonicExpansion::scaled(double factor) const {
    AnharmonicExpansion out = *this;
    for (auto &[key, value] : out.coefficients) {
        value *= factor;
    }
    return out;
}

AnharmonicExpansion anharmonic_expansion(const TrapSpec &spec, int order) {
    if (order < 3 || order > 6) {
        throw Error(ErrorKind::InvalidParameter,
                    "expansion order must lie in [3, 6], got " + std::to_string(order));
    }
    spec.validate();
    const double x_e = equilibrium_separation(spec);
    const double y = 0.5 * x_e;

    // V(x1) + V(x2) = sum_k V^(k)(y)/k! [(x_c + x_r/2)^k + (-x_c + x_r/2)^k];
    // odd powers of x_c cancel. C/(x_e + x_r) = sum_k C (-1)^k x_r^k / x_e^(k+1).
    AnharmonicExpansion out;
    out.order = order;
    for (int total = 3; total <= order; ++total) {
        const double vk = spec.potential_derivative(total, y);
        for (int a = 0; a <= total; a += 2) {
            const int b = total - a;
            double c = 2.0 * vk / (factorial(a) * factorial(b)) * std::pow(0.5, b);
            if (a == 0) {
                c += spec.coulomb * ((b % 2 == 0) ? 1.0 : -1.0) / std::pow(x_e, b + 1);
            }
            if (c != 0.0) {
                out.coefficients[{a, b}] = c;
            }
        }
    }
    return out;
}

Matrix v_cor_operator(const AnharmonicExpansion &expansion, const ModeBasis &basis) {
    const int nc = basis.dim_c.levels();
    const int nr = basis.dim_r.levels();
    Matrix out = Matrix::Zero(nc * nr, nc * nr);
    if (expansion.empty()) {
        return out;
    }
    const Matrix xc = position_operator(basis.dim_c, basis.width_c);
    const Matrix xr = position_operator(basis.dim_r, basis.width_r);
    std::vector<Matrix> pow_c{identity(nc)};
    std::vector<Matrix> pow_r{identity(nr)};
    for (int k = 1; k <= expansion.order; ++k) {
        pow_c.push_back(pow_c.back() * xc);
        pow_r.push_back(pow_r.back() * xr);
    }
    for (const auto &[key, coeff] : expansion.coefficients) {
        const auto [a, b] = key;
        if (a > expansion.order || b > expansion.order) {
            throw Error(ErrorKind::Shape, "monomial exceeds expansion order");
        }
        out += coeff * kron(pow_c[a], pow_r[b]);
    }
    return 0.5 * (out + out.adjoint());
}

}  // namespace hotgate

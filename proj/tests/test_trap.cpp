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


#include <cmath>
#include <functional>
#include <map>
#include <numbers>

#include "hotgate/trap.hpp"
#include "test_util.hpp"

namespace hotgate {
namespace {

TrapSpec unit_trap(double p) {
    TrapSpec s;
    s.exponent = p;
    s.stiffness = 1.0;
    s.coulomb = 1.0;
    s.mass = 1.0;
    return s;
}

// Full two-ion potential in mode coordinates around equilibrium.
long double full_potential(const TrapSpec &s, long double x_e, long double xc, long double xr) {
    const long double x1 = xc + (xr + x_e) / 2;
    const long double x2 = xc - (xr + x_e) / 2;
    const long double p = s.exponent;
    return s.stiffness * (std::pow(std::fabs(x1), p) + std::pow(std::fabs(x2), p)) +
           s.coulomb / std::fabs(x1 - x2);
}

// Central-difference stencils for derivative orders 0..4 (offsets in steps).
const std::map<int, double> &stencil(int order) {
    static const std::map<int, double> s0{{0, 1.0}};
    static const std::map<int, double> s1{{-1, -0.5}, {1, 0.5}};
    static const std::map<int, double> s2{{-1, 1.0}, {0, -2.0}, {1, 1.0}};
    static const std::map<int, double> s3{{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}};
    static const std::map<int, double> s4{{-2, 1.0}, {-1, -4.0}, {0, 6.0}, {1, -4.0}, {2, 1.0}};
    static const std::map<int, double> *all[] = {&s0, &s1, &s2, &s3, &s4};
    return *all[order];
}

// Taylor coefficient of x_c^a x_r^b from a tensor-product stencil.
double fd_coefficient(const std::function<long double(long double, long double)> &f, int a,
                      int b, long double h) {
    long double acc = 0.0L;
    for (const auto &[i, wi] : stencil(a)) {
        for (const auto &[j, wj] : stencil(b)) {
            acc += static_cast<long double>(wi) * wj * f(i * h, j * h);
        }
    }
    const long double fact = std::tgamma(a + 1.0L) * std::tgamma(b + 1.0L);
    return static_cast<double>(acc / std::pow(h, a + b) / fact);
}

TEST(TrapSpec, Validation) {
    TrapSpec s = unit_trap(1.0);
    EXPECT_ERROR_KIND(s.validate(), ErrorKind::InvalidParameter);
    s = unit_trap(2.0);
    s.coulomb = 0.0;
    EXPECT_ERROR_KIND(s.validate(), ErrorKind::InvalidParameter);
    s = unit_trap(2.0);
    s.lamb_dicke = -1.0;
    EXPECT_ERROR_KIND(s.validate(), ErrorKind::InvalidParameter);
}

TEST(Equilibrium, HarmonicClosedForm) {
    TrapSpec s = unit_trap(2.0);
    s.stiffness = 0.5;
    EXPECT_NEAR(equilibrium_separation(s), std::cbrt(2.0), 1e-12);
}

TEST(Equilibrium, ForceBalanceResidual) {
    const TrapSpec s = unit_trap(5.0 / 3.0);
    const double x_e = equilibrium_separation(s);
    const double force = s.potential_derivative(1, x_e / 2.0);
    EXPECT_NEAR(force - s.coulomb / (x_e * x_e), 0.0, 1e-10 * std::abs(force));
}

TEST(Equilibrium, CoulombScaling) {
    for (const double p : {5.0 / 3.0, 2.0, 3.0}) {
        TrapSpec s = unit_trap(p);
        const double base = equilibrium_separation(s);
        s.coulomb = 2.0;
        EXPECT_NEAR(equilibrium_separation(s) / base, std::pow(2.0, 1.0 / (p + 1.0)), 1e-11)
            << "p = " << p;
    }
}

TEST(ModeFrequencies, CommensurateAndHarmonicRatios) {
    EXPECT_NEAR(mode_frequencies(unit_trap(5.0 / 3.0)).ratio(), 2.0, 1e-10);
    EXPECT_NEAR(mode_frequencies(unit_trap(2.0)).ratio(), std::sqrt(3.0), 1e-10);
    for (const double p : {1.1, 1.5, 2.5, 4.0, 8.0}) {
        const auto f = mode_frequencies(unit_trap(p));
        EXPECT_GT(f.nu_r, f.nu_c) << "p = " << p;
    }
}

TEST(ModeFrequencies, MatchFiniteDifferenceCurvature) {
    for (const double p : {1.2, 5.0 / 3.0, 2.0, 3.0}) {
        const TrapSpec s = unit_trap(p);
        const long double x_e = equilibrium_separation(s);
        const auto f = [&](long double xc, long double xr) {
            return full_potential(s, x_e, xc, xr);
        };
        const long double h = 1e-4L * x_e;
        const double kc = 2.0 * fd_coefficient(f, 2, 0, h);
        const double kr = 2.0 * fd_coefficient(f, 0, 2, h);
        const auto nu = mode_frequencies(s);
        EXPECT_NEAR(std::sqrt(kc / (2.0 * s.mass)) / nu.nu_c, 1.0, 1e-6) << "p = " << p;
        EXPECT_NEAR(std::sqrt(kr / (0.5 * s.mass)) / nu.nu_r, 1.0, 1e-6) << "p = " << p;
    }
}

TEST(FrequencyRatio, IndependentOfStiffness) {
    for (const double p : {1.3, 5.0 / 3.0, 2.7}) {
        TrapSpec s = unit_trap(p);
        const double r1 = mode_frequencies(s).ratio();
        s.stiffness = 7.0;
        EXPECT_NEAR(mode_frequencies(s).ratio(), r1, 1e-12);
        EXPECT_NEAR(frequency_ratio(p), r1, 1e-12);
        // r^2 = (p + 1)/(p - 1) for power laws.
        EXPECT_NEAR(r1 * r1, (p + 1.0) / (p - 1.0), 1e-10);
    }
}

TEST(SolveExponent, Anchors) {
    EXPECT_NEAR(solve_exponent_for_ratio(2.0), 5.0 / 3.0, 1e-9);
    EXPECT_NEAR(solve_exponent_for_ratio(std::sqrt(3.0)), 2.0, 1e-9);
}

TEST(SolveExponent, RoundTrip) {
    for (const double r : {1.05, 1.5, 2.0, 3.0, 10.0}) {
        const double p = solve_exponent_for_ratio(r);
        EXPECT_NEAR(frequency_ratio(p), r, 1e-9) << "target " << r;
        // Closed form p = (r^2 + 1)/(r^2 - 1).
        EXPECT_NEAR(p, (r * r + 1.0) / (r * r - 1.0), 1e-8 * p);
    }
}

TEST(SolveExponent, InfeasibleTargets) {
    EXPECT_ERROR_KIND(solve_exponent_for_ratio(1.0), ErrorKind::InfeasibleRatio);
    EXPECT_ERROR_KIND(solve_exponent_for_ratio(0.5), ErrorKind::InfeasibleRatio);
    EXPECT_ERROR_KIND(solve_exponent_for_ratio(1e6), ErrorKind::InfeasibleRatio);
    EXPECT_ERROR_KIND(solve_exponent_for_ratio(std::nan("")), ErrorKind::InfeasibleRatio);
}

TEST(NaturalTrap, UnitCentreOfMassFrequency) {
    const double c = natural_coulomb_constant(40.0, 50e3);
    EXPECT_GT(c, 1e7);
    const TrapSpec s = natural_trap(5.0 / 3.0, c, 7.0);
    const auto nu = mode_frequencies(s);
    EXPECT_NEAR(nu.nu_c, 1.0, 1e-10);
    EXPECT_NEAR(nu.nu_r, 2.0, 1e-9);
    // x_e^3 = 4 C / 3 for p = 5/3 in these units.
    EXPECT_NEAR(equilibrium_separation(s) / std::cbrt(4.0 * c / 3.0), 1.0, 1e-10);
}

TEST(ModeBasis, DerivedWidthsAndKickParameters) {
    const TrapSpec s = natural_trap(5.0 / 3.0, 1e4, 7.0);
    const ModeBasis b = make_mode_basis(s, FockDim(5), FockDim(4));
    EXPECT_DOUBLE_EQ(b.m_c, 2.0);
    EXPECT_DOUBLE_EQ(b.m_r, 0.5);
    EXPECT_NEAR(b.x0, 1.0 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(b.width_c, 1.0 / std::sqrt(2.0 * b.m_c * b.nu_c), 1e-12);
    EXPECT_NEAR(b.width_r, 1.0 / std::sqrt(2.0 * b.m_r * b.nu_r), 1e-12);
    EXPECT_NEAR(b.eta_c, 7.0 / std::sqrt(2.0), 1e-9);
    EXPECT_NEAR(b.eta_r, 3.5, 1e-9);
    EXPECT_EQ(b.motional_dim(), 20);
    const ModeBasis wide = b.with_dims(FockDim(9), FockDim(8));
    EXPECT_EQ(wide.motional_dim(), 72);
    EXPECT_DOUBLE_EQ(wide.eta_c, b.eta_c);
}

TEST(AnharmonicExpansion, OrderRange) {
    const TrapSpec s = unit_trap(5.0 / 3.0);
    EXPECT_ERROR_KIND(anharmonic_expansion(s, 2), ErrorKind::InvalidParameter);
    EXPECT_ERROR_KIND(anharmonic_expansion(s, 7), ErrorKind::InvalidParameter);
    const auto e = anharmonic_expansion(s, 6);
    for (const auto &[key, value] : e.coefficients) {
        EXPECT_GE(key.first + key.second, 3);
        EXPECT_LE(key.first + key.second, 6);
        EXPECT_TRUE(std::isfinite(value));
    }
}

TEST(AnharmonicExpansion, ParityOfCentreOfMassPowers) {
    for (const double p : {5.0 / 3.0, 2.0, 3.0}) {
        const auto e = anharmonic_expansion(unit_trap(p), 5);
        EXPECT_EQ(e.coefficient(1, 2), 0.0);
        EXPECT_EQ(e.coefficient(3, 0), 0.0);
        EXPECT_EQ(e.coefficient(1, 3), 0.0);
    }
    EXPECT_NE(anharmonic_expansion(unit_trap(5.0 / 3.0), 3).coefficient(2, 1), 0.0);
    EXPECT_EQ(anharmonic_expansion(unit_trap(2.0), 3).coefficient(2, 1), 0.0);
}

TEST(AnharmonicExpansion, CoulombCubicTerm) {
    TrapSpec s = unit_trap(2.0);
    s.stiffness = 0.5;
    const double x_e = equilibrium_separation(s);
    // A harmonic confinement has no cubic part, so x_r^3 is pure Coulomb.
    EXPECT_NEAR(anharmonic_expansion(s, 3).coefficient(0, 3), -s.coulomb / std::pow(x_e, 4),
                1e-14);
    const auto coulomb = [&](long double, long double xr) {
        return static_cast<long double>(s.coulomb) / (x_e + xr);
    };
    EXPECT_NEAR(fd_coefficient(coulomb, 0, 3, 1e-4L * x_e) / (-s.coulomb / std::pow(x_e, 4)),
                1.0, 1e-5);
}

void check_against_finite_differences(const TrapSpec &s, int order, double tol) {
    const auto e = anharmonic_expansion(s, order);
    const long double x_e = equilibrium_separation(s);
    const auto f = [&](long double xc, long double xr) { return full_potential(s, x_e, xc, xr); };
    for (int total = 3; total <= order; ++total) {
        const long double h = (total == 3 ? 1e-4L : 1e-3L) * x_e;
        double scale = 0.0;
        for (int a = 0; a <= total; a += 2) {
            scale = std::max(scale, std::abs(e.coefficient(a, total - a)));
        }
        for (int a = 0; a <= total; a += 2) {
            const int b = total - a;
            const double fd = fd_coefficient(f, a, b, h);
            const double value = e.coefficient(a, b);
            EXPECT_NEAR(value, fd, tol * std::abs(fd) + 1e-7 * scale)
                << "p = " << s.exponent << " monomial (" << a << ", " << b << ")";
        }
    }
}

TEST(AnharmonicExpansion, MatchesFiniteDifferenceOracle) {
    for (const double p : {1.2, 5.0 / 3.0, 3.0}) {
        check_against_finite_differences(unit_trap(p), 4, 1e-5);
    }
    check_against_finite_differences(natural_trap(5.0 / 3.0, natural_coulomb_constant(40.0, 50e3), 0.0),
                                     4, 1e-5);
}

TEST(AnharmonicExpansion, ScaledMultipliesEveryCoefficient) {
    const auto e = anharmonic_expansion(unit_trap(5.0 / 3.0), 4);
    const auto s = e.scaled(3.0);
    for (const auto &[key, value] : e.coefficients) {
        EXPECT_DOUBLE_EQ(s.coefficient(key.first, key.second), 3.0 * value);
    }
}

TEST(VCorOperator, EmptyHermitianAndOddVacuum) {
    const TrapSpec s = natural_trap(5.0 / 3.0, 1e4, 1.0);
    const ModeBasis b = make_mode_basis(s, FockDim(8), FockDim(7));
    AnharmonicExpansion empty;
    EXPECT_EQ(testing::max_abs(v_cor_operator(empty, b)), 0.0);

    const auto e = anharmonic_expansion(s, 5);
    EXPECT_LT(hermiticity_defect(v_cor_operator(e, b)), 1e-12);

    AnharmonicExpansion cubic;
    cubic.order = 3;
    cubic.coefficients[{0, 3}] = 1.7;
    EXPECT_EQ(v_cor_operator(cubic, b)(0, 0), Complex(0.0));

    // Product structure against explicit Kronecker factors.
    AnharmonicExpansion mixed;
    mixed.order = 3;
    mixed.coefficients[{2, 1}] = 0.3;
    const Matrix xc = position_operator(b.dim_c, b.width_c);
    const Matrix xr = position_operator(b.dim_r, b.width_r);
    EXPECT_LT(testing::max_abs(v_cor_operator(mixed, b) - 0.3 * kron(Matrix(xc * xc), xr)), 1e-14);
}

}  // namespace
}  // namespace hotgate

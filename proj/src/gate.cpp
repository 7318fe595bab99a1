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

#include "hotgate/gate.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace hotgate {

namespace {

constexpr double kPi = std::numbers::pi;

Matrix pauli_x() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    return m;
}

Matrix projector(int level) {
    Matrix m = Matrix::Zero(2, 2);
    m(level, level) = 1.0;
    return m;
}

// |1><0|
Matrix raising() {
    Matrix m = Matrix::Zero(2, 2);
    m(1, 0) = 1.0;
    return m;
}

struct KickParameters {
    double eta_c;
    double eta_r;
    double k;
};

KickParameters kick_parameters(const ModeBasis &basis, double eta_effective) {
    if (!(eta_effective >= 0.0) || !std::isfinite(eta_effective)) {
        throw Error(ErrorKind::InvalidParameter, "kick strength must be >= 0");
    }
    const double k = eta_effective / basis.x0;
    return {k * basis.width_c, 0.5 * k * basis.width_r, k};
}

Vector mode_phases(double nu, int levels, double t) {
    Vector out(levels);
    for (int n = 0; n < levels; ++n) {
        out(n) = std::exp(-kI * (nu * (n + 0.5) * t));
    }
    return out;
}

Vector motional_phases(const ModeBasis &basis, double t) {
    return kron(mode_phases(basis.nu_c, basis.dim_c.levels(), t),
                mode_phases(basis.nu_r, basis.dim_r.levels(), t));
}

Matrix motional_propagator(const ModeBasis &basis, const AnharmonicExpansion *anharmonic,
                           double t) {
    if (anharmonic == nullptr || anharmonic->empty()) {
        return motional_phases(basis, t).asDiagonal();
    }
    return hermitian_expm(motional_hamiltonian(basis, anharmonic), t);
}

}  // namespace

void AddressedPulse::validate() const {
    if (!(omega0 >= 0.0) || !std::isfinite(omega0)) {
        throw Error(ErrorKind::InvalidParameter, "peak Rabi frequency must be >= 0");
    }
    if (!(width > 0.0) || !std::isfinite(width)) {
        throw Error(ErrorKind::InvalidParameter, "beam width must be positive");
    }
    if (!(duration > 0.0) || !std::isfinite(duration)) {
        throw Error(ErrorKind::InvalidParameter, "pulse duration must be positive");
    }
    if (!std::isfinite(center)) {
        throw Error(ErrorKind::InvalidParameter, "beam center must be finite");
    }
}

double AddressedPulse::rabi(double x) const {
    const double u = (x - center) / width;
    return omega0 * std::exp(-0.5 * u * u);
}

void GateSchedule::validate() const {
    if (!(t_g > 0.0) || !(t0 > 0.0 && t0 < t_g)) {
        throw Error(ErrorKind::InvalidParameter, "schedule needs 0 < t0 < t_g");
    }
    if (!(kick.eta_effective >= 0.0)) {
        throw Error(ErrorKind::InvalidParameter, "kick strength must be >= 0");
    }
    if (const auto *pulse = std::get_if<AddressedPulse>(&flip)) {
        pulse->validate();
    }
}

std::vector<std::string> GateSchedule::warnings() const {
    std::vector<std::string> out;
    if (const auto *pulse = std::get_if<AddressedPulse>(&flip)) {
        if (pulse->duration >= t_g / 20.0) {
            out.push_back("flip duration t1 = " + std::to_string(pulse->duration) +
                          " is not short against t_g = " + std::to_string(t_g));
        }
    }
    return out;
}

GateSchedule make_schedule(const ModeBasis &basis, const FlipPulse &flip) {
    GateSchedule s;
    s.t_g = 2.0 * kPi / basis.nu_c;
    s.t0 = s.t_g / 3.0;
    s.kick.eta_effective = basis.spec.lamb_dicke;
    s.flip = flip;
    s.control_phase = std::holds_alternative<AddressedPulse>(flip) ? 0.5 * kPi : 0.0;
    s.validate();
    return s;
}

// --- motional states ---------------------------------------------------------

Matrix MotionalState::to_matrix() const {
    return kron(c.matrix(), r.matrix());
}

double relative_mode_occupation(double n_bar_c) {
    if (!(n_bar_c >= 0.0) || !std::isfinite(n_bar_c)) {
        throw Error(ErrorKind::InvalidParameter, "mean occupation must be >= 0");
    }
    return n_bar_c * n_bar_c / (2.0 * n_bar_c + 1.0);
}

MotionalState thermal_motion(const ModeBasis &basis, double n_bar_c) {
    return {thermal_state(n_bar_c, basis.dim_c),
            thermal_state(relative_mode_occupation(n_bar_c), basis.dim_r)};
}

MotionalState vacuum_motion(const ModeBasis &basis) {
    return thermal_motion(basis, 0.0);
}

// --- laser conditions ----------------------------------------------------------

ConditionSolution condition_solver(const ModeBasis &basis, double n_bar_c, int cycles,
                                   const ConditionOptions &options) {
    if (cycles < 1) {
        throw Error(ErrorKind::InvalidParameter, "number of Rabi cycles must be >= 1");
    }
    const double eta = basis.spec.lamb_dicke;
    if (!(eta > 0.0)) {
        throw Error(ErrorKind::InvalidParameter,
                    "addressed flip needs a nonzero kick (eta > 0) to separate the branches");
    }
    if (!(options.duration_fraction > 0.0) || !(options.margin > 0.0)) {
        throw Error(ErrorKind::InvalidParameter, "condition options must be positive");
    }

    ConditionReport r;
    r.n_bar_c = n_bar_c;
    r.n_bar_r = relative_mode_occupation(n_bar_c);
    r.eta = eta;
    r.cycles = cycles;
    r.D = 3.0 * std::sqrt(3.0) * basis.x0 * eta / 2.0;
    r.delta = std::sqrt(n_bar_c + r.n_bar_r / 2.0 + 0.75) * basis.x0;
    r.W = (4.0 * cycles + 0.5) * r.D;
    r.center = basis.x_e / 2.0 + r.W;
    const double t_g = 2.0 * kPi / basis.nu_c;
    r.duration = options.duration_fraction * t_g;
    const double target_area = (2.0 * cycles + 0.25) * kPi;
    // Omega(x_e/2) = omega0 e^{-1/2} at the steepest point.
    r.omega0 = 2.0 * target_area / r.duration * std::exp(0.5);

    AddressedPulse pulse;
    pulse.omega0 = r.omega0;
    pulse.center = r.center;
    pulse.width = r.W;
    pulse.duration = r.duration;
    pulse.validate();

    const double rabi_eq = pulse.rabi(basis.x_e / 2.0);
    r.pulse_area = rabi_eq * r.duration / 2.0;
    r.W_over_D = r.W / r.D;
    r.D_over_delta = r.D / r.delta;
    // |Omega'(x_e/2)| = Omega(x_e/2) / W at the steepest point.
    r.angle_spread = r.pulse_area / r.W * r.delta;
    r.eta_bound = std::sqrt(4.0 * n_bar_c + 2.0 * r.n_bar_r + 3.0) / (3.0 * std::sqrt(3.0));
    r.eta_bound_ratio = eta / r.eta_bound;

    r.separation_hierarchy = r.W_over_D >= options.margin && r.D_over_delta >= options.margin;
    r.rabi_matching = std::abs(r.pulse_area - target_area) <= 1e-12 * target_area;
    r.uniform_illumination = r.angle_spread * options.margin <= 1.0;
    r.many_cycles = cycles >= options.min_cycles;
    r.eta_condition = r.eta_bound_ratio >= options.margin;
    return {pulse, r};
}

PulseTrain pulse_train(double eta_single, int n_pulses) {
    if (n_pulses < 1) {
        throw Error(ErrorKind::InvalidParameter, "pulse train needs at least one pulse");
    }
    if (!(eta_single >= 0.0) || !std::isfinite(eta_single)) {
        throw Error(ErrorKind::InvalidParameter, "single-pulse eta must be >= 0");
    }
    return {n_pulses * eta_single, n_pulses % 2 == 1};
}

// --- dense composite-space operators ---------------------------------------------

Matrix ideal_gate() {
    const Matrix id = identity(2);
    return kron(id, projector(1)) + kron(pauli_x(), projector(0));
}

Matrix kick_unitary(const ModeBasis &basis, const KickPulse &pulse) {
    const auto p = kick_parameters(basis, pulse.eta_effective);
    // e^{+-ik x2} with x2 = x_c - (x_r + x_e)/2.
    const Complex phase = std::exp(-kI * (p.k * basis.x_e / 2.0));
    const Matrix e_plus = phase * kron(displacement(kI * p.eta_c, basis.dim_c),
                                       displacement(-kI * p.eta_r, basis.dim_r));
    const Matrix e_minus = std::conj(phase) * kron(displacement(-kI * p.eta_c, basis.dim_c),
                                                   displacement(kI * p.eta_r, basis.dim_r));
    const Matrix on_ion2 = kron(raising(), e_plus) + kron(raising().adjoint(), e_minus);
    return kron(identity(2), on_ion2);
}

Matrix free_propagator(const ModeBasis &basis, double t) {
    if (!(t >= 0.0)) {
        throw Error(ErrorKind::InvalidParameter, "propagation time must be >= 0");
    }
    return kron(identity(4), Matrix(motional_phases(basis, t).asDiagonal()));
}

Matrix ion1_position(const ModeBasis &basis) {
    const int nc = basis.dim_c.levels();
    const int nr = basis.dim_r.levels();
    return kron(position_operator(basis.dim_c, basis.width_c), identity(nr)) +
           0.5 * kron(identity(nc), position_operator(basis.dim_r, basis.width_r)) +
           (basis.x_e / 2.0) * identity(nc * nr);
}

Matrix addressed_flip_unitary(const ModeBasis &basis, const AddressedPulse &pulse) {
    pulse.validate();
    const Matrix x1 = ion1_position(basis);
    Eigen::SelfAdjointEigenSolver<Matrix> es(x1);
    if (es.info() != Eigen::Success) {
        throw Error(ErrorKind::Numeric, "spectral decomposition of x1 failed");
    }
    RealVector rabi(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < rabi.size(); ++i) {
        rabi(i) = pulse.rabi(es.eigenvalues()(i));
    }
    const Matrix &v = es.eigenvectors();
    const Matrix rabi_op = v * rabi.cast<Complex>().asDiagonal() * v.adjoint();
    const Matrix generator = (pulse.duration / 2.0) * kron(pauli_x(), kron(identity(2), rabi_op));
    return hermitian_expm(generator, 1.0);
}

Matrix idealized_flip_unitary(const ModeBasis &basis) {
    const Matrix internal = kron(identity(2), projector(0)) + kron(pauli_x(), projector(1));
    return kron(internal, identity(basis.motional_dim()));
}

Matrix control_phase_unitary(const ModeBasis &basis, double phase) {
    Matrix q2 = Matrix::Zero(2, 2);
    q2(0, 0) = std::exp(kI * phase);
    q2(1, 1) = 1.0;
    return kron(kron(identity(2), q2), identity(basis.motional_dim()));
}

Matrix motional_hamiltonian(const ModeBasis &basis, const AnharmonicExpansion *anharmonic) {
    const int nc = basis.dim_c.levels();
    const int nr = basis.dim_r.levels();
    Matrix h = Matrix::Zero(nc * nr, nc * nr);
    for (int n = 0; n < nc; ++n) {
        for (int m = 0; m < nr; ++m) {
            h(n * nr + m, n * nr + m) = basis.nu_c * (n + 0.5) + basis.nu_r * (m + 0.5);
        }
    }
    if (anharmonic != nullptr && !anharmonic->empty()) {
        h += v_cor_operator(*anharmonic, basis);
    }
    return h;
}

Matrix gate_unitary(const ModeBasis &basis, const GateSchedule &schedule,
                    const AnharmonicExpansion *anharmonic) {
    schedule.validate();
    const Matrix kick = kick_unitary(basis, schedule.kick);
    const Matrix before = kron(identity(4), motional_propagator(basis, anharmonic, schedule.t0));
    const Matrix after =
        kron(identity(4), motional_propagator(basis, anharmonic, schedule.t_g - schedule.t0));
    const Matrix flip = std::visit(
        [&basis](const auto &pulse) -> Matrix {
            using T = std::decay_t<decltype(pulse)>;
            if constexpr (std::is_same_v<T, AddressedPulse>) {
                return addressed_flip_unitary(basis, pulse);
            } else {
                return idealized_flip_unitary(basis);
            }
        },
        schedule.flip);
    Matrix u = kick * after * flip * before * kick;
    if (schedule.control_phase != 0.0) {
        u = control_phase_unitary(basis, schedule.control_phase) * u;
    }
    return u;
}

SystemState run_gate(const ModeBasis &basis, const GateSchedule &schedule,
                     const SystemState &initial, const AnharmonicExpansion *anharmonic) {
    const int dim = 4 * basis.motional_dim();
    if (state_dim(initial) != dim) {
        throw Error(ErrorKind::Shape, "initial state dimension " +
                                          std::to_string(state_dim(initial)) +
                                          " does not match the basis (" + std::to_string(dim) + ")");
    }
    return unitary_evolve(initial, gate_unitary(basis, schedule, anharmonic));
}

InternalChannel dense_gate_channel(const ModeBasis &basis, const GateSchedule &schedule,
                                   const MotionalState &motion,
                                   const AnharmonicExpansion *anharmonic) {
    const Matrix u = gate_unitary(basis, schedule, anharmonic);
    const Matrix rho_mot = motion.to_matrix();
    const int m = basis.motional_dim();
    if (rho_mot.rows() != m) {
        throw Error(ErrorKind::Shape, "motional state does not match the basis");
    }
    // U (|i><j| (x) rho) U^dag = A_i rho A_j^dag with A_i the i-th column block.
    std::array<Matrix, 4> left;
    for (int i = 0; i < 4; ++i) {
        left[i] = u.middleCols(i * m, m) * rho_mot;
    }
    Matrix choi = Matrix::Zero(16, 16);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            for (int p = 0; p < 4; ++p) {
                for (int q = 0; q < 4; ++q) {
                    choi(i * 4 + p, j * 4 + q) =
                        left[i].middleRows(p * m, m)
                            .cwiseProduct(u.block(q * m, j * m, m, m).conjugate())
                            .sum();
                }
            }
        }
    }
    return InternalChannel::from_choi(std::move(choi));
}

// --- structured simulation ----------------------------------------------------

namespace {

struct Mixture {
    std::vector<double> weights;
    std::vector<Vector> vectors;
};

Mixture decompose(const DensityOp &rho) {
    Mixture out;
    const int n = rho.dim();
    if (rho.is_diagonal()) {
        for (int i = 0; i < n; ++i) {
            const double w = rho.matrix()(i, i).real();
            if (w > 0.0) {
                Vector v = Vector::Zero(n);
                v(i) = 1.0;
                out.weights.push_back(w);
                out.vectors.push_back(std::move(v));
            }
        }
        return out;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
    for (int i = 0; i < n; ++i) {
        const double w = es.eigenvalues()(i);
        if (w > 0.0) {
            out.weights.push_back(w);
            out.vectors.push_back(es.eigenvectors().col(i));
        }
    }
    return out;
}

// Real orthonormal eigenbasis of a truncated position operator.
struct PositionEigenbasis {
    Matrix vectors;
    RealVector values;
};

PositionEigenbasis position_eigenbasis(FockDim d, double width) {
    const Eigen::MatrixXd x = position_operator(d, width).real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x);
    if (es.info() != Eigen::Success) {
        throw Error(ErrorKind::Numeric, "spectral decomposition of a mode position failed");
    }
    return {es.eigenvectors().cast<Complex>(), es.eigenvalues()};
}

}  // namespace

GateChannel simulate_gate_channel(const ModeBasis &basis, const GateSchedule &schedule,
                                  const MotionalState &motion, const ChannelOptions &options) {
    schedule.validate();
    const int nc = basis.dim_c.levels();
    const int nr = basis.dim_r.levels();
    if (motion.c.dim() != nc || motion.r.dim() != nr) {
        throw Error(ErrorKind::Shape, "motional state does not match the basis dimensions");
    }

    const auto kick = kick_parameters(basis, schedule.kick.eta_effective);
    // Branch s = 0 starts with qubit 2 in |0> and is kicked by e^{+ik x2}; the
    // constant phases e^{-+ik x_e/2} cancel between the two kicks of a branch.
    const std::array<Matrix, 2> disp_c{displacement(kI * kick.eta_c, basis.dim_c),
                                       displacement(-kI * kick.eta_c, basis.dim_c)};
    const std::array<Matrix, 2> disp_r{displacement(-kI * kick.eta_r, basis.dim_r),
                                       displacement(kI * kick.eta_r, basis.dim_r)};

    const PositionEigenbasis xc = position_eigenbasis(basis.dim_c, basis.width_c);
    const PositionEigenbasis xr = position_eigenbasis(basis.dim_r, basis.width_r);

    const Vector uc_open = mode_phases(basis.nu_c, nc, schedule.t0);
    const Vector ur_open = mode_phases(basis.nu_r, nr, schedule.t0);
    const Vector uc_close = mode_phases(basis.nu_c, nc, schedule.t_g - schedule.t0);
    const Vector ur_close = mode_phases(basis.nu_r, nr, schedule.t_g - schedule.t0);

    // G_{s,sigma} = Q_s R_{s,sigma} P_s with P_s = V^dag u(t0) D_s and
    // Q_s = D_s^dag u(t_g - t0) V, all per-mode.
    std::array<Matrix, 2> pc, pr, qc, qr;
    for (int s = 0; s < 2; ++s) {
        pc[s] = xc.vectors.adjoint() * uc_open.asDiagonal() * disp_c[s];
        pr[s] = xr.vectors.adjoint() * ur_open.asDiagonal() * disp_r[s];
        qc[s] = disp_c[s].adjoint() * uc_close.asDiagonal() * xc.vectors;
        qr[s] = disp_r[s].adjoint() * ur_close.asDiagonal() * xr.vectors;
    }
    const Matrix mc = qc[1].adjoint() * qc[0];
    const Matrix mr = qr[1].adjoint() * qr[0];

    // Flip diagonals R[s][sigma] over the product eigenbasis; sigma = 0 is the
    // +1 eigenvector of sigma^x_1.
    std::array<std::array<Matrix, 2>, 2> flip;
    const bool idealized = std::holds_alternative<IdealizedFlip>(schedule.flip);
    if (idealized) {
        const Matrix ones = Matrix::Ones(nc, nr);
        flip[0] = {ones, -ones};
        flip[1] = {ones, ones};
    } else {
        const auto &pulse = std::get<AddressedPulse>(schedule.flip);
        Matrix minus(nc, nr);
        Matrix plus(nc, nr);
        for (int j = 0; j < nr; ++j) {
            for (int i = 0; i < nc; ++i) {
                const double x1 = xc.values(i) + 0.5 * xr.values(j) + 0.5 * basis.x_e;
                const double theta = 0.5 * pulse.duration * pulse.rabi(x1);
                minus(i, j) = std::exp(-kI * theta);
                plus(i, j) = std::exp(kI * theta);
            }
        }
        flip[0] = {minus, plus};
        flip[1] = {minus, plus};
    }

    const Mixture mix_c = decompose(motion.c);
    const Mixture mix_r = decompose(motion.r);

    GateChannel result;
    Eigen::Matrix4cd gram = Eigen::Matrix4cd::Zero();
    auto index = [](int sigma, int s) { return sigma * 2 + s; };
    double kept = 0.0;
    double dropped = 0.0;

    // Same-branch overlaps reduce to sums of |phi_s|^2 against conj(R_sb) R_sa.
    std::array<std::array<std::array<Matrix, 2>, 2>, 2> same;
    for (int s = 0; s < 2; ++s) {
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                same[s][a][b] = flip[s][b].conjugate().cwiseProduct(flip[s][a]);
            }
        }
    }
    std::array<std::vector<Vector>, 2> images_r;
    for (std::size_t j = 0; j < mix_r.weights.size(); ++j) {
        for (int s = 0; s < 2; ++s) {
            images_r[s].push_back(pr[s] * mix_r.vectors[j]);
        }
    }
    const Matrix mr_t = mr.transpose();

    for (std::size_t i = 0; i < mix_c.weights.size(); ++i) {
        const std::array<Vector, 2> ac{pc[0] * mix_c.vectors[i], pc[1] * mix_c.vectors[i]};
        // With phi_s = alpha_s beta_s^T the cross overlap
        // <R_1b phi_1| M_c (R_0a phi_0) M_r^T> is beta_0^T G_ab conj(beta_1) where
        // G_ab = M_r^T o [(M_c diag(alpha_0) R_0a)^T diag(conj alpha_1) conj(R_1b)].
        std::array<std::array<Matrix, 2>, 2> cross;
        for (int a = 0; a < 2; ++a) {
            const Matrix left = mc * (ac[0].asDiagonal() * flip[0][a]);
            for (int b = 0; b < 2; ++b) {
                const Matrix right = ac[1].conjugate().asDiagonal() * flip[1][b].conjugate();
                cross[a][b] = mr_t.cwiseProduct(left.transpose() * right);
            }
        }
        std::array<std::array<std::array<Vector, 2>, 2>, 2> same_r;
        for (int s = 0; s < 2; ++s) {
            const Vector weight_c = ac[s].cwiseAbs2().cast<Complex>();
            for (int a = 0; a < 2; ++a) {
                for (int b = 0; b < 2; ++b) {
                    same_r[s][a][b] = same[s][a][b].transpose() * weight_c;
                }
            }
        }
        for (std::size_t j = 0; j < mix_r.weights.size(); ++j) {
            const double w = mix_c.weights[i] * mix_r.weights[j];
            if (w < options.weight_cutoff) {
                dropped += w;
                continue;
            }
            kept += w;
            ++result.components;
            const Vector &b0 = images_r[0][j];
            const Vector &b1 = images_r[1][j];
            for (int s = 0; s < 2; ++s) {
                const Vector weight_r = images_r[s][j].cwiseAbs2().cast<Complex>();
                for (int a = 0; a < 2; ++a) {
                    for (int b = 0; b < 2; ++b) {
                        gram(index(a, s), index(b, s)) +=
                            w * same_r[s][a][b].cwiseProduct(weight_r).sum();
                    }
                }
            }
            const Vector b1c = b1.conjugate();
            for (int a = 0; a < 2; ++a) {
                for (int b = 0; b < 2; ++b) {
                    gram(index(a, 0), index(b, 1)) += w * b0.cwiseProduct(cross[a][b] * b1c).sum();
                }
            }
        }
    }
    if (!(kept > 0.0)) {
        throw Error(ErrorKind::Numeric, "no motional component above the weight cutoff");
    }
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            gram(index(b, 1), index(a, 0)) = std::conj(gram(index(a, 0), index(b, 1)));
        }
    }
    gram /= kept;
    result.dropped_weight = dropped;

    const std::array<Complex, 2> control{std::exp(kI * schedule.control_phase), Complex(1.0)};
    for (int b = 0; b < 4; ++b) {
        for (int bp = 0; bp < 4; ++bp) {
            gram(b, bp) *= control[b % 2] * std::conj(control[bp % 2]);
        }
    }

    // Basis change from (sigma^x_1 eigenbasis) (x) (qubit 2) to computational.
    Matrix hadamard(2, 2);
    hadamard << 1.0, 1.0, 1.0, -1.0;
    hadamard /= std::sqrt(2.0);
    const Matrix t = kron(hadamard, identity(2));
    const Matrix gram_m = gram;
    result.channel = InternalChannel::reconstruct(
        [&](const Matrix &x) {
            const Matrix in_b = t.adjoint() * x * t;
            return Matrix(t * in_b.cwiseProduct(gram_m) * t.adjoint());
        },
        4);

    if (idealized) {
        // The flip leaves the motion alone, so each branch returns the motion
        // through D_s^dag u(t_g) D_s per mode. For a product state the trace
        // distance is bounded by the sum of the per-mode distances.
        double worst = 0.0;
        for (int s = 0; s < 2; ++s) {
            const Matrix round_c = qc[s] * pc[s];
            const Matrix round_r = qr[s] * pr[s];
            const double dc = trace_distance(round_c * motion.c.matrix() * round_c.adjoint(),
                                             motion.c.matrix());
            const double dr = trace_distance(round_r * motion.r.matrix() * round_r.adjoint(),
                                             motion.r.matrix());
            worst = std::max(worst, dc + dr);
        }
        result.motional_restoration = worst;
    }
    return result;
}

}  // namespace hotgate

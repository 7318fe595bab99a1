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


#include "hotgate/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numbers>
#include <thread>

namespace hotgate {

namespace {

constexpr double kPi = std::numbers::pi;

double gate_period(const ModeBasis &basis) {
    return 2.0 * kPi / basis.nu_c;
}

// Tr(x u(t) rho u(t)^dag) for a diagonal propagator u with level spacing nu.
double evolved_mean(const Matrix &x, const Matrix &rho, double nu, double t) {
    Complex acc = 0.0;
    const Eigen::Index n = rho.rows();
    for (Eigen::Index col = 0; col < n; ++col) {
        for (Eigen::Index row = 0; row < n; ++row) {
            const Complex xv = x(col, row);
            if (xv == 0.0) {
                continue;
            }
            acc += xv * rho(row, col) * std::exp(-kI * (nu * static_cast<double>(row - col) * t));
        }
    }
    return acc.real();
}

}  // namespace

// --- wavepacket separation ------------------------------------------------------

double separation_analytic(const ModeBasis &basis, double eta_eff, double t) {
    const double phase = basis.nu_c * t;
    return 2.0 * basis.x0 * eta_eff * (std::sin(phase) - 0.5 * std::sin(2.0 * phase));
}

std::vector<double> separation_numeric(const ModeBasis &basis, double eta_eff,
                                       std::span<const double> times,
                                       const MotionalState *motion) {
    if (!(eta_eff >= 0.0) || !std::isfinite(eta_eff)) {
        throw Error(ErrorKind::InvalidParameter, "eta must be >= 0");
    }
    const MotionalState state = motion != nullptr ? *motion : vacuum_motion(basis);
    if (state.c.dim() != basis.dim_c.levels() || state.r.dim() != basis.dim_r.levels()) {
        throw Error(ErrorKind::Shape, "motional state does not match the basis dimensions");
    }
    const double k = eta_eff / basis.x0;
    const double eta_c = k * basis.width_c;
    const double eta_r = 0.5 * k * basis.width_r;
    const Matrix xc = position_operator(basis.dim_c, basis.width_c);
    const Matrix xr = position_operator(basis.dim_r, basis.width_r);

    // Branch R starts with qubit 2 in |0> and receives e^{+ik x2}.
    std::array<Matrix, 2> rho_c;
    std::array<Matrix, 2> rho_r;
    for (int s = 0; s < 2; ++s) {
        const double sign = s == 0 ? 1.0 : -1.0;
        const Matrix dc = displacement(sign * kI * eta_c, basis.dim_c);
        const Matrix dr = displacement(-sign * kI * eta_r, basis.dim_r);
        rho_c[s] = dc * state.c.matrix() * dc.adjoint();
        rho_r[s] = dr * state.r.matrix() * dr.adjoint();
    }
    std::vector<double> out;
    out.reserve(times.size());
    for (const double t : times) {
        const double dc = evolved_mean(xc, rho_c[0], basis.nu_c, t) -
                          evolved_mean(xc, rho_c[1], basis.nu_c, t);
        const double dr = evolved_mean(xr, rho_r[0], basis.nu_r, t) -
                          evolved_mean(xr, rho_r[1], basis.nu_r, t);
        out.push_back(dc + 0.5 * dr);
    }
    return out;
}

double separation_numeric(const ModeBasis &basis, double eta_eff, double t) {
    const double times[] = {t};
    return separation_numeric(basis, eta_eff, times).front();
}

std::vector<double> sample_times(const ModeBasis &basis, int samples) {
    if (samples < 2) {
        throw Error(ErrorKind::InvalidParameter, "need at least two samples");
    }
    const double t_g = gate_period(basis);
    std::vector<double> out(samples);
    for (int i = 0; i < samples; ++i) {
        out[i] = t_g * i / (samples - 1);
    }
    return out;
}

SeparationCurve separation_curve(const ModeBasis &basis, double eta_eff, int samples,
                                 double n_bar_c, bool check_convergence, double tolerance) {
    SeparationCurve curve;
    curve.times = sample_times(basis, samples);
    for (const double t : curve.times) {
        curve.d_analytic.push_back(separation_analytic(basis, eta_eff, t));
    }
    const MotionalState motion = thermal_motion(basis, n_bar_c);
    curve.d_numeric = separation_numeric(basis, eta_eff, curve.times, &motion);
    curve.dim_c = basis.dim_c.levels();
    curve.dim_r = basis.dim_r.levels();
    if (check_convergence) {
        const ModeBasis wide = basis.with_dims(FockDim(2 * curve.dim_c), FockDim(2 * curve.dim_r));
        const MotionalState wide_motion = thermal_motion(wide, n_bar_c);
        const auto wide_d = separation_numeric(wide, eta_eff, curve.times, &wide_motion);
        for (std::size_t i = 0; i < wide_d.size(); ++i) {
            curve.max_change = std::max(curve.max_change, std::abs(wide_d[i] - curve.d_numeric[i]));
        }
        curve.converged = curve.max_change <= tolerance;
    }
    return curve;
}

// --- channel figures of merit ------------------------------------------------------

double entanglement_fidelity(const InternalChannel &channel, const Matrix &target) {
    const int d = channel.dim();
    if (target.rows() != d || target.cols() != d) {
        throw Error(ErrorKind::Shape, "target does not match the channel dimension");
    }
    const double min_eig = channel.min_choi_eigenvalue();
    if (min_eig < -1e-8) {
        throw Error(ErrorKind::Numeric,
                    "channel is not completely positive (min Choi eigenvalue " +
                        std::to_string(min_eig) + ")");
    }
    Vector vec = Vector::Zero(d * d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            vec(i * d + j) = target(j, i);
        }
    }
    const Complex overlap = vec.dot(channel.choi() * vec);
    return overlap.real() / (static_cast<double>(d) * d);
}

double average_fidelity(const InternalChannel &channel, const Matrix &target) {
    const double d = channel.dim();
    return (d * entanglement_fidelity(channel, target) + 1.0) / (d + 1.0);
}

double average_purity(const InternalChannel &channel) {
    if (channel.dim() != 4) {
        throw Error(ErrorKind::Shape, "purity frame is defined for two qubits");
    }
    const double h = 1.0 / std::sqrt(2.0);
    const std::array<Vector, 6> frame{
        Vector{{1.0, 0.0}},      Vector{{0.0, 1.0}},     Vector{{h, h}},
        Vector{{h, -h}},         Vector{{h, kI * h}},    Vector{{h, -kI * h}},
    };
    double total = 0.0;
    for (const auto &a : frame) {
        for (const auto &b : frame) {
            const Vector psi = kron(a, b);
            const Matrix out = channel.apply(psi * psi.adjoint());
            total += (out * out).trace().real();
        }
    }
    return total / 36.0;
}

// --- anharmonic correction ------------------------------------------------------------

namespace {

// V_cor split into pieces that shift (n, m) by (dn, dm). Each piece is a
// Schur product with a separable matrix, so V~ keeps the same structure with
// one scalar phase integral per shift.
struct Band {
    int dn = 0;
    int dm = 0;
    Eigen::MatrixXd g;  // indexed by the source levels
};

struct BandedOperator {
    int nc = 0;
    int nr = 0;
    std::vector<Band> bands;
};

Eigen::VectorXd offset_diagonal(const Eigen::MatrixXd &m, int shift) {
    const int n = static_cast<int>(m.rows());
    const int len = n - std::abs(shift);
    Eigen::VectorXd out(len);
    const int src0 = std::max(0, -shift);
    for (int i = 0; i < len; ++i) {
        out(i) = m(src0 + i + shift, src0 + i);
    }
    return out;
}

BandedOperator banded_correction(const ModeBasis &basis, const AnharmonicExpansion &expansion) {
    BandedOperator op;
    op.nc = basis.dim_c.levels();
    op.nr = basis.dim_r.levels();
    const Eigen::MatrixXd xc = position_operator(basis.dim_c, basis.width_c).real();
    const Eigen::MatrixXd xr = position_operator(basis.dim_r, basis.width_r).real();
    std::vector<Eigen::MatrixXd> pow_c{Eigen::MatrixXd::Identity(op.nc, op.nc)};
    std::vector<Eigen::MatrixXd> pow_r{Eigen::MatrixXd::Identity(op.nr, op.nr)};
    for (int k = 1; k <= expansion.order; ++k) {
        pow_c.push_back(pow_c.back() * xc);
        pow_r.push_back(pow_r.back() * xr);
    }
    std::map<std::pair<int, int>, std::size_t> slot;
    for (const auto &[key, coeff] : expansion.coefficients) {
        const auto [a, b] = key;
        if (a > expansion.order || b > expansion.order) {
            throw Error(ErrorKind::Shape, "monomial exceeds expansion order");
        }
        for (int dn = -a; dn <= a; dn += 2) {
            if (std::abs(dn) >= op.nc) {
                continue;
            }
            const Eigen::VectorXd dc = offset_diagonal(pow_c[a], dn);
            for (int dm = -b; dm <= b; dm += 2) {
                if (std::abs(dm) >= op.nr) {
                    continue;
                }
                const Eigen::VectorXd dr = offset_diagonal(pow_r[b], dm);
                auto [it, inserted] = slot.try_emplace({dn, dm}, op.bands.size());
                if (inserted) {
                    op.bands.push_back({dn, dm, Eigen::MatrixXd::Zero(dc.size(), dr.size())});
                }
                op.bands[it->second].g += coeff * dc * dr.transpose();
            }
        }
    }
    return op;
}

std::vector<double> simpson_weights(double t_g, int intervals) {
    if (intervals < 64 || intervals % 2 != 0) {
        throw Error(ErrorKind::InvalidParameter,
                    "quadrature needs an even number of intervals >= 64");
    }
    const double h = t_g / intervals;
    std::vector<double> w(intervals + 1);
    for (int q = 0; q <= intervals; ++q) {
        const double f = (q == 0 || q == intervals) ? 1.0 : (q % 2 == 1 ? 4.0 : 2.0);
        w[q] = f * h / 3.0;
    }
    return w;
}

// Quadrature of exp(i (nu_c dn + nu_r dm) tau) over one period, per band.
std::vector<Complex> band_phases(const ModeBasis &basis, const BandedOperator &op, int intervals) {
    const double t_g = gate_period(basis);
    const auto w = simpson_weights(t_g, intervals);
    std::vector<Complex> out;
    for (const auto &band : op.bands) {
        const double omega = basis.nu_c * band.dn + basis.nu_r * band.dm;
        Complex acc = 0.0;
        for (int q = 0; q <= intervals; ++q) {
            const double tau = t_g * q / intervals;
            acc += w[q] * std::exp(kI * (omega * tau));
        }
        out.push_back(acc);
    }
    return out;
}

// V~ applied to the product-space vector u reshaped as u(n, m).
Matrix apply_banded(const BandedOperator &op, const std::vector<Complex> &phases, const Matrix &u) {
    Matrix y = Matrix::Zero(op.nc, op.nr);
    for (std::size_t k = 0; k < op.bands.size(); ++k) {
        const auto &band = op.bands[k];
        const auto rows = band.g.rows();
        const auto cols = band.g.cols();
        const int src_n = std::max(0, -band.dn);
        const int src_m = std::max(0, -band.dm);
        y.block(src_n + band.dn, src_m + band.dm, rows, cols) +=
            phases[k] * band.g.cast<Complex>().cwiseProduct(u.block(src_n, src_m, rows, cols));
    }
    return y;
}

struct Mixture {
    std::vector<double> weights;
    std::vector<Vector> vectors;
};

Mixture mixture_of(const DensityOp &rho) {
    Mixture out;
    const int n = rho.dim();
    if (rho.is_diagonal()) {
        for (int i = 0; i < n; ++i) {
            const double w = rho.matrix()(i, i).real();
            if (w > 0.0) {
                out.weights.push_back(w);
                out.vectors.push_back(Vector::Unit(n, i));
            }
        }
        return out;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
    for (int i = 0; i < n; ++i) {
        if (es.eigenvalues()(i) > 0.0) {
            out.weights.push_back(es.eigenvalues()(i));
            out.vectors.push_back(es.eigenvectors().col(i));
        }
    }
    return out;
}

// Variance of V~ in a diagonal product state: every Fock product state maps to
// disjoint entries per band.
double diagonal_variance(const BandedOperator &op, const std::vector<Complex> &phases,
                         const Eigen::VectorXd &pc, const Eigen::VectorXd &pr) {
    const Eigen::MatrixXd weight = pc * pr.transpose();
    double second = 0.0;
    double first = 0.0;
    for (std::size_t k = 0; k < op.bands.size(); ++k) {
        const auto &band = op.bands[k];
        const auto block = weight.block(std::max(0, -band.dn), std::max(0, -band.dm),
                                        band.g.rows(), band.g.cols());
        const double w2 = block.cwiseProduct(band.g.cwiseAbs2()).sum();
        second += std::norm(phases[k]) * w2;
        if (band.dn == 0 && band.dm == 0) {
            first = (phases[k] * block.cwiseProduct(band.g).sum()).real();
        }
    }
    return second - first * first;
}

double mixture_variance(const BandedOperator &op, const std::vector<Complex> &phases,
                        const Mixture &mc, const Mixture &mr, double cutoff) {
    double second = 0.0;
    Complex first = 0.0;
    double kept = 0.0;
    for (std::size_t i = 0; i < mc.weights.size(); ++i) {
        for (std::size_t j = 0; j < mr.weights.size(); ++j) {
            const double w = mc.weights[i] * mr.weights[j];
            if (w < cutoff) {
                continue;
            }
            kept += w;
            const Matrix u = mc.vectors[i] * mr.vectors[j].transpose();
            const Matrix y = apply_banded(op, phases, u);
            second += w * y.squaredNorm();
            first += w * u.conjugate().cwiseProduct(y).sum();
        }
    }
    if (!(kept > 0.0)) {
        throw Error(ErrorKind::Numeric, "no motional component above the weight cutoff");
    }
    return second / kept - std::norm(first / kept);
}

Mixture displaced(const Mixture &m, const Matrix &d) {
    Mixture out = m;
    for (auto &v : out.vectors) {
        v = d * v;
    }
    return out;
}

double correction_fidelity(const ModeBasis &basis, const BandedOperator &op,
                           const std::vector<Complex> &phases, const MotionalState &motion,
                           const AnharmonicOptions &options) {
    if (options.mode == ExpectationMode::Initial && motion.c.is_diagonal() &&
        motion.r.is_diagonal()) {
        return 1.0 - diagonal_variance(op, phases, motion.c.matrix().diagonal().real(),
                                       motion.r.matrix().diagonal().real());
    }
    const Mixture mc = mixture_of(motion.c);
    const Mixture mr = mixture_of(motion.r);
    if (options.mode == ExpectationMode::Initial) {
        return 1.0 - mixture_variance(op, phases, mc, mr, options.weight_cutoff);
    }
    double total = 0.0;
    for (int s = 0; s < 2; ++s) {
        const double sign = s == 0 ? 1.0 : -1.0;
        const Matrix dc = displacement(sign * kI * basis.eta_c, basis.dim_c);
        const Matrix dr = displacement(-sign * kI * basis.eta_r, basis.dim_r);
        total += mixture_variance(op, phases, displaced(mc, dc), displaced(mr, dr),
                                  options.weight_cutoff);
    }
    return 1.0 - 0.5 * total;
}

}  // namespace

AnharmonicResult anharmonic_fidelity(const ModeBasis &basis, const AnharmonicExpansion &expansion,
                                     const MotionalState &motion,
                                     const AnharmonicOptions &options) {
    if (motion.c.dim() != basis.dim_c.levels() || motion.r.dim() != basis.dim_r.levels()) {
        throw Error(ErrorKind::Shape, "motional state does not match the basis dimensions");
    }
    simpson_weights(gate_period(basis), options.quadrature_points);
    AnharmonicResult result;
    if (expansion.empty()) {
        return result;
    }
    const BandedOperator op = banded_correction(basis, expansion);
    const auto phases = band_phases(basis, op, options.quadrature_points);
    const auto refined = band_phases(basis, op, 2 * options.quadrature_points);
    result.f_cor = correction_fidelity(basis, op, phases, motion, options);
    const double f_refined = correction_fidelity(basis, op, refined, motion, options);
    result.quadrature_change = std::abs(f_refined - result.f_cor);
    result.quadrature_converged = result.quadrature_change <= options.quadrature_tolerance;
    return result;
}

Matrix interaction_average_matrix(const ModeBasis &basis, const AnharmonicExpansion &expansion,
                                  int quadrature_points) {
    const double t_g = gate_period(basis);
    const auto w = simpson_weights(t_g, quadrature_points);
    const Matrix v = v_cor_operator(expansion, basis);
    const RealVector energy = motional_hamiltonian(basis, nullptr).diagonal().real();
    Matrix out = Matrix::Zero(v.rows(), v.cols());
    if (expansion.empty()) {
        return out;
    }
    for (int q = 0; q <= quadrature_points; ++q) {
        const double tau = t_g * q / quadrature_points;
        const Vector p = (-kI * tau * energy.cast<Complex>()).array().exp();
        // e^{iH tau} V e^{-iH tau}
        out += w[q] * (p.conjugate() * p.transpose()).cwiseProduct(v);
    }
    return out;
}

double anharmonic_fidelity(const ModeBasis &basis, const AnharmonicExpansion &expansion,
                           const DensityOp &initial_motional, int quadrature_points) {
    if (initial_motional.dim() != basis.motional_dim()) {
        throw Error(ErrorKind::Shape, "motional state does not match the basis dimensions");
    }
    const Matrix vt = interaction_average_matrix(basis, expansion, quadrature_points);
    const Matrix &rho = initial_motional.matrix();
    const double first = (rho * vt).trace().real();
    const double second = (rho * vt * vt).trace().real();
    return 1.0 - (second - first * first);
}

double anharmonic_fidelity_exact(const ModeBasis &basis, const AnharmonicExpansion &expansion,
                                 const DensityOp &motional) {
    if (motional.dim() != basis.motional_dim()) {
        throw Error(ErrorKind::Shape, "motional state does not match the basis dimensions");
    }
    if (expansion.empty()) {
        return 1.0;
    }
    const double t_g = gate_period(basis);
    const Matrix h0 = motional_hamiltonian(basis, nullptr);
    const Matrix h = motional_hamiltonian(basis, &expansion);
    const Vector back = (kI * t_g * h0.diagonal()).array().exp();
    const Matrix u_i = back.asDiagonal() * hermitian_expm(h, t_g);
    return std::norm((motional.matrix() * u_i).trace());
}

double anharmonic_fidelity_exact(const ModeBasis &basis, const AnharmonicExpansion &expansion,
                                 const MotionalState &motion, ExpectationMode mode) {
    const Matrix rho = motion.to_matrix();
    if (mode == ExpectationMode::Initial) {
        return anharmonic_fidelity_exact(basis, expansion, DensityOp::from_matrix(rho));
    }
    double total = 0.0;
    for (int s = 0; s < 2; ++s) {
        const double sign = s == 0 ? 1.0 : -1.0;
        const Matrix d = kron(displacement(sign * kI * basis.eta_c, basis.dim_c),
                              displacement(-sign * kI * basis.eta_r, basis.dim_r));
        total += anharmonic_fidelity_exact(basis, expansion,
                                           DensityOp::from_matrix(d * rho * d.adjoint()));
    }
    return 0.5 * total;
}

// --- full gate evaluation --------------------------------------------------------------

TrapSpec GateConfig::trap() const {
    const double c = coulomb > 0.0 ? coulomb : natural_coulomb_constant(40.0, 50e3);
    return natural_trap(exponent, c, eta);
}

namespace {

struct GateRun {
    GateChannel gate;
    std::optional<ConditionReport> conditions;
    std::vector<std::string> warnings;
};

GateRun run_at(const GateConfig &config, const TrapSpec &spec, int dim_c, int dim_r) {
    const ModeBasis basis = make_mode_basis(spec, FockDim(dim_c), FockDim(dim_r));
    GateRun run;
    GateSchedule schedule;
    if (config.idealized_flip) {
        schedule = make_schedule(basis, IdealizedFlip{});
    } else {
        auto solution = condition_solver(basis, config.n_bar_c, config.cycles, config.conditions);
        if (config.omega0) {
            solution.pulse.omega0 = *config.omega0;
        }
        run.conditions = solution.report;
        schedule = make_schedule(basis, solution.pulse);
    }
    if (config.control_phase) {
        schedule.control_phase = *config.control_phase;
    }
    run.warnings = schedule.warnings();
    ChannelOptions options;
    options.weight_cutoff = config.weight_cutoff;
    run.gate = simulate_gate_channel(basis, schedule, thermal_motion(basis, config.n_bar_c), options);
    return run;
}

}  // namespace

GateReport evaluate_gate(const GateConfig &config) {
    const TrapSpec spec = config.trap();
    const auto [auto_c, auto_r] =
        default_dims(spec, config.n_bar_c, relative_mode_occupation(config.n_bar_c));
    int dim_c = config.dim_c > 0 ? config.dim_c : auto_c;
    int dim_r = config.dim_r > 0 ? config.dim_r : auto_r;

    GateReport report;
    report.eta = config.eta;
    report.n_bar_c = config.n_bar_c;
    std::optional<GateRun> last;
    auto fidelity_at = [&](int nc, int nr) {
        last = run_at(config, spec, nc, nr);
        return average_fidelity(last->gate.channel, ideal_gate());
    };
    if (config.check_convergence) {
        const Convergence conv =
            converge_dims(fidelity_at, dim_c, dim_r, config.convergence_tol, config.max_doublings);
        dim_c = conv.dim_c;
        dim_r = conv.dim_r;
        report.convergence_checked = true;
        report.converged = conv.converged;
        report.convergence_change = conv.change;
        report.fidelity = conv.value;
    } else {
        report.fidelity = fidelity_at(dim_c, dim_r);
    }
    report.dim_c = dim_c;
    report.dim_r = dim_r;
    report.fidelity_vs_identity = average_fidelity(last->gate.channel, identity(4));
    report.purity = average_purity(last->gate.channel);
    report.conditions = last->conditions;
    report.motional_restoration = last->gate.motional_restoration;
    report.dropped_weight = last->gate.dropped_weight;
    report.components = last->gate.components;
    report.warnings = last->warnings;

    const auto &anh = config.anharmonic;
    if (anh.enabled && anh.order > 0) {
        const ModeBasis basis = make_mode_basis(spec, FockDim(dim_c), FockDim(dim_r));
        const auto expansion = anharmonic_expansion(spec, anh.order).scaled(anh.scale);
        AnharmonicOptions options;
        options.quadrature_points = anh.quadrature_points;
        options.mode = anh.mode;
        options.weight_cutoff = config.weight_cutoff;
        const auto result =
            anharmonic_fidelity(basis, expansion, thermal_motion(basis, config.n_bar_c), options);
        report.f_cor = result.f_cor;
        report.f_cor_converged = result.quadrature_converged;
    }
    return report;
}

std::vector<ScanRow> scan(const std::vector<std::pair<double, double>> &grid,
                          const GateConfig &base, int jobs) {
    if (grid.empty()) {
        throw Error(ErrorKind::InvalidParameter, "scan grid is empty");
    }
    std::vector<ScanRow> rows(grid.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            ScanRow &row = rows[i];
            row.eta = grid[i].first;
            row.n_bar_c = grid[i].second;
            GateConfig config = base;
            config.eta = row.eta;
            config.n_bar_c = row.n_bar_c;
            try {
                row.report = evaluate_gate(config);
            } catch (const Error &e) {
                row.error = e.what();
                row.error_kind = e.kind();
            } catch (const std::exception &e) {
                row.error = e.what();
            }
        }
    };
    const int threads = std::clamp<int>(jobs, 1, static_cast<int>(grid.size()));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }
    return rows;
}

}  // namespace hotgate

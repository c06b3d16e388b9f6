#include "twodes/lindblad.hpp"

#include <cmath>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "twodes/errors.hpp"
#include "twodes/units.hpp"

namespace twodes {

namespace {

void require(bool cond, const std::string& what) {
    if (!cond) throw ValidationError(what);
}

}  // namespace

QuantumSystem::QuantumSystem(std::vector<double> energies, RealMatrix dipoles, std::vector<JumpChannel> jumps,
                             std::vector<DephasingChannel> dephasing, std::vector<double> yields,
                             std::vector<int> excitation_number)
    : energies_(std::move(energies)),
      dipoles_(std::move(dipoles)),
      jumps_(std::move(jumps)),
      dephasing_(std::move(dephasing)),
      yields_(std::move(yields)),
      excitation_(std::move(excitation_number)) {
    const int n = dim();
    if (n < 1 || n > kMaxLevels)
        throw StructuralError("level count must be in [1, " + std::to_string(kMaxLevels) + "]");
    if (dipoles_.rows() != n || dipoles_.cols() != n) throw StructuralError("dipole matrix does not match level count");
    if (static_cast<int>(yields_.size()) != n) throw StructuralError("yields do not match level count");
    if (static_cast<int>(excitation_.size()) != n) throw StructuralError("excitation grading does not match level count");
    for (int i = 0; i < n; ++i) {
        require(dipoles_(i, i) == 0.0, "dipole matrix must have zero diagonal");
        for (int j = 0; j < n; ++j) require(dipoles_(i, j) == dipoles_(j, i), "dipole matrix must be symmetric");
    }
    require(excitation_[0] == 0, "ground level must carry zero excitation");
    for (const auto& c : jumps_) {
        if (c.from < 0 || c.from >= n || c.to < 0 || c.to >= n) throw StructuralError("jump channel level out of range");
        require(c.rate >= 0.0, "jump rates must be non-negative");
    }
    for (const auto& c : dephasing_) {
        if (c.level < 0 || c.level >= n) throw StructuralError("dephasing level out of range");
        require(c.strength >= 0.0, "dephasing strengths must be non-negative");
    }
    for (double y : yields_) require(y >= 0.0, "yields must be non-negative");
}

QuantumSystem QuantumSystem::with_channels(std::vector<JumpChannel> jumps,
                                           std::vector<DephasingChannel> dephasing) const {
    return QuantumSystem(energies_, dipoles_, std::move(jumps), std::move(dephasing), yields_, excitation_);
}

QuantumSystem QuantumSystem::with_yields(std::vector<double> yields) const {
    return QuantumSystem(energies_, dipoles_, jumps_, dephasing_, std::move(yields), excitation_);
}

QuantumSystem QuantumSystem::with_dipoles(RealMatrix dipoles) const {
    return QuantumSystem(energies_, std::move(dipoles), jumps_, dephasing_, yields_, excitation_);
}

QuantumSystem dimer_model(const ModelParameters& p) {
    RealMatrix mu = RealMatrix::Ones(4, 4);
    mu.diagonal().setZero();
    mu(0, 3) = mu(3, 0) = 0.0;
    std::vector<JumpChannel> jumps{{1, 0, p.gamma_10}, {2, 1, p.gamma_21}, {3, 2, p.gamma_32}};
    std::vector<DephasingChannel> deph;
    for (int k = 0; k < 4; ++k) deph.push_back({k, p.dephasing});
    return QuantumSystem({0.0, p.e1, p.e2, p.e1 + p.e2}, mu, jumps, deph, p.yields, {0, 1, 1, 2});
}

double DensityMatrix::trace_error() const { return std::abs(data_.trace() - cplx(1.0, 0.0)); }

double DensityMatrix::hermiticity_error() const { return (data_ - data_.adjoint()).cwiseAbs().maxCoeff(); }

double DensityMatrix::min_eigenvalue() const {
    Eigen::MatrixXcd h = 0.5 * (data_ + data_.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

DensityMatrix ground_state(const QuantumSystem& system) {
    Matrix rho = Matrix::Zero(system.dim(), system.dim());
    rho(0, 0) = 1.0;
    return DensityMatrix(rho);
}

LindbladGenerator::LindbladGenerator(const QuantumSystem& system, double carrier)
    : system_(system), carrier_(carrier) {
    const int n = system_.dim();
    for (int m = 0; m < n; ++m)
        frame_energies_.push_back(system_.energies()[m] - system_.excitation_number()[m] * carrier_);

    decay_ = RealMatrix::Zero(n, n);
    feed_ = RealMatrix::Zero(n, n);
    auto add_projector_loss = [&](int level, double rate) {
        for (int a = 0; a < n; ++a) {
            decay_(level, a) += 0.5 * rate;
            decay_(a, level) += 0.5 * rate;
        }
    };
    for (const auto& c : system_.jump_channels()) {
        const double r = c.rate / kHbar;
        add_projector_loss(c.from, r);
        feed_(c.to, c.from) += r;
    }
    for (const auto& c : system_.dephasing_channels()) {
        const double r = c.strength / kHbar;
        add_projector_loss(c.level, r);
        feed_(c.level, c.level) += r;
    }

    // Generic Gamma (conj(L) (x) L - 1/2 I (x) L^dag L - 1/2 (L^dag L)^T (x) I).
    const int n2 = n * n;
    dissipator_ = SuperMatrix::Zero(n2, n2);
    auto add_channel = [&](const Eigen::MatrixXcd& l, double rate) {
        const Eigen::MatrixXcd ldl = l.adjoint() * l;
        const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
        Eigen::MatrixXcd term = Eigen::kroneckerProduct(l.conjugate(), l);
        term -= 0.5 * Eigen::kroneckerProduct(id, ldl);
        term -= 0.5 * Eigen::kroneckerProduct(ldl.transpose(), id);
        dissipator_ += (rate / kHbar) * term;
    };
    for (const auto& c : system_.jump_channels()) {
        Eigen::MatrixXcd l = Eigen::MatrixXcd::Zero(n, n);
        l(c.to, c.from) = 1.0;
        add_channel(l, c.rate);
    }
    for (const auto& c : system_.dephasing_channels()) {
        Eigen::MatrixXcd l = Eigen::MatrixXcd::Zero(n, n);
        l(c.level, c.level) = 1.0;
        add_channel(l, c.strength);
    }
}

void LindbladGenerator::apply_field_free(const Matrix& rho, Matrix& out) const {
    const int n = dim();
    const cplx minus_i_over_hbar(0.0, -1.0 / kHbar);
    out.resize(n, n);
    for (int b = 0; b < n; ++b)
        for (int a = 0; a < n; ++a)
            out(a, b) = minus_i_over_hbar * (frame_energies_[a] - frame_energies_[b]) * rho(a, b) -
                        decay_(a, b) * rho(a, b);
    for (int a = 0; a < n; ++a) {
        double gain = 0.0;
        for (int f = 0; f < n; ++f) gain += feed_(a, f) * rho(f, f).real();
        out(a, a) += gain;
    }
}

void LindbladGenerator::apply(const Matrix& rho, const Matrix& h_int, Matrix& out) const {
    apply_field_free(rho, out);
    const cplx minus_i_over_hbar(0.0, -1.0 / kHbar);
    out.noalias() += minus_i_over_hbar * (h_int * rho - rho * h_int);
}

SuperMatrix LindbladGenerator::liouvillian(const Matrix* h_int) const {
    const int n = dim();
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
    for (int m = 0; m < n; ++m) h(m, m) = frame_energies_[m];
    if (h_int) h += *h_int;
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
    SuperMatrix l = cplx(0.0, -1.0 / kHbar) *
                    (Eigen::MatrixXcd(Eigen::kroneckerProduct(id, h)) -
                     Eigen::MatrixXcd(Eigen::kroneckerProduct(h.transpose(), id)));
    return l + dissipator_;
}

Matrix lindblad_rhs(const LindbladGenerator& gen, const DensityMatrix& rho, const Matrix& h_int) {
    const int n = gen.dim();
    if (rho.dim() != n || rho.matrix().cols() != n || h_int.rows() != n || h_int.cols() != n)
        throw StructuralError("lindblad_rhs: dimension mismatch");
    if ((h_int - h_int.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw ValidationError("lindblad_rhs: interaction Hamiltonian is not Hermitian");
    Matrix out;
    gen.apply(rho.matrix(), h_int, out);
    return out;
}

namespace {

void check_state(const Matrix& rho, double t, const PropagateOptions& o) {
    const double tr = std::abs(rho.trace() - cplx(1.0, 0.0));
    if (!(tr <= o.failure_factor * o.trace_tol)) throw IntegrationFailure("trace drift " + std::to_string(tr), t);
    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (!(herm <= o.failure_factor * o.hermiticity_tol))
        throw IntegrationFailure("Hermiticity loss " + std::to_string(herm), t);
}

int step_count(double t0, double t1, double dt) {
    if (!(dt > 0.0)) throw ValidationError("propagate: dt must be positive");
    if (!(t1 >= t0)) throw ValidationError("propagate: t1 must not precede t0");
    const double ratio = (t1 - t0) / dt;
    return static_cast<int>(std::ceil(ratio - 1e-9));
}

}  // namespace

void rk4_advance(const LindbladGenerator& gen, Matrix& rho, const HamiltonianHook& hook, double t0, double t1,
                 double dt, const PropagateOptions& opts) {
    const int steps = step_count(t0, t1, dt);
    if (steps == 0) return;
    const double h = (t1 - t0) / steps;
    const int n = gen.dim();
    Matrix k1, k2, k3, k4, tmp;
    Matrix h0 = Matrix::Zero(n, n), hmid = Matrix::Zero(n, n), h1 = Matrix::Zero(n, n);
    auto eval = [&](double t, const Matrix& state, Matrix& hint, Matrix& out) {
        if (hook) {
            hook(t, hint);
            gen.apply(state, hint, out);
        } else {
            gen.apply_field_free(state, out);
        }
    };
    for (int s = 0; s < steps; ++s) {
        const double t = t0 + s * h;
        eval(t, rho, h0, k1);
        tmp = rho + (0.5 * h) * k1;
        eval(t + 0.5 * h, tmp, hmid, k2);
        tmp = rho + (0.5 * h) * k2;
        if (hook) {
            gen.apply(tmp, hmid, k3);
        } else {
            gen.apply_field_free(tmp, k3);
        }
        tmp = rho + h * k3;
        eval(t + h, tmp, h1, k4);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        check_state(rho, t + h, opts);
    }
}

DensityMatrix propagate(const LindbladGenerator& gen, const DensityMatrix& rho0, const HamiltonianHook& hook,
                        double t0, double t1, double dt, const PropagateOptions& opts) {
    if (rho0.dim() != gen.dim()) throw StructuralError("propagate: state dimension mismatch");
    Matrix rho = rho0.matrix();
    rk4_advance(gen, rho, hook, t0, t1, dt, opts);
    DensityMatrix out(rho);
    if (opts.check_positivity) {
        const double lam = out.min_eigenvalue();
        if (lam < -opts.failure_factor * opts.positivity_tol)
            throw IntegrationFailure("negative eigenvalue " + std::to_string(lam), t1);
    }
    return out;
}

Trajectory propagate_trajectory(const LindbladGenerator& gen, const DensityMatrix& rho0, const HamiltonianHook& hook,
                                double t0, double t1, double dt, const PropagateOptions& opts) {
    const int steps = step_count(t0, t1, dt);
    Trajectory traj;
    traj.t0 = t0;
    traj.dt = steps > 0 ? (t1 - t0) / steps : dt;
    Matrix rho = rho0.matrix();
    traj.states.reserve(steps + 1);
    traj.states.push_back(rho);
    for (int s = 0; s < steps; ++s) {
        rk4_advance(gen, rho, hook, traj.time(s), traj.time(s + 1), traj.dt, opts);
        traj.states.push_back(rho);
    }
    return traj;
}

SuperVector vectorize(const Matrix& m) {
    SuperVector v(m.size());
    for (int j = 0; j < m.cols(); ++j)
        for (int i = 0; i < m.rows(); ++i) v(j * m.rows() + i) = m(i, j);
    return v;
}

Matrix unvectorize(const SuperVector& v, int dim) {
    Matrix m(dim, dim);
    for (int j = 0; j < dim; ++j)
        for (int i = 0; i < dim; ++i) m(i, j) = v(j * dim + i);
    return m;
}

SuperMatrix expm(const SuperMatrix& a) { return a.exp(); }

SuperMatrix integrated_exponential(const SuperMatrix& a, double t) {
    const Eigen::Index n = a.rows();
    SuperMatrix big = SuperMatrix::Zero(2 * n, 2 * n);
    big.topLeftCorner(n, n) = a * t;
    big.topRightCorner(n, n) = SuperMatrix::Identity(n, n) * t;
    const SuperMatrix e = big.exp();
    return e.topRightCorner(n, n);
}

FieldFreeEvolver::FieldFreeEvolver(const LindbladGenerator& gen) : dim_(gen.dim()), liouvillian_(gen.liouvillian()) {}

const SuperMatrix& FieldFreeEvolver::propagator(double dt) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(dt);
    if (it == cache_.end()) it = cache_.emplace(dt, SuperMatrix((liouvillian_ * dt).exp())).first;
    return it->second;
}

void FieldFreeEvolver::advance(Matrix& rho, double dt) const {
    if (dt <= 0.0) return;
    const SuperMatrix& p = propagator(dt);
    rho = unvectorize(p * vectorize(rho), dim_);
}

}  // namespace twodes

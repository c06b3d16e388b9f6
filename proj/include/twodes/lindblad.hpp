#pragma once

#include <complex>
#include <functional>
#include <map>
#include <mutex>
#include <vector>

#include <Eigen/Dense>

namespace twodes {

using cplx = std::complex<double>;

/// Largest level count supported; operator matrices live on the stack.
inline constexpr int kMaxLevels = 8;

using Matrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxLevels, kMaxLevels>;
using RealMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxLevels, kMaxLevels>;
using SuperMatrix = Eigen::MatrixXcd;
using SuperVector = Eigen::VectorXcd;

/// Incoherent relaxation |to><from| with rate expressed as an energy (eV).
struct JumpChannel {
    int from = 0;
    int to = 0;
    double rate = 0.0;
};

/// Pure dephasing |level><level| with strength in eV.
struct DephasingChannel {
    int level = 0;
    double strength = 0.0;
};

/// N-level open system: bare energies, relative transition dipoles, Lindblad
/// channels, fluorescence yields and the excitation-number grading used by
/// the rotating-wave approximation.
class QuantumSystem {
public:
    QuantumSystem(std::vector<double> energies, RealMatrix dipoles, std::vector<JumpChannel> jumps,
                  std::vector<DephasingChannel> dephasing, std::vector<double> yields,
                  std::vector<int> excitation_number);

    int dim() const noexcept { return static_cast<int>(energies_.size()); }
    const std::vector<double>& energies() const noexcept { return energies_; }
    /// Relative transition strengths mu_ij (dimensionless, 0 = forbidden).
    const RealMatrix& dipoles() const noexcept { return dipoles_; }
    const std::vector<JumpChannel>& jump_channels() const noexcept { return jumps_; }
    const std::vector<DephasingChannel>& dephasing_channels() const noexcept { return dephasing_; }
    const std::vector<double>& yields() const noexcept { return yields_; }
    const std::vector<int>& excitation_number() const noexcept { return excitation_; }

    /// Copy with the listed channels only; used to compose generators.
    QuantumSystem with_channels(std::vector<JumpChannel> jumps, std::vector<DephasingChannel> dephasing) const;
    QuantumSystem with_yields(std::vector<double> yields) const;
    QuantumSystem with_dipoles(RealMatrix dipoles) const;

private:
    std::vector<double> energies_;
    RealMatrix dipoles_;
    std::vector<JumpChannel> jumps_;
    std::vector<DephasingChannel> dephasing_;
    std::vector<double> yields_;
    std::vector<int> excitation_;
};

/// Parameters of the four-level dimer model.
struct ModelParameters {
    double e1 = 1.46;          // eV
    double e2 = 1.55;          // eV
    double gamma_10 = 4.13e-6; // eV
    double gamma_21 = 4.13e-3; // eV
    double gamma_32 = 13.78e-3;
    double dephasing = 41.3e-3;
    std::vector<double> yields{0.0, 1.0, 0.0, 0.0};

    bool operator==(const ModelParameters&) const = default;
};

/// Four-level dimer: 0, E1, E2, E1+E2 with all transitions except 0<->3
/// allowed at equal strength, relaxation 3->2->1->0 and equal dephasing on
/// every level. Grading (0,1,1,2).
QuantumSystem dimer_model(const ModelParameters& params = {});

/// Reduced density matrix with physicality diagnostics.
class DensityMatrix {
public:
    DensityMatrix() = default;
    explicit DensityMatrix(Matrix data) : data_(std::move(data)) {}

    const Matrix& matrix() const noexcept { return data_; }
    Matrix& matrix() noexcept { return data_; }
    int dim() const noexcept { return static_cast<int>(data_.rows()); }
    cplx operator()(int i, int j) const { return data_(i, j); }
    double population(int i) const { return data_(i, i).real(); }

    double trace_error() const;
    double hermiticity_error() const;
    double min_eigenvalue() const;

private:
    Matrix data_;
};

/// |0><0|.
DensityMatrix ground_state(const QuantumSystem& system);

/// Lindblad generator in a frame rotating at `carrier` (eV) per excitation
/// quantum. The static Hamiltonian is diag(E_m - n_m * carrier). Immutable.
class LindbladGenerator {
public:
    explicit LindbladGenerator(const QuantumSystem& system, double carrier = 0.0);

    const QuantumSystem& system() const noexcept { return system_; }
    int dim() const noexcept { return system_.dim(); }
    double carrier() const noexcept { return carrier_; }
    const std::vector<double>& frame_energies() const noexcept { return frame_energies_; }

    /// d rho / dt in 1/fs. No validation; h_int must be Hermitian.
    void apply(const Matrix& rho, const Matrix& h_int, Matrix& out) const;
    void apply_field_free(const Matrix& rho, Matrix& out) const;

    /// Dissipator alone as a dim^2 x dim^2 superoperator (column stacking).
    const SuperMatrix& dissipator() const noexcept { return dissipator_; }
    /// Full generator including H0' and an optional static h_int.
    SuperMatrix liouvillian(const Matrix* h_int = nullptr) const;

private:
    QuantumSystem system_;
    double carrier_;
    std::vector<double> frame_energies_;
    // dissipator(rho)_ab = -decay_ab rho_ab + delta_ab sum_f feed_af rho_ff
    RealMatrix decay_;
    RealMatrix feed_;
    SuperMatrix dissipator_;
};

/// Validated right-hand side of the Lindblad equation.
Matrix lindblad_rhs(const LindbladGenerator& gen, const DensityMatrix& rho, const Matrix& h_int);

/// Interaction Hamiltonian (eV) at time t (fs).
using HamiltonianHook = std::function<void(double t, Matrix& h_int)>;

struct PropagateOptions {
    double trace_tol = 1e-9;
    double hermiticity_tol = 1e-9;
    double positivity_tol = 1e-8;
    /// Invariant violations beyond this multiple of the tolerance abort.
    double failure_factor = 10.0;
    bool check_positivity = true;
};

/// Fixed-step RK4 from t0 to t1. The step is dt shrunk so an integer number
/// of steps lands exactly on t1. A null hook means no field.
DensityMatrix propagate(const LindbladGenerator& gen, const DensityMatrix& rho0, const HamiltonianHook& hook,
                        double t0, double t1, double dt, const PropagateOptions& opts = {});

/// Raw RK4 on a Matrix, without invariant checks beyond trace/Hermiticity.
void rk4_advance(const LindbladGenerator& gen, Matrix& rho, const HamiltonianHook& hook, double t0, double t1,
                 double dt, const PropagateOptions& opts);

/// Sampled trajectory on a uniform grid.
struct Trajectory {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<Matrix> states;

    double time(std::size_t i) const { return t0 + dt * static_cast<double>(i); }
};

Trajectory propagate_trajectory(const LindbladGenerator& gen, const DensityMatrix& rho0, const HamiltonianHook& hook,
                                double t0, double t1, double dt, const PropagateOptions& opts = {});

// Liouville-space helpers (column-stacked vec).
SuperVector vectorize(const Matrix& m);
Matrix unvectorize(const SuperVector& v, int dim);
SuperMatrix expm(const SuperMatrix& a);

/// integral_0^t exp(A s) ds, via the block exponential of [[A, I], [0, 0]].
SuperMatrix integrated_exponential(const SuperMatrix& a, double t);

/// Exact field-free evolution exp(L dt) with a thread-safe cache per dt.
class FieldFreeEvolver {
public:
    explicit FieldFreeEvolver(const LindbladGenerator& gen);

    void advance(Matrix& rho, double dt) const;
    const SuperMatrix& propagator(double dt) const;
    const SuperMatrix& generator() const noexcept { return liouvillian_; }

private:
    int dim_;
    SuperMatrix liouvillian_;
    mutable std::mutex mutex_;
    mutable std::map<double, SuperMatrix> cache_;
};

}  // namespace twodes

#pragma once

#include <map>
#include <vector>

#include "twodes/hd_detection.hpp"
#include "twodes/units.hpp"

namespace twodes {

/// L x M x N lattice of relative phases (phi_21, phi_31, phi_41).
struct PhaseCycleScheme {
    int L = 3, M = 3, N = 3;
    double d21 = kTwoPi / 3.0, d31 = kTwoPi / 3.0, d41 = kTwoPi / 3.0;

    int size() const { return L * M * N; }
    int index(int l, int m, int n) const { return (l * M + m) * N + n; }
    void validate() const;
};

/// Phase-evolution signature (beta, gamma, delta) of pulses 2, 3, 4.
struct ComponentSignature {
    int beta = 0, gamma = 0, delta = 0;

    static constexpr ComponentSignature rephasing() { return {1, 1, -1}; }
    static constexpr ComponentSignature nonrephasing() { return {-1, 1, -1}; }
    static constexpr ComponentSignature dqc() { return {1, -1, -1}; }
    static ComponentSignature of(Component c);

    auto operator<=>(const ComponentSignature&) const = default;
};

/// Observable evaluated after the fourth pulse.
struct DetectionMode {
    enum class Kind { PopulationProxy, IntegratedFluorescence };
    Kind kind = Kind::PopulationProxy;
    /// Acquisition window (fs) for IntegratedFluorescence.
    double t_acq = 500000.0;
    /// Indices into jump_channels() counted as fluorescence; empty selects
    /// every channel that ends in the ground level.
    std::vector<int> monitored;

    static DetectionMode population() { return {}; }
    static DetectionMode fluorescence(double t_acq) { return {Kind::IntegratedFluorescence, t_acq, {}}; }
};

/// Linear functional rho_end -> detected value. PopulationProxy is
/// sum_i yield_i rho_ii; IntegratedFluorescence integrates
/// sum_c Gamma_c / hbar rho_{from_c}(s) over s in [0, t_acq] of field-free
/// evolution, computed exactly in Liouville space.
class Readout {
public:
    Readout(const LindbladGenerator& gen, const DetectionMode& mode);

    double operator()(const Matrix& rho) const;
    const DetectionMode& mode() const noexcept { return mode_; }
    /// Row functional on column-stacked vec(rho).
    const Eigen::RowVectorXcd& weights() const noexcept { return weights_; }

private:
    DetectionMode mode_;
    int dim_;
    Eigen::RowVectorXcd weights_;
};

/// Trapezoid integral of sum_c Gamma_c / hbar rho_{from_c}(t) over the first
/// t_acq fs of a sampled trajectory.
double fluorescence_yield(const QuantumSystem& system, const Trajectory& trajectory, double t_acq,
                          const std::vector<int>& monitored = {});

/// Detected value for each (l, m, n) with pulse phases
/// (0, l d21, m d31, n d41); collinear train, full propagation per entry.
std::vector<double> run_phase_cycle(const TrainPropagator& prop, const PulseTrain& base,
                                    const PhaseCycleScheme& scheme, const Readout& readout);

/// (1/LMN) sum p(l,m,n) exp(-i l beta d21) exp(-i m gamma d31) exp(-i n delta d41).
cplx extract_component(std::span<const double> values, const PhaseCycleScheme& scheme,
                       const ComponentSignature& signature);
cplx extract_component(std::span<const cplx> values, const PhaseCycleScheme& scheme,
                       const ComponentSignature& signature);

struct FdScanConfig {
    PulseShape pulse{10.0, 3.0, 1.505};
    PhaseCycleScheme scheme;
    int workers = 1;
};

/// Extracted p~(tau_i, t_k) for each signature; all signatures share one set
/// of phase-cycled propagations. Several readouts can be evaluated on the
/// same trajectories (results indexed [readout][signature]).
std::vector<std::map<ComponentSignature, Eigen::MatrixXcd>> fd_signal_scan_multi(
    const TrainPropagator& prop, const FdScanConfig& config, std::span<const ComponentSignature> signatures,
    std::span<const double> tau_grid, double waiting_time, std::span<const double> t_grid,
    std::span<const Readout* const> readouts);

std::map<ComponentSignature, Eigen::MatrixXcd> fd_signal_scan(const TrainPropagator& prop,
                                                              const FdScanConfig& config,
                                                              std::span<const ComponentSignature> signatures,
                                                              std::span<const double> tau_grid, double waiting_time,
                                                              std::span<const double> t_grid, const Readout& readout);

}  // namespace twodes

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "twodes/field.hpp"
#include "twodes/spectral.hpp"

namespace twodes {

/// Phase-matching direction: Rephasing -k1+k2+k3, Nonrephasing +k1-k2+k3,
/// DQC +k1+k2-k3.
using PhaseMatchChoice = Component;

/// Integer coefficients (c1, c2, c3) of k_signal = sum c_n k_n.
std::array<int, 3> direction_coefficients(PhaseMatchChoice choice);

struct EnsembleConfig {
    int n_absorbers = 500;
    /// Cube side in units of the carrier wavelength.
    double box_scale = 4.0;
    std::uint64_t rng_seed = 1;
    double carrier = 1.505;
    /// Wavevectors of pulses 1..3 (1/nm). Empty means the coordinate axes
    /// scaled to |k| = 2 pi / lambda.
    std::vector<Vec3> wavevectors;

    std::array<Vec3, 3> geometry() const;
    void validate() const;
};

/// Uniform positions (nm) in a cube of side box_scale * lambda; depends only
/// on the seed.
std::vector<Vec3> sample_positions(const EnsembleConfig& config);

/// Sum over coupled pairs a < b of mu_ab rho_ba (the emitting coherences).
cplx dipole_coherence(const QuantumSystem& system, const Matrix& rho);

/// Pulse parameters shared by all pulses in a scan.
struct PulseShape {
    double sigma = 10.0;
    double peak_interaction = 27.0;
    double carrier = 1.505;

    bool operator==(const PulseShape&) const = default;
};

/// Phase-matched polarization sum_j exp(i k_s.r_j) sum_{a<b} mu_ab rho_ba(t)
/// for every detection delay in `t_grid` after pulse 3. The train carries
/// the three wavevectors; each absorber is propagated independently from the
/// ground state through the full train.
std::vector<cplx> polarization(const TrainPropagator& prop, const PulseTrain& train, std::span<const Vec3> positions,
                               PhaseMatchChoice choice, std::span<const double> t_grid);

/// Real lab-frame polarization 2 Re[P exp(-i w t_lab)].
double lab_frame_polarization(cplx rotating_frame_value, double carrier, double lab_time);

struct HdScanConfig {
    PulseShape pulse;
    std::vector<Vec3> wavevectors;  // three; see EnsembleConfig::geometry
    int workers = 1;
};

/// Time-domain cubes S(tau_i, t_k) for each requested direction, computed
/// from one set of per-absorber trajectories.
std::map<PhaseMatchChoice, Eigen::MatrixXcd> hd_signal_scan(const TrainPropagator& prop, const HdScanConfig& config,
                                                            std::span<const Vec3> positions,
                                                            std::span<const PhaseMatchChoice> choices,
                                                            std::span<const double> tau_grid, double waiting_time,
                                                            std::span<const double> t_grid);

/// Readout with an arbitrary integer direction sum c_n k_n (used to probe
/// non-phase-matched residuals).
Eigen::MatrixXcd hd_signal_scan_direction(const TrainPropagator& prop, const HdScanConfig& config,
                                          std::span<const Vec3> positions, const std::array<int, 3>& coefficients,
                                          std::span<const double> tau_grid, double waiting_time,
                                          std::span<const double> t_grid);

}  // namespace twodes

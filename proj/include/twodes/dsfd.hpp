#pragma once

#include <string>
#include <vector>

#include "twodes/fd_detection.hpp"

namespace twodes {

enum class Side { Left, Right };
enum class Detection { HD, FD };

std::string to_string(Detection d);

/// One dipole interaction: the ket (Left) or bra (Right) moves from level
/// `from` to level `to`. phase is +1 when the interaction carries
/// exp(+i phi) of its pulse and -1 for exp(-i phi).
struct Interaction {
    Side side = Side::Left;
    int from = 0;
    int to = 0;
    int phase = 0;

    bool operator==(const Interaction&) const = default;
};

/// Ordered interaction string starting from |0><0|. HD pathways have three
/// interactions and end in an emitting coherence |b><a| (n_b = n_a + 1); FD
/// pathways have four and end in an excited-state population.
struct Pathway {
    std::vector<Interaction> steps;
    Detection detection = Detection::HD;
    /// Phase coefficients of pulses 2..4 for FD (beta, gamma, delta); for HD
    /// the direction coefficients of pulses 1..3.
    std::array<int, 3> signature{};
    std::string label;
    int final_ket = 0;
    int final_bra = 0;
    /// True when a population moves between levels during the waiting time.
    bool population_transfer = false;
};

/// Exhaustive generate-and-filter over side/transition sequences. For HD the
/// signature is compared with direction_coefficients(component); for FD with
/// ComponentSignature::of(component).
std::vector<Pathway> enumerate_pathways(const QuantumSystem& system, Detection detection, Component component);

/// [s i w/hbar + L]^{-1} (exp((s i w/hbar + L) tau_f) - 1) with s = +-1.
/// Throws NumericalSingularity when the condition number exceeds 1e12.
SuperMatrix liouville_ft(const SuperMatrix& liouvillian, double omega, double tau_f, int sign);

/// How the FD population is read after the fourth interaction: a Readout
/// functional applied `delay` fs after it. HD ignores this.
struct AcquisitionSpec {
    DetectionMode mode = DetectionMode::population();
    double delay = 0.0;
};

/// Impulsive contribution of one pathway to the spectrum, including the
/// transform prefactor c of the detection scheme (FourierOptions):
/// c O G+(w3) V3 G(T) V2 G-+(w1) V1 |0><0| for HD, with the FD form
/// appending V4 and the acquisition functional. The sign on w1 follows the
/// first interaction. omega values are absolute (eV); the generator's
/// carrier is subtracted. Transfer durations T and tau_f are in fs.
cplx evaluate_pathway(const LindbladGenerator& gen, const Pathway& p, double omega_1, double T, double omega_3,
                      double tau_f, const AcquisitionSpec& acquisition = {});

struct DsfdOptions {
    double tau_f = 50.0;
    AcquisitionSpec acquisition;
    int workers = 1;
};

/// Prefactor times the pathway sum on the given absolute axes. Total adds the
/// Rephasing and Nonrephasing spectra; DQC is not supported.
Spectrum2D dsfd_spectrum(const LindbladGenerator& gen, Detection detection, Component component, double T,
                         const std::vector<double>& omega_tau, const std::vector<double>& omega_t,
                         const DsfdOptions& opts = {});

}  // namespace twodes

#pragma once

#include <span>
#include <vector>

#include "twodes/lindblad.hpp"

namespace twodes {

using Vec3 = Eigen::Vector3d;

/// Gaussian pulse. peak_interaction is eE0*mu in meV and scales the relative
/// dipole matrix; carrier in eV; wavevector in 1/nm.
struct Pulse {
    double center = 0.0;
    double sigma = 10.0;
    double peak_interaction = 8.0;
    double carrier = 1.505;
    double phase = 0.0;
    Vec3 wavevector = Vec3::Zero();
};

/// exp(-(t - t_n)^2 / (2 sigma^2)).
double envelope(const Pulse& pulse, double t);

/// Delays between consecutive pulse centres.
struct Delays {
    double tau = 0.0;
    double T = 0.0;
    double t = 0.0;
};

/// Ordered pulses; the first centre sits at t = 0.
class PulseTrain {
public:
    explicit PulseTrain(std::vector<Pulse> pulses);

    /// Clone `base` n times with centres 0, tau, tau+T (, tau+T+t).
    static PulseTrain from_delays(const Pulse& base, int count, const Delays& delays);

    const std::vector<Pulse>& pulses() const noexcept { return pulses_; }
    std::vector<Pulse>& pulses() noexcept { return pulses_; }
    std::size_t size() const noexcept { return pulses_.size(); }
    const Pulse& operator[](std::size_t i) const { return pulses_[i]; }
    double carrier() const;

private:
    std::vector<Pulse> pulses_;
};

/// Rotating frame and axis-reconstruction bookkeeping.
struct FramePolicy {
    double carrier = 1.505;
    int folding_factor = 0;
};

/// energies[m] - excitation_number[m] * carrier.
std::vector<double> rotating_frame_energies(const QuantumSystem& system, const FramePolicy& policy);

/// RWA interaction Hamiltonian in the frame rotating at the train carrier, at
/// time t for an absorber at `position` (nm). Element (a, b) with
/// n_a = n_b + 1 is -1/2 mu_ab sum_n A_n E_n(t) exp(-i k_n.r + i phi_n).
Matrix interaction_hamiltonian(const QuantumSystem& system, const PulseTrain& train, double t,
                               const Vec3& position = Vec3::Zero());

/// A pulse reduced to what the propagator needs: centre, width and the
/// complex coupling -1/2 A exp(-i k.r + i phi) in eV.
struct ActivePulse {
    double center = 0.0;
    double sigma = 1.0;
    cplx coupling{0.0, 0.0};
};

ActivePulse activate(const Pulse& pulse, const Vec3& position = Vec3::Zero());

/// Dipole raising operator restricted to RWA-allowed pairs; H_int(t) is
/// s(t) * raising + h.c. with s(t) = sum_n coupling_n * envelope_n(t).
class RaisingOperator {
public:
    explicit RaisingOperator(const QuantumSystem& system);

    void hamiltonian(std::span<const ActivePulse> pulses, double t, Matrix& h) const;
    const Matrix& matrix() const noexcept { return raising_; }

private:
    int dim_;
    Matrix raising_;
};

struct TrainPropagatorOptions {
    double dt = 0.25;
    /// Pulses are treated as zero beyond this many sigma from their centre.
    double window_sigmas = 6.0;
    PropagateOptions checks{};
};

/// Propagates through sets of pulses, using RK4 inside pulse windows and the
/// exact field-free propagator in between. Reentrant.
class TrainPropagator {
public:
    TrainPropagator(const LindbladGenerator& gen, const TrainPropagatorOptions& opts = {});

    const LindbladGenerator& generator() const noexcept { return gen_; }
    const FieldFreeEvolver& field_free() const noexcept { return evolver_; }
    const TrainPropagatorOptions& options() const noexcept { return opts_; }
    double window(const ActivePulse& p) const noexcept { return opts_.window_sigmas * p.sigma; }

    /// Advance rho from `start` through ascending `checkpoints`, calling
    /// sink(i, rho) at each. Checkpoints before `start` are reported at start.
    template <typename Sink>
    void advance(Matrix& rho, double start, std::span<const double> checkpoints, std::span<const ActivePulse> pulses,
                 Sink&& sink) const {
        double now = start;
        for (std::size_t i = 0; i < checkpoints.size(); ++i) {
            const double target = checkpoints[i];
            if (target > now) {
                advance_to(rho, now, target, pulses);
                now = target;
            }
            if (opts_.checks.check_positivity) check_positivity(rho, now);
            sink(i, static_cast<const Matrix&>(rho));
        }
    }

    void advance_to(Matrix& rho, double from, double to, std::span<const ActivePulse> pulses) const;

private:
    void check_positivity(const Matrix& rho, double t) const;

    const LindbladGenerator& gen_;
    FieldFreeEvolver evolver_;
    RaisingOperator raising_;
    TrainPropagatorOptions opts_;
};

}  // namespace twodes

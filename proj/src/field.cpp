#include "twodes/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "twodes/errors.hpp"
#include "twodes/units.hpp"

namespace twodes {

double envelope(const Pulse& pulse, double t) {
    const double x = (t - pulse.center) / pulse.sigma;
    return std::exp(-0.5 * x * x);
}

PulseTrain::PulseTrain(std::vector<Pulse> pulses) : pulses_(std::move(pulses)) {
    for (const auto& p : pulses_) {
        if (!(p.sigma > 0.0)) throw ValidationError("pulse width must be positive");
        if (!(p.peak_interaction >= 0.0)) throw ValidationError("peak interaction must be non-negative");
    }
    for (std::size_t i = 1; i < pulses_.size(); ++i)
        if (pulses_[i].center < pulses_[i - 1].center) throw ValidationError("pulse centres must be ordered");
}

PulseTrain PulseTrain::from_delays(const Pulse& base, int count, const Delays& d) {
    if (d.tau < 0.0 || d.T < 0.0 || d.t < 0.0) throw ValidationError("delays must be non-negative");
    const double centres[4] = {0.0, d.tau, d.tau + d.T, d.tau + d.T + d.t};
    if (count < 1 || count > 4) throw StructuralError("pulse count must be 1..4");
    std::vector<Pulse> ps;
    for (int i = 0; i < count; ++i) {
        Pulse p = base;
        p.center = centres[i];
        ps.push_back(p);
    }
    return PulseTrain(std::move(ps));
}

double PulseTrain::carrier() const {
    if (pulses_.empty()) return 0.0;
    const double c = pulses_.front().carrier;
    for (const auto& p : pulses_)
        if (p.carrier != c) throw UnsupportedConfiguration("pulses with different carriers");
    return c;
}

std::vector<double> rotating_frame_energies(const QuantumSystem& system, const FramePolicy& policy) {
    std::vector<double> out;
    for (int m = 0; m < system.dim(); ++m)
        out.push_back(system.energies()[m] - system.excitation_number()[m] * policy.carrier);
    return out;
}

ActivePulse activate(const Pulse& pulse, const Vec3& position) {
    // Reduce the phase, then snap to a 2^-32 rad grid: phi + 2 pi is itself
    // rounded, and the snap absorbs that ulp so both give identical couplings.
    constexpr double kGrid = 4294967296.0;
    const double reduced = std::remainder(pulse.phase - pulse.wavevector.dot(position), kTwoPi);
    const double angle = std::nearbyint(reduced * kGrid) / kGrid;
    return {pulse.center, pulse.sigma, -0.5 * pulse.peak_interaction * kMeV * std::polar(1.0, angle)};
}

Matrix interaction_hamiltonian(const QuantumSystem& system, const PulseTrain& train, double t, const Vec3& position) {
    train.carrier();
    std::vector<ActivePulse> act;
    for (const auto& p : train.pulses()) act.push_back(activate(p, position));
    Matrix h;
    RaisingOperator(system).hamiltonian(act, t, h);
    return h;
}

RaisingOperator::RaisingOperator(const QuantumSystem& system) : dim_(system.dim()) {
    raising_ = Matrix::Zero(dim_, dim_);
    const auto& n = system.excitation_number();
    for (int a = 0; a < dim_; ++a)
        for (int b = 0; b < dim_; ++b)
            if (n[a] == n[b] + 1) raising_(a, b) = system.dipoles()(a, b);
}

void RaisingOperator::hamiltonian(std::span<const ActivePulse> pulses, double t, Matrix& h) const {
    cplx s{0.0, 0.0};
    for (const auto& p : pulses) {
        const double x = (t - p.center) / p.sigma;
        s += p.coupling * std::exp(-0.5 * x * x);
    }
    h.resize(dim_, dim_);
    for (int b = 0; b < dim_; ++b)
        for (int a = 0; a < dim_; ++a) h(a, b) = cplx(0.0, 0.0);
    for (int b = 0; b < dim_; ++b)
        for (int a = 0; a < dim_; ++a) {
            const double mu = raising_(a, b).real();
            if (mu != 0.0) {
                h(a, b) = mu * s;
                h(b, a) = std::conj(h(a, b));
            }
        }
}

TrainPropagator::TrainPropagator(const LindbladGenerator& gen, const TrainPropagatorOptions& opts)
    : gen_(gen), evolver_(gen), raising_(gen.system()), opts_(opts) {
    if (!(opts_.dt > 0.0)) throw ValidationError("dt must be positive");
}

void TrainPropagator::check_positivity(const Matrix& rho, double t) const {
    const DensityMatrix d(rho);
    const double lam = d.min_eigenvalue();
    if (lam < -opts_.checks.failure_factor * opts_.checks.positivity_tol)
        throw IntegrationFailure("negative eigenvalue " + std::to_string(lam), t);
}

void TrainPropagator::advance_to(Matrix& rho, double from, double to, std::span<const ActivePulse> pulses) const {
    HamiltonianHook hook = [&](double t, Matrix& h) { raising_.hamiltonian(pulses, t, h); };
    double now = from;
    while (now < to) {
        // Find the merged pulse window containing `now`, or the next one.
        double win_lo = std::numeric_limits<double>::infinity();
        double win_hi = -std::numeric_limits<double>::infinity();
        bool inside = false;
        for (const auto& p : pulses) {
            const double lo = p.center - window(p), hi = p.center + window(p);
            if (lo <= now && now < hi) {
                inside = true;
                win_hi = std::max(win_hi, hi);
            }
        }
        if (inside) {
            // Extend across overlapping windows.
            bool grew = true;
            while (grew) {
                grew = false;
                for (const auto& p : pulses) {
                    const double lo = p.center - window(p), hi = p.center + window(p);
                    if (lo < win_hi && hi > win_hi) {
                        win_hi = hi;
                        grew = true;
                    }
                }
            }
            const double end = std::min(win_hi, to);
            rk4_advance(gen_, rho, hook, now, end, opts_.dt, opts_.checks);
            now = end;
        } else {
            for (const auto& p : pulses) {
                const double lo = p.center - window(p);
                if (lo > now) win_lo = std::min(win_lo, lo);
            }
            const double end = std::min(win_lo, to);
            evolver_.advance(rho, end - now);
            now = end;
        }
    }
}

}  // namespace twodes

#include "twodes/fd_detection.hpp"

#include <algorithm>
#include <cmath>

#include "twodes/errors.hpp"
#include "twodes/parallel.hpp"
#include "twodes/units.hpp"

namespace twodes {

void PhaseCycleScheme::validate() const {
    if (L < 1 || M < 1 || N < 1) throw ValidationError("phase-cycle dimensions must be positive");
}

ComponentSignature ComponentSignature::of(Component c) {
    switch (c) {
        case Component::Rephasing: return rephasing();
        case Component::Nonrephasing: return nonrephasing();
        case Component::DQC: return dqc();
        case Component::Total: break;
    }
    throw UnsupportedConfiguration("Total has no phase signature");
}

namespace {

std::vector<int> monitored_channels(const QuantumSystem& sys, const std::vector<int>& requested) {
    if (!requested.empty()) {
        for (int c : requested)
            if (c < 0 || c >= static_cast<int>(sys.jump_channels().size()))
                throw StructuralError("monitored channel index out of range");
        return requested;
    }
    std::vector<int> out;
    for (int c = 0; c < static_cast<int>(sys.jump_channels().size()); ++c)
        if (sys.jump_channels()[c].to == 0) out.push_back(c);
    return out;
}

}  // namespace

Readout::Readout(const LindbladGenerator& gen, const DetectionMode& mode) : mode_(mode), dim_(gen.dim()) {
    const QuantumSystem& sys = gen.system();
    const int n2 = dim_ * dim_;
    Eigen::RowVectorXcd pick = Eigen::RowVectorXcd::Zero(n2);
    if (mode.kind == DetectionMode::Kind::PopulationProxy) {
        for (int i = 0; i < dim_; ++i) pick(i * dim_ + i) = sys.yields()[i];
        weights_ = pick;
        return;
    }
    if (!(mode.t_acq >= 0.0)) throw ValidationError("acquisition time must be non-negative");
    for (int c : monitored_channels(sys, mode.monitored)) {
        const auto& ch = sys.jump_channels()[c];
        pick(ch.from * dim_ + ch.from) += ch.rate / kHbar;
    }
    weights_ = pick * integrated_exponential(gen.liouvillian(), mode.t_acq);
}

double Readout::operator()(const Matrix& rho) const {
    cplx acc{0.0, 0.0};
    for (int j = 0; j < dim_; ++j)
        for (int i = 0; i < dim_; ++i) acc += weights_(j * dim_ + i) * rho(i, j);
    return acc.real();
}

double fluorescence_yield(const QuantumSystem& system, const Trajectory& traj, double t_acq,
                          const std::vector<int>& monitored) {
    if (!(t_acq >= 0.0)) throw ValidationError("acquisition time must be non-negative");
    if (t_acq == 0.0 || traj.states.empty()) return 0.0;
    const double span = traj.dt * static_cast<double>(traj.states.size() - 1);
    if (t_acq > span * (1.0 + 1e-12)) throw ValidationError("trajectory shorter than the acquisition window");
    const auto channels = monitored_channels(system, monitored);
    auto flux = [&](const Matrix& rho) {
        double f = 0.0;
        for (int c : channels) {
            const auto& ch = system.jump_channels()[c];
            f += ch.rate / kHbar * rho(ch.from, ch.from).real();
        }
        return f;
    };
    const double last = t_acq / traj.dt;
    const auto full = static_cast<std::size_t>(std::floor(last + 1e-9));
    double sum = 0.0;
    for (std::size_t i = 0; i < full && i + 1 < traj.states.size(); ++i)
        sum += 0.5 * traj.dt * (flux(traj.states[i]) + flux(traj.states[i + 1]));
    const double frac = last - static_cast<double>(full);
    if (frac > 1e-9 && full + 1 < traj.states.size()) {
        const double f0 = flux(traj.states[full]), f1 = flux(traj.states[full + 1]);
        const double fend = f0 + frac * (f1 - f0);
        sum += 0.5 * frac * traj.dt * (f0 + fend);
    }
    return sum;
}

namespace {

void require_collinear(const PulseTrain& train) {
    for (const auto& p : train.pulses())
        if (p.wavevector.squaredNorm() != 0.0)
            throw ValidationError("fluorescence detection assumes a collinear train (all k = 0)");
}

}  // namespace

std::vector<double> run_phase_cycle(const TrainPropagator& prop, const PulseTrain& base,
                                    const PhaseCycleScheme& scheme, const Readout& readout) {
    scheme.validate();
    if (base.size() != 4) throw StructuralError("fluorescence detection uses four pulses");
    require_collinear(base);
    base.carrier();
    const QuantumSystem& sys = prop.generator().system();
    std::vector<double> out(static_cast<std::size_t>(scheme.size()));
    for (int l = 0; l < scheme.L; ++l)
        for (int m = 0; m < scheme.M; ++m)
            for (int n = 0; n < scheme.N; ++n) {
                PulseTrain train = base;
                train.pulses()[1].phase += l * scheme.d21;
                train.pulses()[2].phase += m * scheme.d31;
                train.pulses()[3].phase += n * scheme.d41;
                std::vector<ActivePulse> ps;
                double start = std::numeric_limits<double>::infinity(), end = -start;
                for (const auto& p : train.pulses()) {
                    ps.push_back(activate(p));
                    start = std::min(start, p.center - prop.window(ps.back()));
                    end = std::max(end, p.center + prop.window(ps.back()));
                }
                Matrix rho = ground_state(sys).matrix();
                try {
                    prop.advance_to(rho, start, end, ps);
                } catch (const IntegrationFailure& e) {
                    throw IntegrationFailure(std::string(e.what()) + " [l,m,n=" + std::to_string(l) + "," +
                                                 std::to_string(m) + "," + std::to_string(n) + "; tau=" +
                                                 std::to_string(train[1].center - train[0].center) + "]",
                                             e.time_fs());
                }
                out[scheme.index(l, m, n)] = readout(rho);
            }
    return out;
}

namespace {

template <typename T>
cplx phase_filter(std::span<const T> values, const PhaseCycleScheme& s, const ComponentSignature& sig) {
    if (static_cast<int>(values.size()) != s.size()) throw StructuralError("phase-cycle value count mismatch");
    cplx acc{0.0, 0.0};
    for (int l = 0; l < s.L; ++l)
        for (int m = 0; m < s.M; ++m)
            for (int n = 0; n < s.N; ++n) {
                const double angle = -(l * sig.beta * s.d21 + m * sig.gamma * s.d31 + n * sig.delta * s.d41);
                acc += values[s.index(l, m, n)] * std::polar(1.0, angle);
            }
    return acc / static_cast<double>(s.size());
}

}  // namespace

cplx extract_component(std::span<const double> values, const PhaseCycleScheme& s, const ComponentSignature& sig) {
    return phase_filter(values, s, sig);
}

cplx extract_component(std::span<const cplx> values, const PhaseCycleScheme& s, const ComponentSignature& sig) {
    return phase_filter(values, s, sig);
}

std::vector<std::map<ComponentSignature, Eigen::MatrixXcd>> fd_signal_scan_multi(
    const TrainPropagator& prop, const FdScanConfig& config, std::span<const ComponentSignature> signatures,
    std::span<const double> taus, double T, std::span<const double> ts, std::span<const Readout* const> readouts) {
    const auto& sch = config.scheme;
    sch.validate();
    if (T < 0.0) throw ValidationError("waiting time must be non-negative");
    for (std::size_t i = 0; i < taus.size(); ++i)
        if (taus[i] < 0.0 || (i && !(taus[i] > taus[i - 1]))) throw ValidationError("tau grid must be increasing");
    for (std::size_t i = 0; i < ts.size(); ++i)
        if (ts[i] < 0.0 || (i && !(ts[i] > ts[i - 1]))) throw ValidationError("t grid must be increasing");

    const QuantumSystem& sys = prop.generator().system();
    auto make = [&](double centre, double phase) {
        Pulse p;
        p.center = centre;
        p.sigma = config.pulse.sigma;
        p.peak_interaction = config.pulse.peak_interaction;
        p.carrier = config.pulse.carrier;
        p.phase = phase;
        return activate(p);
    };
    const ActivePulse p1 = make(0.0, 0.0);
    const double w = prop.window(p1);
    const double start = -w;
    const std::size_t nt = taus.size(), nd = ts.size(), nr = readouts.size();
    const auto ncyc = static_cast<std::size_t>(sch.size());

    std::vector<double> c2(nt);
    for (std::size_t i = 0; i < nt; ++i) c2[i] = std::max(taus[i] - w, start);
    std::vector<Matrix> after1(nt);
    {
        Matrix rho = ground_state(sys).matrix();
        const ActivePulse ps[1] = {p1};
        prop.advance(rho, start, c2, ps, [&](std::size_t i, const Matrix& m) { after1[i] = m; });
    }

    // values[((r * nt + i) * nd + k) * ncyc + cycle]
    std::vector<double> values(nr * nt * nd * ncyc, 0.0);
    parallel_for(nt * static_cast<std::size_t>(sch.L), config.workers, [&](std::size_t task) {
        const std::size_t i = task / sch.L;
        const int l = static_cast<int>(task % sch.L);
        const double tau = taus[i];
        const ActivePulse p2 = make(tau, l * sch.d21);
        Matrix state2 = after1[i];
        const double c3 = std::max(tau + T - w, c2[i]);
        {
            const ActivePulse ps[2] = {p1, p2};
            prop.advance_to(state2, c2[i], c3, ps);
        }
        std::vector<double> c4(nd);
        for (std::size_t k = 0; k < nd; ++k) c4[k] = std::max(tau + T + ts[k] - w, c3);
        for (int m = 0; m < sch.M; ++m) {
            const ActivePulse p3 = make(tau + T, m * sch.d31);
            const ActivePulse ps3[3] = {p1, p2, p3};
            Matrix state3 = state2;
            prop.advance(state3, c3, c4, ps3, [&](std::size_t k, const Matrix& at4) {
                const double t4 = tau + T + ts[k];
                for (int n = 0; n < sch.N; ++n) {
                    const ActivePulse ps4[4] = {p1, p2, p3, make(t4, n * sch.d41)};
                    Matrix rho = at4;
                    try {
                        prop.advance_to(rho, c4[k], t4 + w, ps4);
                    } catch (const IntegrationFailure& e) {
                        throw IntegrationFailure(std::string(e.what()) + " [tau=" + std::to_string(tau) +
                                                     ", t=" + std::to_string(ts[k]) + ", l,m,n=" + std::to_string(l) +
                                                     "," + std::to_string(m) + "," + std::to_string(n) + "]",
                                                 e.time_fs());
                    }
                    for (std::size_t r = 0; r < nr; ++r)
                        values[((r * nt + i) * nd + k) * ncyc + sch.index(l, m, n)] = (*readouts[r])(rho);
                }
            });
        }
    });

    std::vector<std::map<ComponentSignature, Eigen::MatrixXcd>> out(nr);
    for (std::size_t r = 0; r < nr; ++r)
        for (const auto& sig : signatures) {
            Eigen::MatrixXcd cube(static_cast<Eigen::Index>(nt), static_cast<Eigen::Index>(nd));
            for (std::size_t i = 0; i < nt; ++i)
                for (std::size_t k = 0; k < nd; ++k)
                    cube(i, k) = extract_component(
                        std::span<const double>(&values[((r * nt + i) * nd + k) * ncyc], ncyc), sch, sig);
            out[r][sig] = cube;
        }
    return out;
}

std::map<ComponentSignature, Eigen::MatrixXcd> fd_signal_scan(const TrainPropagator& prop,
                                                              const FdScanConfig& config,
                                                              std::span<const ComponentSignature> signatures,
                                                              std::span<const double> tau_grid, double waiting_time,
                                                              std::span<const double> t_grid, const Readout& readout) {
    const Readout* rs[1] = {&readout};
    return fd_signal_scan_multi(prop, config, signatures, tau_grid, waiting_time, t_grid, rs).front();
}

}  // namespace twodes

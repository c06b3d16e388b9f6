#include "twodes/hd_detection.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "twodes/errors.hpp"
#include "twodes/parallel.hpp"
#include "twodes/units.hpp"

namespace twodes {

std::array<int, 3> direction_coefficients(PhaseMatchChoice choice) {
    switch (choice) {
        case Component::Rephasing: return {-1, 1, 1};
        case Component::Nonrephasing: return {1, -1, 1};
        case Component::DQC: return {1, 1, -1};
        case Component::Total: break;
    }
    throw UnsupportedConfiguration("Total is not a phase-matching direction");
}

std::array<Vec3, 3> EnsembleConfig::geometry() const {
    if (!wavevectors.empty()) {
        if (wavevectors.size() != 3) throw StructuralError("exactly three wavevectors are required");
        return {wavevectors[0], wavevectors[1], wavevectors[2]};
    }
    const double k = kTwoPi / wavelength_nm(carrier);
    return {Vec3(k, 0, 0), Vec3(0, k, 0), Vec3(0, 0, k)};
}

void EnsembleConfig::validate() const {
    if (n_absorbers < 1) throw StructuralError("at least one absorber is required");
    if (!(box_scale >= 1.0)) throw ValidationError("box_scale must be >= 1");
    if (!(carrier > 0.0)) throw ValidationError("carrier must be positive");
    const auto g = geometry();
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i) m.col(i) = g[i];
    if (std::abs(m.determinant()) < 1e-12 * std::pow(m.norm(), 3))
        throw ValidationError("wavevectors must be linearly independent");
}

std::vector<Vec3> sample_positions(const EnsembleConfig& config) {
    config.validate();
    const double side = config.box_scale * wavelength_nm(config.carrier);
    std::mt19937_64 rng(config.rng_seed);
    // Scale 53 random bits by hand; std::uniform_real_distribution is not
    // specified bit-exactly across standard libraries.
    auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    std::vector<Vec3> out;
    out.reserve(config.n_absorbers);
    for (int j = 0; j < config.n_absorbers; ++j) {
        const double x = unit(), y = unit(), z = unit();
        out.emplace_back(side * x, side * y, side * z);
    }
    return out;
}

cplx dipole_coherence(const QuantumSystem& system, const Matrix& rho) {
    cplx acc{0.0, 0.0};
    for (int a = 0; a < system.dim(); ++a)
        for (int b = a + 1; b < system.dim(); ++b) {
            const double mu = system.dipoles()(a, b);
            if (mu != 0.0) acc += mu * rho(b, a);
        }
    return acc;
}

double lab_frame_polarization(cplx value, double carrier, double lab_time) {
    return 2.0 * (value * std::polar(1.0, -carrier * lab_time / kHbar)).real();
}

namespace {

cplx readout_phase(const std::array<Vec3, 3>& k, const std::array<int, 3>& c, const Vec3& r) {
    const Vec3 ks = c[0] * k[0] + c[1] * k[1] + c[2] * k[2];
    return std::polar(1.0, std::remainder(ks.dot(r), kTwoPi));
}

std::array<Vec3, 3> scan_geometry(const HdScanConfig& config) {
    EnsembleConfig e;
    e.carrier = config.pulse.carrier;
    e.wavevectors = config.wavevectors;
    return e.geometry();
}

/// Emitting-coherence cube of one absorber; trajectories through pulse 3
/// are shared by all detection delays.
Eigen::MatrixXcd absorber_cube(const TrainPropagator& prop, const PulseShape& shape, const std::array<Vec3, 3>& k,
                               const Vec3& r, std::span<const double> taus, double T, std::span<const double> ts) {
    const QuantumSystem& sys = prop.generator().system();
    auto make = [&](int n, double centre) {
        Pulse p;
        p.center = centre;
        p.sigma = shape.sigma;
        p.peak_interaction = shape.peak_interaction;
        p.carrier = shape.carrier;
        p.wavevector = k[n];
        return activate(p, r);
    };
    const ActivePulse p1 = make(0, 0.0);
    const double w = prop.window(p1);
    const double start = -w;

    std::vector<double> c2(taus.size());
    for (std::size_t i = 0; i < taus.size(); ++i) c2[i] = std::max(taus[i] - w, start);
    std::vector<Matrix> after1(taus.size());
    Matrix rho = ground_state(sys).matrix();
    {
        const ActivePulse ps[1] = {p1};
        prop.advance(rho, start, c2, ps, [&](std::size_t i, const Matrix& m) { after1[i] = m; });
    }

    Eigen::MatrixXcd cube(static_cast<Eigen::Index>(taus.size()), static_cast<Eigen::Index>(ts.size()));
    std::vector<double> detect(ts.size());
    for (std::size_t i = 0; i < taus.size(); ++i) {
        const double tau = taus[i];
        const ActivePulse ps[3] = {p1, make(1, tau), make(2, tau + T)};
        Matrix state = after1[i];
        const double c3 = std::max(tau + T - w, c2[i]);
        prop.advance_to(state, c2[i], c3, std::span<const ActivePulse>(ps, 2));
        for (std::size_t k2 = 0; k2 < ts.size(); ++k2) detect[k2] = tau + T + ts[k2];
        try {
            prop.advance(state, c3, detect, ps,
                         [&](std::size_t kk, const Matrix& m) { cube(i, kk) = dipole_coherence(sys, m); });
        } catch (const IntegrationFailure& e) {
            throw IntegrationFailure(std::string(e.what()) + " [tau=" + std::to_string(tau) + " fs]", e.time_fs());
        }
    }
    return cube;
}

void check_grid(std::span<const double> g, const char* name) {
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g[i] < 0.0) throw ValidationError(std::string(name) + " grid must be non-negative");
        if (i && !(g[i] > g[i - 1])) throw ValidationError(std::string(name) + " grid must be increasing");
    }
}

std::vector<Eigen::MatrixXcd> all_cubes(const TrainPropagator& prop, const HdScanConfig& config,
                                        std::span<const Vec3> positions, std::span<const double> taus, double T,
                                        std::span<const double> ts) {
    if (positions.empty()) throw StructuralError("at least one absorber is required");
    if (T < 0.0) throw ValidationError("waiting time must be non-negative");
    check_grid(taus, "tau");
    check_grid(ts, "t");
    const auto k = scan_geometry(config);
    std::vector<Eigen::MatrixXcd> cubes(positions.size());
    parallel_for(positions.size(), config.workers, [&](std::size_t j) {
        cubes[j] = absorber_cube(prop, config.pulse, k, positions[j], taus, T, ts);
    });
    return cubes;
}

Eigen::MatrixXcd reduce(const std::vector<Eigen::MatrixXcd>& cubes, std::span<const Vec3> positions,
                        const std::array<Vec3, 3>& k, const std::array<int, 3>& c) {
    const Eigen::Index rows = cubes.front().rows(), cols = cubes.front().cols();
    std::vector<CompensatedSum<cplx>> acc(static_cast<std::size_t>(rows * cols));
    for (std::size_t j = 0; j < cubes.size(); ++j) {
        const cplx phase = readout_phase(k, c, positions[j]);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index q = 0; q < cols; ++q) acc[i * cols + q].add(phase * cubes[j](i, q));
    }
    Eigen::MatrixXcd out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index q = 0; q < cols; ++q) out(i, q) = acc[i * cols + q].value();
    return out;
}

}  // namespace

std::vector<cplx> polarization(const TrainPropagator& prop, const PulseTrain& train, std::span<const Vec3> positions,
                               PhaseMatchChoice choice, std::span<const double> t_grid) {
    if (positions.empty()) throw StructuralError("at least one absorber is required");
    if (train.size() != 3) throw StructuralError("heterodyne detection uses three pulses");
    train.carrier();
    check_grid(t_grid, "t");
    const std::array<Vec3, 3> k{train[0].wavevector, train[1].wavevector, train[2].wavevector};
    const auto coeff = direction_coefficients(choice);
    const QuantumSystem& sys = prop.generator().system();
    std::vector<CompensatedSum<cplx>> acc(t_grid.size());
    std::vector<double> detect(t_grid.size());
    for (std::size_t q = 0; q < t_grid.size(); ++q) detect[q] = train[2].center + t_grid[q];
    for (const Vec3& r : positions) {
        std::vector<ActivePulse> ps;
        for (const auto& p : train.pulses()) ps.push_back(activate(p, r));
        const double start = train[0].center - prop.window(ps[0]);
        Matrix rho = ground_state(sys).matrix();
        const cplx phase = readout_phase(k, coeff, r);
        prop.advance(rho, start, detect, ps,
                     [&](std::size_t q, const Matrix& m) { acc[q].add(phase * dipole_coherence(sys, m)); });
    }
    std::vector<cplx> out;
    for (const auto& a : acc) out.push_back(a.value());
    return out;
}

std::map<PhaseMatchChoice, Eigen::MatrixXcd> hd_signal_scan(const TrainPropagator& prop, const HdScanConfig& config,
                                                            std::span<const Vec3> positions,
                                                            std::span<const PhaseMatchChoice> choices,
                                                            std::span<const double> tau_grid, double waiting_time,
                                                            std::span<const double> t_grid) {
    const auto cubes = all_cubes(prop, config, positions, tau_grid, waiting_time, t_grid);
    const auto k = scan_geometry(config);
    std::map<PhaseMatchChoice, Eigen::MatrixXcd> out;
    for (auto c : choices) out[c] = reduce(cubes, positions, k, direction_coefficients(c));
    return out;
}

Eigen::MatrixXcd hd_signal_scan_direction(const TrainPropagator& prop, const HdScanConfig& config,
                                          std::span<const Vec3> positions, const std::array<int, 3>& coefficients,
                                          std::span<const double> tau_grid, double waiting_time,
                                          std::span<const double> t_grid) {
    const auto cubes = all_cubes(prop, config, positions, tau_grid, waiting_time, t_grid);
    return reduce(cubes, positions, scan_geometry(config), coefficients);
}

}  // namespace twodes

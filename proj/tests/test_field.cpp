#include "doctest.h"
#include "oracles.hpp"

#include <twodes/errors.hpp>
#include <twodes/field.hpp>
#include <twodes/units.hpp>

using namespace twodes;

namespace {

Pulse make_pulse(double center, double amp_mev, double phase = 0.0, Vec3 k = Vec3::Zero()) {
    Pulse p;
    p.center = center;
    p.sigma = 10.0;
    p.peak_interaction = amp_mev;
    p.carrier = 1.505;
    p.phase = phase;
    p.wavevector = k;
    return p;
}

QuantumSystem two_level() {
    RealMatrix mu = RealMatrix::Zero(2, 2);
    mu(0, 1) = mu(1, 0) = 1.0;
    return QuantumSystem({0.0, 1.505}, mu, {}, {}, {0.0, 1.0}, {0, 1});
}

}  // namespace

TEST_SUITE("field") {

TEST_CASE("gaussian envelope") {
    const Pulse p = make_pulse(20.0, 8.0);
    CHECK(envelope(p, 20.0) == 1.0);
    CHECK(envelope(p, 30.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
    CHECK(envelope(p, 10.0) == envelope(p, 30.0));
    // Integral of envelope^2 is sigma sqrt(pi).
    double s = 0.0;
    const double h = 0.01;
    for (double t = -100.0; t <= 140.0; t += h) s += envelope(p, t) * envelope(p, t) * h;
    CHECK(s == doctest::Approx(10.0 * std::sqrt(kPi)).epsilon(1e-9));
}

TEST_CASE("on-peak coupling is minus half the peak interaction") {
    const PulseTrain train({make_pulse(0.0, 8.0)});
    const Matrix h = interaction_hamiltonian(two_level(), train, 0.0);
    CHECK(h(1, 0).real() == doctest::Approx(-4e-3).epsilon(1e-15));
    CHECK(h(1, 0).imag() == 0.0);
    CHECK(h(0, 1) == std::conj(h(1, 0)));
    CHECK(h(0, 0) == cplx(0.0));
}

TEST_CASE("raising element carries +phi") {
    const PulseTrain train({make_pulse(0.0, 8.0, 0.7)});
    const Matrix h = interaction_hamiltonian(two_level(), train, 0.0);
    // Phases are stored on a 2^-32 rad grid.
    CHECK(std::abs(h(1, 0) - cplx(-4e-3) * std::polar(1.0, 0.7)) < 4e-3 * 1e-9);
}

TEST_CASE("hamiltonian is hermitian and respects forbidden transitions") {
    const auto sys = dimer_model();
    std::vector<Pulse> ps;
    for (int i = 0; i < 4; ++i)
        ps.push_back(make_pulse(7.0 * i, 10.0 + 13.0 * i, 0.3 * i, Vec3(0.001 * i, -0.002, 0.003)));
    const PulseTrain train(ps);
    for (double t : {-5.0, 0.0, 3.3, 12.0, 20.0}) {
        const Matrix h = interaction_hamiltonian(sys, train, t, Vec3(17.0, -4.0, 250.0));
        CHECK(oracle::max_abs(h - h.adjoint()) <= 1e-15);
        CHECK(h(0, 3) == cplx(0.0));
        CHECK(h(1, 2) == cplx(0.0));
    }
}

TEST_CASE("phase shift by two pi is bit-identical") {
    const auto sys = dimer_model();
    for (double phi : {0.0, 0.4, -2.9, 5.1}) {
        const PulseTrain a({make_pulse(0.0, 27.0, phi)});
        const PulseTrain b({make_pulse(0.0, 27.0, phi + kTwoPi)});
        const Matrix ha = interaction_hamiltonian(sys, a, 3.0);
        const Matrix hb = interaction_hamiltonian(sys, b, 3.0);
        CHECK(ha == hb);
    }
}

TEST_CASE("translating the absorber multiplies by exp(-i k.dr)") {
    const Vec3 k(0.004, -0.003, 0.0061);
    const Pulse p = make_pulse(0.0, 27.0, 0.2, k);
    const Vec3 r(12.0, 50.0, -3.0), dr(100.0, -7.0, 33.0);
    const cplx a = activate(p, r).coupling;
    const cplx b = activate(p, r + dr).coupling;
    const cplx want = a * std::exp(cplx(0.0, -k.dot(dr)));
    CHECK(std::abs(b - want) <= 1e-9 * std::abs(a));
}

TEST_CASE("common phase offset leaves populations unchanged") {
    const LindbladGenerator gen(dimer_model(), 1.505);
    const TrainPropagator prop(gen);
    auto run = [&](double offset) {
        std::vector<ActivePulse> act;
        for (int i = 0; i < 4; ++i) act.push_back(activate(make_pulse(25.0 * i, 56.0, 0.5 * i + offset)));
        Matrix rho = ground_state(gen.system()).matrix();
        prop.advance_to(rho, -60.0, 140.0, act);
        return rho;
    };
    const Matrix a = run(0.0), b = run(1.3);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(a(i, i).real() - b(i, i).real()) <= 1e-10);
}

TEST_CASE("rotating frame energies") {
    const auto sys = dimer_model();
    const auto e = rotating_frame_energies(sys, {1.505, 0});
    CHECK(e[0] == 0.0);
    CHECK(e[1] == doctest::Approx(-0.045).epsilon(1e-12));
    CHECK(e[2] == doctest::Approx(0.045).epsilon(1e-12));
    CHECK(std::abs(e[3]) < 1e-12);
    const auto lab = rotating_frame_energies(sys, {0.0, 0});
    CHECK(lab == sys.energies());
}

TEST_CASE("train validation") {
    CHECK_THROWS_AS(PulseTrain({make_pulse(10.0, 1.0), make_pulse(0.0, 1.0)}), ValidationError);
    Pulse bad = make_pulse(0.0, 1.0);
    bad.sigma = 0.0;
    CHECK_THROWS_AS(PulseTrain({bad}), ValidationError);
    Pulse other = make_pulse(5.0, 1.0);
    other.carrier = 1.6;
    const PulseTrain mixed({make_pulse(0.0, 1.0), other});
    CHECK_THROWS_AS(mixed.carrier(), UnsupportedConfiguration);
    CHECK_THROWS_AS(interaction_hamiltonian(dimer_model(), mixed, 0.0), UnsupportedConfiguration);
    CHECK_THROWS_AS(PulseTrain::from_delays(make_pulse(0.0, 1.0), 3, {-1.0, 0.0, 0.0}), ValidationError);
}

TEST_CASE("delays place pulse centres") {
    const auto train = PulseTrain::from_delays(make_pulse(0.0, 3.0), 4, {30.0, 20.0, 40.0});
    REQUIRE(train.size() == 4);
    CHECK(train[1].center == 30.0);
    CHECK(train[2].center == 50.0);
    CHECK(train[3].center == 90.0);
}

TEST_CASE("gap skipping matches brute-force integration") {
    const auto sys = dimer_model();
    const LindbladGenerator gen(sys, 1.505);
    const TrainPropagator prop(gen);
    std::vector<Pulse> ps{make_pulse(0.0, 27.0, 0.1), make_pulse(150.0, 27.0, 1.1), make_pulse(180.0, 27.0, 2.0)};
    const PulseTrain train(ps);
    std::vector<ActivePulse> act;
    for (const auto& p : ps) act.push_back(activate(p));
    Matrix rho = ground_state(sys).matrix();
    prop.advance_to(rho, -60.0, 300.0, act);
    const HamiltonianHook hook = [&](double t, Matrix& h) { h = interaction_hamiltonian(sys, train, t); };
    const auto ref = propagate(gen, ground_state(sys), hook, -60.0, 300.0, 0.25);
    // Only the truncated tails beyond 6 sigma differ.
    CHECK(oracle::max_abs(rho - ref.matrix()) < 1e-7);
}

}

#include "doctest.h"
#include "oracles.hpp"

#include <twodes/errors.hpp>
#include <twodes/lindblad.hpp>
#include <twodes/units.hpp>

using namespace twodes;

namespace {

// Two-level system with no dissipation, carrier on resonance.
QuantumSystem two_level(double gap, std::vector<JumpChannel> jumps = {}, std::vector<DephasingChannel> deph = {}) {
    RealMatrix mu = RealMatrix::Zero(2, 2);
    mu(0, 1) = mu(1, 0) = 1.0;
    return QuantumSystem({0.0, gap}, mu, std::move(jumps), std::move(deph), {0.0, 1.0}, {0, 1});
}

const HamiltonianHook kNoField = [](double, Matrix& h) { h.setZero(); };

}  // namespace

TEST_SUITE("lindblad") {

TEST_CASE("dimer model structure") {
    const auto sys = dimer_model();
    CHECK(sys.dim() == 4);
    CHECK(sys.energies()[3] == doctest::Approx(3.01).epsilon(1e-15));
    CHECK(sys.dipoles()(0, 3) == 0.0);
    CHECK(sys.dipoles()(3, 0) == 0.0);
    CHECK(sys.dipoles() == sys.dipoles().transpose());
    CHECK(sys.excitation_number() == std::vector<int>{0, 1, 1, 2});
}

TEST_CASE("system validation") {
    RealMatrix mu = RealMatrix::Zero(2, 2);
    mu(0, 1) = 1.0;
    CHECK_THROWS_AS(QuantumSystem({0.0, 1.0}, mu, {}, {}, {0, 1}, {0, 1}), ValidationError);
    mu(1, 0) = 1.0;
    CHECK_THROWS_AS(QuantumSystem({0.0, 1.0}, mu, {{1, 0, -1.0}}, {}, {0, 1}, {0, 1}), ValidationError);
    CHECK_THROWS_AS(QuantumSystem({0.0, 1.0}, mu, {{2, 0, 1.0}}, {}, {0, 1}, {0, 1}), StructuralError);
    CHECK_THROWS_AS(QuantumSystem({0.0, 1.0}, mu, {}, {{0, -0.1}}, {0, 1}, {0, 1}), ValidationError);
}

TEST_CASE("ground state is a fixed point") {
    const LindbladGenerator gen(dimer_model(), 1.505);
    const Matrix d = lindblad_rhs(gen, ground_state(gen.system()), Matrix::Zero(4, 4));
    CHECK(oracle::max_abs(d) == 0.0);
}

TEST_CASE("rhs matches explicit jump-operator form") {
    const auto sys = dimer_model();
    const LindbladGenerator gen(sys, 1.505);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Matrix rho = oracle::random_density(4, seed);
        const Matrix h = oracle::random_hermitian(4, seed + 100, 0.01);
        const Matrix got = lindblad_rhs(gen, DensityMatrix(rho), h);
        const Matrix want = oracle::lindblad_rhs(sys, gen.frame_energies(), rho, h);
        CHECK(oracle::max_abs(got - want) < 1e-13);
    }
}

TEST_CASE("excited population decays at gamma_10 / hbar") {
    const LindbladGenerator gen(dimer_model(), 1.505);
    Matrix rho = Matrix::Zero(4, 4);
    rho(1, 1) = 1.0;
    const Matrix d = lindblad_rhs(gen, DensityMatrix(rho), Matrix::Zero(4, 4));
    CHECK(d(1, 1).real() == doctest::Approx(-4.13e-6 / kHbar).epsilon(1e-12));
    CHECK(d(0, 0).real() == doctest::Approx(4.13e-6 / kHbar).epsilon(1e-12));
    // Quoted lifetime of level 1: 160 ps.
    CHECK(kHbar / 4.13e-6 == doctest::Approx(160000.0).epsilon(0.005));
}

TEST_CASE("coherence decays with the closed-form rate") {
    const auto sys = dimer_model();
    const LindbladGenerator gen(sys, 1.505);
    Matrix rho = Matrix::Zero(4, 4);
    rho(0, 0) = rho(1, 1) = 0.5;
    rho(0, 1) = rho(1, 0) = 0.5;
    const double t = 40.0;
    const DensityMatrix out = propagate(gen, DensityMatrix(rho), kNoField, 0.0, t, 0.25);
    // rho_01 ~ exp(-i (e0' - e1') t / hbar - (gamma_d + gamma_10 / 2) t / hbar)
    const double rate = (41.3e-3 + 0.5 * 4.13e-6) / kHbar;
    const double w = (gen.frame_energies()[0] - gen.frame_energies()[1]) / kHbar;
    const cplx want = 0.5 * std::exp(cplx(-rate * t, -w * t));
    CHECK(std::abs(out(0, 1) - want) < 1e-9);
    CHECK(gen.frame_energies()[1] == doctest::Approx(-0.045).epsilon(1e-12));
}

TEST_CASE("level 2 relaxes to 1/e after hbar / gamma_21") {
    const LindbladGenerator gen(dimer_model(), 1.505);
    Matrix rho = Matrix::Zero(4, 4);
    rho(2, 2) = 1.0;
    const double t = kHbar / 4.13e-3;
    // Quoted as 160 fs.
    CHECK(t == doctest::Approx(160.0).epsilon(0.005));
    const DensityMatrix out = propagate(gen, DensityMatrix(rho), kNoField, 0.0, t, 0.25);
    CHECK(std::abs(out.population(2) - std::exp(-1.0)) < 1e-3);
    CHECK(std::abs(out.population(2) - std::exp(-1.0)) < 1e-9);
}

TEST_CASE("halving dt changes the state by at most 1e-8") {
    const auto sys = dimer_model();
    const LindbladGenerator gen(sys, 1.505);
    const Matrix rho0 = oracle::random_density(4, 7);
    const HamiltonianHook drive = [&](double t, Matrix& h) {
        h.setZero();
        const double env = std::exp(-0.5 * (t - 50.0) * (t - 50.0) / 100.0);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                if (sys.dipoles()(i, j) != 0.0) h(i, j) = -0.5 * 27e-3 * env;
    };
    const auto a = propagate(gen, DensityMatrix(rho0), drive, 0.0, 100.0, 0.25);
    const auto b = propagate(gen, DensityMatrix(rho0), drive, 0.0, 100.0, 0.125);
    CHECK(oracle::max_abs(a.matrix() - b.matrix()) <= 1e-8);
}

TEST_CASE("resonant Rabi period") {
    const LindbladGenerator gen(two_level(1.5), 1.5);
    // Constant drive of 8 meV: off-diagonal element -4 meV.
    const HamiltonianHook drive = [](double, Matrix& h) {
        h.setZero();
        h(0, 1) = h(1, 0) = -0.5 * 8e-3;
    };
    const double expected = kTwoPi * kHbar / 8e-3;
    CHECK(expected == doctest::Approx(517.0).epsilon(1e-3));
    // Locate the first return of the ground population by sampling and a
    // parabola through the three samples around the maximum.
    const auto traj = propagate_trajectory(gen, ground_state(gen.system()), drive, 0.0, 700.0, 0.05);
    std::size_t best = 0;
    double best_p = -1.0;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        const double t = traj.time(i);
        if (t < 300.0) continue;
        const double p = traj.states[i](0, 0).real();
        if (p > best_p) best_p = p, best = i;
    }
    const double y0 = traj.states[best - 1](0, 0).real(), y1 = best_p, y2 = traj.states[best + 1](0, 0).real();
    const double shift = 0.5 * (y0 - y2) / (y0 - 2.0 * y1 + y2);
    const double period = traj.time(best) + shift * traj.dt;
    CHECK(std::abs(period - expected) / expected < 1e-3);
    CHECK(best_p == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("dissipator is trace preserving") {
    const LindbladGenerator gen(dimer_model(), 1.505);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Matrix rho = oracle::random_density(4, seed);
        const SuperVector d = gen.dissipator() * vectorize(rho);
        cplx tr = 0.0;
        for (int i = 0; i < 4; ++i) tr += d(i * 4 + i);
        CHECK(std::abs(tr) <= 1e-12);
    }
    // Trace functional is a left null vector of the full generator.
    const SuperMatrix l = gen.liouvillian();
    Eigen::RowVectorXcd trace_row = Eigen::RowVectorXcd::Zero(16);
    for (int i = 0; i < 4; ++i) trace_row(i * 4 + i) = 1.0;
    CHECK((trace_row * l).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("field-free propagation equals the matrix exponential") {
    const LindbladGenerator gen(dimer_model(), 1.505);
    const Matrix rho0 = oracle::random_density(4, 3);
    const double t = 80.0;
    const auto rk = propagate(gen, DensityMatrix(rho0), kNoField, 0.0, t, 0.25);
    const Matrix ex = unvectorize(expm(gen.liouvillian() * t) * vectorize(rho0), 4);
    CHECK(oracle::max_abs(rk.matrix() - ex) < 1e-9);

    FieldFreeEvolver ev(gen);
    Matrix rho = rho0;
    ev.advance(rho, t);
    CHECK(oracle::max_abs(rho - ex) < 1e-12);
}

TEST_CASE("generators add across channels") {
    const auto sys = dimer_model();
    const auto a = sys.with_channels({sys.jump_channels()[1]}, {});
    const auto b = sys.with_channels({}, {sys.dephasing_channels()[2]});
    const auto ab = sys.with_channels({sys.jump_channels()[1]}, {sys.dephasing_channels()[2]});
    const LindbladGenerator ga(a), gb(b), gab(ab);
    CHECK((gab.dissipator() - ga.dissipator() - gb.dissipator()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("vectorize is column stacking") {
    Matrix m(2, 2);
    m << 1.0, 2.0, 3.0, 4.0;
    const SuperVector v = vectorize(m);
    CHECK(v(1) == cplx(3.0));
    CHECK(v(2) == cplx(2.0));
    CHECK(unvectorize(v, 2) == m);
}

TEST_CASE("integrated exponential matches quadrature") {
    const LindbladGenerator gen(dimer_model(), 1.505);
    const SuperMatrix l = gen.liouvillian();
    const double t = 30.0;
    const int n = 3000;
    const double h = t / n;
    const SuperMatrix step = expm(l * h);
    SuperMatrix g = SuperMatrix::Identity(16, 16), acc = SuperMatrix::Zero(16, 16);
    for (int k = 0; k <= n; ++k) {
        const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        acc += w * g;
        g = step * g;
    }
    acc *= h / 3.0;
    CHECK((integrated_exponential(l, t) - acc).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("input checks") {
    const LindbladGenerator gen(dimer_model(), 1.505);
    Matrix h = Matrix::Zero(4, 4);
    h(0, 1) = 1.0;
    CHECK_THROWS_AS(lindblad_rhs(gen, ground_state(gen.system()), h), ValidationError);
    CHECK_THROWS_AS(lindblad_rhs(gen, ground_state(gen.system()), Matrix::Zero(3, 3)), StructuralError);
    CHECK_THROWS_AS(propagate(gen, ground_state(gen.system()), kNoField, 0.0, 1.0, 0.0), ValidationError);
}

TEST_CASE("unstable step reports an integration failure with its time") {
    const LindbladGenerator gen(two_level(1.5), 1.5);
    const HamiltonianHook drive = [](double, Matrix& h) {
        h.setZero();
        h(0, 1) = h(1, 0) = -2.0;
    };
    bool thrown = false;
    try {
        propagate(gen, ground_state(gen.system()), drive, 0.0, 200.0, 5.0);
    } catch (const IntegrationFailure& e) {
        thrown = true;
        CHECK(e.time_fs() > 0.0);
        CHECK(e.time_fs() <= 200.0);
        CHECK(e.kind() == "integration");
    }
    CHECK(thrown);
}

TEST_CASE("density matrix diagnostics") {
    const DensityMatrix rho(oracle::random_density(4, 11));
    CHECK(rho.trace_error() < 1e-14);
    CHECK(rho.hermiticity_error() < 1e-14);
    CHECK(rho.min_eigenvalue() > -1e-14);
    Matrix bad = Matrix::Zero(2, 2);
    bad(0, 0) = 1.5;
    bad(1, 1) = -0.5;
    CHECK(DensityMatrix(bad).min_eigenvalue() == doctest::Approx(-0.5));
}

}

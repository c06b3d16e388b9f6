#pragma once

// Independent reference calculations shared by the unit suites. None of
// these call into the library's propagation or transform code.

#include <twodes/lindblad.hpp>
#include <twodes/units.hpp>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

namespace oracle {

using twodes::cplx;
using twodes::Matrix;

// Random valid density matrix: normalized Wishart sample.
inline Matrix random_density(int dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Matrix a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = cplx(g(rng), g(rng));
    Matrix rho = a * a.adjoint();
    return rho / rho.trace();
}

inline Matrix random_hermitian(int dim, std::uint64_t seed, double scale) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Matrix a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = cplx(g(rng), g(rng));
    return scale * 0.5 * (a + a.adjoint());
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// Textbook Lindblad right-hand side written out with explicit jump
// operators L = |to><from| and dephasing L = |k><k|.
inline Matrix lindblad_rhs(const twodes::QuantumSystem& sys, const std::vector<double>& frame, const Matrix& rho,
                           const Matrix& h_int) {
    const int d = sys.dim();
    const cplx mi(0.0, -1.0);
    Matrix h = h_int;
    for (int i = 0; i < d; ++i) h(i, i) += frame[i];
    Matrix out = mi / twodes::kHbar * (h * rho - rho * h);
    auto add = [&](const Matrix& l, double rate) {
        const Matrix ld = l.adjoint();
        out += rate / twodes::kHbar * (l * rho * ld - 0.5 * (ld * l * rho + rho * ld * l));
    };
    for (const auto& j : sys.jump_channels()) {
        Matrix l = Matrix::Zero(d, d);
        l(j.to, j.from) = 1.0;
        add(l, j.rate);
    }
    for (const auto& c : sys.dephasing_channels()) {
        Matrix l = Matrix::Zero(d, d);
        l(c.level, c.level) = 1.0;
        add(l, c.strength);
    }
    return out;
}

}  // namespace oracle

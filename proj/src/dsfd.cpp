#include "twodes/dsfd.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "twodes/errors.hpp"
#include "twodes/parallel.hpp"
#include "twodes/units.hpp"

namespace twodes {

std::string to_string(Detection d) { return d == Detection::HD ? "HD" : "FD"; }

namespace {

bool allowed(const QuantumSystem& sys, int a, int b) {
    const auto& n = sys.excitation_number();
    return sys.dipoles()(a, b) != 0.0 && std::abs(n[a] - n[b]) == 1;
}

int phase_of(const QuantumSystem& sys, Side side, int from, int to) {
    const bool raising = sys.excitation_number()[to] > sys.excitation_number()[from];
    if (side == Side::Left) return raising ? 1 : -1;
    return raising ? -1 : 1;
}

// Which vec elements can feed which under free evolution.
std::vector<std::vector<bool>> reachability(const SuperMatrix& l) {
    const auto n = static_cast<int>(l.rows());
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (int src = 0; src < n; ++src) {
        std::vector<int> stack{src};
        reach[src][src] = true;
        while (!stack.empty()) {
            const int e = stack.back();
            stack.pop_back();
            for (int dst = 0; dst < n; ++dst)
                if (!reach[src][dst] && l(dst, e) != cplx(0.0, 0.0)) {
                    reach[src][dst] = true;
                    stack.push_back(dst);
                }
        }
    }
    return reach;
}

std::array<int, 3> wanted_signature(Detection d, Component c) {
    if (d == Detection::HD) return direction_coefficients(c);
    const auto s = ComponentSignature::of(c);
    return {s.beta, s.gamma, s.delta};
}

std::string label_for(const QuantumSystem& sys, Component c, const std::vector<Interaction>& steps, int ket2,
                      int bra2) {
    if (c == Component::DQC) return "DQC";
    const auto& n = sys.excitation_number();
    std::string base;
    if (ket2 == bra2 && n[ket2] == 0)
        base = "GSB";
    else if (n[steps[2].to] == 2)
        base = "ESA";
    else
        base = "SE";
    if (steps.size() == 4 && base == "ESA") {
        const auto& last = steps[3];
        base = (last.side == Side::Right && n[last.to] > n[last.from]) ? "ESA2" : "ESA1";
    }
    return base;
}

void enumerate_into(const QuantumSystem& sys, Detection det, Component comp, std::vector<Pathway>& out) {
    const int d = sys.dim();
    const int count = det == Detection::HD ? 3 : 4;
    const auto want = wanted_signature(det, comp);
    const LindbladGenerator gen(sys, 0.0);
    const auto reach = reachability(gen.liouvillian());
    const auto& n = sys.excitation_number();

    std::vector<Interaction> steps;
    int ket_after2 = 0, bra_after2 = 0;
    bool transfer = false;
    std::function<void(int, int)> recurse = [&](int ket, int bra) {
        const auto k = static_cast<int>(steps.size());
        if (k == count) {
            std::array<int, 3> sig{};
            for (int i = 0; i < 3; ++i) sig[i] = steps[det == Detection::HD ? i : i + 1].phase;
            if (sig != want) return;
            if (det == Detection::HD) {
                if (!(n[ket] == n[bra] + 1 && sys.dipoles()(bra, ket) != 0.0)) return;
            } else if (!(ket == bra && n[ket] >= 1)) {
                return;
            }
            Pathway p;
            p.steps = steps;
            p.detection = det;
            p.signature = sig;
            p.label = label_for(sys, comp, steps, ket_after2, bra_after2);
            p.final_ket = ket;
            p.final_bra = bra;
            p.population_transfer = transfer;
            out.push_back(std::move(p));
            return;
        }
        // Free evolution before this interaction may move the element.
        const int here = bra * d + ket;
        for (int there = 0; there < d * d; ++there) {
            if (k == 0 && there != here) continue;
            if (!reach[here][there]) continue;
            const int k2 = there % d, b2 = there / d;
            const bool moved = there != here;
            if (k == 2) {
                ket_after2 = k2;
                bra_after2 = b2;
            }
            const bool saved = transfer;
            transfer = transfer || moved;
            for (int side = 0; side < 2; ++side)
                for (int to = 0; to < d; ++to) {
                    const int from = side == 0 ? k2 : b2;
                    if (!allowed(sys, from, to)) continue;
                    const Side s = side == 0 ? Side::Left : Side::Right;
                    steps.push_back({s, from, to, phase_of(sys, s, from, to)});
                    if (side == 0)
                        recurse(to, b2);
                    else
                        recurse(k2, to);
                    steps.pop_back();
                }
            transfer = saved;
        }
    };
    recurse(0, 0);
}

SuperMatrix vertex(const QuantumSystem& sys, const Interaction& in) {
    const int d = sys.dim();
    SuperMatrix v = SuperMatrix::Zero(d * d, d * d);
    const double mu = sys.dipoles()(in.to, in.from);
    // -i/hbar X rho on the left, +i/hbar rho X on the right, X = -1/2 mu.
    const cplx f = (in.side == Side::Left ? cplx(0.0, -1.0) : cplx(0.0, 1.0)) / kHbar * (-0.5 * mu);
    for (int o = 0; o < d; ++o) {
        if (in.side == Side::Left)
            v(o * d + in.to, o * d + in.from) = f;
        else
            v(in.to * d + o, in.from * d + o) = f;
    }
    return v;
}

void check_pathway(const QuantumSystem& sys, const Pathway& p) {
    const std::size_t want = p.detection == Detection::HD ? 3 : 4;
    if (p.steps.size() != want) throw ValidationError("pathway has the wrong number of interactions");
    for (const auto& in : p.steps) {
        if (in.from < 0 || in.to < 0 || in.from >= sys.dim() || in.to >= sys.dim())
            throw ValidationError("pathway level out of range");
        if (!allowed(sys, in.from, in.to))
            throw ValidationError("transition " + std::to_string(in.from) + "->" + std::to_string(in.to) +
                                  " is not dipole-allowed");
    }
}

SuperMatrix shifted(const SuperMatrix& l, double omega, int sign) {
    SuperMatrix m = l;
    m.diagonal().array() += cplx(0.0, sign * omega / kHbar);
    return m;
}

Eigen::RowVectorXcd emission_functional(const QuantumSystem& sys) {
    const int d = sys.dim();
    const auto& n = sys.excitation_number();
    Eigen::RowVectorXcd o = Eigen::RowVectorXcd::Zero(d * d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            if (n[b] == n[a] + 1) o(a * d + b) = sys.dipoles()(a, b);
    return o;
}

Eigen::RowVectorXcd final_functional(const LindbladGenerator& gen, const Pathway& p, const AcquisitionSpec& acq) {
    const QuantumSystem& sys = gen.system();
    if (p.detection == Detection::HD) return emission_functional(sys);
    const Readout readout(gen, acq.mode);
    if (acq.delay < 0.0) throw ValidationError("acquisition delay must be non-negative");
    const SuperMatrix v4 = vertex(sys, p.steps[3]);
    if (acq.delay == 0.0) return readout.weights() * v4;
    return readout.weights() * expm(gen.liouvillian() * acq.delay) * v4;
}

cplx prefactor(Detection d) {
    return d == Detection::HD ? FourierOptions{}.prefactor : FourierOptions::for_population_signal().prefactor;
}

}  // namespace

std::vector<Pathway> enumerate_pathways(const QuantumSystem& system, Detection detection, Component component) {
    std::vector<Pathway> out;
    if (component == Component::Total) {
        enumerate_into(system, detection, Component::Rephasing, out);
        enumerate_into(system, detection, Component::Nonrephasing, out);
    } else {
        enumerate_into(system, detection, component, out);
    }
    return out;
}

SuperMatrix liouville_ft(const SuperMatrix& liouvillian, double omega, double tau_f, int sign) {
    if (sign != 1 && sign != -1) throw ValidationError("sign must be +1 or -1");
    if (tau_f < 0.0) throw ValidationError("tau_f must be non-negative");
    const auto n = liouvillian.rows();
    if (tau_f == 0.0) return SuperMatrix::Zero(n, n);
    const SuperMatrix m = shifted(liouvillian, omega, sign);
    const Eigen::JacobiSVD<SuperMatrix> svd(m);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (!(smin > 0.0) || sv(0) / smin > 1e12)
        throw NumericalSingularity("resolvent is singular at omega = " + std::to_string(omega) + " eV");
    const SuperMatrix rhs = expm(m * tau_f) - SuperMatrix::Identity(n, n);
    return m.fullPivLu().solve(rhs);
}

cplx evaluate_pathway(const LindbladGenerator& gen, const Pathway& p, double omega_1, double T, double omega_3,
                      double tau_f, const AcquisitionSpec& acquisition) {
    const QuantumSystem& sys = gen.system();
    check_pathway(sys, p);
    if (T < 0.0 || tau_f < 0.0) throw ValidationError("durations must be non-negative");
    const int d = sys.dim();
    const SuperMatrix l = gen.liouvillian();
    SuperVector x = SuperVector::Zero(d * d);
    x(0) = 1.0;
    x = vertex(sys, p.steps[0]) * x;
    x = integrated_exponential(shifted(l, omega_1 - gen.carrier(), p.steps[0].phase), tau_f) * x;
    x = vertex(sys, p.steps[1]) * x;
    if (T > 0.0) x = expm(l * T) * x;
    x = vertex(sys, p.steps[2]) * x;
    x = integrated_exponential(shifted(l, omega_3 - gen.carrier(), 1), tau_f) * x;
    const cplx value = final_functional(gen, p, acquisition) * x;
    return prefactor(p.detection) * value;
}

Spectrum2D dsfd_spectrum(const LindbladGenerator& gen, Detection detection, Component component, double T,
                         const std::vector<double>& omega_tau, const std::vector<double>& omega_t,
                         const DsfdOptions& opts) {
    if (component == Component::DQC) throw UnsupportedConfiguration("DQC reference spectra are not provided");
    if (omega_tau.empty() || omega_t.empty()) throw ValidationError("empty frequency axes");
    if (T < 0.0 || opts.tau_f < 0.0) throw ValidationError("durations must be non-negative");
    const QuantumSystem& sys = gen.system();
    const int d2 = sys.dim() * sys.dim();
    const auto n1 = static_cast<Eigen::Index>(omega_tau.size());
    const auto n3 = static_cast<Eigen::Index>(omega_t.size());
    const SuperMatrix l = gen.liouvillian();
    const SuperMatrix gt = T > 0.0 ? SuperMatrix(expm(l * T)) : SuperMatrix::Identity(d2, d2);

    const auto pathways = enumerate_pathways(sys, detection, component);

    // G(w) for both signs on the excitation axis and + on the detection axis.
    std::vector<SuperMatrix> g1m(n1), g1p(n1), g3(n3);
    parallel_for(static_cast<std::size_t>(n1 + n3), opts.workers, [&](std::size_t i) {
        if (static_cast<Eigen::Index>(i) < n1) {
            const double w = omega_tau[i] - gen.carrier();
            g1m[i] = integrated_exponential(shifted(l, w, -1), opts.tau_f);
            g1p[i] = integrated_exponential(shifted(l, w, 1), opts.tau_f);
        } else {
            const auto k = i - static_cast<std::size_t>(n1);
            g3[k] = integrated_exponential(shifted(l, omega_t[k] - gen.carrier(), 1), opts.tau_f);
        }
    });

    Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(n3, n1);
    SuperVector ground = SuperVector::Zero(d2);
    ground(0) = 1.0;
    for (const auto& p : pathways) {
        check_pathway(sys, p);
        const SuperVector first = vertex(sys, p.steps[0]) * ground;
        const SuperMatrix v2 = vertex(sys, p.steps[1]);
        const SuperMatrix mid = vertex(sys, p.steps[2]) * gt * v2;
        Eigen::MatrixXcd right(d2, n1);
        for (Eigen::Index i = 0; i < n1; ++i)
            right.col(i) = mid * ((p.steps[0].phase < 0 ? g1m[i] : g1p[i]) * first);
        const Eigen::RowVectorXcd fin = final_functional(gen, p, opts.acquisition);
        Eigen::MatrixXcd left(n3, d2);
        for (Eigen::Index k = 0; k < n3; ++k) left.row(k) = fin * g3[k];
        total.noalias() += left * right;
    }

    Spectrum2D s;
    s.data = prefactor(detection) * total.transpose();
    s.omega_tau = omega_tau;
    s.omega_t = omega_t;
    s.meta.scheme = "DSFD-" + to_string(detection);
    s.meta.component = to_string(component);
    s.meta.waiting_time = T;
    s.meta.carrier = gen.carrier();
    s.meta.extra["tau_f"] = std::to_string(opts.tau_f);
    if (detection == Detection::FD) {
        s.meta.extra["t_acq"] = opts.acquisition.mode.kind == DetectionMode::Kind::IntegratedFluorescence
                                    ? std::to_string(opts.acquisition.mode.t_acq)
                                    : "0";
        s.meta.extra["acquisition_delay"] = std::to_string(opts.acquisition.delay);
    }
    return s;
}

}  // namespace twodes

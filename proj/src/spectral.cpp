#include "twodes/spectral.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "twodes/errors.hpp"
#include "twodes/units.hpp"

namespace twodes {

std::string to_string(Component c) {
    switch (c) {
        case Component::Rephasing: return "R";
        case Component::Nonrephasing: return "NR";
        case Component::DQC: return "DQC";
        case Component::Total: return "Total";
    }
    return "?";
}

Component component_from_string(const std::string& s) {
    if (s == "R") return Component::Rephasing;
    if (s == "NR") return Component::Nonrephasing;
    if (s == "DQC") return Component::DQC;
    if (s == "Total") return Component::Total;
    throw ValidationError("unknown component '" + s + "'");
}

std::vector<double> DelayGrid::tau_values() const {
    std::vector<double> v;
    for (int i = 0; i < n_tau; ++i) v.push_back(tau(i));
    return v;
}

std::vector<double> DelayGrid::t_values() const {
    std::vector<double> v;
    for (int k = 0; k < n_t; ++k) v.push_back(t(k));
    return v;
}

void DelayGrid::validate() const {
    if (!(tau_step > 0.0) || !(t_step > 0.0)) throw ValidationError("delay steps must be positive");
    if (n_tau < 2 || n_t < 2) throw ValidationError("delay grids need at least two samples");
    for (double T : waiting_times)
        if (!(T >= 0.0)) throw ValidationError("waiting times must be non-negative");
}

void Spectrum2D::validate() const {
    if (static_cast<Eigen::Index>(omega_tau.size()) != data.rows() ||
        static_cast<Eigen::Index>(omega_t.size()) != data.cols())
        throw StructuralError("spectrum axes do not match data");
    for (std::size_t i = 1; i < omega_tau.size(); ++i)
        if (!(omega_tau[i] > omega_tau[i - 1])) throw ValidationError("omega_tau axis not increasing");
    for (std::size_t i = 1; i < omega_t.size(); ++i)
        if (!(omega_t[i] > omega_t[i - 1])) throw ValidationError("omega_t axis not increasing");
}

std::vector<double> raw_frequencies(int n, double step, int padding) {
    if (padding < 1) throw ValidationError("padding factor must be >= 1");
    const int m = n * padding;
    const double dw = kTwoPi * kHbar / (m * step);
    std::vector<double> w;
    for (int k = -m / 2; k < m - m / 2; ++k) w.push_back(k * dw);
    return w;
}

double effective_sampling_interval(double step, int folding_factor, double carrier) {
    return step - folding_factor * kTwoPi * kHbar / carrier;
}

std::pair<std::vector<double>, std::vector<double>> unfold_axes(const DelayGrid& grid, const FramePolicy& policy,
                                                                int padding, const QuantumSystem* check) {
    if (policy.folding_factor < 0) throw ValidationError("folding factor must be >= 0");
    auto shift = [&](std::vector<double> w, double step) {
        const double offset = policy.folding_factor * kTwoPi * kHbar / step + policy.carrier;
        for (double& x : w) x += offset;
        return w;
    };
    auto wt = shift(raw_frequencies(grid.n_tau, grid.tau_step, padding), grid.tau_step);
    auto wd = shift(raw_frequencies(grid.n_t, grid.t_step, padding), grid.t_step);
    if (check) {
        const auto& e = check->energies();
        const auto& n = check->excitation_number();
        for (int a = 0; a < check->dim(); ++a)
            for (int b = 0; b < check->dim(); ++b) {
                if (n[a] != n[b] + 1 || check->dipoles()(a, b) == 0.0) continue;
                const double res = e[a] - e[b];
                for (const auto* ax : {&wt, &wd})
                    if (res < ax->front() || res > ax->back())
                        throw CalibrationError("resonance " + std::to_string(res) + " eV outside reconstructed axis");
            }
    }
    return {wt, wd};
}

Spectrum2D fourier_2d(const Eigen::MatrixXcd& signal, const DelayGrid& grid, Component component,
                      const FramePolicy& policy, const FourierOptions& opts) {
    if (signal.rows() != grid.n_tau || signal.cols() != grid.n_t)
        throw StructuralError("fourier_2d: signal does not match the delay grid");
    if (component == Component::Total) throw UnsupportedConfiguration("fourier_2d: transform R and NR separately");
    const double tau_sign = component == Component::Rephasing ? -1.0 : 1.0;
    const auto w_tau = raw_frequencies(grid.n_tau, grid.tau_step, opts.padding);
    const auto w_t = raw_frequencies(grid.n_t, grid.t_step, opts.padding);

    auto kernel = [&](const std::vector<double>& w, int n, double step, double sign) {
        Eigen::MatrixXcd k(static_cast<Eigen::Index>(w.size()), n);
        for (Eigen::Index m = 0; m < k.rows(); ++m)
            for (int j = 0; j < n; ++j) {
                const double weight = (opts.half_weight_origin && j == 0) ? 0.5 : 1.0;
                k(m, j) = weight * step * std::polar(1.0, sign * w[m] * (step * j) / kHbar);
            }
        return k;
    };
    const Eigen::MatrixXcd k_tau = kernel(w_tau, grid.n_tau, grid.tau_step, tau_sign);
    const Eigen::MatrixXcd k_t = kernel(w_t, grid.n_t, grid.t_step, 1.0);

    Spectrum2D out;
    out.data = opts.prefactor * (k_tau * signal * k_t.transpose());
    std::tie(out.omega_tau, out.omega_t) = unfold_axes(grid, policy, opts.padding);
    out.meta.component = to_string(component);
    out.meta.folding_factor = policy.folding_factor;
    out.meta.carrier = policy.carrier;
    return out;
}

Spectrum2D total_correlation(const Spectrum2D& r, const Spectrum2D& nr) {
    if (r.omega_tau != nr.omega_tau || r.omega_t != nr.omega_t) throw StructuralError("total_correlation: axis mismatch");
    Spectrum2D out = r;
    out.data = r.data + nr.data;
    out.meta.component = "Total";
    return out;
}

namespace {

void write_axis(std::ostream& os, const char* name, const std::vector<double>& ax) {
    os << "# " << name << ":";
    for (double x : ax) os << ' ' << x;
    os << '\n';
}

std::vector<double> parse_numbers(const std::string& text) {
    std::istringstream is(text);
    std::vector<double> v;
    std::string tok;
    while (is >> tok) v.push_back(std::stod(tok));
    return v;
}

}  // namespace

void write_spectrum(std::ostream& os, const Spectrum2D& s) {
    s.validate();
    const auto old_flags = os.flags();
    const auto old_prec = os.precision();
    os << std::setprecision(17);
    os << "# twodes spectrum2d v1\n";
    os << "# scheme: " << s.meta.scheme << '\n';
    os << "# component: " << s.meta.component << '\n';
    os << "# waiting_time_fs: " << s.meta.waiting_time << '\n';
    os << "# peak_interaction_meV: " << s.meta.peak_interaction << '\n';
    os << "# sigma_fs: " << s.meta.sigma << '\n';
    os << "# seed: " << s.meta.seed << '\n';
    os << "# folding_factor: " << s.meta.folding_factor << '\n';
    os << "# carrier_eV: " << s.meta.carrier << '\n';
    for (const auto& [k, v] : s.meta.extra) os << "# extra." << k << ": " << v << '\n';
    os << "# rows: " << s.data.rows() << '\n';
    os << "# cols: " << s.data.cols() << '\n';
    write_axis(os, "omega_tau_eV", s.omega_tau);
    write_axis(os, "omega_t_eV", s.omega_t);
    for (int part = 0; part < 2; ++part) {
        os << (part == 0 ? "# real\n" : "# imag\n");
        for (Eigen::Index i = 0; i < s.data.rows(); ++i) {
            for (Eigen::Index j = 0; j < s.data.cols(); ++j) {
                if (j) os << ' ';
                os << (part == 0 ? s.data(i, j).real() : s.data(i, j).imag());
            }
            os << '\n';
        }
    }
    os.flags(old_flags);
    os.precision(old_prec);
}

Spectrum2D read_spectrum(std::istream& is) {
    Spectrum2D s;
    std::string line;
    int rows = -1, cols = -1, part = -1;
    Eigen::Index row = 0;
    Eigen::MatrixXd re, im;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string body = line.substr(1);
            const auto colon = body.find(':');
            if (body.find("real") != std::string::npos && colon == std::string::npos) {
                part = 0;
                row = 0;
                re.resize(rows, cols);
                continue;
            }
            if (body.find("imag") != std::string::npos && colon == std::string::npos) {
                part = 1;
                row = 0;
                im.resize(rows, cols);
                continue;
            }
            if (colon == std::string::npos) continue;
            std::string key = body.substr(0, colon);
            key.erase(0, key.find_first_not_of(' '));
            std::string value = body.substr(colon + 1);
            value.erase(0, value.find_first_not_of(' '));
            if (key == "scheme") s.meta.scheme = value;
            else if (key == "component") s.meta.component = value;
            else if (key == "waiting_time_fs") s.meta.waiting_time = std::stod(value);
            else if (key == "peak_interaction_meV") s.meta.peak_interaction = std::stod(value);
            else if (key == "sigma_fs") s.meta.sigma = std::stod(value);
            else if (key == "seed") s.meta.seed = std::stoull(value);
            else if (key == "folding_factor") s.meta.folding_factor = std::stoi(value);
            else if (key == "carrier_eV") s.meta.carrier = std::stod(value);
            else if (key == "rows") rows = std::stoi(value);
            else if (key == "cols") cols = std::stoi(value);
            else if (key == "omega_tau_eV") s.omega_tau = parse_numbers(value);
            else if (key == "omega_t_eV") s.omega_t = parse_numbers(value);
            else if (key.rfind("extra.", 0) == 0) s.meta.extra[key.substr(6)] = value;
            continue;
        }
        if (part < 0 || rows < 0 || cols < 0) throw ParseError("matrix data before header", lineno);
        const auto vals = parse_numbers(line);
        if (static_cast<int>(vals.size()) != cols || row >= rows) throw ParseError("bad matrix row", lineno);
        auto& target = part == 0 ? re : im;
        for (int j = 0; j < cols; ++j) target(row, j) = vals[j];
        ++row;
    }
    if (rows < 0 || re.rows() != rows || im.rows() != rows) throw ParseError("incomplete spectrum file", lineno);
    s.data.resize(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) s.data(i, j) = cplx(re(i, j), im(i, j));
    s.validate();
    return s;
}

void write_spectrum_file(const std::string& path, const Spectrum2D& s) {
    std::ofstream os(path);
    if (!os) throw Error("io", "cannot open " + path + " for writing");
    write_spectrum(os, s);
}

Spectrum2D read_spectrum_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("io", "cannot open " + path);
    return read_spectrum(is);
}

int nearest_index(const std::vector<double>& axis, double x) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(axis.size()); ++i)
        if (std::abs(axis[i] - x) < std::abs(axis[best] - x)) best = i;
    return best;
}

PeakEstimate locate_peak(const Spectrum2D& s, double w1, double w3, double radius) {
    PeakEstimate best;
    double best_abs = -1.0;
    for (int i = 0; i < static_cast<int>(s.omega_tau.size()); ++i) {
        if (std::abs(s.omega_tau[i] - w1) > radius) continue;
        for (int j = 0; j < static_cast<int>(s.omega_t.size()); ++j) {
            if (std::abs(s.omega_t[j] - w3) > radius) continue;
            const double v = s.data(i, j).real();
            if (std::abs(v) > best_abs) {
                best_abs = std::abs(v);
                best = {s.omega_tau[i], s.omega_t[j], v, i, j};
            }
        }
    }
    if (best_abs < 0.0) throw ValidationError("locate_peak: search window outside the axes");
    auto refine = [](double fm, double f0, double fp) {
        const double denom = fm - 2.0 * f0 + fp;
        return denom == 0.0 ? 0.0 : 0.5 * (fm - fp) / denom;
    };
    const int i = best.row, j = best.col;
    if (i > 0 && i + 1 < s.data.rows()) {
        const double d = refine(s.data(i - 1, j).real(), s.data(i, j).real(), s.data(i + 1, j).real());
        best.omega_tau += d * (s.omega_tau[i + 1] - s.omega_tau[i]);
    }
    if (j > 0 && j + 1 < s.data.cols()) {
        const double d = refine(s.data(i, j - 1).real(), s.data(i, j).real(), s.data(i, j + 1).real());
        best.omega_t += d * (s.omega_t[j + 1] - s.omega_t[j]);
    }
    return best;
}

}  // namespace twodes

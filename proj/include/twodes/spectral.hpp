#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "twodes/field.hpp"

namespace twodes {

/// Signal class selected by phase matching or phase cycling.
enum class Component { Rephasing, Nonrephasing, DQC, Total };

std::string to_string(Component c);
Component component_from_string(const std::string& s);

/// Uniform sampling of the coherence (tau) and detection (t) delays plus the
/// list of waiting times.
struct DelayGrid {
    double tau_step = 10.0;
    double t_step = 10.0;
    int n_tau = 31;
    int n_t = 31;
    std::vector<double> waiting_times{0, 5, 10, 15, 20, 25, 30, 35, 40, 45, 50};

    double tau(int i) const { return tau_step * i; }
    double t(int k) const { return t_step * k; }
    std::vector<double> tau_values() const;
    std::vector<double> t_values() const;
    void validate() const;

    bool operator==(const DelayGrid&) const = default;
};

struct SpectrumMetadata {
    std::string scheme = "FD";
    std::string component = "R";
    double waiting_time = 0.0;
    double peak_interaction = 0.0;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    int folding_factor = 0;
    double carrier = 0.0;
    /// Free-form extra keys (t_acq, n_absorbers, ...).
    std::map<std::string, std::string> extra;
};

/// Complex 2D spectrum on absolute-energy axes; rows follow omega_tau.
struct Spectrum2D {
    Eigen::MatrixXcd data;
    std::vector<double> omega_tau;
    std::vector<double> omega_t;
    SpectrumMetadata meta;

    void validate() const;
};

struct FourierOptions {
    int padding = 4;
    /// Weight the tau = 0 and t = 0 samples by 1/2 (trapezoid rule).
    bool half_weight_origin = true;
    /// Overall factor; -i for polarization signals. Four-interaction
    /// population signals carry one more factor of i than the emitted
    /// polarization, so they use 1 to keep absorptive real parts.
    cplx prefactor{0.0, -1.0};

    static FourierOptions for_population_signal() {
        FourierOptions o;
        o.prefactor = cplx(1.0, 0.0);
        return o;
    }
};

/// Signed frequencies (eV) of an n*padding point transform at step `step`
/// (fs), strictly increasing from -Nyquist.
std::vector<double> raw_frequencies(int n, double step, int padding);

/// Absolute axes: raw + folding_factor * 2 pi hbar / step + carrier. When a
/// system is given, every RWA-allowed one-quantum transition must fall
/// inside both axes.
std::pair<std::vector<double>, std::vector<double>> unfold_axes(const DelayGrid& grid, const FramePolicy& policy,
                                                                int padding = 4,
                                                                const QuantumSystem* check = nullptr);

/// Sampling interval the folded signal appears to have:
/// step - folding_factor * 2 pi hbar / carrier.
double effective_sampling_interval(double step, int folding_factor, double carrier);

/// c sum dtau dt exp(-+ i w_tau tau / hbar) exp(i w_t t / hbar) S(tau, t) with
/// c = opts.prefactor;
/// "-" on w_tau for Rephasing, "+" for Nonrephasing and DQC.
Spectrum2D fourier_2d(const Eigen::MatrixXcd& signal, const DelayGrid& grid, Component component,
                      const FramePolicy& policy, const FourierOptions& opts = {});

/// Elementwise R + NR on identical axes.
Spectrum2D total_correlation(const Spectrum2D& rephasing, const Spectrum2D& nonrephasing);

void write_spectrum(std::ostream& os, const Spectrum2D& s);
Spectrum2D read_spectrum(std::istream& is);
void write_spectrum_file(const std::string& path, const Spectrum2D& s);
Spectrum2D read_spectrum_file(const std::string& path);

/// Index of the axis value closest to x.
int nearest_index(const std::vector<double>& axis, double x);

/// Local extremum of Re S near (w1, w3), searched within `radius` eV, with
/// parabolic sub-bin refinement. Returns refined (w1, w3) and the value.
struct PeakEstimate {
    double omega_tau = 0.0;
    double omega_t = 0.0;
    double value = 0.0;
    int row = 0;
    int col = 0;
};
PeakEstimate locate_peak(const Spectrum2D& s, double omega_tau, double omega_t, double radius);

}  // namespace twodes

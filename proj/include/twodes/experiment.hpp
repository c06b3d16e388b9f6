#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "twodes/dsfd.hpp"
#include "twodes/fd_detection.hpp"
#include "twodes/hd_detection.hpp"
#include "twodes/spectral.hpp"

namespace twodes {

enum class Scheme { HD, FD, DSFD };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

/// One swept parameter: peak_interaction (meV), sigma (fs), T (fs), t_acq
/// (fs) or n_absorbers.
struct SweepAxis {
    std::string parameter;
    std::vector<double> values;

    bool operator==(const SweepAxis&) const = default;
};

struct ExperimentConfig {
    ModelParameters model;
    Scheme scheme = Scheme::FD;
    Component component = Component::Total;
    DelayGrid grid;
    PulseShape pulse{10.0, 3.0, 1.505};
    /// FD readout: "fluorescence" integrates for t_acq, "population" reads
    /// the yield-weighted populations directly.
    std::string detection = "fluorescence";
    double t_acq = 500000.0;
    int n_absorbers = 500;
    double box_scale = 4.0;
    int folding_factor = 0;
    int padding = 4;
    double dt = 0.25;
    /// DSFD: transform window and which detection the pathways follow.
    double tau_f = 50.0;
    Detection reference = Detection::FD;
    std::vector<SweepAxis> sweep;
    std::uint64_t seed = 1;
    std::string output = "out";
    int workers = 0;

    void validate() const;
    bool operator==(const ExperimentConfig&) const = default;
};

/// Parses `key = value` lines ('#' starts a comment). Unknown keys, bad
/// values and invariant violations raise ParseError with the line number.
/// `preset = name` loads a named preset before later keys apply.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);

/// Named starting points: fd-low (1 meV), fd-intermediate (3 meV),
/// fd-replica (8 meV), hd-low (9 meV), hd-intermediate (27 meV),
/// hd-strong (56 meV), hd-fidelity (27 meV, 10000 absorbers),
/// dsfd-fd, dsfd-hd.
ExperimentConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

struct SweepPoint {
    /// (parameter, value) pairs in sweep order; T is always last.
    std::vector<std::pair<std::string, double>> coordinates;
    std::string file;
};

struct RunSummary {
    std::string manifest_path;
    std::vector<SweepPoint> points;
    double wall_time_s = 0.0;
};

/// Spectra for one configuration without any sweep, one per waiting time.
std::vector<Spectrum2D> compute_spectra(const ExperimentConfig& config);

/// Runs the cartesian product of the sweep axes, writes one spectrum file
/// per point and a manifest.json into config.output.
RunSummary run_experiment(const ExperimentConfig& config);

struct CutSpec {
    enum class Kind { Diagonal, Horizontal };
    Kind kind = Kind::Diagonal;
    double omega_3 = 0.0;

    /// "diagonal" or "horizontal:<eV>".
    static CutSpec parse(const std::string& text);
    std::string to_string() const;
};

struct LineCutReport {
    CutSpec cut;
    std::vector<double> axis;
    /// One curve per input spectrum, divided by the common maximum |Re|.
    std::vector<std::vector<double>> curves;
    std::vector<double> waiting_times;
    double normalization = 1.0;
};

/// Nearest-bin cut of Re S through each spectrum. All spectra must share
/// axes; they are normalized together (pairwise-max).
LineCutReport line_cut(const std::vector<Spectrum2D>& spectra, const CutSpec& cut);

struct PeakDelta {
    double omega_tau = 0.0;
    double omega_t = 0.0;
    int d_row = 0;
    int d_col = 0;
};

struct Comparison {
    double relative_l2 = 0.0;
    std::vector<PeakDelta> peak_deltas;
};

/// Relative L2 distance of max-normalized real parts, ||a' - b'|| / ||b'||.
/// If the axes differ, the finer spectrum is bilinearly resampled onto the
/// coarser one over the overlap. Peaks are local maxima of |Re a| above a
/// quarter of the maximum, matched to the nearest such peak of b.
Comparison compare_spectra(const Spectrum2D& a, const Spectrum2D& b);

}  // namespace twodes

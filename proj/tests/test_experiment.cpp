#include "doctest.h"

#include <twodes/errors.hpp>
#include <twodes/experiment.hpp>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace twodes;
namespace fs = std::filesystem;

namespace {

int nearest(const std::vector<double>& ax, double v) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(ax.size()); ++i)
        if (std::abs(ax[i] - v) < std::abs(ax[best] - v)) best = i;
    return best;
}

// Single-cell peak at (1.46, 1.46) on the default axes.
Spectrum2D delta_peak(double scale = 1.0) {
    const auto axes = unfold_axes(DelayGrid{}, FramePolicy{1.505, 0}, 4);
    Spectrum2D s;
    s.omega_tau = axes.first;
    s.omega_t = axes.second;
    s.data = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(s.omega_tau.size()),
                                    static_cast<Eigen::Index>(s.omega_t.size()));
    s.data(nearest(s.omega_tau, 1.46), nearest(s.omega_t, 1.46)) = cplx(scale, 0.3 * scale);
    return s;
}

Spectrum2D gaussian_peak(double x0, double y0, double w) {
    Spectrum2D s = delta_peak();
    for (Eigen::Index i = 0; i < s.data.rows(); ++i)
        for (Eigen::Index k = 0; k < s.data.cols(); ++k) {
            const double dx = s.omega_tau[i] - x0, dy = s.omega_t[k] - y0;
            s.data(i, k) = std::exp(-(dx * dx + dy * dy) / (2 * w * w));
        }
    return s;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("twodes_test_" + name);
    fs::remove_all(p);
    return p;
}

const char* kSmallFd =
    "scheme = FD\n"
    "component = R\n"
    "n_tau = 4\n"
    "n_t = 4\n"
    "waiting_times = 0\n"
    "peak_interaction = 3\n"
    "detection = population\n"
    "padding = 1\n";

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("empty config yields defaults") {
    const auto c = parse_config("");
    CHECK(c == ExperimentConfig{});
    CHECK(c.model.dephasing == 41.3e-3);
    CHECK(c.grid.n_tau == 31);
    CHECK(c.grid.n_t == 31);
    CHECK(c.grid.tau_step == 10.0);
    CHECK(c.grid.t_step == 10.0);
    CHECK(parse_config("# only a comment\n\n   \n") == ExperimentConfig{});
}

TEST_CASE("invalid values report the line") {
    try {
        parse_config("scheme = FD\n\nsigma = -1\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse_config("bogus = 1\n"), ParseError);
    CHECK_THROWS_AS(parse_config("sigma = 5\nsigma = 6\n"), ParseError);
    CHECK_THROWS_AS(parse_config("sigma\n"), ParseError);
    CHECK_THROWS_AS(parse_config("n_tau = 3.5\n"), ParseError);
    CHECK_THROWS_AS(parse_config("yields = 1, 2\n"), ParseError);
    CHECK_THROWS_AS(parse_config("sweep.dephasing = 1, 2\n"), ParseError);
    CHECK_THROWS_AS(parse_config("sweep.T = -5\n"), ParseError);
    CHECK_THROWS_AS(parse_config("scheme = DSFD\ncomponent = DQC\n"), ParseError);
    CHECK_THROWS_AS(parse_config("sigma = 5\npreset = fd-low\n"), ParseError);
    CHECK_THROWS_AS(parse_config("detection = camera\n"), ParseError);
}

TEST_CASE("serialize and parse round trip") {
    ExperimentConfig c = preset_config("hd-intermediate");
    c.model.dephasing = 0.0371;
    c.model.yields = {0.0, 0.7, 0.2, 0.1};
    c.pulse.sigma = 7.25;
    c.grid.waiting_times = {0.0, 12.5};
    c.sweep.push_back({"peak_interaction", {9.0, 27.0, 56.0}});
    c.sweep.push_back({"T", {0.0, 100.0}});
    c.seed = 123456789012345ULL;
    c.output = "some/dir";
    c.workers = 3;
    CHECK(parse_config(serialize_config(c)) == c);
    CHECK(parse_config(serialize_config(ExperimentConfig{})) == ExperimentConfig{});
}

TEST_CASE("presets") {
    for (const auto& name : preset_names()) {
        const auto c = parse_config("preset = " + name + "\n");
        CHECK(c == preset_config(name));
        CHECK_NOTHROW(c.validate());
    }
    CHECK(preset_config("fd-low").pulse.peak_interaction == 1.0);
    CHECK(preset_config("hd-strong").pulse.peak_interaction == 56.0);
    CHECK(preset_config("hd-fidelity").n_absorbers == 10000);
    CHECK(preset_config("dsfd-hd").reference == Detection::HD);
    CHECK(parse_config("preset = fd-replica\nsigma = 4\n").pulse.peak_interaction == 8.0);
    CHECK_THROWS_AS(preset_config("nope"), ValidationError);
}

TEST_CASE("cut specs") {
    CHECK(CutSpec::parse("diagonal").kind == CutSpec::Kind::Diagonal);
    const auto h = CutSpec::parse("horizontal:1.46");
    CHECK(h.kind == CutSpec::Kind::Horizontal);
    CHECK(h.omega_3 == 1.46);
    CHECK(h.to_string() == "horizontal:1.46");
    CHECK(CutSpec::parse(h.to_string()).omega_3 == h.omega_3);
    CHECK_THROWS_AS(CutSpec::parse("vertical:1"), ValidationError);
    CHECK_THROWS_AS(CutSpec::parse("horizontal:x"), ValidationError);
}

TEST_CASE("diagonal cut peaks at the absorber energy") {
    const auto s = gaussian_peak(1.46, 1.46, 0.01);
    const auto r = line_cut({s}, CutSpec::parse("diagonal"));
    REQUIRE(r.curves.size() == 1);
    const auto& c = r.curves[0];
    const auto top = std::max_element(c.begin(), c.end()) - c.begin();
    CHECK(std::abs(r.axis[top] - 1.46) <= 0.5 * (s.omega_tau[1] - s.omega_tau[0]));
    CHECK(c[top] == doctest::Approx(1.0));
}

TEST_CASE("horizontal cut is flat away from the peak column") {
    const auto s = delta_peak();
    const auto r = line_cut({s}, CutSpec::parse("horizontal:1.46"));
    const int peak = nearest(s.omega_tau, 1.46);
    REQUIRE(r.axis.size() == s.omega_tau.size());
    for (int i = 0; i < static_cast<int>(r.axis.size()); ++i) CHECK(r.curves[0][i] == (i == peak ? 1.0 : 0.0));
    // Off the peak row everything vanishes.
    const auto off = line_cut({s}, CutSpec::parse("horizontal:1.40"));
    for (double v : off.curves[0]) CHECK(v == 0.0);
    CHECK_THROWS_AS(line_cut({s}, CutSpec::parse("horizontal:9.0")), ValidationError);
    CHECK_THROWS_AS(line_cut({}, CutSpec{}), ValidationError);
}

TEST_CASE("cuts are scale invariant and normalized jointly") {
    const auto a = line_cut({gaussian_peak(1.46, 1.55, 0.02)}, CutSpec::parse("horizontal:1.55"));
    auto big = gaussian_peak(1.46, 1.55, 0.02);
    big.data *= 7.0;
    const auto b = line_cut({big}, CutSpec::parse("horizontal:1.55"));
    REQUIRE(a.curves[0].size() == b.curves[0].size());
    for (std::size_t i = 0; i < a.curves[0].size(); ++i)
        CHECK(a.curves[0][i] == doctest::Approx(b.curves[0][i]).epsilon(1e-14));
    CHECK(b.normalization == doctest::Approx(7.0 * a.normalization).epsilon(1e-14));

    auto half = gaussian_peak(1.46, 1.55, 0.02);
    half.data *= 0.5;
    const auto pair = line_cut({big, half}, CutSpec::parse("horizontal:1.55"));
    const double m0 = *std::max_element(pair.curves[0].begin(), pair.curves[0].end());
    const double m1 = *std::max_element(pair.curves[1].begin(), pair.curves[1].end());
    CHECK(m0 == doctest::Approx(1.0));
    CHECK(m1 == doctest::Approx(0.5 / 7.0));

    auto other = gaussian_peak(1.46, 1.55, 0.02);
    other.omega_t[0] -= 0.001;
    CHECK_THROWS_AS(line_cut({big, other}, CutSpec{}), StructuralError);
}

TEST_CASE("compare identical and scaled spectra") {
    const auto a = gaussian_peak(1.46, 1.55, 0.02);
    const auto self = compare_spectra(a, a);
    CHECK(self.relative_l2 == 0.0);
    REQUIRE(!self.peak_deltas.empty());
    for (const auto& d : self.peak_deltas) {
        CHECK(d.d_row == 0);
        CHECK(d.d_col == 0);
    }
    auto b = a;
    b.data *= 2.0;
    CHECK(compare_spectra(a, b).relative_l2 <= 1e-15);
}

TEST_CASE("compare reports peak shifts and rejects disjoint axes") {
    const auto a = gaussian_peak(1.46, 1.55, 0.02);
    const auto s = a.omega_tau[1] - a.omega_tau[0];
    const auto b = gaussian_peak(1.46 + 2 * s, 1.55, 0.02);
    const auto cmp = compare_spectra(a, b);
    CHECK(cmp.relative_l2 > 0.1);
    REQUIRE(cmp.peak_deltas.size() == 1);
    CHECK(cmp.peak_deltas[0].d_row == 2);
    CHECK(cmp.peak_deltas[0].d_col == 0);

    auto far = a;
    for (double& w : far.omega_tau) w += 10.0;
    CHECK_THROWS_AS(compare_spectra(a, far), ValidationError);
}

TEST_CASE("compare resamples differing axes") {
    const auto a = gaussian_peak(1.46, 1.55, 0.03);
    Spectrum2D fine;
    const double lo = a.omega_tau.front(), hi = a.omega_tau.back();
    const int n = 2 * static_cast<int>(a.omega_tau.size()) - 1;
    for (int i = 0; i < n; ++i) fine.omega_tau.push_back(lo + (hi - lo) * i / (n - 1));
    fine.omega_t = fine.omega_tau;
    fine.data.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const double dx = fine.omega_tau[i] - 1.46, dy = fine.omega_t[k] - 1.55;
            fine.data(i, k) = std::exp(-(dx * dx + dy * dy) / (2 * 0.03 * 0.03));
        }
    // Exact nodes coincide; only interpolation inside the coarse axis matters.
    CHECK(compare_spectra(a, fine).relative_l2 < 1e-12);
}

TEST_CASE("runs are byte-identical across worker counts") {
    std::vector<std::string> files;
    for (int w : {1, 4, 8}) {
        auto c = parse_config(kSmallFd);
        c.workers = w;
        c.output = scratch("workers" + std::to_string(w)).string();
        const auto summary = run_experiment(c);
        REQUIRE(summary.points.size() == 1);
        files.push_back(slurp(fs::path(c.output) / summary.points[0].file));
        fs::remove_all(c.output);
    }
    CHECK(!files[0].empty());
    CHECK(files[0] == files[1]);
    CHECK(files[0] == files[2]);
}

TEST_CASE("sweep points do not depend on their neighbours") {
    auto full = parse_config(std::string(kSmallFd) + "sweep.peak_interaction = 1, 3\nsweep.T = 0, 20\n");
    full.output = scratch("sweep_full").string();
    const auto all = run_experiment(full);
    CHECK(all.points.size() == 4);

    auto sub = parse_config(std::string(kSmallFd) + "sweep.peak_interaction = 3\nsweep.T = 20\n");
    sub.output = scratch("sweep_sub").string();
    const auto one = run_experiment(sub);
    REQUIRE(one.points.size() == 1);
    const auto& file = one.points[0].file;
    CHECK(file == "FD_R_peak_interaction=3_T=20.txt");
    CHECK(slurp(fs::path(full.output) / file) == slurp(fs::path(sub.output) / file));

    const auto manifest = nlohmann::json::parse(slurp(all.manifest_path));
    CHECK(manifest["format"] == "twodes-manifest v1");
    CHECK(manifest["points"].size() == 4);
    CHECK(manifest["failures"].empty());
    CHECK(parse_config(manifest["config"].get<std::string>()) == [&] {
        auto c = full;
        return c;
    }());
    const auto spectrum = read_spectrum_file((fs::path(full.output) / file).string());
    CHECK(spectrum.meta.peak_interaction == 3.0);
    CHECK(spectrum.meta.waiting_time == 20.0);
    fs::remove_all(full.output);
    fs::remove_all(sub.output);
}

TEST_CASE("failed sweep points are recorded in the manifest") {
    // A 10 keV coupling makes the fixed-step integrator diverge.
    auto c = parse_config(std::string(kSmallFd) + "sweep.peak_interaction = 3, 1e7\n");
    c.output = scratch("sweep_fail").string();
    CHECK_THROWS_AS(run_experiment(c), Error);
    const auto manifest = nlohmann::json::parse(slurp(fs::path(c.output) / "manifest.json"));
    CHECK(manifest["points"].size() == 1);
    CHECK(manifest["failures"].size() == 1);
    fs::remove_all(c.output);
}

}

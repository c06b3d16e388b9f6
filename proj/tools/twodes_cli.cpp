// Command-line front end: run sweeps, cut spectra, compare spectra.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "twodes/errors.hpp"
#include "twodes/experiment.hpp"

using nlohmann::json;

namespace {

int exit_code_for(const std::string& kind) {
    if (kind == "parse" || kind == "usage") return 2;
    if (kind == "validation" || kind == "structural" || kind == "unsupported" || kind == "calibration") return 3;
    return 1;
}

int fail(const std::string& kind, const std::string& message) {
    std::cerr << json{{"status", "error"}, {"kind", kind}, {"message", message}}.dump() << "\n";
    return exit_code_for(kind);
}

void emit(const json& payload, const std::string& out) {
    if (out.empty()) {
        std::cout << payload.dump(2) << "\n";
        return;
    }
    std::ofstream f(out);
    if (!f) throw twodes::ValidationError("cannot write '" + out + "'");
    f << payload.dump(2) << "\n";
    std::cout << json{{"status", "ok"}, {"report", out}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Non-perturbative 2D electronic spectroscopy simulator"};
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::string out;
    app.add_option("--seed", seed, "Override the configured seed");
    app.add_option("--workers", workers, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    app.add_option("--out", out, "Output directory (run) or report file (cut, compare)");

    auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
    std::string config_path;
    run->add_option("config", config_path, "key = value config file")->required();
    run->fallthrough();

    auto* cut = app.add_subcommand("cut", "Line cut through one or more spectra sharing axes");
    std::vector<std::string> cut_inputs;
    std::string cut_spec = "diagonal";
    cut->add_option("spectra", cut_inputs, "Spectrum files, optionally followed by the cut spec")->required();
    cut->add_option("--cut", cut_spec, "diagonal | horizontal:<omega_3 eV>");
    cut->fallthrough();

    auto* cmp = app.add_subcommand("compare", "Relative L2 and peak displacement between two spectra");
    std::string cmp_a, cmp_b;
    cmp->add_option("a", cmp_a, "First spectrum")->required();
    cmp->add_option("b", cmp_b, "Reference spectrum")->required();
    cmp->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what());
    }

    try {
        if (*run) {
            auto config = twodes::load_config(config_path);
            if (seed) config.seed = *seed;
            if (workers) config.workers = *workers;
            if (!out.empty()) config.output = out;
            const auto summary = twodes::run_experiment(config);
            json files = json::array();
            for (const auto& p : summary.points) files.push_back(p.file);
            std::cout << json{{"status", "ok"},
                              {"manifest", summary.manifest_path},
                              {"files", files},
                              {"wall_time_s", summary.wall_time_s}}
                             .dump(2)
                      << "\n";
        } else if (*cut) {
            // A trailing positional that names a cut overrides --cut.
            const auto& last = cut_inputs.back();
            if (cut_inputs.size() > 1 && (last == "diagonal" || last.rfind("horizontal:", 0) == 0)) {
                cut_spec = last;
                cut_inputs.pop_back();
            }
            std::vector<twodes::Spectrum2D> spectra;
            for (const auto& path : cut_inputs) spectra.push_back(twodes::read_spectrum_file(path));
            const auto report = twodes::line_cut(spectra, twodes::CutSpec::parse(cut_spec));
            emit({{"status", "ok"},
                  {"cut", report.cut.to_string()},
                  {"axis_eV", report.axis},
                  {"curves", report.curves},
                  {"waiting_times_fs", report.waiting_times},
                  {"inputs", cut_inputs},
                  {"normalization", report.normalization}},
                 out);
        } else if (*cmp) {
            const auto result =
                twodes::compare_spectra(twodes::read_spectrum_file(cmp_a), twodes::read_spectrum_file(cmp_b));
            json deltas = json::array();
            for (const auto& d : result.peak_deltas)
                deltas.push_back({{"omega_tau_eV", d.omega_tau}, {"omega_t_eV", d.omega_t}, {"d_row", d.d_row},
                                  {"d_col", d.d_col}});
            emit({{"status", "ok"}, {"relative_l2", result.relative_l2}, {"peak_deltas", deltas}}, out);
        }
    } catch (const twodes::Error& e) {
        return fail(e.kind(), e.what());
    } catch (const std::exception& e) {
        return fail("internal", e.what());
    }
    return 0;
}

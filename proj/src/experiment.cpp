#include "twodes/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "twodes/errors.hpp"

namespace twodes {

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::HD: return "HD";
        case Scheme::FD: return "FD";
        case Scheme::DSFD: return "DSFD";
    }
    return "?";
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "HD") return Scheme::HD;
    if (s == "FD") return Scheme::FD;
    if (s == "DSFD") return Scheme::DSFD;
    throw ValidationError("unknown scheme '" + s + "'");
}

namespace {

const std::vector<std::string> kSweepParameters{"peak_interaction", "sigma", "T", "t_acq", "n_absorbers"};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string short_fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

double to_double(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ValidationError("expected a number, got '" + s + "'");
    }
    if (used != s.size() || !std::isfinite(v)) throw ValidationError("expected a finite number, got '" + s + "'");
    return v;
}

long long to_int(const std::string& s) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &used);
    } catch (const std::exception&) {
        throw ValidationError("expected an integer, got '" + s + "'");
    }
    if (used != s.size()) throw ValidationError("expected an integer, got '" + s + "'");
    return v;
}

std::vector<double> to_list(const std::string& s) {
    std::string t = s;
    std::replace(t.begin(), t.end(), ',', ' ');
    std::istringstream in(t);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(to_double(tok));
    if (out.empty()) throw ValidationError("expected a non-empty list");
    return out;
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
    return out;
}

double positive(double v, const char* what) {
    if (!(v > 0.0)) throw ValidationError(std::string(what) + " must be positive");
    return v;
}

void check_sweep_value(const std::string& p, double v) {
    if (p == "T") {
        if (v < 0.0) throw ValidationError("waiting time must be non-negative");
    } else if (!(v > 0.0)) {
        throw ValidationError("sweep values for " + p + " must be positive");
    }
    if (p == "n_absorbers" && v != std::floor(v)) throw ValidationError("n_absorbers must be an integer");
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"e1", [](auto& c, auto& v) { c.model.e1 = positive(to_double(v), "e1"); }},
        {"e2", [](auto& c, auto& v) { c.model.e2 = positive(to_double(v), "e2"); }},
        {"gamma_10", [](auto& c, auto& v) { c.model.gamma_10 = positive(to_double(v), "gamma_10"); }},
        {"gamma_21", [](auto& c, auto& v) { c.model.gamma_21 = positive(to_double(v), "gamma_21"); }},
        {"gamma_32", [](auto& c, auto& v) { c.model.gamma_32 = positive(to_double(v), "gamma_32"); }},
        {"dephasing", [](auto& c, auto& v) { c.model.dephasing = positive(to_double(v), "dephasing"); }},
        {"yields",
         [](auto& c, auto& v) {
             auto y = to_list(v);
             if (y.size() != 4) throw ValidationError("yields needs four values");
             for (double x : y)
                 if (x < 0.0) throw ValidationError("yields must be non-negative");
             c.model.yields = y;
         }},
        {"scheme", [](auto& c, auto& v) { c.scheme = scheme_from_string(v); }},
        {"component", [](auto& c, auto& v) { c.component = component_from_string(v); }},
        {"reference",
         [](auto& c, auto& v) {
             if (v == "HD")
                 c.reference = Detection::HD;
             else if (v == "FD")
                 c.reference = Detection::FD;
             else
                 throw ValidationError("reference must be HD or FD");
         }},
        {"tau_step", [](auto& c, auto& v) { c.grid.tau_step = positive(to_double(v), "tau_step"); }},
        {"t_step", [](auto& c, auto& v) { c.grid.t_step = positive(to_double(v), "t_step"); }},
        {"n_tau", [](auto& c, auto& v) { c.grid.n_tau = static_cast<int>(to_int(v)); }},
        {"n_t", [](auto& c, auto& v) { c.grid.n_t = static_cast<int>(to_int(v)); }},
        {"waiting_times", [](auto& c, auto& v) { c.grid.waiting_times = to_list(v); }},
        {"sigma", [](auto& c, auto& v) { c.pulse.sigma = positive(to_double(v), "sigma"); }},
        {"peak_interaction",
         [](auto& c, auto& v) { c.pulse.peak_interaction = positive(to_double(v), "peak_interaction"); }},
        {"carrier", [](auto& c, auto& v) { c.pulse.carrier = positive(to_double(v), "carrier"); }},
        {"detection",
         [](auto& c, auto& v) {
             if (v != "fluorescence" && v != "population")
                 throw ValidationError("detection must be fluorescence or population");
             c.detection = v;
         }},
        {"t_acq", [](auto& c, auto& v) { c.t_acq = positive(to_double(v), "t_acq"); }},
        {"n_absorbers", [](auto& c, auto& v) { c.n_absorbers = static_cast<int>(to_int(v)); }},
        {"box_scale", [](auto& c, auto& v) { c.box_scale = positive(to_double(v), "box_scale"); }},
        {"folding_factor", [](auto& c, auto& v) { c.folding_factor = static_cast<int>(to_int(v)); }},
        {"padding", [](auto& c, auto& v) { c.padding = static_cast<int>(to_int(v)); }},
        {"dt", [](auto& c, auto& v) { c.dt = positive(to_double(v), "dt"); }},
        {"tau_f", [](auto& c, auto& v) { c.tau_f = positive(to_double(v), "tau_f"); }},
        {"seed",
         [](auto& c, auto& v) {
             if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
                 throw ValidationError("seed must be a non-negative integer");
             c.seed = std::stoull(v);
         }},
        {"output",
         [](auto& c, auto& v) {
             if (v.empty()) throw ValidationError("output must not be empty");
             c.output = v;
         }},
        {"workers", [](auto& c, auto& v) { c.workers = static_cast<int>(to_int(v)); }},
    };
    return table;
}

}  // namespace

void ExperimentConfig::validate() const {
    grid.validate();
    for (double v : {model.e1, model.e2, model.gamma_10, model.gamma_21, model.gamma_32, model.dephasing})
        if (!(v > 0.0)) throw ValidationError("model parameters must be positive");
    if (!(pulse.sigma > 0.0) || !(pulse.peak_interaction > 0.0) || !(pulse.carrier > 0.0))
        throw ValidationError("pulse parameters must be positive");
    if (!(t_acq > 0.0)) throw ValidationError("t_acq must be positive");
    if (n_absorbers < 1) throw ValidationError("n_absorbers must be at least 1");
    if (!(box_scale > 0.0)) throw ValidationError("box_scale must be positive");
    if (folding_factor < 0) throw ValidationError("folding_factor must be non-negative");
    if (padding < 1) throw ValidationError("padding must be at least 1");
    if (!(dt > 0.0) || !(tau_f > 0.0)) throw ValidationError("dt and tau_f must be positive");
    if (workers < 0) throw ValidationError("workers must be non-negative");
    if (scheme == Scheme::DSFD && component == Component::DQC)
        throw ValidationError("DSFD reference spectra do not cover DQC");
    std::vector<std::string> seen;
    for (const auto& axis : sweep) {
        if (std::find(kSweepParameters.begin(), kSweepParameters.end(), axis.parameter) == kSweepParameters.end())
            throw ValidationError("cannot sweep '" + axis.parameter + "'");
        if (std::find(seen.begin(), seen.end(), axis.parameter) != seen.end())
            throw ValidationError("duplicate sweep over " + axis.parameter);
        seen.push_back(axis.parameter);
        if (axis.values.empty()) throw ValidationError("empty sweep over " + axis.parameter);
        for (double v : axis.values) check_sweep_value(axis.parameter, v);
    }
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig c;
    std::istringstream in(text);
    std::string raw;
    int line = 0, last = 0;
    std::vector<std::string> keys_seen;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (body.empty()) continue;
        last = line;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ParseError("expected 'key = value'", line);
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (std::find(keys_seen.begin(), keys_seen.end(), key) != keys_seen.end())
            throw ParseError("duplicate key '" + key + "'", line);
        keys_seen.push_back(key);
        try {
            if (key == "preset") {
                if (keys_seen.size() != 1) throw ValidationError("preset must be the first key");
                c = preset_config(value);
            } else if (key.rfind("sweep.", 0) == 0) {
                const std::string p = key.substr(6);
                if (std::find(kSweepParameters.begin(), kSweepParameters.end(), p) == kSweepParameters.end())
                    throw ValidationError("unknown sweep parameter '" + p + "'");
                auto values = to_list(value);
                for (double v : values) check_sweep_value(p, v);
                c.sweep.push_back({p, values});
            } else {
                const auto it = setters().find(key);
                if (it == setters().end()) throw ValidationError("unknown key '" + key + "'");
                it->second(c, value);
            }
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(e.what(), line);
        }
    }
    try {
        c.validate();
    } catch (const Error& e) {
        throw ParseError(e.what(), last);
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
    std::ostringstream o;
    auto kv = [&](const std::string& k, const std::string& v) { o << k << " = " << v << "\n"; };
    kv("scheme", to_string(c.scheme));
    kv("component", to_string(c.component));
    kv("reference", to_string(c.reference));
    kv("e1", fmt(c.model.e1));
    kv("e2", fmt(c.model.e2));
    kv("gamma_10", fmt(c.model.gamma_10));
    kv("gamma_21", fmt(c.model.gamma_21));
    kv("gamma_32", fmt(c.model.gamma_32));
    kv("dephasing", fmt(c.model.dephasing));
    kv("yields", join(c.model.yields));
    kv("tau_step", fmt(c.grid.tau_step));
    kv("t_step", fmt(c.grid.t_step));
    kv("n_tau", std::to_string(c.grid.n_tau));
    kv("n_t", std::to_string(c.grid.n_t));
    kv("waiting_times", join(c.grid.waiting_times));
    kv("sigma", fmt(c.pulse.sigma));
    kv("peak_interaction", fmt(c.pulse.peak_interaction));
    kv("carrier", fmt(c.pulse.carrier));
    kv("detection", c.detection);
    kv("t_acq", fmt(c.t_acq));
    kv("n_absorbers", std::to_string(c.n_absorbers));
    kv("box_scale", fmt(c.box_scale));
    kv("folding_factor", std::to_string(c.folding_factor));
    kv("padding", std::to_string(c.padding));
    kv("dt", fmt(c.dt));
    kv("tau_f", fmt(c.tau_f));
    for (const auto& axis : c.sweep) kv("sweep." + axis.parameter, join(axis.values));
    kv("seed", std::to_string(c.seed));
    kv("output", c.output);
    kv("workers", std::to_string(c.workers));
    return o.str();
}

std::vector<std::string> preset_names() {
    return {"fd-low", "fd-intermediate", "fd-replica", "hd-low", "hd-intermediate", "hd-strong", "hd-fidelity",
            "dsfd-fd", "dsfd-hd"};
}

ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig c;
    if (name == "fd-low" || name == "fd-intermediate" || name == "fd-replica") {
        c.scheme = Scheme::FD;
        c.pulse.peak_interaction = name == "fd-low" ? 1.0 : name == "fd-intermediate" ? 3.0 : 8.0;
    } else if (name == "hd-low" || name == "hd-intermediate" || name == "hd-strong" || name == "hd-fidelity") {
        c.scheme = Scheme::HD;
        c.pulse.peak_interaction = name == "hd-low" ? 9.0 : name == "hd-strong" ? 56.0 : 27.0;
        if (name == "hd-fidelity") c.n_absorbers = 10000;
    } else if (name == "dsfd-fd" || name == "dsfd-hd") {
        c.scheme = Scheme::DSFD;
        c.reference = name == "dsfd-fd" ? Detection::FD : Detection::HD;
    } else {
        throw ValidationError("unknown preset '" + name + "'");
    }
    return c;
}

namespace {

DetectionMode detection_mode(const ExperimentConfig& c) {
    return c.detection == "population" ? DetectionMode::population() : DetectionMode::fluorescence(c.t_acq);
}

std::vector<Component> scan_components(Component c) {
    if (c == Component::Total) return {Component::Rephasing, Component::Nonrephasing};
    return {c};
}

SpectrumMetadata metadata(const ExperimentConfig& c, double T) {
    SpectrumMetadata m;
    m.scheme = to_string(c.scheme);
    if (c.scheme == Scheme::DSFD) m.scheme += "-" + to_string(c.reference);
    m.component = to_string(c.component);
    m.waiting_time = T;
    m.peak_interaction = c.pulse.peak_interaction;
    m.sigma = c.pulse.sigma;
    m.seed = c.seed;
    m.folding_factor = c.folding_factor;
    m.carrier = c.pulse.carrier;
    const bool fd = c.scheme == Scheme::FD || (c.scheme == Scheme::DSFD && c.reference == Detection::FD);
    if (fd) {
        m.extra["detection"] = c.detection;
        m.extra["t_acq_fs"] = fmt(c.t_acq);
    }
    if (c.scheme == Scheme::HD) {
        m.extra["n_absorbers"] = std::to_string(c.n_absorbers);
        m.extra["box_scale"] = fmt(c.box_scale);
    }
    if (c.scheme == Scheme::DSFD) m.extra["tau_f_fs"] = fmt(c.tau_f);
    return m;
}

Spectrum2D combine(std::vector<Spectrum2D> parts) {
    if (parts.size() == 1) return parts.front();
    return total_correlation(parts[0], parts[1]);
}

}  // namespace

std::vector<Spectrum2D> compute_spectra(const ExperimentConfig& c) {
    c.validate();
    const QuantumSystem system = dimer_model(c.model);
    const FramePolicy policy{c.pulse.carrier, c.folding_factor};
    const auto axes = unfold_axes(c.grid, policy, c.padding, &system);
    const LindbladGenerator gen(system, c.pulse.carrier);
    TrainPropagatorOptions popts;
    popts.dt = c.dt;
    const TrainPropagator prop(gen, popts);
    const auto taus = c.grid.tau_values();
    const auto ts = c.grid.t_values();
    const auto comps = scan_components(c.component);

    std::vector<Spectrum2D> out;
    if (c.scheme == Scheme::FD) {
        FdScanConfig fc;
        fc.pulse = c.pulse;
        fc.workers = c.workers;
        const Readout readout(gen, detection_mode(c));
        std::vector<ComponentSignature> sigs;
        for (auto comp : comps) sigs.push_back(ComponentSignature::of(comp));
        for (double T : c.grid.waiting_times) {
            auto cubes = fd_signal_scan(prop, fc, sigs, taus, T, ts, readout);
            std::vector<Spectrum2D> parts;
            for (std::size_t i = 0; i < comps.size(); ++i)
                parts.push_back(fourier_2d(cubes.at(sigs[i]), c.grid, comps[i], policy,
                                           [&] {
                                               auto o = FourierOptions::for_population_signal();
                                               o.padding = c.padding;
                                               return o;
                                           }()));
            out.push_back(combine(std::move(parts)));
        }
    } else if (c.scheme == Scheme::HD) {
        EnsembleConfig ec;
        ec.n_absorbers = c.n_absorbers;
        ec.box_scale = c.box_scale;
        ec.rng_seed = c.seed;
        ec.carrier = c.pulse.carrier;
        const auto positions = sample_positions(ec);
        const auto k = ec.geometry();
        HdScanConfig hc;
        hc.pulse = c.pulse;
        hc.wavevectors.assign(k.begin(), k.end());
        hc.workers = c.workers;
        FourierOptions fo;
        fo.padding = c.padding;
        for (double T : c.grid.waiting_times) {
            auto cubes = hd_signal_scan(prop, hc, positions, comps, taus, T, ts);
            std::vector<Spectrum2D> parts;
            for (auto comp : comps) parts.push_back(fourier_2d(cubes.at(comp), c.grid, comp, policy, fo));
            out.push_back(combine(std::move(parts)));
        }
    } else {
        DsfdOptions dopts;
        dopts.tau_f = c.tau_f;
        dopts.workers = c.workers;
        dopts.acquisition.mode = detection_mode(c);
        dopts.acquisition.delay = popts.window_sigmas * c.pulse.sigma;
        for (double T : c.grid.waiting_times)
            out.push_back(dsfd_spectrum(gen, c.reference, c.component, T, axes.first, axes.second, dopts));
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].omega_tau = axes.first;
        out[i].omega_t = axes.second;
        out[i].meta = metadata(c, c.grid.waiting_times[i]);
    }
    return out;
}

RunSummary run_experiment(const ExperimentConfig& config) {
    config.validate();
    const auto started = std::chrono::steady_clock::now();
    namespace fs = std::filesystem;
    fs::create_directories(config.output);

    std::vector<SweepAxis> axes;
    std::vector<double> waits = config.grid.waiting_times;
    for (const auto& a : config.sweep) {
        if (a.parameter == "T")
            waits = a.values;
        else
            axes.push_back(a);
    }

    std::size_t combos = 1;
    for (const auto& a : axes) combos *= a.values.size();

    RunSummary summary;
    std::vector<std::string> failures;
    nlohmann::json points = nlohmann::json::array();
    for (std::size_t idx = 0; idx < combos; ++idx) {
        ExperimentConfig c = config;
        c.sweep.clear();
        c.grid.waiting_times = waits;
        std::vector<std::pair<std::string, double>> coords;
        std::size_t rest = idx;
        for (std::size_t a = axes.size(); a-- > 0;) {
            const auto& ax = axes[a];
            const double v = ax.values[rest % ax.values.size()];
            rest /= ax.values.size();
            coords.insert(coords.begin(), {ax.parameter, v});
            if (ax.parameter == "peak_interaction")
                c.pulse.peak_interaction = v;
            else if (ax.parameter == "sigma")
                c.pulse.sigma = v;
            else if (ax.parameter == "t_acq")
                c.t_acq = v;
            else if (ax.parameter == "n_absorbers")
                c.n_absorbers = static_cast<int>(v);
        }
        std::string where;
        for (const auto& [p, v] : coords) where += (where.empty() ? "" : ", ") + p + "=" + short_fmt(v);
        try {
            const auto spectra = compute_spectra(c);
            for (std::size_t w = 0; w < spectra.size(); ++w) {
                SweepPoint pt;
                pt.coordinates = coords;
                pt.coordinates.emplace_back("T", waits[w]);
                std::string name = to_string(config.scheme) + "_" + to_string(config.component);
                for (const auto& [p, v] : pt.coordinates) name += "_" + p + "=" + short_fmt(v);
                pt.file = name + ".txt";
                write_spectrum_file((fs::path(config.output) / pt.file).string(), spectra[w]);
                nlohmann::json jc = nlohmann::json::object();
                for (const auto& [p, v] : pt.coordinates) jc[p] = v;
                points.push_back({{"file", pt.file}, {"coordinates", jc}});
                summary.points.push_back(std::move(pt));
            }
        } catch (const std::exception& e) {
            failures.push_back("[" + (where.empty() ? std::string("base") : where) + "] " + e.what());
        }
    }

    summary.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    nlohmann::json manifest = {
        {"format", "twodes-manifest v1"},
        {"scheme", to_string(config.scheme)},
        {"component", to_string(config.component)},
        {"seed", config.seed},
        {"config", serialize_config(config)},
        {"points", points},
        {"failures", failures},
        {"timing", {{"wall_time_s", summary.wall_time_s}}},
    };
    summary.manifest_path = (fs::path(config.output) / "manifest.json").string();
    std::ofstream(summary.manifest_path) << manifest.dump(2) << "\n";
    if (!failures.empty()) {
        std::string msg = std::to_string(failures.size()) + " sweep point(s) failed:";
        for (const auto& f : failures) msg += " " + f;
        throw Error("sweep", msg);
    }
    return summary;
}

CutSpec CutSpec::parse(const std::string& text) {
    CutSpec c;
    if (text == "diagonal") return c;
    const std::string prefix = "horizontal:";
    if (text.rfind(prefix, 0) == 0) {
        c.kind = Kind::Horizontal;
        c.omega_3 = to_double(text.substr(prefix.size()));
        return c;
    }
    throw ValidationError("cut must be 'diagonal' or 'horizontal:<eV>', got '" + text + "'");
}

std::string CutSpec::to_string() const {
    return kind == Kind::Diagonal ? "diagonal" : "horizontal:" + short_fmt(omega_3);
}

namespace {

bool same_axis(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > 1e-12 * std::max(1.0, std::abs(a[i]))) return false;
    return true;
}

}  // namespace

LineCutReport line_cut(const std::vector<Spectrum2D>& spectra, const CutSpec& cut) {
    if (spectra.empty()) throw ValidationError("line cut needs at least one spectrum");
    for (const auto& s : spectra) {
        s.validate();
        if (!same_axis(s.omega_tau, spectra[0].omega_tau) || !same_axis(s.omega_t, spectra[0].omega_t))
            throw StructuralError("spectra in one cut must share axes");
    }
    const auto& w1 = spectra[0].omega_tau;
    const auto& w3 = spectra[0].omega_t;
    const double step3 = w3.size() > 1 ? w3[1] - w3[0] : 0.0;
    LineCutReport r;
    r.cut = cut;
    std::vector<std::pair<int, int>> cells;
    if (cut.kind == CutSpec::Kind::Horizontal) {
        if (cut.omega_3 < w3.front() - 0.5 * step3 || cut.omega_3 > w3.back() + 0.5 * step3)
            throw ValidationError("cut at omega_3 = " + short_fmt(cut.omega_3) + " eV lies outside the axis");
        const int col = nearest_index(w3, cut.omega_3);
        for (int i = 0; i < static_cast<int>(w1.size()); ++i) {
            r.axis.push_back(w1[i]);
            cells.emplace_back(i, col);
        }
    } else {
        for (int i = 0; i < static_cast<int>(w1.size()); ++i) {
            if (w1[i] < w3.front() - 0.5 * step3 || w1[i] > w3.back() + 0.5 * step3) continue;
            r.axis.push_back(w1[i]);
            cells.emplace_back(i, nearest_index(w3, w1[i]));
        }
        if (cells.empty()) throw ValidationError("diagonal does not intersect the spectrum");
    }
    double peak = 0.0;
    for (const auto& s : spectra) {
        std::vector<double> curve;
        for (auto [i, k] : cells) curve.push_back(s.data(i, k).real());
        for (double v : curve) peak = std::max(peak, std::abs(v));
        r.curves.push_back(std::move(curve));
        r.waiting_times.push_back(s.meta.waiting_time);
    }
    r.normalization = peak > 0.0 ? peak : 1.0;
    for (auto& curve : r.curves)
        for (double& v : curve) v /= r.normalization;
    return r;
}

namespace {

double axis_step(const std::vector<double>& a) {
    return a.size() > 1 ? (a.back() - a.front()) / static_cast<double>(a.size() - 1) : 0.0;
}

// Bilinear sample of Re S at (x, y); the point must lie inside the axes.
double sample_real(const Spectrum2D& s, double x, double y) {
    auto locate = [](const std::vector<double>& ax, double v, int& i, double& f) {
        if (ax.size() == 1) {
            i = 0;
            f = 0.0;
            return;
        }
        auto it = std::upper_bound(ax.begin(), ax.end(), v);
        i = static_cast<int>(std::clamp<std::ptrdiff_t>(it - ax.begin() - 1, 0, static_cast<std::ptrdiff_t>(ax.size()) - 2));
        f = std::clamp((v - ax[i]) / (ax[i + 1] - ax[i]), 0.0, 1.0);
    };
    int i = 0, k = 0;
    double fx = 0.0, fy = 0.0;
    locate(s.omega_tau, x, i, fx);
    locate(s.omega_t, y, k, fy);
    const int i1 = std::min<int>(i + 1, static_cast<int>(s.omega_tau.size()) - 1);
    const int k1 = std::min<int>(k + 1, static_cast<int>(s.omega_t.size()) - 1);
    const auto re = [&](int a, int b) { return s.data(a, b).real(); };
    return (1 - fx) * (1 - fy) * re(i, k) + fx * (1 - fy) * re(i1, k) + (1 - fx) * fy * re(i, k1) +
           fx * fy * re(i1, k1);
}

std::vector<std::pair<int, int>> find_peaks(const Eigen::MatrixXd& m) {
    std::vector<std::pair<int, int>> out;
    const double top = m.cwiseAbs().maxCoeff();
    if (!(top > 0.0)) return out;
    for (int i = 0; i < m.rows(); ++i)
        for (int k = 0; k < m.cols(); ++k) {
            const double v = std::abs(m(i, k));
            if (v < 0.25 * top) continue;
            bool best = true;
            for (int di = -1; di <= 1 && best; ++di)
                for (int dk = -1; dk <= 1; ++dk) {
                    const int a = i + di, b = k + dk;
                    if ((di || dk) && a >= 0 && b >= 0 && a < m.rows() && b < m.cols() && std::abs(m(a, b)) > v) {
                        best = false;
                        break;
                    }
                }
            if (best) out.emplace_back(i, k);
        }
    return out;
}

}  // namespace

Comparison compare_spectra(const Spectrum2D& a, const Spectrum2D& b) {
    a.validate();
    b.validate();
    std::vector<double> x1, x3;
    if (same_axis(a.omega_tau, b.omega_tau) && same_axis(a.omega_t, b.omega_t)) {
        x1 = a.omega_tau;
        x3 = a.omega_t;
    } else {
        auto overlap = [](const std::vector<double>& p, const std::vector<double>& q, const std::vector<double>& coarse) {
            const double lo = std::max(p.front(), q.front()), hi = std::min(p.back(), q.back());
            std::vector<double> out;
            for (double v : coarse)
                if (v >= lo - 1e-12 && v <= hi + 1e-12) out.push_back(v);
            return out;
        };
        const auto& c1 = axis_step(a.omega_tau) >= axis_step(b.omega_tau) ? a.omega_tau : b.omega_tau;
        const auto& c3 = axis_step(a.omega_t) >= axis_step(b.omega_t) ? a.omega_t : b.omega_t;
        x1 = overlap(a.omega_tau, b.omega_tau, c1);
        x3 = overlap(a.omega_t, b.omega_t, c3);
        if (x1.empty() || x3.empty()) throw ValidationError("spectra have disjoint axes");
    }
    const auto n1 = static_cast<Eigen::Index>(x1.size()), n3 = static_cast<Eigen::Index>(x3.size());
    Eigen::MatrixXd ra(n1, n3), rb(n1, n3);
    for (Eigen::Index i = 0; i < n1; ++i)
        for (Eigen::Index k = 0; k < n3; ++k) {
            ra(i, k) = sample_real(a, x1[i], x3[k]);
            rb(i, k) = sample_real(b, x1[i], x3[k]);
        }
    const double ma = ra.cwiseAbs().maxCoeff(), mb = rb.cwiseAbs().maxCoeff();
    if (ma > 0.0) ra /= ma;
    if (mb > 0.0) rb /= mb;
    Comparison out;
    const double denom = rb.norm();
    const double diff = (ra - rb).norm();
    out.relative_l2 = denom > 0.0 ? diff / denom : (diff > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    const auto pa = find_peaks(ra), pb = find_peaks(rb);
    for (auto [i, k] : pa) {
        if (pb.empty()) break;
        auto best = pb.front();
        long bestd = std::numeric_limits<long>::max();
        for (auto [j, l] : pb) {
            const long d = static_cast<long>(j - i) * (j - i) + static_cast<long>(l - k) * (l - k);
            if (d < bestd) {
                bestd = d;
                best = {j, l};
            }
        }
        out.peak_deltas.push_back({x1[i], x3[k], best.first - i, best.second - k});
    }
    return out;
}

}  // namespace twodes

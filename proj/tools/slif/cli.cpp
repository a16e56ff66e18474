#include "cli.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif

#include <slif/calibrate.hpp>
#include <slif/error.hpp>
#include <slif/integrator.hpp>
#include <slif/json_io.hpp>
#include <slif/response.hpp>
#include <slif/stimulus.hpp>
#include <slif/sweep.hpp>
#include <slif/version.hpp>

namespace slif::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string command;
    fs::path config;
    fs::path out;
    unsigned jobs = 0;
    long long seed = 0; // reserved; no command is stochastic
};

[[noreturn]] void config_error(const std::string& what) {
    throw Error(ErrorCode::invalid_config, what);
}

Json load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) config_error("cannot open config file " + path.string());
    try {
        return Json::parse(in);
    }
    catch (const Json::parse_error& e) {
        config_error(path.string() + ": " + e.what());
    }
}

// The top-level keys a command accepts; anything else is rejected before
// any work starts.
void check_keys(const Json& doc, const std::string& command, std::set<std::string> allowed) {
    if (!doc.is_object()) config_error("config: expected a JSON object");
    allowed.insert("command");
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (!allowed.count(it.key())) config_error("config." + it.key() + ": unknown key for " + command);
    }
    if (doc.contains("command")) {
        if (!doc["command"].is_string() || doc["command"].get<std::string>() != command) {
            config_error("config.command: does not match subcommand " + command);
        }
    }
}

const Json& require(const Json& doc, const std::string& key) {
    if (!doc.contains(key)) config_error("config." + key + ": required");
    return doc[key];
}

NeuronParams read_neuron(const Json& doc, bool needs_threshold) {
    const Json empty = Json::object();
    const Json& block = doc.contains("neuron") ? doc["neuron"] : empty;
    if (needs_threshold && !(block.is_object() && block.contains("v_th_mV"))) {
        config_error("neuron.v_th_mV: required when firing is enabled");
    }
    return neuron_from_json(block);
}

std::optional<IntegratorConfig> read_integrator(const Json& doc, const NeuronParams& params) {
    if (!doc.contains("integrator")) return std::nullopt;
    return integrator_from_json(doc["integrator"], "integrator", IntegratorConfig::defaults_for(params));
}

IstScan read_scan(const Json& doc) {
    if (!doc.contains("scan")) return IstScan{};
    return scan_from_json(doc["scan"]);
}

double read_number(const Json& block, const std::string& where, const std::string& key, double fallback) {
    if (!block.contains(key)) return fallback;
    if (!block[key].is_number()) config_error(where + "." + key + ": expected a number");
    return block[key].get<double>();
}

// A stimulus object holds exactly one of: spike_times_ms, csv, ist_ms (pair
// with optional onset_ms) or period_ms + count (with optional onset_ms).
SpikeTrain read_stimulus(const Json& block, const std::string& where, const fs::path& base_dir,
                         const std::set<std::string>& extra_keys = {}) {
    if (!block.is_object()) config_error(where + ": expected a JSON object");
    std::set<std::string> known{"spike_times_ms", "csv", "ist_ms", "period_ms", "count", "onset_ms"};
    known.insert(extra_keys.begin(), extra_keys.end());
    for (auto it = block.begin(); it != block.end(); ++it) {
        if (!known.count(it.key())) config_error(where + "." + it.key() + ": unknown key");
    }
    int modes = block.contains("spike_times_ms") + block.contains("csv") + block.contains("ist_ms") + block.contains("period_ms");
    if (modes != 1) config_error(where + ": give exactly one of spike_times_ms, csv, ist_ms, period_ms");

    try {
        if (block.contains("spike_times_ms")) {
            const Json& arr = block["spike_times_ms"];
            if (!arr.is_array()) config_error(where + ".spike_times_ms: expected an array of numbers");
            std::vector<double> times;
            for (const auto& x: arr) {
                if (!x.is_number()) config_error(where + ".spike_times_ms: expected an array of numbers");
                times.push_back(x.get<double>());
            }
            return SpikeTrain(std::move(times));
        }
        if (block.contains("csv")) {
            if (!block["csv"].is_string()) config_error(where + ".csv: expected a path");
            fs::path p = block["csv"].get<std::string>();
            return read_spike_train_csv(p.is_absolute() ? p : base_dir/p);
        }
        double onset = read_number(block, where, "onset_ms", default_pair_onset);
        if (block.contains("ist_ms")) return pair(onset, read_number(block, where, "ist_ms", 0.0));
        if (!block.contains("count") || !block["count"].is_number_integer()) {
            config_error(where + ".count: required integer with period_ms");
        }
        return periodic(onset, read_number(block, where, "period_ms", 0.0), block["count"].get<int>());
    }
    catch (const Error& e) {
        if (e.code() == ErrorCode::invalid_config) throw;
        config_error(where + ": " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
    out << text << '\n';
}

struct RunSummary {
    double peak_amplitude = 0.0;
    std::vector<double> spike_times;
};

// Peak of the recorded trace; a run that fired reached v_th even though the
// reset hides the crossing from the samples.
RunSummary summarise(const Trace& trace, const NeuronParams& params) {
    RunSummary s;
    s.peak_amplitude = peak_amplitude(trace, params.v_rest);
    if (!trace.output_spikes.empty()) s.peak_amplitude = std::max(s.peak_amplitude, params.v_th - params.v_rest);
    for (const auto& e: trace.output_spikes) s.spike_times.push_back(e.time);
    return s;
}

Json summary_json(const RunSummary& s) {
    Json j;
    j["peak_amplitude_mV"] = s.peak_amplitude;
    j["spike_count"] = s.spike_times.size();
    j["output_spike_times_ms"] = s.spike_times;
    return j;
}

struct Context {
    const Options& opt;
    std::ostream& out;
    std::ostream& err;

    fs::path base_dir() const { return opt.config.parent_path(); }

    void warn_stability(const IntegratorConfig& cfg, const NeuronParams& params) const {
        if (auto w = cfg.stability_warning(params)) err << "warning: " << *w << '\n';
    }
};

double read_horizon(const Json& doc, const NeuronParams& params, const SpikeTrain& inputs) {
    double h = read_number(doc, "config", "horizon_ms", default_horizon(params, inputs));
    if (!(h > 0)) config_error("config.horizon_ms: must be > 0");
    if (!inputs.empty() && inputs.back() >= h) config_error("config.horizon_ms: must exceed the last spike time");
    return h;
}

int cmd_simulate(const Context& ctx, const Json& doc) {
    check_keys(doc, "simulate", {"neuron", "integrator", "stimulus", "horizon_ms", "firing"});
    bool firing = true;
    if (doc.contains("firing")) {
        if (!doc["firing"].is_boolean()) config_error("config.firing: expected true or false");
        firing = doc["firing"].get<bool>();
    }
    NeuronParams params = read_neuron(doc, firing);
    IntegratorConfig cfg = read_integrator(doc, params).value_or(IntegratorConfig::defaults_for(params));
    SpikeTrain inputs = read_stimulus(require(doc, "stimulus"), "stimulus", ctx.base_dir());
    double horizon = read_horizon(doc, params, inputs);
    ctx.warn_stability(cfg, params);

    Trace trace = simulate(params, inputs, horizon, cfg, firing);
    write_trace_csv(ctx.opt.out/"trace.csv", trace);

    Json j = summary_json(summarise(trace, params));
    j["horizon_ms"] = horizon;
    j["input_spike_times_ms"] = std::vector<double>(inputs.times().begin(), inputs.times().end());
    j["neuron"] = to_json(params);
    j["integrator"] = to_json(cfg);
    write_text(ctx.opt.out/"summary.json", j.dump(2));
    ctx.out << "peak amplitude " << j["peak_amplitude_mV"].get<double>() << " mV, "
            << j["spike_count"].get<std::size_t>() << " output spikes\n";
    return exit_ok;
}

// Several labelled stimuli run on one or more model kinds, one trace CSV per
// (kind, run): trace_<kind>_<label>.csv.
int cmd_compare(const Context& ctx, const Json& doc) {
    check_keys(doc, "compare", {"neuron", "integrator", "runs", "kinds", "horizon_ms", "firing"});
    bool firing = true;
    if (doc.contains("firing")) {
        if (!doc["firing"].is_boolean()) config_error("config.firing: expected true or false");
        firing = doc["firing"].get<bool>();
    }
    NeuronParams base = read_neuron(doc, firing);

    std::vector<ModelKind> kinds{base.kind};
    if (doc.contains("kinds")) {
        const Json& arr = doc["kinds"];
        if (!arr.is_array() || arr.empty()) config_error("config.kinds: expected a non-empty array");
        kinds.clear();
        for (const auto& k: arr) {
            if (k == "slif") kinds.push_back(ModelKind::slif);
            else if (k == "lif") kinds.push_back(ModelKind::lif);
            else config_error("config.kinds: expected \"slif\" or \"lif\" entries");
        }
    }

    const Json& runs = require(doc, "runs");
    if (!runs.is_array() || runs.empty()) config_error("config.runs: expected a non-empty array");
    struct Run { std::string label; SpikeTrain inputs; };
    std::vector<Run> parsed;
    std::set<std::string> labels;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        std::string where = "runs[" + std::to_string(i) + "]";
        const Json& r = runs[i];
        if (!r.is_object() || !r.contains("label") || !r["label"].is_string()) config_error(where + ".label: required string");
        std::string label = r["label"].get<std::string>();
        bool safe = !label.empty() && std::all_of(label.begin(), label.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
        });
        if (!safe) config_error(where + ".label: use letters, digits, '_', '-' or '.'");
        if (!labels.insert(label).second) config_error(where + ".label: duplicate " + label);
        parsed.push_back({label, read_stimulus(r, where, ctx.base_dir(), {"label"})});
    }

    Json summary;
    for (ModelKind kind: kinds) {
        NeuronParams params = base;
        params.kind = kind;
        params.validate();
        IntegratorConfig cfg = read_integrator(doc, params).value_or(IntegratorConfig::defaults_for(params));
        ctx.warn_stability(cfg, params);
        Json per_kind;
        for (const auto& run: parsed) {
            double horizon = read_horizon(doc, params, run.inputs);
            Trace trace = simulate(params, run.inputs, horizon, cfg, firing);
            std::string name = "trace_" + std::string(to_string(kind)) + "_" + run.label + ".csv";
            write_trace_csv(ctx.opt.out/name, trace);
            Json j = summary_json(summarise(trace, params));
            j["trace_csv"] = name;
            j["input_spike_times_ms"] = std::vector<double>(run.inputs.times().begin(), run.inputs.times().end());
            j["horizon_ms"] = horizon;
            per_kind[run.label] = std::move(j);
            ctx.out << to_string(kind) << ' ' << run.label << ": peak " << per_kind[run.label]["peak_amplitude_mV"].get<double>()
                    << " mV, " << per_kind[run.label]["spike_count"].get<std::size_t>() << " output spikes\n";
        }
        summary[std::string(to_string(kind))] = std::move(per_kind);
    }
    summary["neuron"] = to_json(base);
    write_text(ctx.opt.out/"summary.json", summary.dump(2));
    return exit_ok;
}

int cmd_ist_sweep(const Context& ctx, const Json& doc) {
    check_keys(doc, "ist-sweep", {"neuron", "integrator", "scan", "lif_baseline", "tw_offset_mV"});
    NeuronParams params = read_neuron(doc, false);
    if (params.kind != ModelKind::slif) config_error("neuron.kind: ist-sweep expects \"slif\"; use lif_baseline for LIF");
    auto cfg_opt = read_integrator(doc, params);
    IstScan scan = read_scan(doc);
    double tw_offset = read_number(doc, "config", "tw_offset_mV", default_tw_offset);
    if (!(tw_offset > 0)) config_error("config.tw_offset_mV: must be > 0");
    bool lif_baseline = false;
    if (doc.contains("lif_baseline")) {
        if (!doc["lif_baseline"].is_boolean()) config_error("config.lif_baseline: expected true or false");
        lif_baseline = doc["lif_baseline"].get<bool>();
    }

    std::vector<NeuronParams> models{params};
    if (lif_baseline) {
        models.push_back(params);
        models.back().kind = ModelKind::lif;
    }

    Json report;
    for (const auto& p: models) {
        IntegratorConfig cfg = cfg_opt.value_or(IntegratorConfig::defaults_for(p));
        ctx.warn_stability(cfg, p);
        ResponseCurve curve = response_curve(p, scan, cfg, ctx.opt.jobs);
        std::string kind(to_string(p.kind));
        write_response_csv(ctx.opt.out/("response_" + kind + ".csv"), curve);
        Json entry;
        entry["response_csv"] = "response_" + kind + ".csv";
        if (p.kind == ModelKind::slif) {
            entry["metrics"] = to_json(metrics(curve, p, cfg, tw_offset));
            ctx.out << "slif: favorite IST " << entry["metrics"]["favorite_ist_ms"].get<double>() << " ms, margin "
                    << entry["metrics"]["margin_mV"].get<double>() << " mV, timewidth "
                    << entry["metrics"]["timewidth_ms"].get<double>() << " ms\n";
        }
        bool decreasing = std::adjacent_find(curve.amplitudes.begin(), curve.amplitudes.end(),
                                             [](double a, double b) { return b >= a; }) == curve.amplitudes.end();
        entry["max_amplitude_mV"] = *std::max_element(curve.amplitudes.begin(), curve.amplitudes.end());
        entry["strictly_decreasing"] = decreasing;
        report[kind] = std::move(entry);
    }
    report["threshold_mV"] = params.v_th - params.v_rest;
    report["neuron"] = to_json(params);
    report["scan"] = to_json(scan);
    write_text(ctx.opt.out/"metrics.json", report.dump(2));
    return exit_ok;
}

int cmd_grid_sweep(const Context& ctx, const Json& doc) {
    check_keys(doc, "grid-sweep", {"neuron", "integrator", "scan", "sweep"});
    SweepSpec defaults;
    defaults.base = read_neuron(doc, false);
    defaults.scan = read_scan(doc);
    defaults.integrator = read_integrator(doc, defaults.base);
    SweepSpec spec = sweep_from_json(require(doc, "sweep"), "sweep", defaults);

    SweepResult result = run_sweep(spec, ctx.opt.jobs);
    write_sweep_csv(ctx.opt.out/"sweep.csv", result);
    write_text(ctx.opt.out/"sweep_meta.json", sweep_metadata_json(result));
    ctx.out << result.cells.size() << " cells, " << result.failures() << " failed\n";
    return result.failures() == 0 ? exit_ok : exit_partial;
}

int cmd_calibrate(const Context& ctx, const Json& doc) {
    check_keys(doc, "calibrate", {"neuron", "integrator", "scan", "calibration"});
    CalibrationTarget defaults = reference_calibration_target();
    defaults.base = read_neuron(doc, false);
    defaults.scan = read_scan(doc);
    auto cfg = read_integrator(doc, defaults.base);
    const Json empty = Json::object();
    CalibrationTarget target = calibration_target_from_json(doc.contains("calibration") ? doc["calibration"] : empty,
                                                            "calibration", defaults);
    try {
        CalibrationReport report = calibrate(target, cfg, ctx.opt.jobs);
        write_text(ctx.opt.out/"params.json", to_json(report.params).dump(2));
        Json j = to_json(report);
        j["target"] = to_json(target);
        write_text(ctx.opt.out/"report.json", j.dump(2));
        for (const auto& w: report.warnings) ctx.err << "warning: " << w << '\n';
        ctx.out << "favorite IST " << report.achieved.favorite_ist << " ms, margin " << report.achieved.margin
                << " mV, timewidth " << report.achieved.timewidth << " ms after " << report.passes << " passes\n";
        return exit_ok;
    }
    catch (const CalibrationError& e) {
        Json j;
        j["error"] = e.what();
        j["stage"] = static_cast<int>(e.stage());
        j["stage_param"] = to_string(e.stage());
        j["target"] = to_json(target);
        write_text(ctx.opt.out/"report.json", j.dump(2));
        ctx.err << "error: " << e.what() << '\n';
        return exit_infeasible;
    }
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Options opt;
    CLI::App app{"Saturating-synapse LIF simulator and analysis toolkit", "slif"};
    app.set_version_flag("--version", std::string(version()));
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--config", opt.config, "JSON config file")->required();
    app.add_option("--out", opt.out, "output directory (created if missing)")->required();
    app.add_option("--jobs", opt.jobs, "worker threads, 0 = all cores")->capture_default_str();
    app.add_option("--seed", opt.seed, "reserved; no command is stochastic");
    const std::vector<std::pair<std::string, std::string>> commands{
        {"simulate", "integrate one spike train, write trace.csv and summary.json"},
        {"compare", "several labelled spike trains and model kinds side by side"},
        {"ist-sweep", "two-spike response curve and metrics"},
        {"grid-sweep", "metrics over a 2D parameter grid"},
        {"calibrate", "fit c_m, g_l, tau_s to a timing target"},
    };
    for (const auto& [name, help]: commands) {
        app.add_subcommand(name, help)->callback([&opt, name = name] { opt.command = name; });
    }

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_ok;
    }
    catch (const CLI::CallForVersion&) {
        out << version() << '\n';
        return exit_ok;
    }
    catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    }

    try {
        Json doc = load_config(opt.config);
        std::error_code ec;
        fs::create_directories(opt.out, ec);
        if (ec) throw Error(ErrorCode::io_error, "cannot create " + opt.out.string() + ": " + ec.message());

        Context ctx{opt, out, err};
        if (opt.command == "simulate") return cmd_simulate(ctx, doc);
        if (opt.command == "compare") return cmd_compare(ctx, doc);
        if (opt.command == "ist-sweep") return cmd_ist_sweep(ctx, doc);
        if (opt.command == "grid-sweep") return cmd_grid_sweep(ctx, doc);
        return cmd_calibrate(ctx, doc);
    }
    catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        switch (e.code()) {
        case ErrorCode::invalid_config:
        case ErrorCode::invalid_params:
        case ErrorCode::spec_inconsistent:
        case ErrorCode::unsorted_input:
        case ErrorCode::nonpositive_ist:
        case ErrorCode::nonpositive_period:
        case ErrorCode::zero_count:
        case ErrorCode::nonpositive_horizon:
            return exit_config;
        case ErrorCode::infeasible_target:
            return exit_infeasible;
        default:
            return exit_failure;
        }
    }
    catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_failure;
    }
}

} // namespace slif::cli

#include "runent/cli.hpp"

#include "runent/dataset.hpp"
#include "runent/entropy.hpp"
#include "runent/errors.hpp"
#include "runent/metrics.hpp"
#include "runent/synth.hpp"
#include "runent/trace.hpp"
#include "runent/tree.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace runent {

namespace fs = std::filesystem;

namespace {

struct FeaturizeArgs {
    std::string trace_dir;
    std::string manifest;
    std::string out_csv;
    bool lenient = false;
};

struct TrainArgs {
    std::string data_csv;
    std::string out_model;
    int m = 2;
    double cf = 0.25;
    std::uint64_t seed = 0;
};

struct SmoteArgs {
    std::string in_csv;
    std::string out_csv;
    double ratio = 0.2;
    int k = 5;
    int amount = 0;
    std::uint64_t seed = 0;
};

struct PredictArgs {
    std::string model;
    std::string data_csv;
    std::string out;
};

struct SweepArgs {
    std::string data_csv;
    std::vector<int> m_list{2, 10, 50, 100, 200};
    double cf = 0.25;
    double ratio = 0.2;
    int k = 5;
    int amount = 0;
    std::uint64_t seed = 0;
    bool smote_before_cv = false;
    std::string out_table;
    std::string out_csv;
};

struct StreamArgs {
    std::string model;
    bool lenient = false;
};

struct SynthArgs {
    std::string config;
    std::string out_dir;
    std::string manifest;
    std::size_t runs = 100;
    std::string prefix = "run";
    std::uint64_t start_index = 0;
    bool append = false;
    std::optional<std::uint64_t> seed;
    std::string fault_mode;
    std::string fault_target;
    double fault_intensity = 1.0;
    double fault_activation = 1.0;
};

std::map<std::string, Label> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open manifest '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw SchemaMismatch("manifest is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "trace_id,label") {
        throw SchemaMismatch("manifest header must be trace_id,label");
    }
    std::map<std::string, Label> out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw SchemaMismatch("manifest line " + std::to_string(line_no) +
                                 ": expected trace_id,label");
        }
        const auto label = label_from_string(line.substr(comma + 1));
        if (!label) throw BadLabel(line_no, line.substr(comma + 1));
        out[line.substr(0, comma)] = *label;
    }
    return out;
}

int cmd_featurize(const FeaturizeArgs& args, std::ostream&, std::ostream& err) {
    std::map<std::string, Label> manifest;
    if (!args.manifest.empty()) manifest = load_manifest(args.manifest);

    if (!fs::is_directory(args.trace_dir)) {
        throw Error("'" + args.trace_dir + "' is not a directory");
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(args.trace_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".trace") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
        return a.stem().string() < b.stem().string();
    });
    if (files.empty()) {
        err << "featurize: warning: no .trace files in '" << args.trace_dir << "'\n";
    }

    Dataset ds;
    int failures = 0;
    for (const auto& file : files) {
        const std::string trace_id = file.stem().string();
        try {
            std::ifstream in(file);
            if (!in) throw Error("cannot open file");
            Trace trace;
            if (args.lenient) {
                RepairStats stats;
                trace = parse_trace_lenient(in, trace_id, stats);
                trace = repair_trace(trace, stats);
                if (stats.any()) {
                    err << "featurize: " << file.string() << ": repaired ("
                        << stats.skipped_lines << " lines skipped, " << stats.dropped_outs
                        << " OUTs dropped, " << stats.closed_frames << " frames closed)\n";
                }
            } else {
                trace = parse_trace(in, trace_id);
            }
            const EntropyFeatures f = featurize(trace);
            LabeledInstance inst;
            inst.trace_id = trace_id;
            inst.features = {f.h_a, f.h_b, f.h};
            const auto it = manifest.find(trace_id);
            inst.label = it != manifest.end() ? it->second : Label::Unknown;
            ds.instances.push_back(std::move(inst));
        } catch (const Error& e) {
            err << "featurize: " << file.string() << ": " << e.what() << '\n';
            if (args.lenient) {
                err << "featurize: " << file.string() << ": skipped\n";
            } else {
                ++failures;
            }
        }
    }
    write_csv(ds, args.out_csv);
    if (failures > 0) {
        err << "featurize: " << failures << " file(s) failed\n";
        return 1;
    }
    return 0;
}

int cmd_train(const TrainArgs& args, std::ostream&, std::ostream& err) {
    Dataset ds = read_csv(args.data_csv, /*allow_unknown=*/true);
    const std::size_t before = ds.instances.size();
    std::erase_if(ds.instances,
                  [](const LabeledInstance& i) { return i.label == Label::Unknown; });
    if (ds.instances.size() != before) {
        err << "train: dropped " << before - ds.instances.size()
            << " unlabeled instance(s)\n";
    }
    TrainConfig cfg;
    cfg.min_leaf = args.m;
    cfg.confidence = args.cf;
    cfg.seed = args.seed;
    const TreeModel model = train(ds, cfg);
    if (!model.notice.empty()) err << "train: notice: " << model.notice << '\n';
    save_model(model, args.out_model);
    return 0;
}

int cmd_smote(const SmoteArgs& args, std::ostream&, std::ostream& err) {
    const Dataset ds = read_csv(args.in_csv);
    const SmoteResult result = smote(ds, args.ratio, args.k, args.seed, args.amount);
    err << "smote: " << result.notice << '\n';
    write_csv(result.data, args.out_csv);
    return 0;
}

int cmd_predict(const PredictArgs& args, std::ostream& out, std::ostream&) {
    const TreeModel model = load_model(args.model);
    const Dataset ds = read_csv(args.data_csv, /*allow_unknown=*/true);
    std::ostringstream result;
    result << "trace_id,label,confidence\n";
    char buf[32];
    for (const auto& inst : ds.instances) {
        const Prediction p = predict(model, inst.features);
        std::snprintf(buf, sizeof buf, "%.6f", p.confidence);
        result << inst.trace_id << ',' << to_string(p.label) << ',' << buf << '\n';
    }
    if (args.out.empty()) {
        out << result.str();
    } else {
        std::ofstream file(args.out, std::ios::binary);
        if (!file) throw Error("cannot open '" + args.out + "' for writing");
        file << result.str();
    }
    return 0;
}

int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
    const Dataset ds = read_csv(args.data_csv);
    TrainConfig cfg;
    cfg.confidence = args.cf;
    cfg.seed = args.seed;

    std::vector<EvalReport> reports;
    for (int m : args.m_list) {
        cfg.min_leaf = m;
        for (bool with_smote : {false, true}) {
            SmoteOptions sm;
            sm.enabled = with_smote;
            sm.target = args.ratio;
            sm.k = args.k;
            sm.forced_amount = args.amount;
            sm.before_cv = args.smote_before_cv;
            EvalReport rep = crossval(ds, cfg, 10, args.seed, sm);
            if (rep.degenerate) {
                err << "sweep: M=" << m << " smote=" << (with_smote ? "yes" : "no")
                    << ": every fold model is a single leaf\n";
            }
            if (with_smote && rep.smote_noop_folds > 0) {
                err << "sweep: M=" << m << ": SMOTE was a no-op in " << rep.smote_noop_folds
                    << "/10 folds (already balanced)\n";
            }
            reports.push_back(std::move(rep));
        }
    }

    const std::string table = report_table(reports);
    out << table;
    if (!args.out_table.empty()) {
        std::ofstream file(args.out_table, std::ios::binary);
        if (!file) throw Error("cannot open '" + args.out_table + "' for writing");
        file << table;
    }
    if (!args.out_csv.empty()) {
        std::ofstream file(args.out_csv, std::ios::binary);
        if (!file) throw Error("cannot open '" + args.out_csv + "' for writing");
        file << report_csv(reports);
    }
    return 0;
}

int cmd_stream(const StreamArgs& args, std::istream& in, std::ostream& out,
               std::ostream& err) {
    const TreeModel model = load_model(args.model);

    std::vector<TraceEvent> buffer;
    std::vector<std::string> stack;
    std::string line;
    int line_no = 0;
    std::int64_t last_ts = -1;
    std::int64_t last_id = 0;

    auto verdict = [&](const Trace& trace) {
        try {
            const EntropyFeatures f = featurize(trace);
            const Prediction p = predict(model, {f.h_a, f.h_b, f.h});
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6f", p.confidence);
            out << trace.events.front().function << ' ' << to_string(p.label) << ' ' << buf
                << '\n';
            out.flush();
            return true;
        } catch (const Error& e) {
            err << "stream: frame at line " << line_no << ": " << e.what() << '\n';
            return args.lenient;
        }
    };

    while (std::getline(in, line)) {
        ++line_no;
        TraceEvent ev;
        try {
            if (!parse_trace_line(line, line_no, ev)) continue;
            if (ev.id <= last_id) throw MalformedLine(line_no, "event id not strictly increasing");
            if (ev.timestamp < last_ts) throw NonMonotonicTimestamp(line_no);
        } catch (const Error& e) {
            err << "stream: " << e.what() << '\n';
            if (args.lenient) continue;
            return 1;
        }
        last_id = ev.id;
        last_ts = ev.timestamp;

        if (ev.kind == EventKind::In) {
            stack.push_back(ev.function);
            buffer.push_back(std::move(ev));
            continue;
        }
        if (stack.empty() || stack.back() != ev.function) {
            err << "stream: line " << line_no << ": OUT '" << ev.function
                << "' has no matching IN\n";
            if (args.lenient) continue;  // drop the unmatched OUT
            return 1;
        }
        stack.pop_back();
        buffer.push_back(std::move(ev));
        if (stack.empty()) {
            Trace trace;
            trace.events = std::move(buffer);
            buffer.clear();
            if (!verdict(trace)) return 1;
            // state resets per root frame: the next frame may come from a
            // fresh process whose ids and clock restart
            last_id = 0;
            last_ts = -1;
        }
    }

    if (!stack.empty()) {
        err << "stream: " << stack.size() << " frame(s) still open at end of input\n";
        if (!args.lenient) return 1;
        const std::int64_t final_ts = buffer.back().timestamp;
        while (!stack.empty()) {
            buffer.push_back({++last_id, EventKind::Out, stack.back(), final_ts});
            stack.pop_back();
        }
        Trace trace;
        trace.events = std::move(buffer);
        if (!verdict(trace)) return 1;
    }
    return 0;
}

int cmd_synth(const SynthArgs& args, std::ostream&, std::ostream& err) {
    WorkloadSpec spec = load_workload_spec(args.config);
    if (args.seed) spec.seed = *args.seed;

    std::optional<FaultSpec> fault;
    if (!args.fault_mode.empty()) {
        FaultSpec f;
        const auto mode = fault_mode_from_string(args.fault_mode);
        if (!mode) {
            throw InvalidSpec("unknown fault mode '" + args.fault_mode +
                              "' (duration_skew, dropped_call, extra_call, wrong_target)");
        }
        f.mode = *mode;
        f.target_function = args.fault_target;
        f.intensity = args.fault_intensity;
        f.activation_probability = args.fault_activation;
        fault = f;
    }

    GenerateOptions opts;
    opts.prefix = args.prefix;
    opts.start_index = args.start_index;
    opts.append_manifest = args.append;
    const fs::path manifest = args.manifest.empty()
                                  ? fs::path(args.out_dir) / "manifest.csv"
                                  : fs::path(args.manifest);
    const GenerateSummary summary =
        generate(spec, args.runs, fault, args.out_dir, manifest, opts);
    err << "synth: wrote " << summary.n_normal + summary.n_failed << " runs ("
        << summary.n_normal << " normal, " << summary.n_failed << " failed) to "
        << args.out_dir << '\n';
    return 0;
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err,
            std::istream* in) {
    CLI::App app{"entropy-based failure detection from execution traces"};
    app.require_subcommand(1);

    FeaturizeArgs featurize_args;
    auto* featurize_cmd = app.add_subcommand(
        "featurize", "compute entropy features for every trace in a directory");
    featurize_cmd->add_option("--traces", featurize_args.trace_dir, "directory of .trace files")
        ->required();
    featurize_cmd->add_option("--manifest", featurize_args.manifest,
                              "label manifest CSV (trace_id,label)");
    featurize_cmd->add_option("--out", featurize_args.out_csv, "output feature CSV")->required();
    featurize_cmd->add_flag("--lenient", featurize_args.lenient,
                            "repair truncated/unbalanced traces instead of failing");

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "train a decision tree from a feature CSV");
    train_cmd->add_option("--data", train_args.data_csv, "labeled feature CSV")->required();
    train_cmd->add_option("--out", train_args.out_model, "output model file")->required();
    train_cmd->add_option("--m", train_args.m, "minimum instances per branch (M)");
    train_cmd->add_option("--cf", train_args.cf, "pruning confidence factor");
    train_cmd->add_option("--seed", train_args.seed, "random seed");

    SmoteArgs smote_args;
    auto* smote_cmd =
        app.add_subcommand("smote", "oversample the minority class of a feature CSV");
    smote_cmd->add_option("--in", smote_args.in_csv, "input feature CSV")->required();
    smote_cmd->add_option("--out", smote_args.out_csv, "output feature CSV")->required();
    smote_cmd->add_option("--ratio", smote_args.ratio, "target minority fraction");
    smote_cmd->add_option("--k", smote_args.k, "nearest neighbors considered");
    smote_cmd->add_option("--smote-amount", smote_args.amount,
                          "force this many synthetic copies per minority instance");
    smote_cmd->add_option("--seed", smote_args.seed, "random seed");

    PredictArgs predict_args;
    auto* predict_cmd =
        app.add_subcommand("predict", "classify every row of a feature CSV with a model");
    predict_cmd->add_option("--model", predict_args.model, "model file")->required();
    predict_cmd->add_option("--data", predict_args.data_csv, "feature CSV")->required();
    predict_cmd->add_option("--out", predict_args.out, "output CSV (default: stdout)");

    SweepArgs sweep_args;
    auto* sweep_cmd = app.add_subcommand(
        "sweep", "cross-validate over an M sweep, with and without SMOTE");
    sweep_cmd->add_option("--data", sweep_args.data_csv, "labeled feature CSV")->required();
    sweep_cmd->add_option("--m-list", sweep_args.m_list, "M values to sweep")
        ->delimiter(',');
    sweep_cmd->add_option("--cf", sweep_args.cf, "pruning confidence factor");
    sweep_cmd->add_option("--ratio", sweep_args.ratio, "SMOTE target minority fraction");
    sweep_cmd->add_option("--k", sweep_args.k, "SMOTE nearest neighbors");
    sweep_cmd->add_option("--smote-amount", sweep_args.amount,
                          "force this many synthetic copies per minority instance");
    sweep_cmd->add_option("--seed", sweep_args.seed, "random seed");
    sweep_cmd->add_flag("--smote-before-cv", sweep_args.smote_before_cv,
                        "oversample the whole dataset before splitting");
    sweep_cmd->add_option("--out", sweep_args.out_table, "also write the table to this file");
    sweep_cmd->add_option("--csv", sweep_args.out_csv, "write a machine-readable CSV report");

    StreamArgs stream_args;
    auto* stream_cmd = app.add_subcommand(
        "stream", "classify completed top-level frames from standard input");
    stream_cmd->add_option("--model", stream_args.model, "model file")->required();
    stream_cmd->add_flag("--lenient", stream_args.lenient,
                         "skip malformed lines and repair at end of input");

    SynthArgs synth_args;
    auto* synth_cmd =
        app.add_subcommand("synth", "generate synthetic traces with optional fault injection");
    synth_cmd->add_option("--config", synth_args.config, "workload config file")->required();
    synth_cmd->add_option("--out-dir", synth_args.out_dir, "output directory")->required();
    synth_cmd->add_option("--runs", synth_args.runs, "number of runs to generate");
    synth_cmd->add_option("--manifest", synth_args.manifest,
                          "manifest path (default: <out-dir>/manifest.csv)");
    synth_cmd->add_option("--prefix", synth_args.prefix, "trace_id prefix");
    synth_cmd->add_option("--start-index", synth_args.start_index, "first run index");
    synth_cmd->add_flag("--append", synth_args.append, "append to an existing manifest");
    synth_cmd->add_option("--seed", synth_args.seed, "override the config seed");
    synth_cmd->add_option("--fault-mode", synth_args.fault_mode,
                          "duration_skew|dropped_call|extra_call|wrong_target");
    synth_cmd->add_option("--fault-target", synth_args.fault_target, "target function name");
    synth_cmd->add_option("--fault-intensity", synth_args.fault_intensity, "fault intensity");
    synth_cmd->add_option("--fault-activation", synth_args.fault_activation,
                          "per-run activation probability");

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("runent");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*featurize_cmd) return cmd_featurize(featurize_args, out, err);
        if (*train_cmd) {
            if (train_args.m < 2 || train_args.m > 1000000) {
                throw std::invalid_argument("--m must be in [2, 1000000]");
            }
            if (!(train_args.cf > 0.0 && train_args.cf <= 0.5)) {
                throw std::invalid_argument("--cf must be in (0, 0.5]");
            }
            return cmd_train(train_args, out, err);
        }
        if (*smote_cmd) {
            if (!(smote_args.ratio > 0.0 && smote_args.ratio < 1.0)) {
                throw std::invalid_argument("--ratio must be in (0, 1)");
            }
            if (smote_args.k < 1) throw std::invalid_argument("--k must be positive");
            return cmd_smote(smote_args, out, err);
        }
        if (*predict_cmd) return cmd_predict(predict_args, out, err);
        if (*sweep_cmd) {
            for (int m : sweep_args.m_list) {
                if (m < 2 || m > 1000000) {
                    throw std::invalid_argument("--m-list values must be in [2, 1000000]");
                }
            }
            if (!(sweep_args.cf > 0.0 && sweep_args.cf <= 0.5)) {
                throw std::invalid_argument("--cf must be in (0, 0.5]");
            }
            if (!(sweep_args.ratio > 0.0 && sweep_args.ratio < 1.0)) {
                throw std::invalid_argument("--ratio must be in (0, 1)");
            }
            return cmd_sweep(sweep_args, out, err);
        }
        if (*stream_cmd) return cmd_stream(stream_args, in ? *in : std::cin, out, err);
        if (*synth_cmd) return cmd_synth(synth_args, out, err);
    } catch (const std::invalid_argument& e) {
        err << "runent: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        err << "runent: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace runent

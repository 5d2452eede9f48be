#include "runent/synth.hpp"

#include "runent/errors.hpp"
#include "runent/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace runent {

const char* to_string(FaultMode m) {
    switch (m) {
        case FaultMode::DurationSkew: return "duration_skew";
        case FaultMode::DroppedCall: return "dropped_call";
        case FaultMode::ExtraCall: return "extra_call";
        case FaultMode::WrongTarget: return "wrong_target";
    }
    return "duration_skew";
}

std::optional<FaultMode> fault_mode_from_string(std::string_view s) {
    if (s == "duration_skew") return FaultMode::DurationSkew;
    if (s == "dropped_call") return FaultMode::DroppedCall;
    if (s == "extra_call") return FaultMode::ExtraCall;
    if (s == "wrong_target") return FaultMode::WrongTarget;
    return std::nullopt;
}

std::string function_name(int index) { return "f" + std::to_string(index); }

namespace {

int function_index(const WorkloadSpec& spec, const std::string& name) {
    for (int i = 0; i < spec.n_functions; ++i) {
        if (function_name(i) == name) return i;
    }
    return -1;
}

}  // namespace

void validate(const WorkloadSpec& spec) {
    if (spec.n_functions < 2) throw InvalidSpec("n_functions must be at least 2");
    if (spec.max_depth < 1) throw InvalidSpec("max_depth must be at least 1");
    if (!(spec.branching > 0.0)) throw InvalidSpec("branching must be positive");
    if (spec.base_durations.empty()) {
        if (spec.base_duration_min < 1 || spec.base_duration_max < spec.base_duration_min) {
            throw InvalidSpec("base duration range must satisfy 1 <= min <= max");
        }
    } else {
        if (spec.base_durations.size() != static_cast<std::size_t>(spec.n_functions)) {
            throw InvalidSpec("base_durations must list one value per function");
        }
        for (std::int64_t d : spec.base_durations) {
            if (d < 1) throw InvalidSpec("base durations must be positive");
        }
    }
    if (!(spec.jitter_min > 0.0 && spec.jitter_max >= spec.jitter_min)) {
        throw InvalidSpec("jitter range must satisfy 0 < min <= max");
    }
}

void validate(const WorkloadSpec& spec, const FaultSpec& fault) {
    validate(spec);
    if (!(fault.intensity > 0.0)) throw InvalidSpec("fault intensity must be positive");
    if (!(fault.activation_probability > 0.0 && fault.activation_probability <= 1.0)) {
        throw InvalidSpec("fault activation probability must be in (0, 1]");
    }
    const int target = function_index(spec, fault.target_function);
    if (target < 0) {
        throw InvalidSpec("fault target '" + fault.target_function +
                          "' is not one of the workload's functions");
    }
    if (fault.mode == FaultMode::WrongTarget) {
        const int replacement = target + 1 < spec.n_functions ? target + 1 : 1;
        if (replacement == target) {
            throw InvalidSpec("wrong_target needs an alternative callee; "
                              "increase n_functions");
        }
    }
}

namespace {

struct CallNode {
    int fn = 0;
    std::int64_t exclusive = 0;
    std::vector<CallNode> children;
};

std::vector<std::int64_t> resolve_base_durations(const WorkloadSpec& spec) {
    if (!spec.base_durations.empty()) return spec.base_durations;
    // independent of run_index so every run shares one duration model
    auto rng = make_rng(~spec.seed, 0xd05e);
    std::vector<std::int64_t> out(static_cast<std::size_t>(spec.n_functions));
    const auto range =
        static_cast<std::uint64_t>(spec.base_duration_max - spec.base_duration_min + 1);
    for (auto& d : out) {
        d = spec.base_duration_min + static_cast<std::int64_t>(bounded(rng, range));
    }
    return out;
}

std::int64_t sample_exclusive(std::mt19937_64& rng, const WorkloadSpec& spec,
                              const std::vector<std::int64_t>& base, int fn) {
    const double jitter =
        spec.jitter_min + unit_double(rng) * (spec.jitter_max - spec.jitter_min);
    const double ticks = static_cast<double>(base[static_cast<std::size_t>(fn)]) * jitter;
    return std::max<std::int64_t>(1, std::llround(ticks));
}

CallNode build_tree(std::mt19937_64& rng, const WorkloadSpec& spec,
                    const std::vector<std::int64_t>& base, int fn, int depth) {
    CallNode node;
    node.fn = fn;
    node.exclusive = sample_exclusive(rng, spec, base, fn);
    if (depth < spec.max_depth) {
        // the root always enters the workload through f1; every run is
        // guaranteed to execute it, which gives faults a reliable target
        if (depth == 1 && spec.n_functions >= 2) {
            node.children.push_back(build_tree(rng, spec, base, 1, depth + 1));
        }
        const int n_children = poisson(rng, spec.branching);
        for (int c = 0; c < n_children; ++c) {
            const int child_fn =
                1 + static_cast<int>(bounded(rng, static_cast<std::uint64_t>(spec.n_functions - 1)));
            node.children.push_back(build_tree(rng, spec, base, child_fn, depth + 1));
        }
    }
    return node;
}

void skew_durations(CallNode& node, int target, double intensity, bool& altered) {
    if (node.fn == target) {
        const std::int64_t skewed = std::max<std::int64_t>(
            1, std::llround(static_cast<double>(node.exclusive) * intensity));
        if (skewed != node.exclusive) altered = true;
        node.exclusive = skewed;
    }
    for (auto& child : node.children) skew_durations(child, target, intensity, altered);
}

void drop_calls(CallNode& node, int target, bool& altered) {
    auto& kids = node.children;
    const auto removed = std::remove_if(kids.begin(), kids.end(), [&](const CallNode& c) {
        return c.fn == target;
    });
    if (removed != kids.end()) {
        altered = true;
        kids.erase(removed, kids.end());
    }
    for (auto& child : kids) drop_calls(child, target, altered);
}

void redirect_calls(CallNode& node, int target, int replacement, bool& altered) {
    for (auto& child : node.children) {
        if (child.fn == target) {
            child.fn = replacement;
            altered = true;
        }
        redirect_calls(child, target, replacement, altered);
    }
}

void accumulate_durations(const CallNode& node, DurationTable& table) {
    table[function_name(node.fn)] += node.exclusive;
    for (const auto& child : node.children) accumulate_durations(child, table);
}

void emit_events(const CallNode& node, std::int64_t& clock, std::int64_t& next_id,
                 std::vector<TraceEvent>& out) {
    // the frame's exclusive time is spread across the gaps around its calls
    const std::size_t gaps = node.children.size() + 1;
    const std::int64_t q = node.exclusive / static_cast<std::int64_t>(gaps);
    const std::int64_t rem = node.exclusive % static_cast<std::int64_t>(gaps);
    out.push_back({next_id++, EventKind::In, function_name(node.fn), clock});
    clock += q + (rem > 0 ? 1 : 0);
    for (std::size_t c = 0; c < node.children.size(); ++c) {
        emit_events(node.children[c], clock, next_id, out);
        clock += q + (static_cast<std::int64_t>(c) + 1 < rem ? 1 : 0);
    }
    out.push_back({next_id++, EventKind::Out, function_name(node.fn), clock});
}

}  // namespace

SynthRun synth_run(const WorkloadSpec& spec, std::uint64_t run_index,
                   const std::optional<FaultSpec>& fault) {
    if (fault) {
        validate(spec, *fault);
    } else {
        validate(spec);
    }
    const auto base = resolve_base_durations(spec);
    auto rng = make_rng(spec.seed, run_index);

    CallNode root = build_tree(rng, spec, base, 0, 1);

    SynthRun run;
    bool dropped_root = false;
    if (fault && unit_double(rng) < fault->activation_probability) {
        const int target = function_index(spec, fault->target_function);
        bool altered = false;
        switch (fault->mode) {
            case FaultMode::DurationSkew:
                skew_durations(root, target, fault->intensity, altered);
                break;
            case FaultMode::DroppedCall:
                if (root.fn == target) {
                    dropped_root = true;
                    altered = true;
                } else {
                    drop_calls(root, target, altered);
                }
                break;
            case FaultMode::ExtraCall: {
                const int extra =
                    std::max<std::int64_t>(1, std::llround(fault->intensity));
                for (int c = 0; c < extra; ++c) {
                    CallNode leaf;
                    leaf.fn = target;
                    leaf.exclusive = sample_exclusive(rng, spec, base, target);
                    root.children.push_back(std::move(leaf));
                }
                altered = true;
                break;
            }
            case FaultMode::WrongTarget: {
                const int replacement =
                    target + 1 < spec.n_functions ? target + 1 : 1;
                redirect_calls(root, target, replacement, altered);
                break;
            }
        }
        run.failed = altered;
    }

    if (!dropped_root) {
        accumulate_durations(root, run.frame_durations);
        std::int64_t clock = 0;
        std::int64_t next_id = 1;
        emit_events(root, clock, next_id, run.trace.events);
    }
    return run;
}

GenerateSummary generate(const WorkloadSpec& spec, std::size_t n_runs,
                         const std::optional<FaultSpec>& fault,
                         const std::filesystem::path& out_dir,
                         const std::filesystem::path& manifest_path,
                         const GenerateOptions& opts) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    const bool append = opts.append_manifest && fs::exists(manifest_path) &&
                        fs::file_size(manifest_path) > 0;
    std::ofstream manifest(manifest_path,
                           std::ios::binary | (append ? std::ios::app : std::ios::trunc));
    if (!manifest) throw Error("cannot open '" + manifest_path.string() + "' for writing");
    if (!append) manifest << "trace_id,label\n";

    GenerateSummary summary;
    for (std::size_t i = 0; i < n_runs; ++i) {
        const std::uint64_t run_index = opts.start_index + i;
        const SynthRun run = synth_run(spec, run_index, fault);

        char suffix[16];
        std::snprintf(suffix, sizeof suffix, "%05llu",
                      static_cast<unsigned long long>(run_index));
        const std::string trace_id = opts.prefix + suffix;

        std::ofstream trace_file(out_dir / (trace_id + ".trace"), std::ios::binary);
        if (!trace_file) {
            throw Error("cannot write trace '" + trace_id + "' in " + out_dir.string());
        }
        trace_file << trace_to_text(run.trace);

        manifest << trace_id << ',' << (run.failed ? "failed" : "normal") << '\n';
        (run.failed ? summary.n_failed : summary.n_normal) += 1;
    }
    return summary;
}

namespace {

std::string trim_copy(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::int64_t parse_spec_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw InvalidSpec("bad integer for '" + key + "': '" + value + "'");
    }
}

double parse_spec_real(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size() || !std::isfinite(v)) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw InvalidSpec("bad number for '" + key + "': '" + value + "'");
    }
}

}  // namespace

WorkloadSpec load_workload_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");

    WorkloadSpec spec;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string body = trim_copy(line);
        if (body.empty() || body.front() == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw InvalidSpec("config line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        }
        const std::string key = trim_copy(body.substr(0, eq));
        const std::string value = trim_copy(body.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw InvalidSpec("config line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        }
        if (key == "n_functions") {
            spec.n_functions = static_cast<int>(parse_spec_int(key, value));
        } else if (key == "max_depth") {
            spec.max_depth = static_cast<int>(parse_spec_int(key, value));
        } else if (key == "branching") {
            spec.branching = parse_spec_real(key, value);
        } else if (key == "base_duration_min") {
            spec.base_duration_min = parse_spec_int(key, value);
        } else if (key == "base_duration_max") {
            spec.base_duration_max = parse_spec_int(key, value);
        } else if (key == "base_durations") {
            spec.base_durations.clear();
            std::istringstream list(value);
            std::string item;
            while (std::getline(list, item, ',')) {
                spec.base_durations.push_back(parse_spec_int(key, trim_copy(item)));
            }
        } else if (key == "jitter_min") {
            spec.jitter_min = parse_spec_real(key, value);
        } else if (key == "jitter_max") {
            spec.jitter_max = parse_spec_real(key, value);
        } else if (key == "seed") {
            spec.seed = static_cast<std::uint64_t>(parse_spec_int(key, value));
        } else {
            throw InvalidSpec("config line " + std::to_string(line_no) + ": unknown key '" +
                              key + "'");
        }
    }
    validate(spec);
    return spec;
}

}  // namespace runent

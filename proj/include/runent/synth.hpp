#pragma once

#include "runent/trace.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace runent {

// Synthetic call-tree workload. Trees are generated top-down with
// Poisson-distributed child counts truncated at max_depth; timestamps are
// accumulated so that each frame's exclusive duration equals the sampled
// value exactly, which doubles as an oracle for the duration computation.
// The root frame (f0) always invokes f1 first when max_depth allows, so
// every workload has one guaranteed-executed callee; the rest of the tree
// is sampled.
struct WorkloadSpec {
    int n_functions = 8;   // >= 2; f0 is the root, f1.. are callees
    int max_depth = 4;     // >= 1
    double branching = 2.0;  // mean children per non-leaf-depth frame, > 0

    // Per-function base duration in ticks. When empty, one value per
    // function is sampled uniformly from [base_duration_min, base_duration_max]
    // using the workload seed (independent of run_index).
    std::vector<std::int64_t> base_durations;
    std::int64_t base_duration_min = 50;
    std::int64_t base_duration_max = 500;

    // Multiplicative jitter applied to the base duration per frame.
    double jitter_min = 0.8;
    double jitter_max = 1.25;

    std::uint64_t seed = 0;
};

enum class FaultMode { DurationSkew, DroppedCall, ExtraCall, WrongTarget };

const char* to_string(FaultMode m);
std::optional<FaultMode> fault_mode_from_string(std::string_view s);

struct FaultSpec {
    FaultMode mode = FaultMode::DurationSkew;
    std::string target_function;       // e.g. "f1"
    double intensity = 1.0;            // > 0; meaning depends on mode
    double activation_probability = 1.0;  // in (0, 1]
};

// Throw InvalidSpec on out-of-range fields.
void validate(const WorkloadSpec& spec);
void validate(const WorkloadSpec& spec, const FaultSpec& fault);

// Key-value config file (`key = value`, '#' comments). Keys: n_functions,
// max_depth, branching, base_durations (comma list), base_duration_min,
// base_duration_max, jitter_min, jitter_max, seed.
WorkloadSpec load_workload_spec(const std::string& path);

struct SynthRun {
    Trace trace;
    bool failed = false;             // fault activated and altered the trace
    DurationTable frame_durations;   // sampled exclusive durations (oracle)
};

// Deterministic function of (spec.seed, run_index); the fault perturbs the
// same underlying tree the unfaulted run would produce.
SynthRun synth_run(const WorkloadSpec& spec, std::uint64_t run_index,
                   const std::optional<FaultSpec>& fault);

struct GenerateOptions {
    std::string prefix = "run";
    std::uint64_t start_index = 0;
    bool append_manifest = false;
};

struct GenerateSummary {
    std::size_t n_normal = 0;
    std::size_t n_failed = 0;
};

// Writes one `<prefix><index>.trace` file per run (index zero-padded to 5)
// plus manifest rows `<trace_id>,<normal|failed>`.
GenerateSummary generate(const WorkloadSpec& spec, std::size_t n_runs,
                         const std::optional<FaultSpec>& fault,
                         const std::filesystem::path& out_dir,
                         const std::filesystem::path& manifest_path,
                         const GenerateOptions& opts = {});

std::string function_name(int index);

}  // namespace runent

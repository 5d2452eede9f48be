#pragma once

#include "runent/trace.hpp"

namespace runent {

// The per-run feature triple, all in bits.
struct EntropyFeatures {
    double h_a = 0.0;  // execution-time entropy
    double h_b = 0.0;  // function-call entropy
    double h = 0.0;    // composite: (h_a + h_b) / 2
};

// Shannon entropy (base 2) of the exclusive-duration distribution.
// Zero-duration functions contribute nothing (0*log 0 := 0).
// Throws DegenerateTrace when the total duration is zero.
double execution_time_entropy(const DurationTable& durations);

// Shannon entropy (base 2) of the invocation-count distribution.
// An empty table yields 0.
double call_entropy(const CallCountTable& calls);

// Arithmetic mean of the two entropies.
double runtime_entropy(double h_a, double h_b);

// compute_durations / compute_call_counts composed with the entropies.
EntropyFeatures featurize(const Trace& trace);

}  // namespace runent

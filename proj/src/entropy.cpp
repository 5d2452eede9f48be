#include "runent/entropy.hpp"

#include "runent/errors.hpp"

#include <cmath>

namespace runent {

double execution_time_entropy(const DurationTable& durations) {
    std::int64_t total = 0;
    for (const auto& [name, ticks] : durations) total += ticks;
    if (total == 0) {
        throw DegenerateTrace("total exclusive duration is zero");
    }
    double h = 0.0;
    for (const auto& [name, ticks] : durations) {
        if (ticks == 0) continue;  // 0*log 0 := 0
        const double p = static_cast<double>(ticks) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

double call_entropy(const CallCountTable& calls) {
    std::int64_t total = 0;
    for (const auto& [edge, count] : calls) total += count;
    if (total == 0) return 0.0;
    double h = 0.0;
    for (const auto& [edge, count] : calls) {
        if (count == 0) continue;
        const double p = static_cast<double>(count) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

double runtime_entropy(double h_a, double h_b) {
    return (h_a + h_b) / 2.0;
}

EntropyFeatures featurize(const Trace& trace) {
    EntropyFeatures f;
    f.h_a = execution_time_entropy(compute_durations(trace));
    f.h_b = call_entropy(compute_call_counts(trace));
    f.h = runtime_entropy(f.h_a, f.h_b);
    return f;
}

}  // namespace runent

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace runent {

enum class Label { Normal, Failed, Unknown };

const char* to_string(Label l);
std::optional<Label> label_from_string(std::string_view s);

struct LabeledInstance {
    std::string trace_id;
    std::vector<double> features;  // h_a, h_b, h
    Label label = Label::Unknown;
    bool synthetic = false;  // true iff SMOTE-generated
};

struct Dataset {
    std::vector<LabeledInstance> instances;
    std::vector<std::string> feature_names{"h_a", "h_b", "h"};

    std::size_t count(Label l) const;
    bool has_synthetic() const;
    Dataset subset(const std::vector<std::size_t>& indices) const;
};

struct SmoteResult {
    Dataset data;
    int amount = 0;  // synthetic copies generated per minority instance
    bool already_balanced = false;
    std::string notice;
};

// Oversamples the minority class. The amount is the smallest integer number
// of synthetic copies per minority instance that lifts the minority fraction
// to >= target, unless forced_amount > 0 pins it. Each synthetic instance is
// x + u*(nn - x) for one of x's k nearest minority neighbors (Euclidean,
// distance ties to the lower original index) and u uniform in [0,1).
// Originals are preserved and come first in the output; synthetics follow,
// grouped per minority instance in original order. Deterministic given seed.
// Throws MinorityTooSmall if the minority class has fewer than 2 instances;
// returns already_balanced (a no-op) when the fraction already meets target.
SmoteResult smote(const Dataset& data, double target_minority_fraction, int k,
                  std::uint64_t seed, int forced_amount = 0);

struct FoldSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// k disjoint test folds covering every index exactly once, with per-fold
// class counts within one instance of an even split, and per-fold sizes
// within one of n/k (remainders go to the first folds). Deterministic given
// seed. Throws ClassTooSmall when a present class has fewer than k instances.
std::vector<FoldSplit> stratified_kfold(const Dataset& data, int k, std::uint64_t seed);

// Feature CSV: UTF-8, LF line endings, '.' decimal separator, header
// `trace_id,h_a,h_b,h,label[,synthetic]`. Reals are written with 17
// significant digits so the round-trip is lossless. Labels are `normal` or
// `failed`; `unknown` is accepted only when allow_unknown is set (batch
// featurization emits it for unlabeled traces).
Dataset read_csv(std::istream& in, bool allow_unknown = false);
Dataset read_csv(const std::string& path, bool allow_unknown = false);
void write_csv(const Dataset& data, std::ostream& out);
void write_csv(const Dataset& data, const std::string& path);
std::string to_csv(const Dataset& data);

// 17-significant-digit formatting used for all reals persisted to disk.
std::string format_real(double v);

}  // namespace runent

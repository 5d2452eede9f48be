#pragma once

#include "runent/dataset.hpp"
#include "runent/tree.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace runent {

// "failed" is the positive class throughout.
struct ConfusionMatrix {
    std::int64_t tp = 0;
    std::int64_t fn = 0;
    std::int64_t fp = 0;
    std::int64_t tn = 0;

    ConfusionMatrix& operator+=(const ConfusionMatrix& o);
    std::int64_t total() const { return tp + fn + fp + tn; }
};

// Any 0/0 metric is reported as nullopt ("undefined"), distinct from 0.
struct Scores {
    std::optional<double> precision;
    std::optional<double> tpr;
    std::optional<double> fpr;
    std::optional<double> f1;  // harmonic mean of precision and TPR
};

Scores score(const ConfusionMatrix& m);

// Evaluates the model on data (or the indexed subset when given).
ConfusionMatrix confusion(const TreeModel& model, const Dataset& data,
                          const std::vector<std::size_t>* indices = nullptr);

struct SmoteOptions {
    bool enabled = true;
    double target = 0.2;
    int k = 5;
    int forced_amount = 0;  // 0 = smallest amount reaching target
    bool before_cv = false; // oversample once, before splitting (leaks)
};

struct FoldOutcome {
    ConfusionMatrix cm;
    Scores scores;
    std::size_t leaves = 0;
};

struct EvalReport {
    ConfusionMatrix pooled;   // summed over test folds (micro average)
    Scores pooled_scores;
    Scores macro;             // per-fold means over folds where defined
    std::vector<FoldOutcome> folds;
    bool degenerate = false;  // every fold model collapsed to a single leaf
    int smote_noop_folds = 0; // folds where SMOTE found the target already met

    // config echo
    int m = 2;
    double cf = 0.25;
    std::uint64_t seed = 0;
    SmoteOptions smote;
};

// Stratified k-fold cross-validation. SMOTE is applied inside each training
// fold by default; smote.before_cv instead oversamples the whole dataset
// once, before splitting. Per-fold matrices are pooled into one and scored.
EvalReport crossval(const Dataset& data, const TrainConfig& cfg, int k,
                    std::uint64_t seed, const SmoteOptions& smote_opts);

// Human-readable results table (one row per report):
//     Parameter M  If SMOTE  Precision  TPR  FPR  F1-measure
// Undefined metrics print as '-'.
std::string report_table(const std::vector<EvalReport>& reports);

// Machine-readable CSV with pooled, macro and per-fold rows.
std::string report_csv(const std::vector<EvalReport>& reports);

}  // namespace runent

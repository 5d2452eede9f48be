#include "runent/metrics.hpp"

#include "runent/errors.hpp"
#include "runent/rng.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace runent {

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
    tp += o.tp;
    fn += o.fn;
    fp += o.fp;
    tn += o.tn;
    return *this;
}

Scores score(const ConfusionMatrix& m) {
    Scores s;
    if (m.tp + m.fn > 0) {
        s.tpr = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    }
    if (m.fp + m.tn > 0) {
        s.fpr = static_cast<double>(m.fp) / static_cast<double>(m.fp + m.tn);
    }
    if (m.tp + m.fp > 0) {
        s.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    }
    if (s.precision && s.tpr && (*s.precision + *s.tpr) > 0.0) {
        s.f1 = 2.0 * *s.precision * *s.tpr / (*s.precision + *s.tpr);
    }
    return s;
}

ConfusionMatrix confusion(const TreeModel& model, const Dataset& data,
                          const std::vector<std::size_t>* indices) {
    ConfusionMatrix m;
    auto tally = [&](const LabeledInstance& inst) {
        if (inst.label == Label::Unknown) {
            throw std::invalid_argument("confusion: unlabeled test instance '" + inst.trace_id +
                                        "'");
        }
        const bool actual_failed = inst.label == Label::Failed;
        const bool predicted_failed = predict(model, inst.features).label == Label::Failed;
        if (actual_failed) {
            (predicted_failed ? m.tp : m.fn) += 1;
        } else {
            (predicted_failed ? m.fp : m.tn) += 1;
        }
    };
    if (indices != nullptr) {
        for (std::size_t i : *indices) tally(data.instances.at(i));
    } else {
        for (const auto& inst : data.instances) tally(inst);
    }
    return m;
}

namespace {

// averages of the defined per-fold values
Scores macro_average(const std::vector<FoldOutcome>& folds) {
    Scores out;
    auto mean_of = [&](auto pick) -> std::optional<double> {
        double sum = 0.0;
        int n = 0;
        for (const auto& f : folds) {
            if (const auto v = pick(f.scores)) {
                sum += *v;
                ++n;
            }
        }
        if (n == 0) return std::nullopt;
        return sum / n;
    };
    out.precision = mean_of([](const Scores& s) { return s.precision; });
    out.tpr = mean_of([](const Scores& s) { return s.tpr; });
    out.fpr = mean_of([](const Scores& s) { return s.fpr; });
    out.f1 = mean_of([](const Scores& s) { return s.f1; });
    return out;
}

}  // namespace

EvalReport crossval(const Dataset& input, const TrainConfig& cfg, int k, std::uint64_t seed,
                    const SmoteOptions& smote_opts) {
    EvalReport report;
    report.m = cfg.min_leaf;
    report.cf = cfg.confidence;
    report.seed = seed;
    report.smote = smote_opts;

    Dataset data = input;
    if (smote_opts.enabled && smote_opts.before_cv) {
        auto r = smote(data, smote_opts.target, smote_opts.k, make_rng(seed, 0x5e0)(),
                       smote_opts.forced_amount);
        if (r.already_balanced) report.smote_noop_folds = k;
        data = std::move(r.data);
    }

    const auto folds = stratified_kfold(data, k, seed);
    bool all_single_leaf = true;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        Dataset train_set = data.subset(folds[f].train);
        if (smote_opts.enabled && !smote_opts.before_cv) {
            auto r = smote(train_set, smote_opts.target, smote_opts.k,
                           make_rng(seed, f + 1)(), smote_opts.forced_amount);
            if (r.already_balanced) ++report.smote_noop_folds;
            train_set = std::move(r.data);
        }
        const TreeModel model = train(train_set, cfg);
        FoldOutcome outcome;
        outcome.cm = confusion(model, data, &folds[f].test);
        outcome.scores = score(outcome.cm);
        outcome.leaves = leaf_count(model);
        all_single_leaf = all_single_leaf && outcome.leaves == 1;
        report.pooled += outcome.cm;
        report.folds.push_back(std::move(outcome));
    }
    report.pooled_scores = score(report.pooled);
    report.macro = macro_average(report.folds);
    report.degenerate = all_single_leaf;
    return report;
}

namespace {

std::string metric_fixed(const std::optional<double>& v) {
    if (!v) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", *v);
    return buf;
}

std::string metric_csv(const std::optional<double>& v) {
    return v ? format_real(*v) : "undefined";
}

void csv_row(std::ostream& out, const EvalReport& r, const std::string& fold,
             const ConfusionMatrix* cm, const Scores& s, bool degenerate) {
    out << r.m << ',' << format_real(r.cf) << ',' << r.seed << ','
        << (r.smote.enabled ? "yes" : "no") << ',' << format_real(r.smote.target) << ','
        << r.smote.k << ','
        << (r.smote.forced_amount > 0 ? std::to_string(r.smote.forced_amount) : "auto") << ','
        << (r.smote.before_cv ? 1 : 0) << ',' << fold << ',';
    if (cm != nullptr) {
        out << cm->tp << ',' << cm->fn << ',' << cm->fp << ',' << cm->tn;
    } else {
        out << ",,,";
    }
    out << ',' << metric_csv(s.precision) << ',' << metric_csv(s.tpr) << ','
        << metric_csv(s.fpr) << ',' << metric_csv(s.f1) << ',' << (degenerate ? 1 : 0) << '\n';
}

}  // namespace

std::string report_table(const std::vector<EvalReport>& reports) {
    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-12s %-9s %-10s %-6s %-6s %-10s\n", "Parameter M",
                  "If SMOTE", "Precision", "TPR", "FPR", "F1-measure");
    out << buf;
    int last_m = -1;
    for (const auto& r : reports) {
        const std::string m_cell = r.m == last_m ? "" : "M=" + std::to_string(r.m);
        last_m = r.m;
        std::string f1_cell = metric_fixed(r.pooled_scores.f1);
        if (r.degenerate) f1_cell += "  (single-leaf)";
        std::snprintf(buf, sizeof buf, "%-12s %-9s %-10s %-6s %-6s %s\n", m_cell.c_str(),
                      r.smote.enabled ? "Yes" : "No",
                      metric_fixed(r.pooled_scores.precision).c_str(),
                      metric_fixed(r.pooled_scores.tpr).c_str(),
                      metric_fixed(r.pooled_scores.fpr).c_str(), f1_cell.c_str());
        out << buf;
    }
    return out.str();
}

std::string report_csv(const std::vector<EvalReport>& reports) {
    std::ostringstream out;
    out << "m,cf,seed,smote,smote_target,smote_k,smote_amount,smote_before_cv,fold,"
           "tp,fn,fp,tn,precision,tpr,fpr,f1,degenerate\n";
    for (const auto& r : reports) {
        csv_row(out, r, "pooled", &r.pooled, r.pooled_scores, r.degenerate);
        csv_row(out, r, "macro", nullptr, r.macro, r.degenerate);
        for (std::size_t f = 0; f < r.folds.size(); ++f) {
            csv_row(out, r, std::to_string(f), &r.folds[f].cm, r.folds[f].scores,
                    r.folds[f].leaves == 1);
        }
    }
    return out.str();
}

}  // namespace runent

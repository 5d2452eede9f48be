#include "runent/dataset.hpp"

#include "runent/errors.hpp"
#include "runent/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace runent {

const char* to_string(Label l) {
    switch (l) {
        case Label::Normal: return "normal";
        case Label::Failed: return "failed";
        case Label::Unknown: return "unknown";
    }
    return "unknown";
}

std::optional<Label> label_from_string(std::string_view s) {
    if (s == "normal") return Label::Normal;
    if (s == "failed") return Label::Failed;
    if (s == "unknown") return Label::Unknown;
    return std::nullopt;
}

std::size_t Dataset::count(Label l) const {
    std::size_t n = 0;
    for (const auto& inst : instances) {
        if (inst.label == l) ++n;
    }
    return n;
}

bool Dataset::has_synthetic() const {
    for (const auto& inst : instances) {
        if (inst.synthetic) return true;
    }
    return false;
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
    Dataset out;
    out.feature_names = feature_names;
    out.instances.reserve(indices.size());
    for (std::size_t i : indices) out.instances.push_back(instances.at(i));
    return out;
}

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        d += diff * diff;
    }
    return d;
}

void require_trainable(const Dataset& data, const char* op) {
    for (const auto& inst : data.instances) {
        if (inst.label == Label::Unknown) {
            throw std::invalid_argument(std::string(op) + ": dataset contains unlabeled instances");
        }
        if (inst.features.size() != data.feature_names.size()) {
            throw SchemaMismatch("instance '" + inst.trace_id + "' has " +
                                 std::to_string(inst.features.size()) + " features, expected " +
                                 std::to_string(data.feature_names.size()));
        }
        for (double f : inst.features) {
            if (!std::isfinite(f)) {
                throw std::invalid_argument(std::string(op) + ": non-finite feature in '" +
                                            inst.trace_id + "'");
            }
        }
    }
}

}  // namespace

SmoteResult smote(const Dataset& data, double target_minority_fraction, int k,
                  std::uint64_t seed, int forced_amount) {
    if (!(target_minority_fraction > 0.0 && target_minority_fraction < 1.0)) {
        throw std::invalid_argument("smote: target fraction must be in (0,1)");
    }
    if (k < 1) throw std::invalid_argument("smote: k must be positive");
    require_trainable(data, "smote");

    const std::size_t n_normal = data.count(Label::Normal);
    const std::size_t n_failed = data.count(Label::Failed);
    const Label minority = n_failed <= n_normal ? Label::Failed : Label::Normal;
    const std::size_t m = minority == Label::Failed ? n_failed : n_normal;
    const std::size_t majority = minority == Label::Failed ? n_normal : n_failed;

    if (m < 2) throw MinorityTooSmall(m);

    SmoteResult result;
    result.data = data;

    int g = forced_amount;
    if (g <= 0) {
        const double fraction =
            static_cast<double>(m) / static_cast<double>(m + majority);
        if (fraction >= target_minority_fraction) {
            result.already_balanced = true;
            result.notice = "minority fraction " + format_real(fraction) +
                            " already meets target; no synthetics generated";
            return result;
        }
        // smallest g with m*(1+g)/(m*(1+g)+majority) >= target
        g = 1;
        while (static_cast<double>(m) * (1 + g) * (1.0 - target_minority_fraction) <
               target_minority_fraction * static_cast<double>(majority)) {
            ++g;
            if (g > 1000000) throw std::invalid_argument("smote: amount exceeds 1e6");
        }
    }
    result.amount = g;

    std::vector<std::size_t> minority_idx;
    for (std::size_t i = 0; i < data.instances.size(); ++i) {
        if (data.instances[i].label == minority) minority_idx.push_back(i);
    }

    // k nearest minority neighbors per minority instance, ties to lower index
    const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), m - 1);
    std::vector<std::vector<std::size_t>> neighbors(m);
    for (std::size_t a = 0; a < m; ++a) {
        std::vector<std::pair<double, std::size_t>> dists;
        dists.reserve(m - 1);
        for (std::size_t b = 0; b < m; ++b) {
            if (b == a) continue;
            dists.emplace_back(squared_distance(data.instances[minority_idx[a]].features,
                                                data.instances[minority_idx[b]].features),
                               minority_idx[b]);
        }
        std::sort(dists.begin(), dists.end());
        neighbors[a].reserve(kk);
        for (std::size_t j = 0; j < kk; ++j) neighbors[a].push_back(dists[j].second);
    }

    auto rng = make_rng(seed);
    for (std::size_t a = 0; a < m; ++a) {
        const auto& origin = data.instances[minority_idx[a]];
        for (int c = 0; c < g; ++c) {
            const auto& nn =
                data.instances[neighbors[a][bounded(rng, neighbors[a].size())]];
            const double u = unit_double(rng);
            LabeledInstance synth;
            synth.trace_id = origin.trace_id + "_s" + std::to_string(c);
            synth.label = minority;
            synth.synthetic = true;
            synth.features.resize(origin.features.size());
            for (std::size_t d = 0; d < origin.features.size(); ++d) {
                synth.features[d] = origin.features[d] + u * (nn.features[d] - origin.features[d]);
            }
            result.data.instances.push_back(std::move(synth));
        }
    }
    result.notice = "amount " + std::to_string(100 * g) + "% (" + std::to_string(g) +
                    " synthetic copies per minority instance)";
    return result;
}

std::vector<FoldSplit> stratified_kfold(const Dataset& data, int k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("kfold: k must be at least 2");
    require_trainable(data, "kfold");

    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < data.instances.size(); ++i) {
        by_class[data.instances[i].label == Label::Failed ? 1 : 0].push_back(i);
    }
    for (int c = 0; c < 2; ++c) {
        if (!by_class[c].empty() && by_class[c].size() < static_cast<std::size_t>(k)) {
            throw ClassTooSmall(c == 0 ? "normal" : "failed", by_class[c].size(), k);
        }
    }

    auto rng = make_rng(seed);
    std::vector<std::size_t> fold_of(data.instances.size(), 0);
    // One round-robin cursor shared across classes: per-class fold counts and
    // total fold sizes both stay within one of each other, and remainders
    // land in the first folds.
    int cursor = 0;
    for (auto& cls : by_class) {
        shuffle_deterministic(cls, rng);
        for (std::size_t idx : cls) {
            fold_of[idx] = static_cast<std::size_t>(cursor);
            cursor = (cursor + 1) % k;
        }
    }

    std::vector<FoldSplit> folds(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < data.instances.size(); ++i) {
        for (int f = 0; f < k; ++f) {
            auto& split = folds[static_cast<std::size_t>(f)];
            if (fold_of[i] == static_cast<std::size_t>(f)) {
                split.test.push_back(i);
            } else {
                split.train.push_back(i);
            }
        }
    }
    return folds;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

const std::vector<std::string> kSchema{"trace_id", "h_a", "h_b", "h", "label"};

}  // namespace

Dataset read_csv(std::istream& in, bool allow_unknown) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaMismatch("empty file");
    auto header = split_csv_line(line);

    bool with_synthetic = false;
    if (header.size() == kSchema.size() + 1 && header.back() == "synthetic") {
        with_synthetic = true;
        header.pop_back();
    }
    if (header != kSchema) {
        throw SchemaMismatch("header must be trace_id,h_a,h_b,h,label[,synthetic]");
    }

    Dataset data;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv_line(line);
        const std::size_t expected = kSchema.size() + (with_synthetic ? 1 : 0);
        if (cells.size() != expected) {
            throw SchemaMismatch("line " + std::to_string(line_no) + ": expected " +
                                 std::to_string(expected) + " cells, got " +
                                 std::to_string(cells.size()));
        }
        LabeledInstance inst;
        inst.trace_id = cells[0];
        inst.features.resize(3);
        for (int f = 0; f < 3; ++f) {
            const std::string& cell = cells[static_cast<std::size_t>(f) + 1];
            char* end = nullptr;
            inst.features[static_cast<std::size_t>(f)] = std::strtod(cell.c_str(), &end);
            if (end != cell.c_str() + cell.size() || cell.empty() ||
                !std::isfinite(inst.features[static_cast<std::size_t>(f)])) {
                throw SchemaMismatch("line " + std::to_string(line_no) +
                                     ": bad feature value '" + cell + "'");
            }
        }
        const auto label = label_from_string(cells[4]);
        if (!label || (*label == Label::Unknown && !allow_unknown)) {
            throw BadLabel(line_no, cells[4]);
        }
        inst.label = *label;
        if (with_synthetic) {
            if (cells[5] == "1") {
                inst.synthetic = true;
            } else if (cells[5] == "0") {
                inst.synthetic = false;
            } else {
                throw SchemaMismatch("line " + std::to_string(line_no) +
                                     ": bad synthetic flag '" + cells[5] + "'");
            }
        }
        data.instances.push_back(std::move(inst));
    }
    return data;
}

Dataset read_csv(const std::string& path, bool allow_unknown) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    return read_csv(in, allow_unknown);
}

void write_csv(const Dataset& data, std::ostream& out) {
    const bool with_synthetic = data.has_synthetic();
    out << "trace_id,h_a,h_b,h,label";
    if (with_synthetic) out << ",synthetic";
    out << '\n';
    for (const auto& inst : data.instances) {
        if (inst.features.size() != 3) {
            throw SchemaMismatch("instance '" + inst.trace_id + "' has " +
                                 std::to_string(inst.features.size()) + " features, expected 3");
        }
        out << inst.trace_id;
        for (double f : inst.features) {
            if (!std::isfinite(f)) {
                throw std::invalid_argument("write_csv: non-finite feature in '" +
                                            inst.trace_id + "'");
            }
            out << ',' << format_real(f);
        }
        out << ',' << to_string(inst.label);
        if (with_synthetic) out << ',' << (inst.synthetic ? '1' : '0');
        out << '\n';
    }
}

void write_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    write_csv(data, out);
}

std::string to_csv(const Dataset& data) {
    std::ostringstream out;
    write_csv(data, out);
    return out.str();
}

}  // namespace runent

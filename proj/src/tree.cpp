#include "runent/tree.hpp"

#include "runent/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace runent {

double class_entropy(double count_a, double count_b) {
    const double n = count_a + count_b;
    if (n <= 0.0) return 0.0;
    double h = 0.0;
    for (double c : {count_a, count_b}) {
        if (c > 0.0) {
            const double p = c / n;
            h -= p * std::log2(p);
        }
    }
    return h;
}

namespace {

int class_index(Label l) { return l == Label::Failed ? 1 : 0; }

Label majority(const std::array<double, 2>& counts) {
    // ties go to normal, the benign class
    return counts[1] > counts[0] ? Label::Failed : Label::Normal;
}

// Acklam's rational approximation to the standard normal quantile,
// |relative error| < 1.2e-9 over (0,1).
double inverse_normal_cdf(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

// Extra errors granted by the binomial upper confidence limit at cf, in the
// classic C4.5 style: normal approximation with continuity correction,
// exact base case for e == 0 and linear interpolation below one error.
double added_pessimistic_errors(double n, double e, double cf) {
    if (e < 1.0) {
        const double base = n * (1.0 - std::pow(cf, 1.0 / n));
        if (e == 0.0) return base;
        return base + e * (added_pessimistic_errors(n, 1.0, cf) - base);
    }
    if (e + 0.5 >= n) return std::max(n - e, 0.0);
    const double z = inverse_normal_cdf(1.0 - cf);
    const double f = (e + 0.5) / n;
    const double r =
        (f + z * z / (2.0 * n) + z * std::sqrt(f / n - f * f / n + z * z / (4.0 * n * n))) /
        (1.0 + z * z / n);
    return r * n - e;
}

double pessimistic_errors(const std::array<double, 2>& counts, double cf) {
    const double n = counts[0] + counts[1];
    if (n <= 0.0) return 0.0;
    const double e = n - std::max(counts[0], counts[1]);
    return e + added_pessimistic_errors(n, e, cf);
}

struct SplitChoice {
    int attribute = -1;
    double threshold = 0.0;
    double gain_ratio = -1.0;
};

struct Builder {
    const Dataset& data;
    const TrainConfig& cfg;

    std::unique_ptr<TreeNode> build(const std::vector<std::size_t>& idx) {
        auto node = std::make_unique<TreeNode>();
        for (std::size_t i : idx) {
            node->counts[static_cast<std::size_t>(class_index(data.instances[i].label))] += 1.0;
        }
        node->predicted = majority(node->counts);
        if (node->counts[0] == 0.0 || node->counts[1] == 0.0) return node;  // pure

        const SplitChoice best = choose_split(idx);
        if (best.attribute < 0) return node;

        std::vector<std::size_t> left, right;
        for (std::size_t i : idx) {
            const double v = data.instances[i].features[static_cast<std::size_t>(best.attribute)];
            (v <= best.threshold ? left : right).push_back(i);
        }
        node->attribute = best.attribute;
        node->threshold = best.threshold;
        node->left = build(left);
        node->right = build(right);
        return node;
    }

    SplitChoice choose_split(const std::vector<std::size_t>& idx) const {
        SplitChoice best;
        const std::size_t n = idx.size();
        const std::size_t min_leaf = static_cast<std::size_t>(cfg.min_leaf);
        double c0 = 0.0, c1 = 0.0;
        for (std::size_t i : idx) {
            (data.instances[i].label == Label::Failed ? c1 : c0) += 1.0;
        }
        const double parent_h = class_entropy(c0, c1);

        std::vector<std::pair<double, int>> values(n);  // (feature value, class)
        for (int attr = 0; attr < static_cast<int>(data.feature_names.size()); ++attr) {
            for (std::size_t j = 0; j < n; ++j) {
                const auto& inst = data.instances[idx[j]];
                values[j] = {inst.features[static_cast<std::size_t>(attr)],
                             class_index(inst.label)};
            }
            std::sort(values.begin(), values.end());

            double l0 = 0.0, l1 = 0.0;
            for (std::size_t j = 1; j < n; ++j) {
                (values[j - 1].second == 1 ? l1 : l0) += 1.0;
                if (values[j].first == values[j - 1].first) continue;
                const std::size_t nl = j, nr = n - j;
                if (nl < min_leaf || nr < min_leaf) continue;
                const double gain = parent_h -
                                    (static_cast<double>(nl) / static_cast<double>(n)) *
                                        class_entropy(l0, l1) -
                                    (static_cast<double>(nr) / static_cast<double>(n)) *
                                        class_entropy(c0 - l0, c1 - l1);
                if (gain <= 0.0) continue;
                double threshold = (values[j - 1].first + values[j].first) / 2.0;
                // the midpoint of two adjacent doubles can round up to the
                // right value; pin it below so the partition matches nl/nr
                if (threshold >= values[j].first) threshold = values[j - 1].first;
                const double ratio = gain / class_entropy(static_cast<double>(nl),
                                                          static_cast<double>(nr));
                // strict > keeps the first best: lowest attribute, then
                // lowest threshold
                if (ratio > best.gain_ratio) {
                    best = {attr, threshold, ratio};
                }
            }
        }
        return best;
    }
};

double prune_subtree(TreeNode& node, double cf) {
    if (node.is_leaf()) return pessimistic_errors(node.counts, cf);
    const double as_subtree = prune_subtree(*node.left, cf) + prune_subtree(*node.right, cf);
    const double as_leaf = pessimistic_errors(node.counts, cf);
    if (as_leaf <= as_subtree) {
        node.attribute = -1;
        node.left.reset();
        node.right.reset();
        node.predicted = majority(node.counts);
        return as_leaf;
    }
    return as_subtree;
}

std::unique_ptr<TreeNode> clone_node(const TreeNode& node) {
    auto out = std::make_unique<TreeNode>();
    out->counts = node.counts;
    out->predicted = node.predicted;
    out->attribute = node.attribute;
    out->threshold = node.threshold;
    if (node.left) out->left = clone_node(*node.left);
    if (node.right) out->right = clone_node(*node.right);
    return out;
}

std::size_t count_leaves(const TreeNode& node) {
    if (node.is_leaf()) return 1;
    return count_leaves(*node.left) + count_leaves(*node.right);
}

}  // namespace

TreeModel TreeModel::clone() const {
    TreeModel out;
    out.feature_names = feature_names;
    out.notice = notice;
    if (root) out.root = clone_node(*root);
    return out;
}

TreeModel train(const Dataset& data, const TrainConfig& cfg) {
    if (data.instances.empty()) throw EmptyDataset();
    if (cfg.min_leaf < 2) throw std::invalid_argument("train: min_leaf must be at least 2");
    if (!(cfg.confidence > 0.0 && cfg.confidence <= 0.5)) {
        throw std::invalid_argument("train: confidence factor must be in (0, 0.5]");
    }
    for (const auto& inst : data.instances) {
        if (inst.label == Label::Unknown) {
            throw std::invalid_argument("train: dataset contains unlabeled instances");
        }
        if (inst.features.size() != data.feature_names.size()) {
            throw SchemaMismatch("instance '" + inst.trace_id + "' has " +
                                 std::to_string(inst.features.size()) + " features, expected " +
                                 std::to_string(data.feature_names.size()));
        }
        for (double f : inst.features) {
            if (!std::isfinite(f)) {
                throw std::invalid_argument("train: non-finite feature in '" + inst.trace_id + "'");
            }
        }
    }

    TreeModel model;
    model.feature_names = data.feature_names;

    std::vector<std::size_t> all(data.instances.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

    Builder builder{data, cfg};
    model.root = builder.build(all);

    if (model.root->counts[0] == 0.0 || model.root->counts[1] == 0.0) {
        model.notice = "training set contains a single class; model is one leaf";
        return model;
    }
    if (cfg.prune) prune_subtree(*model.root, cfg.confidence);
    return model;
}

Prediction predict(const TreeModel& model, const std::vector<double>& features) {
    if (!model.root) throw Error("predict: empty model");
    if (features.size() != model.feature_names.size()) {
        throw SchemaMismatch("feature vector has " + std::to_string(features.size()) +
                             " values, model expects " +
                             std::to_string(model.feature_names.size()));
    }
    const TreeNode* node = model.root.get();
    while (!node->is_leaf()) {
        node = features[static_cast<std::size_t>(node->attribute)] <= node->threshold
                   ? node->left.get()
                   : node->right.get();
    }
    const double total = node->counts[0] + node->counts[1];
    Prediction p;
    p.label = node->predicted;
    p.confidence =
        total > 0.0 ? node->counts[static_cast<std::size_t>(class_index(p.label))] / total : 1.0;
    return p;
}

std::size_t leaf_count(const TreeModel& model) {
    return model.root ? count_leaves(*model.root) : 0;
}

namespace {

void serialize_node(const TreeNode& node, const std::vector<std::string>& names, int depth,
                    std::string& out) {
    out.append(static_cast<std::size_t>(2 * depth), ' ');
    char buf[64];
    if (node.is_leaf()) {
        out += "leaf ";
        out += to_string(node.predicted);
        std::snprintf(buf, sizeof buf, " [%.17g,%.17g]\n", node.counts[0], node.counts[1]);
        out += buf;
        return;
    }
    out += "split ";
    out += names[static_cast<std::size_t>(node.attribute)];
    std::snprintf(buf, sizeof buf, " <= %.17g\n", node.threshold);
    out += buf;
    serialize_node(*node.left, names, depth + 1, out);
    serialize_node(*node.right, names, depth + 1, out);
}

struct ModelParser {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    std::vector<std::string> feature_names;

    int line_no() const { return static_cast<int>(pos + 1); }

    std::unique_ptr<TreeNode> parse_node(int depth) {
        if (pos >= lines.size()) {
            throw ModelParseError(line_no(), "unexpected end of model");
        }
        const std::string& line = lines[pos];
        const std::size_t indent = static_cast<std::size_t>(2 * depth);
        if (line.size() < indent || line.compare(0, indent, std::string(indent, ' ')) != 0 ||
            (line.size() > indent && line[indent] == ' ')) {
            throw ModelParseError(line_no(), "bad indentation (expected depth " +
                                                 std::to_string(depth) + ")");
        }
        const std::string body = line.substr(indent);
        const int at_line = line_no();
        ++pos;

        auto node = std::make_unique<TreeNode>();
        if (body.rfind("split ", 0) == 0) {
            std::istringstream ss(body.substr(6));
            std::string attr, op;
            double threshold = 0.0;
            if (!(ss >> attr >> op >> threshold) || op != "<=" || !ss.eof() ||
                !std::isfinite(threshold)) {
                throw ModelParseError(at_line, "bad split line '" + body + "'");
            }
            const auto it = std::find(feature_names.begin(), feature_names.end(), attr);
            if (it == feature_names.end()) {
                throw ModelParseError(at_line, "unknown attribute '" + attr + "'");
            }
            node->attribute = static_cast<int>(it - feature_names.begin());
            node->threshold = threshold;
            node->left = parse_node(depth + 1);
            node->right = parse_node(depth + 1);
            node->counts[0] = node->left->counts[0] + node->right->counts[0];
            node->counts[1] = node->left->counts[1] + node->right->counts[1];
            node->predicted = majority(node->counts);
            return node;
        }
        if (body.rfind("leaf ", 0) == 0) {
            std::istringstream ss(body.substr(5));
            std::string cls, counts;
            if (!(ss >> cls >> counts) || !ss.eof()) {
                throw ModelParseError(at_line, "bad leaf line '" + body + "'");
            }
            const auto label = label_from_string(cls);
            if (!label || *label == Label::Unknown) {
                throw ModelParseError(at_line, "bad leaf class '" + cls + "'");
            }
            const auto comma = counts.find(',');
            if (counts.size() < 5 || counts.front() != '[' || counts.back() != ']' ||
                comma == std::string::npos) {
                throw ModelParseError(at_line, "bad leaf counts '" + counts + "'");
            }
            char* end = nullptr;
            const std::string c0 = counts.substr(1, comma - 1);
            const std::string c1 = counts.substr(comma + 1, counts.size() - comma - 2);
            node->counts[0] = std::strtod(c0.c_str(), &end);
            if (end != c0.c_str() + c0.size() || c0.empty()) {
                throw ModelParseError(at_line, "bad leaf counts '" + counts + "'");
            }
            node->counts[1] = std::strtod(c1.c_str(), &end);
            if (end != c1.c_str() + c1.size() || c1.empty()) {
                throw ModelParseError(at_line, "bad leaf counts '" + counts + "'");
            }
            if (!std::isfinite(node->counts[0]) || !std::isfinite(node->counts[1]) ||
                node->counts[0] < 0.0 || node->counts[1] < 0.0) {
                throw ModelParseError(at_line, "leaf counts must be finite and non-negative");
            }
            node->predicted = *label;
            return node;
        }
        throw ModelParseError(at_line, "expected 'split' or 'leaf'");
    }
};

}  // namespace

std::string serialize(const TreeModel& model) {
    if (!model.root) throw Error("serialize: empty model");
    std::string out = "runent-c45 1 ";
    for (std::size_t i = 0; i < model.feature_names.size(); ++i) {
        if (i != 0) out += ',';
        out += model.feature_names[i];
    }
    out += '\n';
    serialize_node(*model.root, model.feature_names, 0, out);
    return out;
}

TreeModel deserialize(const std::string& text) {
    ModelParser parser;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        parser.lines.push_back(line);
    }
    while (!parser.lines.empty() && parser.lines.back().empty()) parser.lines.pop_back();
    if (parser.lines.empty()) throw ModelParseError(1, "empty model file");

    std::istringstream header(parser.lines[0]);
    std::string magic, version, schema;
    if (!(header >> magic >> version >> schema) || magic != "runent-c45" || version != "1") {
        throw ModelParseError(1, "bad header (expected 'runent-c45 1 <features>')");
    }
    TreeModel model;
    std::string name;
    std::istringstream schema_ss(schema);
    while (std::getline(schema_ss, name, ',')) {
        if (name.empty()) throw ModelParseError(1, "empty feature name in schema");
        model.feature_names.push_back(name);
    }
    if (model.feature_names.empty()) throw ModelParseError(1, "empty feature schema");

    parser.feature_names = model.feature_names;
    parser.pos = 1;
    model.root = parser.parse_node(0);
    if (parser.pos != parser.lines.size()) {
        throw ModelParseError(parser.line_no(), "trailing content after model");
    }
    return model;
}

void save_model(const TreeModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << serialize(model);
}

TreeModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize(ss.str());
}

}  // namespace runent

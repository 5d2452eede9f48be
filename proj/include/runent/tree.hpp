#pragma once

#include "runent/dataset.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace runent {

struct TrainConfig {
    int min_leaf = 2;          // M: both children of every split get >= M instances
    double confidence = 0.25;  // CF in (0, 0.5]; smaller prunes more
    std::uint64_t seed = 0;
    bool prune = true;
};

// Binary decision tree over continuous attributes. Internal nodes route
// feature[attribute] <= threshold to the left child, > to the right.
struct TreeNode {
    std::array<double, 2> counts{0.0, 0.0};  // training instances [normal, failed]
    Label predicted = Label::Normal;         // leaves: majority class, ties -> normal
    int attribute = -1;                      // -1 marks a leaf
    double threshold = 0.0;
    std::unique_ptr<TreeNode> left, right;

    bool is_leaf() const { return attribute < 0; }
};

struct TreeModel {
    std::unique_ptr<TreeNode> root;
    std::vector<std::string> feature_names;
    std::string notice;  // set when training degenerated (single class)

    TreeModel clone() const;
};

struct Prediction {
    Label label = Label::Normal;
    double confidence = 0.0;  // predicted-class fraction at the reached leaf
};

// Top-down induction: at each node every midpoint between consecutive
// distinct sorted attribute values is a candidate; the split with the best
// gain ratio among those with positive information gain and both children
// >= min_leaf wins (ties: lowest attribute index, then lowest threshold).
// Pessimistic error pruning then replaces a subtree by a leaf whenever the
// leaf's upper-confidence error bound is <= the subtree's aggregated bound.
// Deterministic given the dataset order and config.
TreeModel train(const Dataset& data, const TrainConfig& cfg);

Prediction predict(const TreeModel& model, const std::vector<double>& features);

std::size_t leaf_count(const TreeModel& model);

// Model file format, line oriented, two-space indent per depth:
//
//     runent-c45 1 h_a,h_b,h
//     split h_b <= 1.25
//       leaf normal [10,0]
//       leaf failed [2,7]
//
// Thresholds and counts carry 17 significant digits; round-trips are exact.
std::string serialize(const TreeModel& model);
TreeModel deserialize(const std::string& text);
void save_model(const TreeModel& model, const std::string& path);
TreeModel load_model(const std::string& path);

// Class entropy in bits of a two-way count split; exposed for reuse and
// direct testing of the gain arithmetic.
double class_entropy(double count_a, double count_b);

}  // namespace runent

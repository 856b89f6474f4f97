#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tauw/errors.hpp"

namespace tauw::qim {

/// Binary CART node. Internal nodes route feature values <= threshold to the
/// left child and > threshold to the right child. Leaves carry training
/// counts and, after calibration, an upper-bound uncertainty.
struct TreeNode {
  int feature = -1;  // index into the feature schema; internal nodes only
  double threshold = 0.0;
  std::unique_ptr<TreeNode> left;
  std::unique_ptr<TreeNode> right;

  std::int64_t train_error_count = 0;
  std::int64_t train_count = 0;
  std::optional<double> calibrated_uncertainty;
  std::optional<std::int64_t> calibration_count;

  bool is_leaf() const { return left == nullptr; }
};

std::unique_ptr<TreeNode> clone_tree(const TreeNode& node);

struct TrainingRow {
  std::vector<double> features;
  bool failed = false;
};

struct QimParams {
  int max_depth = 8;
  std::int64_t min_leaf = 200;
  double confidence = 0.999;
};

/// Binary gini impurity 2*p*(1-p) with p = error_count / total, in [0, 0.5].
double gini_impurity(std::int64_t error_count, std::int64_t total);

/// Greedy CART on the binary failure label. Splits minimize the weighted
/// child gini; candidate thresholds are midpoints between adjacent observed
/// values and ties break on (lower feature index, lower threshold). Stops at
/// max_depth, at pure nodes, or when no split reduces impurity.
std::unique_ptr<TreeNode> fit_tree(std::span<const TrainingRow> records, int max_depth = 8);

struct CalibratedTree {
  std::unique_ptr<TreeNode> root;
  std::vector<std::string> feature_names;
  double confidence_level = 0.999;
  std::int64_t min_leaf_calibration = 200;

  CalibratedTree clone() const;
};

/// Routes the calibration set through the tree, merges sibling leaves
/// (deepest first, leftmost on ties) until every leaf holds at least
/// min_leaf calibration records, then attaches the one-sided upper
/// confidence bound on the failure rate to every leaf.
///
/// Throws CalibrationError when the calibration set is smaller than min_leaf.
CalibratedTree calibrate_tree(std::unique_ptr<TreeNode> tree,
                              std::span<const TrainingRow> calibration,
                              std::vector<std::string> feature_names,
                              std::int64_t min_leaf = 200,
                              double confidence = 0.999);

/// P(X <= k) for X ~ Binomial(n, p).
double binomial_cdf(std::int64_t k, std::int64_t n, double p);

/// Exact one-sided Clopper-Pearson upper bound: the smallest p with
/// P(X <= k | Binomial(n, p)) <= 1 - confidence. Dispatches k = n to 1.0 and
/// k = 0 to the closed form 1 - (1 - confidence)^(1/n).
double clopper_pearson_upper(std::int64_t errors, std::int64_t draws, double confidence);

/// General bisection solver behind clopper_pearson_upper; valid for all k
/// including the closed-form cases. Interval tolerance 1e-12.
double clopper_pearson_upper_bisection(std::int64_t errors, std::int64_t draws,
                                       double confidence);

const TreeNode& route_to_leaf(const TreeNode& root, std::span<const double> features);

/// Calibrated upper-bound uncertainty of the leaf the features route to.
double predict_uncertainty(const CalibratedTree& tree, std::span<const double> features);

std::vector<const TreeNode*> collect_leaves(const TreeNode& root);
int tree_depth(const TreeNode& root);

// JSON serialization. Counts survive exactly; reals use shortest round-trip
// formatting so they reload bit-identical.
std::string tree_to_json_string(const CalibratedTree& tree);
CalibratedTree tree_from_json_string(const std::string& text);
void save_tree(const CalibratedTree& tree, const std::filesystem::path& path);
CalibratedTree load_tree(const std::filesystem::path& path);

}  // namespace tauw::qim

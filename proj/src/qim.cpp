#include "tauw/qim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace tauw::qim {

using nlohmann::json;

std::unique_ptr<TreeNode> clone_tree(const TreeNode& node) {
  auto out = std::make_unique<TreeNode>();
  out->feature = node.feature;
  out->threshold = node.threshold;
  out->train_error_count = node.train_error_count;
  out->train_count = node.train_count;
  out->calibrated_uncertainty = node.calibrated_uncertainty;
  out->calibration_count = node.calibration_count;
  if (!node.is_leaf()) {
    out->left = clone_tree(*node.left);
    out->right = clone_tree(*node.right);
  }
  return out;
}

CalibratedTree CalibratedTree::clone() const {
  return {root ? clone_tree(*root) : nullptr, feature_names, confidence_level,
          min_leaf_calibration};
}

double gini_impurity(std::int64_t error_count, std::int64_t total) {
  if (total <= 0) throw DomainError("gini_impurity: total must be positive");
  if (error_count < 0 || error_count > total) {
    throw DomainError("gini_impurity: error_count must lie in [0, total]");
  }
  const double p = static_cast<double>(error_count) / static_cast<double>(total);
  return 2.0 * p * (1.0 - p);
}

namespace {

void check_rows(std::span<const TrainingRow> records) {
  if (records.empty()) throw DomainError("training rows must be non-empty");
  const std::size_t width = records.front().features.size();
  for (const auto& row : records) {
    if (row.features.size() != width) {
      throw SchemaError("training rows do not share one feature schema");
    }
  }
}

struct BestSplit {
  bool found = false;
  double weighted_gini = std::numeric_limits<double>::infinity();
  int feature = -1;
  double threshold = 0.0;
};

std::unique_ptr<TreeNode> grow(std::span<const TrainingRow> records,
                               std::vector<std::int64_t>& indices, int depth,
                               int max_depth) {
  auto node = std::make_unique<TreeNode>();
  const std::int64_t n = static_cast<std::int64_t>(indices.size());
  std::int64_t errors = 0;
  for (std::int64_t i : indices) errors += records[i].failed ? 1 : 0;
  node->train_error_count = errors;
  node->train_count = n;

  if (depth >= max_depth || errors == 0 || errors == n) return node;

  const double parent_gini = gini_impurity(errors, n);
  const int n_features = static_cast<int>(records.front().features.size());

  BestSplit best;
  std::vector<std::pair<double, bool>> column(indices.size());
  for (int f = 0; f < n_features; ++f) {
    for (std::size_t i = 0; i < indices.size(); ++i) {
      const TrainingRow& row = records[indices[i]];
      column[i] = {row.features[f], row.failed};
    }
    std::sort(column.begin(), column.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    std::int64_t left_n = 0;
    std::int64_t left_err = 0;
    for (std::size_t i = 0; i + 1 < column.size(); ++i) {
      left_n += 1;
      left_err += column[i].second ? 1 : 0;
      if (column[i].first == column[i + 1].first) continue;
      const double threshold = 0.5 * (column[i].first + column[i + 1].first);
      const std::int64_t right_n = n - left_n;
      const std::int64_t right_err = errors - left_err;
      const double weighted =
          (static_cast<double>(left_n) * gini_impurity(left_err, left_n) +
           static_cast<double>(right_n) * gini_impurity(right_err, right_n)) /
          static_cast<double>(n);
      // Features and thresholds are scanned in ascending order, so keeping
      // only strict improvements realizes the (feature index, threshold)
      // tie-break.
      if (weighted < best.weighted_gini) {
        best = {true, weighted, f, threshold};
      }
    }
  }

  if (!best.found || best.weighted_gini >= parent_gini - 1e-12) return node;

  std::vector<std::int64_t> left_idx;
  std::vector<std::int64_t> right_idx;
  for (std::int64_t i : indices) {
    if (records[i].features[best.feature] <= best.threshold) {
      left_idx.push_back(i);
    } else {
      right_idx.push_back(i);
    }
  }
  node->feature = best.feature;
  node->threshold = best.threshold;
  node->left = grow(records, left_idx, depth + 1, max_depth);
  node->right = grow(records, right_idx, depth + 1, max_depth);
  return node;
}

}  // namespace

std::unique_ptr<TreeNode> fit_tree(std::span<const TrainingRow> records, int max_depth) {
  check_rows(records);
  if (max_depth < 0) throw DomainError("fit_tree: max_depth must be >= 0");
  std::vector<std::int64_t> indices(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) indices[i] = static_cast<std::int64_t>(i);
  return grow(records, indices, 0, max_depth);
}

double binomial_cdf(std::int64_t k, std::int64_t n, double p) {
  if (n < 1) throw DomainError("binomial_cdf: n must be >= 1");
  if (k < 0 || k > n) throw DomainError("binomial_cdf: k must lie in [0, n]");
  if (p <= 0.0) return 1.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  if (k == n) return 1.0;
  const double log_q = std::log1p(-p);
  if (k == 0) return std::exp(static_cast<double>(n) * log_q);

  // Log-space term summation keeps small tail masses accurate for large n.
  const double log_p = std::log(p);
  const double lgn = std::lgamma(static_cast<double>(n) + 1.0);
  std::vector<double> log_terms;
  log_terms.reserve(static_cast<std::size_t>(k) + 1);
  double max_term = -std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i <= k; ++i) {
    const double lt = lgn - std::lgamma(static_cast<double>(i) + 1.0) -
                      std::lgamma(static_cast<double>(n - i) + 1.0) +
                      static_cast<double>(i) * log_p +
                      static_cast<double>(n - i) * log_q;
    log_terms.push_back(lt);
    max_term = std::max(max_term, lt);
  }
  double sum = 0.0;
  for (double lt : log_terms) sum += std::exp(lt - max_term);
  return std::min(1.0, std::exp(max_term) * sum);
}

namespace {

void check_cp_args(std::int64_t k, std::int64_t n, double confidence) {
  if (n < 1) throw DomainError("clopper_pearson_upper: n must be >= 1");
  if (k < 0 || k > n) throw DomainError("clopper_pearson_upper: k must lie in [0, n]");
  if (!(confidence > 0.5 && confidence < 1.0)) {
    throw DomainError("clopper_pearson_upper: confidence must lie in (0.5, 1)");
  }
}

}  // namespace

double clopper_pearson_upper_bisection(std::int64_t k, std::int64_t n, double confidence) {
  check_cp_args(k, n, confidence);
  if (k == n) return 1.0;
  const double alpha = 1.0 - confidence;
  double lo = 0.0;  // cdf(lo) = 1 > alpha
  double hi = 1.0;  // cdf(hi) = 0 <= alpha
  for (int iter = 0; iter < 200 && hi - lo > 1e-14; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (binomial_cdf(k, n, mid) <= alpha) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double clopper_pearson_upper(std::int64_t k, std::int64_t n, double confidence) {
  check_cp_args(k, n, confidence);
  if (k == n) return 1.0;
  if (k == 0) {
    // 1 - (1 - confidence)^(1/n)
    return -std::expm1(std::log1p(-confidence) / static_cast<double>(n));
  }
  return clopper_pearson_upper_bisection(k, n, confidence);
}

namespace {

struct LeafCal {
  std::int64_t errors = 0;
  std::int64_t count = 0;
};

struct LeafInfo {
  TreeNode* node = nullptr;
  TreeNode* parent = nullptr;
  int depth = 0;
  int preorder = 0;
};

void gather_leaves(TreeNode* node, TreeNode* parent, int depth, int& counter,
                   std::vector<LeafInfo>& out) {
  const int order = counter++;
  if (node->is_leaf()) {
    out.push_back({node, parent, depth, order});
    return;
  }
  gather_leaves(node->left.get(), node, depth + 1, counter, out);
  gather_leaves(node->right.get(), node, depth + 1, counter, out);
}

void sum_subtree(const TreeNode& node,
                 const std::unordered_map<const TreeNode*, LeafCal>& cal,
                 std::int64_t& train_err, std::int64_t& train_n,
                 std::int64_t& cal_err, std::int64_t& cal_n) {
  if (node.is_leaf()) {
    train_err += node.train_error_count;
    train_n += node.train_count;
    auto it = cal.find(&node);
    if (it != cal.end()) {
      cal_err += it->second.errors;
      cal_n += it->second.count;
    }
    return;
  }
  sum_subtree(*node.left, cal, train_err, train_n, cal_err, cal_n);
  sum_subtree(*node.right, cal, train_err, train_n, cal_err, cal_n);
}

}  // namespace

CalibratedTree calibrate_tree(std::unique_ptr<TreeNode> tree,
                              std::span<const TrainingRow> calibration,
                              std::vector<std::string> feature_names,
                              std::int64_t min_leaf, double confidence) {
  if (!tree) throw DomainError("calibrate_tree: tree must be fitted");
  check_rows(calibration);
  if (!(confidence > 0.5 && confidence < 1.0)) {
    throw DomainError("calibrate_tree: confidence must lie in (0.5, 1)");
  }
  if (min_leaf < 1) throw DomainError("calibrate_tree: min_leaf must be >= 1");
  if (calibration.front().features.size() != feature_names.size()) {
    throw SchemaError("calibrate_tree: calibration rows do not match the feature schema");
  }
  const std::int64_t total = static_cast<std::int64_t>(calibration.size());
  if (total < min_leaf) {
    throw CalibrationError("calibration set smaller than min_leaf; no leaf can qualify");
  }

  std::unordered_map<const TreeNode*, LeafCal> cal;
  for (const auto& row : calibration) {
    const TreeNode& leaf = route_to_leaf(*tree, row.features);
    LeafCal& c = cal[&leaf];
    c.count += 1;
    c.errors += row.failed ? 1 : 0;
  }

  // Prune until every leaf holds min_leaf calibration records: take the
  // deepest deficient leaf (leftmost on ties) and fold its parent's subtree
  // into a single leaf, which is what pairwise sibling merges below that
  // parent amount to.
  for (;;) {
    std::vector<LeafInfo> leaves;
    int counter = 0;
    gather_leaves(tree.get(), nullptr, 0, counter, leaves);

    const LeafInfo* worst = nullptr;
    for (const auto& info : leaves) {
      auto it = cal.find(info.node);
      const std::int64_t count = it == cal.end() ? 0 : it->second.count;
      if (count >= min_leaf) continue;
      if (!worst || info.depth > worst->depth ||
          (info.depth == worst->depth && info.preorder < worst->preorder)) {
        worst = &info;
      }
    }
    if (!worst) break;
    if (!worst->parent) break;  // root leaf; total >= min_leaf guarantees it qualifies

    TreeNode* parent = worst->parent;
    std::int64_t train_err = 0, train_n = 0, cal_err = 0, cal_n = 0;
    sum_subtree(*parent, cal, train_err, train_n, cal_err, cal_n);
    parent->left.reset();
    parent->right.reset();
    parent->feature = -1;
    parent->threshold = 0.0;
    parent->train_error_count = train_err;
    parent->train_count = train_n;
    cal[parent] = {cal_err, cal_n};
  }

  std::vector<LeafInfo> final_leaves;
  int counter = 0;
  gather_leaves(tree.get(), nullptr, 0, counter, final_leaves);
  for (const auto& info : final_leaves) {
    const LeafCal& c = cal[info.node];
    info.node->calibration_count = c.count;
    info.node->calibrated_uncertainty = clopper_pearson_upper(c.errors, c.count, confidence);
  }

  return {std::move(tree), std::move(feature_names), confidence, min_leaf};
}

const TreeNode& route_to_leaf(const TreeNode& root, std::span<const double> features) {
  const TreeNode* node = &root;
  while (!node->is_leaf()) {
    if (node->feature < 0 || static_cast<std::size_t>(node->feature) >= features.size()) {
      throw SchemaError("feature vector too short for this tree");
    }
    node = features[node->feature] <= node->threshold ? node->left.get() : node->right.get();
  }
  return *node;
}

double predict_uncertainty(const CalibratedTree& tree, std::span<const double> features) {
  if (features.size() != tree.feature_names.size()) {
    throw SchemaError("feature vector does not match the tree schema");
  }
  const TreeNode& leaf = route_to_leaf(*tree.root, features);
  if (!leaf.calibrated_uncertainty) {
    throw DomainError("tree is not calibrated");
  }
  return *leaf.calibrated_uncertainty;
}

std::vector<const TreeNode*> collect_leaves(const TreeNode& root) {
  std::vector<const TreeNode*> out;
  if (root.is_leaf()) {
    out.push_back(&root);
    return out;
  }
  for (const TreeNode* child : {root.left.get(), root.right.get()}) {
    auto sub = collect_leaves(*child);
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

int tree_depth(const TreeNode& root) {
  if (root.is_leaf()) return 0;
  return 1 + std::max(tree_depth(*root.left), tree_depth(*root.right));
}

namespace {

json node_to_json(const TreeNode& node, const std::vector<std::string>& names) {
  if (node.is_leaf()) {
    json j = {{"train_error_count", node.train_error_count},
              {"train_count", node.train_count}};
    if (node.calibrated_uncertainty) j["calibrated_uncertainty"] = *node.calibrated_uncertainty;
    if (node.calibration_count) j["calibration_count"] = *node.calibration_count;
    return j;
  }
  return {{"feature_name", names.at(node.feature)},
          {"threshold", node.threshold},
          {"left", node_to_json(*node.left, names)},
          {"right", node_to_json(*node.right, names)}};
}

std::unique_ptr<TreeNode> node_from_json(const json& j, const std::vector<std::string>& names) {
  auto node = std::make_unique<TreeNode>();
  if (j.contains("feature_name")) {
    const std::string name = j.at("feature_name").get<std::string>();
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw IoError("tree references unknown feature: " + name);
    node->feature = static_cast<int>(it - names.begin());
    node->threshold = j.at("threshold").get<double>();
    node->left = node_from_json(j.at("left"), names);
    node->right = node_from_json(j.at("right"), names);
  } else {
    node->train_error_count = j.at("train_error_count").get<std::int64_t>();
    node->train_count = j.at("train_count").get<std::int64_t>();
    if (j.contains("calibrated_uncertainty")) {
      node->calibrated_uncertainty = j.at("calibrated_uncertainty").get<double>();
    }
    if (j.contains("calibration_count")) {
      node->calibration_count = j.at("calibration_count").get<std::int64_t>();
    }
  }
  return node;
}

}  // namespace

std::string tree_to_json_string(const CalibratedTree& tree) {
  json j = {{"feature_names", tree.feature_names},
            {"confidence_level", tree.confidence_level},
            {"min_leaf_calibration", tree.min_leaf_calibration},
            {"root", node_to_json(*tree.root, tree.feature_names)}};
  return j.dump(2) + "\n";
}

CalibratedTree tree_from_json_string(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw IoError("malformed tree JSON");
  try {
    CalibratedTree tree;
    tree.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    tree.confidence_level = j.at("confidence_level").get<double>();
    tree.min_leaf_calibration = j.at("min_leaf_calibration").get<std::int64_t>();
    tree.root = node_from_json(j.at("root"), tree.feature_names);
    return tree;
  } catch (const json::exception& e) {
    throw IoError(std::string("bad tree JSON: ") + e.what());
  }
}

void save_tree(const CalibratedTree& tree, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << tree_to_json_string(tree);
  if (!out) throw IoError("write failed: " + path.string());
}

CalibratedTree load_tree(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return tree_from_json_string(buffer.str());
}

}  // namespace tauw::qim

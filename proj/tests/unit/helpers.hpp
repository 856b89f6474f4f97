#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tauw/core.hpp"
#include "tauw/qim.hpp"

namespace tauw::testing {

inline qim::CalibratedTree leaf_tree(double bound, std::vector<std::string> names = {"x"},
                                     std::int64_t cal_count = 1000) {
  qim::CalibratedTree tree;
  tree.root = std::make_unique<qim::TreeNode>();
  tree.root->calibrated_uncertainty = bound;
  tree.root->calibration_count = cal_count;
  tree.root->train_count = cal_count;
  tree.feature_names = std::move(names);
  return tree;
}

/// Single split on feature 0 at `threshold`; left/right leaves carry the
/// given bounds.
inline qim::CalibratedTree stump_tree(double threshold, double left_bound, double right_bound,
                                      std::vector<std::string> names = {"x"}) {
  qim::CalibratedTree tree;
  tree.root = std::make_unique<qim::TreeNode>();
  tree.root->feature = 0;
  tree.root->threshold = threshold;
  tree.root->left = std::make_unique<qim::TreeNode>();
  tree.root->left->calibrated_uncertainty = left_bound;
  tree.root->left->calibration_count = 1000;
  tree.root->right = std::make_unique<qim::TreeNode>();
  tree.root->right->calibrated_uncertainty = right_bound;
  tree.root->right->calibration_count = 1000;
  tree.feature_names = std::move(names);
  return tree;
}

inline Dataset two_label_dataset() {
  Dataset d;
  d.labels = {{0, "a"}, {1, "b"}};
  d.qf_schema.fields = {{"rain", QfKind::ordinal}, {"glare", QfKind::continuous}};
  d.split = Split::train;
  return d;
}

inline StepRecord make_step(std::string series, int index, int truth, int outcome,
                            std::vector<double> qf) {
  StepRecord rec;
  rec.series_id = std::move(series);
  rec.step_index = index;
  rec.truth = truth;
  rec.outcome = outcome;
  rec.qf = std::move(qf);
  return rec;
}

}  // namespace tauw::testing

#include "bendoct/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

#include "bendoct/d2s.hpp"

namespace bendoct {

namespace {

struct Entry {
  double value = 0.0;
  int feature = -1;  // split feature above the base case, -1 for a leaf
  int leaf_class = 0;
  std::shared_ptr<const SubtreeSolution> base;  // base-case solution
};

class Solver {
 public:
  Solver(const BinaryDataset& data, double lambda_bar) : data_(data), lambda_bar_(lambda_bar) {}

  const Entry& value(const std::vector<int>& subset, int d) {
    auto key = std::make_pair(subset, d);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    Entry e;
    if (subset.empty()) {
      e.value = -lambda_bar_;
    } else if (d <= 2) {
      e.base = std::make_shared<SubtreeSolution>(optimal_depth2(data_, subset, lambda_bar_, d));
      e.value = e.base->penalized_score;
    } else {
      std::vector<int> counts(data_.n_classes(), 0);
      for (int i : subset) ++counts[data_.y(i)];
      e.leaf_class = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
      e.value = counts[e.leaf_class] - lambda_bar_;
      std::vector<int> left, right;
      for (int f = 0; f < data_.n_features(); ++f) {
        left.clear();
        right.clear();
        for (int i : subset) (data_.x(i, f) ? right : left).push_back(i);
        const double v = value(left, d - 1).value + value(right, d - 1).value;
        if (v > e.value + 1e-9) {
          e.value = v;
          e.feature = f;
        }
      }
    }
    return memo_.emplace(std::move(key), std::move(e)).first->second;
  }

  void build(const std::vector<int>& subset, int d, int n, std::vector<NodeAssignment>& nodes) {
    const Entry& e = value(subset, d);
    if (subset.empty()) {
      nodes[n] = NodeAssignment::leaf(0);
    } else if (e.base) {
      for (const auto& [m, a] : graft(*e.base, n)) nodes[m] = a;
    } else if (e.feature < 0) {
      nodes[n] = NodeAssignment::leaf(e.leaf_class);
    } else {
      nodes[n] = NodeAssignment::branch(e.feature);
      std::vector<int> left, right;
      for (int i : subset) (data_.x(i, e.feature) ? right : left).push_back(i);
      build(left, d - 1, TreeTopology::left(n), nodes);
      build(right, d - 1, TreeTopology::right(n), nodes);
    }
  }

 private:
  const BinaryDataset& data_;
  double lambda_bar_;
  std::map<std::pair<std::vector<int>, int>, Entry> memo_;
};

}  // namespace

OracleResult exact_dp(const BinaryDataset& data, int depth, double lambda, OracleLimits limits) {
  if (depth < 0 || depth > limits.max_depth) {
    throw OracleGuardError("oracle depth must be in [0, " + std::to_string(limits.max_depth) + "]");
  }
  if (data.n_features() > limits.max_features) {
    throw OracleGuardError("oracle supports at most " + std::to_string(limits.max_features) +
                           " features");
  }
  if (lambda < 0) throw std::invalid_argument("lambda must be nonnegative");
  Solver solver(data, lambda * data.n_samples());
  const auto all = data.all_samples();
  const double best = solver.value(all, depth).value;

  std::vector<NodeAssignment> nodes((2u << depth));
  solver.build(all, depth, 1, nodes);
  DecisionTree tree(depth, std::move(nodes));
  const ScoredTree s = score(tree, data, lambda);
  const double check = s.correct_count - lambda * data.n_samples() * s.leaf_count;
  if (std::abs(check - best) > 1e-6) throw std::logic_error("exact_dp: reconstructed tree disagrees");
  return {s.correct_count, s.leaf_count, s.objective, tree};
}

}  // namespace bendoct

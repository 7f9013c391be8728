#include "bendoct/heuristics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bendoct {

namespace {

std::vector<int> class_counts(const BinaryDataset& data, const std::vector<int>& subset) {
  std::vector<int> c(data.n_classes(), 0);
  for (int i : subset) ++c[data.y(i)];
  return c;
}

int majority(const std::vector<int>& counts) {
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

double gini(const std::vector<int>& counts, int total) {
  if (total == 0) return 0.0;
  double s = 1.0;
  for (int c : counts) {
    const double q = static_cast<double>(c) / total;
    s -= q * q;
  }
  return s;
}

void grow(const BinaryDataset& data, const TreeTopology& topo, int n, const std::vector<int>& subset,
          std::vector<NodeAssignment>& nodes) {
  const auto counts = class_counts(data, subset);
  const int total = static_cast<int>(subset.size());
  nodes[n] = NodeAssignment::leaf(majority(counts));
  if (!topo.is_internal(n) || total == 0) return;
  const double parent = gini(counts, total);
  if (parent <= 0.0) return;

  int best_f = -1;
  double best = parent - 1e-12;
  std::vector<int> left(data.n_classes()), right(data.n_classes());
  for (int f = 0; f < data.n_features(); ++f) {
    std::fill(left.begin(), left.end(), 0);
    std::fill(right.begin(), right.end(), 0);
    int nl = 0;
    for (int i : subset) {
      if (data.x(i, f)) {
        ++right[data.y(i)];
      } else {
        ++left[data.y(i)];
        ++nl;
      }
    }
    const int nr = total - nl;
    if (nl == 0 || nr == 0) continue;
    const double w = (nl * gini(left, nl) + nr * gini(right, nr)) / total;
    if (w < best) {
      best = w;
      best_f = f;
    }
  }
  if (best_f < 0) return;

  nodes[n] = NodeAssignment::branch(best_f);
  std::vector<int> ls, rs;
  for (int i : subset) (data.x(i, best_f) ? rs : ls).push_back(i);
  grow(data, topo, TreeTopology::left(n), ls, nodes);
  grow(data, topo, TreeTopology::right(n), rs, nodes);
}

// Samples reaching each node of `tree`.
std::vector<std::vector<int>> node_samples(const DecisionTree& tree, const BinaryDataset& data) {
  std::vector<std::vector<int>> at(tree.nodes().size());
  for (int i = 0; i < data.n_samples(); ++i) {
    int n = 1;
    at[n].push_back(i);
    while (tree.node(n).is_branch()) {
      n = data.x(i, tree.node(n).value) ? TreeTopology::right(n) : TreeTopology::left(n);
      at[n].push_back(i);
    }
  }
  return at;
}

}  // namespace

DecisionTree cart_warmstart(const BinaryDataset& data, int depth, double lambda) {
  if (lambda < 0) throw std::invalid_argument("lambda must be nonnegative");
  const TreeTopology topo(depth);
  std::vector<NodeAssignment> nodes(static_cast<std::size_t>(topo.n_nodes()) + 1);
  grow(data, topo, 1, data.all_samples(), nodes);
  DecisionTree tree(depth, std::move(nodes));

  const double I = data.n_samples();
  while (true) {
    const auto at = node_samples(tree, data);
    // errors of the subtree below n, and its leaf count
    std::vector<int> sub_err(at.size(), 0), sub_leaves(at.size(), 0);
    for (int n = topo.n_nodes(); n >= 1; --n) {
      const auto& a = tree.node(n);
      if (a.is_leaf()) {
        int wrong = 0;
        for (int i : at[n]) wrong += data.y(i) != a.value;
        sub_err[n] = wrong;
        sub_leaves[n] = 1;
      } else if (a.is_branch()) {
        const int l = TreeTopology::left(n), r = TreeTopology::right(n);
        sub_err[n] = sub_err[l] + sub_err[r];
        sub_leaves[n] = sub_leaves[l] + sub_leaves[r];
      }
    }
    int weakest = -1;
    double weakest_g = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= topo.n_nodes(); ++n) {
      if (!tree.node(n).is_branch()) continue;
      const auto counts = class_counts(data, at[n]);
      const int leaf_err = static_cast<int>(at[n].size()) - counts[majority(counts)];
      const double g = (leaf_err - sub_err[n]) / I / (sub_leaves[n] - 1);
      if (g < weakest_g - 1e-12) {
        weakest_g = g;
        weakest = n;
      }
    }
    if (weakest < 0 || weakest_g > lambda + 1e-12) break;
    const auto counts = class_counts(data, at[weakest]);
    tree = tree.with_subtree(weakest, {{weakest, NodeAssignment::leaf(majority(counts))}});
  }
  return tree;
}

DecisionTree relabel_majority(const DecisionTree& tree, const BinaryDataset& data) {
  check_compatible(tree, data);
  const auto at = node_samples(tree, data);
  auto nodes = tree.nodes();
  for (int n : tree.leaves()) {
    if (at[n].empty()) continue;
    nodes[n] = NodeAssignment::leaf(majority(class_counts(data, at[n])));
  }
  return DecisionTree(tree.depth(), std::move(nodes));
}

std::vector<int> polish_roots(const DecisionTree& tree) {
  std::vector<int> roots;
  for (int n = 1; n <= tree.topology().n_nodes(); ++n) {
    if (tree.node(n).is_cut()) continue;
    const int h = tree.sparse_height(n);
    if (h > 2) continue;
    if (n == 1 || tree.sparse_height(TreeTopology::parent(n)) > 2) roots.push_back(n);
  }
  return roots;
}

PathKey path_to(const DecisionTree& tree, int n) {
  std::vector<std::pair<int, int>> c;
  for (int child = n; child > 1; child = TreeTopology::parent(child)) {
    const auto& a = tree.node(TreeTopology::parent(child));
    if (!a.is_branch()) throw TreeError("path passes through a non-branch node");
    c.emplace_back(a.value, child & 1);
  }
  return PathKey(std::move(c));
}

DecisionTree polish(const DecisionTree& tree, const BinaryDataset& data, double lambda, D2SCache& cache) {
  const double lambda_bar = lambda * data.n_samples();
  if (std::abs(cache.lambda_bar() - lambda_bar) > 1e-12 * std::max(1.0, lambda_bar)) {
    throw std::invalid_argument("polish: cache penalty does not match lambda * |I|");
  }
  check_compatible(tree, data);
  DecisionTree current = tree;
  for (bool changed = true; changed;) {
    changed = false;
    const auto at = node_samples(current, data);
    for (int r : polish_roots(current)) {
      int correct = 0, leaves = 0;
      for (int i : at[r]) correct += current.predict(data.row(i)) == data.y(i);
      for (int l : current.leaves()) leaves += TreeTopology::is_ancestor_or_self(r, l);
      const double now = correct - lambda_bar * leaves;

      const int max_depth = std::min(2, current.topology().height(r));
      const SubtreeSolution* sub = cache.get_or_compute(path_to(current, r), max_depth);
      std::vector<std::pair<int, NodeAssignment>> replacement;
      double candidate = -lambda_bar;
      if (sub) {
        candidate = sub->penalized_score;
        replacement = graft(*sub, r);
      } else {
        replacement = {{r, NodeAssignment::leaf(0)}};
      }
      if (candidate > now + 1e-9) {
        current = current.with_subtree(r, replacement);
        changed = true;
        break;  // roots depend on the tree; recompute
      }
    }
  }
  return current;
}

}  // namespace bendoct

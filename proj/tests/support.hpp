#pragma once

// Independent reference implementations used as test oracles. Nothing here
// calls into the solver beyond the data, tree and master layout types.

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "bendoct/dataset.hpp"
#include "bendoct/master.hpp"
#include "bendoct/tree.hpp"

namespace testing_support {

using bendoct::BinaryDataset;
using bendoct::DecisionTree;
using bendoct::NodeAssignment;

inline BinaryDataset random_dataset(std::mt19937& rng, int I, int F, int K, double density = 0.5) {
  std::bernoulli_distribution bit(density);
  std::uniform_int_distribution<int> cls(0, K - 1);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(I) * F);
  for (auto& b : bits) b = bit(rng);
  std::vector<int> labels(I);
  for (auto& y : labels) y = cls(rng);
  std::vector<std::string> names;
  for (int k = 0; k < std::max(K, 2); ++k) names.push_back("c" + std::to_string(k));
  return BinaryDataset(std::move(bits), F, std::move(labels), std::move(names));
}

// Random data with a planted tree so optimal trees are not trivial.
inline BinaryDataset planted_dataset(std::mt19937& rng, int I, int F, int K, double noise = 0.15) {
  auto base = random_dataset(rng, I, F, K);
  std::uniform_int_distribution<int> feat(0, F - 1), cls(0, K - 1);
  std::bernoulli_distribution flip(noise);
  const int f0 = feat(rng), f1 = feat(rng), f2 = feat(rng);
  const int k[4] = {cls(rng), cls(rng), cls(rng), cls(rng)};
  std::vector<int> labels(I);
  for (int i = 0; i < I; ++i) {
    const int side = base.x(i, f0);
    const int leaf = 2 * side + base.x(i, side ? f2 : f1);
    labels[i] = flip(rng) ? cls(rng) : k[leaf];
  }
  return BinaryDataset(base.bits(), F, std::move(labels), base.class_names());
}

inline int route_recursive(const DecisionTree& t, std::span<const std::uint8_t> x, int n = 1) {
  const auto& a = t.node(n);
  if (a.is_leaf()) return n;
  if (!a.is_branch()) throw std::runtime_error("routed into a cut node");
  return route_recursive(t, x, x[a.value] ? 2 * n + 1 : 2 * n);
}

inline int majority_count(const BinaryDataset& d, const std::vector<int>& subset) {
  std::vector<int> c(d.n_classes(), 0);
  int best = 0;
  for (int i : subset) best = std::max(best, ++c[d.y(i)]);
  return best;
}

// Best penalised score over all depth <= max_depth trees on `subset`, by trying
// every feature assignment of every topology with majority leaves.
inline double brute_depth2(const BinaryDataset& d, const std::vector<int>& subset, double lambda_bar,
                           int max_depth = 2) {
  const int F = d.n_features();
  auto split = [&](const std::vector<int>& s, int f, std::vector<int>& l, std::vector<int>& r) {
    l.clear();
    r.clear();
    for (int i : s) (d.x(i, f) ? r : l).push_back(i);
  };
  double best = majority_count(d, subset) - lambda_bar;
  if (max_depth == 0) return best;
  std::vector<int> L, R, LL, LR, RL, RR;
  for (int fa = 0; fa < F; ++fa) {
    split(subset, fa, L, R);
    const double leafL = majority_count(d, L), leafR = majority_count(d, R);
    best = std::max(best, leafL + leafR - 2 * lambda_bar);
    if (max_depth == 1) continue;
    for (int fb = 0; fb < F; ++fb) {
      split(L, fb, LL, LR);
      const double subL = majority_count(d, LL) + majority_count(d, LR);
      best = std::max(best, subL + leafR - 3 * lambda_bar);
      for (int fc = 0; fc < F; ++fc) {
        split(R, fc, RL, RR);
        const double subR = majority_count(d, RL) + majority_count(d, RR);
        if (fb == 0) best = std::max(best, leafL + subR - 3 * lambda_bar);
        best = std::max(best, subL + subR - 4 * lambda_bar);
      }
    }
  }
  return best;
}

// Every valid tree of the given depth. With `all_labels` every leaf takes
// every class; otherwise leaves get class 0 (callers relabel).
inline void enumerate_trees(int depth, int F, int K, bool all_labels,
                            const std::function<void(const DecisionTree&)>& visit) {
  std::vector<NodeAssignment> nodes(2u << depth, NodeAssignment::cut());
  // Work list of nodes still to assign, processed in order.
  std::function<void(std::vector<int>)> rec = [&](std::vector<int> open) {
    if (open.empty()) {
      visit(DecisionTree(depth, nodes));
      return;
    }
    const int n = open.back();
    open.pop_back();
    const bool internal = n < (1 << depth);
    for (int k = 0; k < (all_labels ? K : 1); ++k) {
      nodes[n] = NodeAssignment::leaf(k);
      rec(open);
    }
    if (internal) {
      for (int f = 0; f < F; ++f) {
        nodes[n] = NodeAssignment::branch(f);
        auto next = open;
        next.push_back(2 * n + 1);
        next.push_back(2 * n);
        rec(next);
        nodes[2 * n] = NodeAssignment::cut();
        nodes[2 * n + 1] = NodeAssignment::cut();
      }
    }
    nodes[n] = NodeAssignment::cut();
  };
  rec({1});
}

// Score of a tree with every leaf predicting its majority class.
inline double majority_value(const DecisionTree& t, const BinaryDataset& d, double lambda_bar) {
  std::map<int, std::vector<int>> at;
  for (int i = 0; i < d.n_samples(); ++i) at[route_recursive(t, d.row(i))].push_back(i);
  double v = -lambda_bar * t.leaf_count();
  for (const auto& [n, s] : at) v += majority_count(d, s);
  return v;
}

// Best correct - lambda_bar * leaves over every tree of depth <= D.
inline double brute_optimum(const BinaryDataset& d, int depth, double lambda_bar) {
  double best = -1e300;
  enumerate_trees(depth, d.n_features(), d.n_classes(), false,
                  [&](const DecisionTree& t) { best = std::max(best, majority_value(t, d, lambda_bar)); });
  return best;
}

struct BruteEqp {
  std::vector<int> members;
  std::vector<int> split;
  bool operator<(const BruteEqp& o) const {
    return std::tie(split, members) < std::tie(o.split, o.members);
  }
  bool operator==(const BruteEqp&) const = default;
};

// Pairwise comparison on the unsplit features, groups grown by union.
inline std::vector<BruteEqp> brute_eqp(const BinaryDataset& d, int max_split) {
  const int F = d.n_features(), I = d.n_samples();
  std::vector<std::vector<int>> splits{{}};
  for (int a = 0; a < F && max_split >= 1; ++a) splits.push_back({a});
  for (int a = 0; a < F && max_split >= 2; ++a)
    for (int b = a + 1; b < F; ++b) splits.push_back({a, b});
  std::vector<BruteEqp> out;
  for (const auto& s : splits) {
    std::vector<int> parent(I, -1);
    for (int i = 0; i < I; ++i) {
      for (int j = 0; j < i && parent[i] < 0; ++j) {
        if (parent[j] >= 0) continue;
        bool same = true;
        for (int f = 0; f < F && same; ++f) {
          if (std::find(s.begin(), s.end(), f) != s.end()) continue;
          same = d.x(i, f) == d.x(j, f);
        }
        if (same) parent[i] = j;
      }
    }
    std::map<int, std::vector<int>> groups;
    for (int i = 0; i < I; ++i) groups[parent[i] < 0 ? i : parent[i]].push_back(i);
    for (const auto& [root, members] : groups) {
      std::set<int> cls;
      for (int i : members) cls.insert(d.y(i));
      if (members.size() >= 2 && cls.size() >= 2) out.push_back({members, s});
    }
  }
  return out;
}

// Value of a master term under a tree, read straight off the node assignments.
inline double term_value(const bendoct::CutTerm& t, const DecisionTree& tree, const std::vector<double>& theta) {
  using bendoct::VarKind;
  const auto& a = tree.node(t.node);
  switch (t.kind) {
    case VarKind::b:
      return t.coef * (a.is_branch() && a.value == t.index);
    case VarKind::p:
      return t.coef * a.is_leaf();
    case VarKind::w:
      return t.coef * (a.is_leaf() && a.value == t.index);
    case VarKind::theta:
      return t.coef * theta[t.index];
  }
  return 0.0;
}

inline double terms_value(std::span<const bendoct::CutTerm> terms, const DecisionTree& tree,
                          const std::vector<double>& theta = {}) {
  double v = 0.0;
  for (const auto& t : terms) v += term_value(t, tree, theta);
  return v;
}

// Master values of a tree with every theta set to `theta`.
inline bendoct::MpSolution tree_solution(const DecisionTree& tree, const BinaryDataset& d, double theta) {
  const bendoct::MasterLayout L(tree.depth(), d.n_features(), d.n_classes(), d.n_samples());
  std::vector<double> v(L.n_core(), 0.0);
  for (int n = 1; n <= L.n_nodes(); ++n) {
    const auto& a = tree.node(n);
    if (a.is_branch()) v[L.b(n, a.value)] = 1;
    if (a.is_leaf()) {
      v[L.p(n)] = 1;
      v[L.w(n, a.value)] = 1;
    }
  }
  for (int i = 0; i < d.n_samples(); ++i) v[L.theta(i)] = theta;
  return {L, v, 0.0, bendoct::kInf};
}

}  // namespace testing_support

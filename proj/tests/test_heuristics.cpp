#include <random>
#include <set>

#include "doctest.h"
#include "support.hpp"

#include "bendoct/heuristics.hpp"
#include "bendoct/oracle.hpp"

using namespace bendoct;

namespace {

void collect_leaves(const DecisionTree& t, int n, std::vector<int>& out) {
  const auto& a = t.node(n);
  if (a.is_leaf()) out.push_back(n);
  if (a.is_branch()) {
    collect_leaves(t, 2 * n, out);
    collect_leaves(t, 2 * n + 1, out);
  }
}

DecisionTree random_tree(std::mt19937& rng, int depth, int F, int K) {
  std::vector<NodeAssignment> nodes(2u << depth, NodeAssignment::cut());
  std::uniform_int_distribution<int> feat(0, F - 1), cls(0, K - 1);
  std::bernoulli_distribution branch(0.7);
  std::vector<int> open{1};
  while (!open.empty()) {
    const int n = open.back();
    open.pop_back();
    if (n < (1 << depth) && branch(rng)) {
      nodes[n] = NodeAssignment::branch(feat(rng));
      open.push_back(2 * n);
      open.push_back(2 * n + 1);
    } else {
      nodes[n] = NodeAssignment::leaf(cls(rng));
    }
  }
  return DecisionTree(depth, nodes);
}

}  // namespace

TEST_CASE("cart on degenerate data") {
  const BinaryDataset pure({0, 1, 1, 0, 1, 1, 0, 0}, 2, {1, 1, 1, 1}, {"a", "b"});
  const auto t = cart_warmstart(pure, 3, 0.0);
  CHECK(t.leaf_count() == 1);
  CHECK(t.node(1) == NodeAssignment::leaf(1));

  std::mt19937 rng(3);
  const auto d = testing_support::planted_dataset(rng, 50, 6, 3);
  const auto heavy = cart_warmstart(d, 3, 1.0);
  CHECK(heavy.leaf_count() == 1);
}

TEST_CASE("cart stays within depth and below the optimum") {
  std::mt19937 rng(17);
  for (int t = 0; t < 40; ++t) {
    const auto d = testing_support::planted_dataset(rng, 60, 6, 2 + t % 2);
    const int depth = 2 + t % 2;
    const double lambda = (t % 3) * 0.01;
    const auto tree = cart_warmstart(d, depth, lambda);
    CHECK(tree.depth() == depth);
    CHECK(score(tree, d, lambda).objective <= exact_dp(d, depth, lambda).objective + 1e-12);
  }
}

TEST_CASE("majority relabelling") {
  std::mt19937 rng(4);
  for (int t = 0; t < 50; ++t) {
    const auto d = testing_support::random_dataset(rng, 30, 4, 3);
    const auto tree = random_tree(rng, 3, 4, 3);
    const auto r = relabel_majority(tree, d);
    std::map<int, std::vector<int>> counts;
    for (int i = 0; i < d.n_samples(); ++i) {
      auto& c = counts[testing_support::route_recursive(tree, d.row(i))];
      c.resize(3);
      ++c[d.y(i)];
    }
    for (int n : tree.leaves()) {
      if (!counts.count(n)) {
        CHECK(r.node(n) == tree.node(n));
        continue;
      }
      const auto& c = counts[n];
      CHECK(r.node(n).value == std::max_element(c.begin(), c.end()) - c.begin());
    }
    CHECK(score(r, d, 0).correct_count >= score(tree, d, 0).correct_count);
  }
}

TEST_CASE("polishing roots partition the leaves") {
  std::mt19937 rng(9);
  for (int t = 0; t < 100; ++t) {
    const int depth = 2 + t % 4;
    const auto tree = random_tree(rng, depth, 5, 2);
    std::vector<int> covered;
    for (int root : polish_roots(tree)) {
      CHECK(tree.sparse_height(root) <= 2);
      collect_leaves(tree, root, covered);
    }
    std::sort(covered.begin(), covered.end());
    auto leaves = tree.leaves();
    std::sort(leaves.begin(), leaves.end());
    CHECK(covered == leaves);
  }
}

TEST_CASE("path conditions select the samples reaching a node") {
  std::mt19937 rng(12);
  for (int t = 0; t < 30; ++t) {
    const auto d = testing_support::random_dataset(rng, 40, 5, 2);
    const auto tree = random_tree(rng, 3, 5, 2);
    D2SCache cache(d, 0.0);
    for (int n = 1; n < static_cast<int>(tree.nodes().size()); ++n) {
      if (tree.node(n).is_cut()) continue;
      std::vector<int> expected;
      for (int i = 0; i < d.n_samples(); ++i) {
        int m = testing_support::route_recursive(tree, d.row(i));
        while (m > n) m /= 2;
        if (m == n) expected.push_back(i);
      }
      CHECK(cache.subset(path_to(tree, n)) == expected);
    }
  }
}

TEST_CASE("polishing improves, settles and leaves optimal trees alone") {
  std::mt19937 rng(23);
  for (int t = 0; t < 100; ++t) {
    const auto d = testing_support::planted_dataset(rng, 40, 5, 2 + t % 2, 0.2);
    const int depth = 2 + t % 3;
    const double lambda = (t % 4) * 0.01;
    D2SCache cache(d, lambda * d.n_samples());
    const auto tree = relabel_majority(random_tree(rng, depth, 5, 2), d);
    const auto once = polish(tree, d, lambda, cache);
    CHECK(once.depth() == depth);
    CHECK(score(once, d, lambda).objective >= score(tree, d, lambda).objective - 1e-12);
    CHECK(polish(once, d, lambda, cache) == once);

    if (depth <= 3) {
      const auto best = exact_dp(d, depth, lambda);
      const auto kept = polish(best.tree, d, lambda, cache);
      CHECK(score(kept, d, lambda).objective == doctest::Approx(best.objective).epsilon(1e-12));
    }
  }
}

#include <random>

#include "doctest.h"
#include "support.hpp"

#include "bendoct/tree.hpp"

using namespace bendoct;
using testing_support::route_recursive;

namespace {

// The depth-3 example tree: branch f1 at the root, f2 at node 2, leaves 3, 4, 5.
DecisionTree example_tree() {
  std::vector<NodeAssignment> nodes(16);
  nodes[1] = NodeAssignment::branch(0);
  nodes[2] = NodeAssignment::branch(1);
  nodes[3] = NodeAssignment::leaf(0);
  nodes[4] = NodeAssignment::leaf(1);
  nodes[5] = NodeAssignment::leaf(0);
  return DecisionTree(3, nodes);
}

DecisionTree random_tree(std::mt19937& rng, int depth, int F, int K) {
  std::vector<NodeAssignment> nodes(2u << depth);
  std::uniform_int_distribution<int> feat(0, F - 1), cls(0, K - 1);
  std::bernoulli_distribution grow(0.7);
  std::function<void(int, int)> rec = [&](int n, int d) {
    if (d < depth && grow(rng)) {
      nodes[n] = NodeAssignment::branch(feat(rng));
      rec(2 * n, d + 1);
      rec(2 * n + 1, d + 1);
    } else {
      nodes[n] = NodeAssignment::leaf(cls(rng));
    }
  };
  rec(1, 0);
  return DecisionTree(depth, nodes);
}

}  // namespace

TEST_CASE("node relations") {
  const TreeTopology t2(2);
  const auto r5 = relations(t2, 5);
  CHECK(r5.ancestors_left == std::vector<int>{1});
  CHECK(r5.ancestors_right == std::vector<int>{2});

  const auto root = relations(t2, 1);
  CHECK(root.parent == 0);
  CHECK(root.depth == 0);

  const TreeTopology t3(3);
  const auto r6 = relations(t3, 6);
  CHECK(r6.parent == 3);
  CHECK(r6.left == 12);
  CHECK(r6.right == 13);
  CHECK(r6.depth == 2);
  CHECK(r6.height == 1);

  CHECK_THROWS_AS(relations(t3, 16), TreeError);
  CHECK_THROWS_AS(relations(t3, 0), TreeError);

  CHECK(t3.n_internal() == 7);
  CHECK(t3.n_terminal() == 8);
  for (int n = 1; n <= t3.n_internal(); ++n) {
    CHECK(TreeTopology::parent(TreeTopology::left(n)) == n);
    CHECK(TreeTopology::parent(TreeTopology::right(n)) == n);
  }
  for (int n = 1; n <= t3.n_nodes(); ++n) CHECK(TreeTopology::dist(1, n) + t3.height(n) <= 3);
  CHECK(t3.descendants(2) == std::vector<int>{4, 5, 8, 9, 10, 11});
  CHECK(TreeTopology::dist(2, 11) == 2);
  CHECK(TreeTopology::dist(3, 11) == -1);
}

TEST_CASE("routing") {
  const std::vector<std::uint8_t> x{0, 1, 1, 0};
  CHECK(example_tree().route(x) == 5);

  const auto leaf = DecisionTree::single_leaf(3, 1);
  CHECK(leaf.route(x) == 1);
  CHECK(leaf.leaf_count() == 1);

  std::mt19937 rng(11);
  for (int t = 0; t < 300; ++t) {
    const auto tree = random_tree(rng, 1 + t % 4, 6, 3);
    std::vector<std::uint8_t> s(6);
    for (auto& b : s) b = rng() & 1;
    CHECK(tree.route(s) == route_recursive(tree, s));
  }
}

TEST_CASE("invalid trees are rejected") {
  std::vector<NodeAssignment> nodes(8);
  CHECK_THROWS_AS(DecisionTree(2, nodes), TreeError);  // root cut

  nodes[1] = NodeAssignment::branch(0);
  nodes[2] = NodeAssignment::leaf(0);
  CHECK_THROWS_AS(DecisionTree(2, nodes), TreeError);  // right child cut

  nodes[3] = NodeAssignment::leaf(1);
  nodes[6] = NodeAssignment::leaf(0);
  CHECK_THROWS_AS(DecisionTree(2, nodes), TreeError);  // node below a leaf

  nodes[6] = NodeAssignment::cut();
  nodes[3] = NodeAssignment::branch(1);
  nodes[6] = NodeAssignment::leaf(0);
  nodes[7] = NodeAssignment::leaf(1);
  CHECK_NOTHROW(DecisionTree(2, nodes));

  nodes[6] = NodeAssignment::branch(0);  // terminal node branching
  CHECK_THROWS_AS(DecisionTree(2, nodes), TreeError);
}

TEST_CASE("scoring") {
  std::mt19937 rng(5);
  SUBCASE("pure data") {
    std::vector<std::uint8_t> bits(12, 0);
    const BinaryDataset d(bits, 3, {0, 0, 0, 0}, {"a", "b"});
    CHECK(score(DecisionTree::single_leaf(2, 0), d, 0.0).objective == doctest::Approx(1.0));
  }
  SUBCASE("per-sample check") {
    const auto d = testing_support::random_dataset(rng, 20, 5, 3);
    for (int t = 0; t < 10; ++t) {
      const auto tree = random_tree(rng, 3, 5, 3);
      const double lambda = 0.01 * t;
      int correct = 0;
      for (int i = 0; i < 20; ++i) correct += tree.node(route_recursive(tree, d.row(i))).value == d.y(i);
      const auto s = score(tree, d, lambda);
      CHECK(s.correct_count == correct);
      CHECK(s.objective == doctest::Approx(correct / 20.0 - lambda * tree.leaf_count()).epsilon(1e-12));
      for (int i = 0; i < 20; ++i) CHECK(s.correct[i] == (tree.predict(d.row(i)) == d.y(i)));
    }
  }
  SUBCASE("features beyond the data width") {
    const auto d = testing_support::random_dataset(rng, 10, 1, 2);
    CHECK_THROWS(score(example_tree(), d, 0.0));
  }
}

TEST_CASE("sparse height and subtree replacement") {
  const auto t = example_tree();
  CHECK(t.sparse_height(1) == 2);
  CHECK(t.sparse_height(2) == 1);
  CHECK(t.sparse_height(3) == 0);
  CHECK(t.sparse_height(6) == -1);
  CHECK(t.leaves() == std::vector<int>{3, 4, 5});

  const auto u = t.with_subtree(2, {{2, NodeAssignment::leaf(1)}});
  CHECK(u.leaf_count() == 2);
  CHECK(u.node(4).is_cut());
}

TEST_CASE("text round trip") {
  std::mt19937 rng(3);
  for (int t = 0; t < 50; ++t) {
    const auto tree = random_tree(rng, 1 + t % 5, 9, 4);
    CHECK(parse_tree(to_text(tree)) == tree);
  }
  CHECK_THROWS_AS(parse_tree("tree depth=1\n1 branch f=0\n"), TreeError);
  CHECK_THROWS_AS(parse_tree("nonsense"), TreeError);
}

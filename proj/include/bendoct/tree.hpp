#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bendoct/dataset.hpp"

namespace bendoct {

class TreeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Index algebra of the complete binary tree of depth D. Nodes are numbered
/// breadth first from 1; internal nodes are 1..2^D-1, terminal nodes
/// 2^D..2^{D+1}-1.
class TreeTopology {
 public:
  explicit TreeTopology(int depth);

  int depth() const { return depth_; }
  int n_internal() const { return (1 << depth_) - 1; }
  int n_terminal() const { return 1 << depth_; }
  int n_nodes() const { return (2 << depth_) - 1; }

  bool contains(int n) const { return n >= 1 && n <= n_nodes(); }
  bool is_internal(int n) const { return n >= 1 && n <= n_internal(); }
  bool is_terminal(int n) const { return n > n_internal() && n <= n_nodes(); }

  static int left(int n) { return 2 * n; }
  static int right(int n) { return 2 * n + 1; }
  static int parent(int n) { return n / 2; }
  static int sibling(int n) { return n ^ 1; }
  static int depth_of(int n);
  /// Distance from ancestor `a` down to `n`; -1 when `a` is not an ancestor-or-self.
  static int dist(int a, int n);
  static bool is_ancestor_or_self(int a, int n) { return dist(a, n) >= 0; }

  int height(int n) const;

  /// A(n), root first.
  std::vector<int> ancestors(int n) const;
  /// A^L(n): ancestors whose left subtree contains n.
  std::vector<int> ancestors_left(int n) const;
  std::vector<int> ancestors_right(int n) const;
  /// D(n): strict descendants, breadth first.
  std::vector<int> descendants(int n) const;

  void check(int n) const;

 private:
  int depth_;
};

struct NodeRelations {
  int node = 0;
  int parent = 0;  // 0 for the root
  int left = 0;    // 0 for terminal nodes
  int right = 0;
  std::vector<int> ancestors_left;
  std::vector<int> ancestors_right;
  int height = 0;
  int depth = 0;
};

NodeRelations relations(const TreeTopology& topology, int n);

struct NodeAssignment {
  enum class Kind : std::uint8_t { cut, branch, leaf };
  Kind kind = Kind::cut;
  int value = -1;  // feature for branch, class for leaf

  static NodeAssignment cut() { return {}; }
  static NodeAssignment branch(int f) { return {Kind::branch, f}; }
  static NodeAssignment leaf(int k) { return {Kind::leaf, k}; }

  bool is_cut() const { return kind == Kind::cut; }
  bool is_branch() const { return kind == Kind::branch; }
  bool is_leaf() const { return kind == Kind::leaf; }
  bool operator==(const NodeAssignment&) const = default;
};

/// A decision tree embedded in the depth-D topology. Construction validates
/// that the root is not cut, branch nodes are internal with two non-cut
/// children, and every node below a leaf is cut.
class DecisionTree {
 public:
  DecisionTree() : DecisionTree(0, {NodeAssignment::cut(), NodeAssignment::leaf(0)}) {}
  /// `nodes` has size 2^{D+1}; index 0 is ignored.
  DecisionTree(int depth, std::vector<NodeAssignment> nodes);

  static DecisionTree single_leaf(int depth, int k);

  const TreeTopology& topology() const { return topology_; }
  int depth() const { return topology_.depth(); }
  const NodeAssignment& node(int n) const { return nodes_.at(n); }
  const std::vector<NodeAssignment>& nodes() const { return nodes_; }

  /// Leaf node reached by `sample`.
  int route(std::span<const std::uint8_t> sample) const;
  int predict(std::span<const std::uint8_t> sample) const { return nodes_[route(sample)].value; }

  int leaf_count() const;
  std::vector<int> leaves() const;
  /// Height in this tree: 0 for leaves, 1 + max over children for branches, -1 for cut nodes.
  int sparse_height(int n) const;
  /// Largest feature index used by a branch, or -1.
  int max_feature() const;
  int max_class() const;

  /// Copy with the subtree at `root` replaced by `replacement` (absolute ids).
  DecisionTree with_subtree(int root, const std::vector<std::pair<int, NodeAssignment>>& replacement) const;

  bool operator==(const DecisionTree& other) const { return nodes_ == other.nodes_; }

 private:
  void validate() const;

  TreeTopology topology_;
  std::vector<NodeAssignment> nodes_;
};

/// Indented text form:
///
///   tree depth=3
///   1 branch f=0
///     2 leaf k=1
///     3 branch f=4
///       6 leaf k=0
///       7 leaf k=1
///
/// Cut nodes are omitted. Feature and class indices are 0-based.
std::string to_text(const DecisionTree& tree);
DecisionTree parse_tree(const std::string& text);

struct ScoredTree {
  DecisionTree tree;
  std::vector<std::uint8_t> correct;  // Theta_i
  int correct_count = 0;
  int leaf_count = 0;
  double objective = 0.0;
};

/// Accuracy minus lambda per leaf.
ScoredTree score(const DecisionTree& tree, const BinaryDataset& data, double lambda);

/// Checks that every branch feature and leaf class exists in `data`.
void check_compatible(const DecisionTree& tree, const BinaryDataset& data);

}  // namespace bendoct

#include "bendoct/tree.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

namespace bendoct {

TreeTopology::TreeTopology(int depth) : depth_(depth) {
  if (depth < 0 || depth > 20) throw TreeError("tree depth must be in [0, 20]");
}

int TreeTopology::depth_of(int n) { return std::bit_width(static_cast<unsigned>(n)) - 1; }

int TreeTopology::dist(int a, int n) {
  const int d = depth_of(n) - depth_of(a);
  if (d < 0 || (n >> d) != a) return -1;
  return d;
}

void TreeTopology::check(int n) const {
  if (!contains(n)) {
    throw TreeError("node " + std::to_string(n) + " outside depth-" + std::to_string(depth_) +
                    " topology");
  }
}

int TreeTopology::height(int n) const {
  check(n);
  return depth_ - depth_of(n);
}

std::vector<int> TreeTopology::ancestors(int n) const {
  check(n);
  std::vector<int> out;
  for (int a = parent(n); a >= 1; a = parent(a)) out.push_back(a);
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<int> TreeTopology::ancestors_left(int n) const {
  check(n);
  std::vector<int> out;
  for (int c = n; c > 1; c = parent(c)) {
    if (c % 2 == 0) out.push_back(parent(c));
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<int> TreeTopology::ancestors_right(int n) const {
  check(n);
  std::vector<int> out;
  for (int c = n; c > 1; c = parent(c)) {
    if (c % 2 == 1) out.push_back(parent(c));
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<int> TreeTopology::descendants(int n) const {
  check(n);
  std::vector<int> out;
  for (int lo = left(n), width = 2; lo <= n_nodes(); lo *= 2, width *= 2) {
    for (int c = lo; c < lo + width; ++c) out.push_back(c);
  }
  return out;
}

NodeRelations relations(const TreeTopology& topology, int n) {
  topology.check(n);
  NodeRelations r;
  r.node = n;
  r.parent = TreeTopology::parent(n);
  if (topology.is_internal(n)) {
    r.left = TreeTopology::left(n);
    r.right = TreeTopology::right(n);
  }
  r.ancestors_left = topology.ancestors_left(n);
  r.ancestors_right = topology.ancestors_right(n);
  r.height = topology.height(n);
  r.depth = TreeTopology::depth_of(n);
  return r;
}

DecisionTree::DecisionTree(int depth, std::vector<NodeAssignment> nodes)
    : topology_(depth), nodes_(std::move(nodes)) {
  if (nodes_.size() != static_cast<std::size_t>(topology_.n_nodes()) + 1) {
    throw TreeError("node array size does not match depth");
  }
  nodes_[0] = NodeAssignment::cut();
  validate();
}

DecisionTree DecisionTree::single_leaf(int depth, int k) {
  std::vector<NodeAssignment> nodes((2u << depth));
  nodes[1] = NodeAssignment::leaf(k);
  return DecisionTree(depth, std::move(nodes));
}

void DecisionTree::validate() const {
  const auto fail = [](int n, const std::string& what) {
    throw TreeError("node " + std::to_string(n) + ": " + what);
  };
  if (nodes_[1].is_cut()) fail(1, "root is cut");
  for (int n = 1; n <= topology_.n_nodes(); ++n) {
    const auto& a = nodes_[n];
    if (a.is_branch()) {
      if (!topology_.is_internal(n)) fail(n, "terminal node cannot branch");
      if (a.value < 0) fail(n, "negative feature index");
    }
    if (a.is_leaf() && a.value < 0) fail(n, "negative class index");
    if (n > 1) {
      const auto& p = nodes_[TreeTopology::parent(n)];
      if (p.is_branch() && a.is_cut()) fail(n, "child of a branch node is cut");
      if (!p.is_branch() && !a.is_cut()) fail(n, "node below a leaf is not cut");
    }
  }
}

int DecisionTree::route(std::span<const std::uint8_t> sample) const {
  int n = 1;
  while (nodes_[n].is_branch()) {
    const int f = nodes_[n].value;
    if (f >= static_cast<int>(sample.size())) {
      throw TreeError("branch feature " + std::to_string(f) + " outside sample of width " +
                      std::to_string(sample.size()));
    }
    n = sample[f] ? TreeTopology::right(n) : TreeTopology::left(n);
  }
  return n;
}

int DecisionTree::leaf_count() const {
  return static_cast<int>(std::count_if(nodes_.begin(), nodes_.end(),
                                        [](const auto& a) { return a.is_leaf(); }));
}

std::vector<int> DecisionTree::leaves() const {
  std::vector<int> out;
  for (int n = 1; n <= topology_.n_nodes(); ++n) {
    if (nodes_[n].is_leaf()) out.push_back(n);
  }
  return out;
}

int DecisionTree::sparse_height(int n) const {
  topology_.check(n);
  const auto& a = nodes_[n];
  if (a.is_cut()) return -1;
  if (a.is_leaf()) return 0;
  return 1 + std::max(sparse_height(TreeTopology::left(n)), sparse_height(TreeTopology::right(n)));
}

int DecisionTree::max_feature() const {
  int m = -1;
  for (const auto& a : nodes_) {
    if (a.is_branch()) m = std::max(m, a.value);
  }
  return m;
}

int DecisionTree::max_class() const {
  int m = -1;
  for (const auto& a : nodes_) {
    if (a.is_leaf()) m = std::max(m, a.value);
  }
  return m;
}

DecisionTree DecisionTree::with_subtree(
    int root, const std::vector<std::pair<int, NodeAssignment>>& replacement) const {
  topology_.check(root);
  auto nodes = nodes_;
  nodes[root] = NodeAssignment::cut();
  for (int d : topology_.descendants(root)) nodes[d] = NodeAssignment::cut();
  for (const auto& [n, a] : replacement) {
    topology_.check(n);
    if (!TreeTopology::is_ancestor_or_self(root, n)) {
      throw TreeError("replacement node " + std::to_string(n) + " outside subtree of " +
                      std::to_string(root));
    }
    nodes[n] = a;
  }
  return DecisionTree(depth(), std::move(nodes));
}

namespace {

void write_node(std::ostringstream& os, const DecisionTree& tree, int n, int indent) {
  const auto& a = tree.node(n);
  if (a.is_cut()) return;
  os << std::string(2 * indent, ' ') << n;
  if (a.is_leaf()) {
    os << " leaf k=" << a.value << "\n";
    return;
  }
  os << " branch f=" << a.value << "\n";
  write_node(os, tree, TreeTopology::left(n), indent + 1);
  write_node(os, tree, TreeTopology::right(n), indent + 1);
}

}  // namespace

std::string to_text(const DecisionTree& tree) {
  std::ostringstream os;
  os << "tree depth=" << tree.depth() << "\n";
  write_node(os, tree, 1, 0);
  return os.str();
}

DecisionTree parse_tree(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int depth = -1;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head != "tree") throw TreeError("tree text must start with 'tree depth=D'");
    std::string d;
    ls >> d;
    if (d.rfind("depth=", 0) != 0) throw TreeError("missing depth in tree header");
    depth = std::stoi(d.substr(6));
    break;
  }
  if (depth < 0) throw TreeError("empty tree text");
  TreeTopology topo(depth);
  std::vector<NodeAssignment> nodes(static_cast<std::size_t>(topo.n_nodes()) + 1);
  std::vector<bool> seen(nodes.size(), false);
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    int n = 0;
    std::string kind, kv;
    if (!(ls >> n >> kind >> kv)) throw TreeError("malformed tree line: '" + line + "'");
    topo.check(n);
    if (seen[n]) throw TreeError("node " + std::to_string(n) + " listed twice");
    seen[n] = true;
    if (kind == "branch" && kv.rfind("f=", 0) == 0) {
      nodes[n] = NodeAssignment::branch(std::stoi(kv.substr(2)));
    } else if (kind == "leaf" && kv.rfind("k=", 0) == 0) {
      nodes[n] = NodeAssignment::leaf(std::stoi(kv.substr(2)));
    } else {
      throw TreeError("malformed tree line: '" + line + "'");
    }
  }
  return DecisionTree(depth, std::move(nodes));
}

void check_compatible(const DecisionTree& tree, const BinaryDataset& data) {
  if (tree.max_feature() >= data.n_features()) throw TreeError("tree uses an unknown feature");
  if (tree.max_class() >= data.n_classes()) throw TreeError("tree predicts an unknown class");
}

ScoredTree score(const DecisionTree& tree, const BinaryDataset& data, double lambda) {
  if (lambda < 0) throw TreeError("lambda must be nonnegative");
  check_compatible(tree, data);
  ScoredTree out{tree, std::vector<std::uint8_t>(data.n_samples(), 0), 0, tree.leaf_count(), 0.0};
  for (int i = 0; i < data.n_samples(); ++i) {
    if (tree.predict(data.row(i)) == data.y(i)) {
      out.correct[i] = 1;
      ++out.correct_count;
    }
  }
  out.objective = static_cast<double>(out.correct_count) / data.n_samples() -
                  lambda * out.leaf_count;
  return out;
}

}  // namespace bendoct

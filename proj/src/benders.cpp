#include "bendoct/benders.hpp"

namespace bendoct {

std::vector<CutTerm> BendersCut::row() const {
  std::vector<CutTerm> out;
  out.reserve(rhs.size() + 1);
  out.push_back(CutTerm::theta(sample));
  for (auto t : rhs) {
    t.coef = -t.coef;
    out.push_back(t);
  }
  return out;
}

BendersCut benders_cut(const TreeTopology& topology, const BinaryDataset& data, int sample,
                       int leaf, bool strengthen) {
  topology.check(leaf);
  const auto x = data.row(sample);
  const int y = data.y(sample);
  const int F = data.n_features();
  const bool terminal = topology.is_terminal(leaf);
  const bool strong = strengthen && terminal && leaf > 1;
  const int parent = TreeTopology::parent(leaf);

  BendersCut cut;
  cut.sample = sample;
  cut.leaf = leaf;
  cut.strengthened = strong;

  // Per node on the path: branch rules that would send the sample elsewhere,
  // then a prediction of its class.
  for (int a : topology.ancestors(leaf)) {
    const bool went_right = TreeTopology::dist(TreeTopology::right(a), leaf) >= 0;
    const std::uint8_t away = went_right ? 0 : 1;
    const double c = (strong && a == parent) ? 0.5 : 1.0;
    for (int f = 0; f < F; ++f) {
      if (x[f] == away) cut.rhs.push_back(CutTerm::b(a, f, c));
    }
    if (strong && a == parent) cut.rhs.push_back(CutTerm::w(TreeTopology::sibling(leaf), y, 0.5));
    cut.rhs.push_back(CutTerm::w(a, y));
  }
  if (!terminal) {
    for (int f = 0; f < F; ++f) cut.rhs.push_back(CutTerm::b(leaf, f));
  }
  cut.rhs.push_back(CutTerm::w(leaf, y));
  return cut;
}

std::vector<BendersCut> separate_benders(const MpSolution& sol, const BinaryDataset& data,
                                         CutMode mode, const BendersTolerances& tol) {
  const DecisionTree tree = extract_tree(sol, tol.eps_int);
  if (mode == CutMode::benders_strong && !sol.integral(tol.eps_int)) {
    throw TreeError("strengthened separation needs integral predictions");
  }
  std::vector<BendersCut> cuts;
  for (int i = 0; i < data.n_samples(); ++i) {
    const int leaf = tree.route(data.row(i));
    BendersCut cut = benders_cut(tree.topology(), data, i, leaf, false);
    if (sol.theta(i) <= sol.value(cut.rhs) + tol.eps_cut) continue;
    if (mode == CutMode::benders_strong && tree.topology().is_terminal(leaf) && leaf > 1 &&
        sol.w(TreeTopology::sibling(leaf), data.y(i)) < 0.5) {
      cut = benders_cut(tree.topology(), data, i, leaf, true);
    }
    cuts.push_back(std::move(cut));
  }
  return cuts;
}

namespace {

// Cut value below node n; terms are appended to `out`.
double cut_below(const MpSolution& sol, const TreeTopology& topo, std::span<const std::uint8_t> x, int y, int n,
                 std::vector<CutTerm>& out) {
  out.push_back(CutTerm::w(n, y));
  double v = sol.w(n, y);
  if (topo.is_terminal(n)) return v;
  const int F = sol.layout.n_features();
  for (int dir = 0; dir <= 1; ++dir) {
    double edge = 0.0;
    for (int f = 0; f < F; ++f) {
      if (x[f] == dir) edge += sol.b(n, f);
    }
    std::vector<CutTerm> sub;
    const double below = cut_below(sol, topo, x, y, dir ? TreeTopology::right(n) : TreeTopology::left(n), sub);
    if (edge <= below) {
      for (int f = 0; f < F; ++f) {
        if (x[f] == dir) out.push_back(CutTerm::b(n, f));
      }
      v += edge;
    } else {
      out.insert(out.end(), sub.begin(), sub.end());
      v += below;
    }
  }
  return v;
}

}  // namespace

BendersCut min_cut(const MpSolution& sol, const BinaryDataset& data, int sample) {
  const TreeTopology topo(sol.layout.depth());
  BendersCut cut;
  cut.sample = sample;
  cut.leaf = 0;
  cut_below(sol, topo, data.row(sample), data.y(sample), 1, cut.rhs);
  return cut;
}

std::vector<BendersCut> separate_benders_fractional(const MpSolution& sol, const BinaryDataset& data,
                                                    double eps_cut) {
  std::vector<BendersCut> cuts;
  for (int i = 0; i < data.n_samples(); ++i) {
    BendersCut cut = min_cut(sol, data, i);
    if (sol.theta(i) > sol.value(cut.rhs) + eps_cut) cuts.push_back(std::move(cut));
  }
  return cuts;
}

}  // namespace bendoct

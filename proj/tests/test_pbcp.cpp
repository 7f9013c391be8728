#include <random>
#include <set>

#include "doctest.h"
#include "support.hpp"

#include "bendoct/driver.hpp"
#include "bendoct/oracle.hpp"
#include "bendoct/pbcp.hpp"

using namespace bendoct;
using testing_support::terms_value;
using testing_support::tree_solution;

namespace {

using PathSig = std::vector<std::tuple<int, int, int>>;

PathSig signature(const Path& p) {
  PathSig s;
  for (const auto& e : p.elements) s.emplace_back(e.node, e.feature, e.dir);
  return s;
}

// Straightforward recursion over the tree: every integral node of full height
// above two contributes both of its one-step extensions.
void naive_paths(const MpSolution& sol, const TreeTopology& topo, int n, PathSig prefix, std::set<PathSig>& out) {
  if (topo.height(n) <= 2) return;
  for (int f = 0; f < sol.layout.n_features(); ++f) {
    if (sol.b(n, f) < 1.0 - 1e-5) continue;
    for (int dir = 0; dir <= 1; ++dir) {
      auto ext = prefix;
      ext.emplace_back(n, f, dir);
      out.insert(ext);
      naive_paths(sol, topo, dir ? 2 * n + 1 : 2 * n, ext, out);
    }
    return;
  }
}

MpSolution random_fractional(std::mt19937& rng, const MasterLayout& L) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> feat(0, L.n_features() - 1);
  std::vector<double> v(L.n_core(), 0.0);
  for (auto& x : v) x = u(rng) * 0.4;
  const TreeTopology topo(L.depth());
  for (int n = 1; n <= topo.n_internal(); ++n) {
    if (u(rng) < 0.6) {
      for (int f = 0; f < L.n_features(); ++f) v[L.b(n, f)] = 0.0;
      v[L.b(n, feat(rng))] = 1.0;
    }
  }
  return {L, v, 0.0, kInf};
}

std::vector<int> samples_of(const BinaryDataset& d, const Path& p) {
  std::vector<int> out;
  for (int i = 0; i < d.n_samples(); ++i) {
    bool ok = true;
    for (const auto& e : p.elements) ok = ok && d.x(i, e.feature) == e.dir;
    if (ok) out.push_back(i);
  }
  return out;
}

std::vector<double> correctness(const DecisionTree& t, const BinaryDataset& d) {
  const auto s = score(t, d, 0.0);
  return {s.correct.begin(), s.correct.end()};
}

// Every leaf labelled with a majority class of its samples.
DecisionTree majority_labels(const DecisionTree& t, const BinaryDataset& d) {
  std::map<int, std::vector<int>> counts;
  for (int i = 0; i < d.n_samples(); ++i) {
    auto& c = counts[testing_support::route_recursive(t, d.row(i))];
    c.resize(d.n_classes());
    ++c[d.y(i)];
  }
  auto nodes = t.nodes();
  for (const auto& [n, c] : counts) {
    nodes[n] = NodeAssignment::leaf(static_cast<int>(std::max_element(c.begin(), c.end()) - c.begin()));
  }
  return DecisionTree(t.depth(), nodes);
}

bool satisfied(const PbcpCut& c, const DecisionTree& t, const std::vector<double>& theta) {
  return terms_value(c.terms, t, theta) <= c.ub + 1e-9;
}

}  // namespace

TEST_CASE("integral paths") {
  const BinaryDataset d({0, 1, 1, 0, 1, 1}, 3, {0, 1}, {"a", "b"});
  const MasterLayout L(3, 3, 2, 2);
  const TreeTopology topo(3);

  SUBCASE("fractional root gives nothing") {
    std::vector<double> v(L.n_core(), 0.0);
    for (int f = 0; f < 3; ++f) v[L.b(1, f)] = 1.0 / 3;
    v[L.b(2, 0)] = 1.0;
    CHECK(find_integral_paths({L, v, 0.0, kInf}, topo).empty());
  }
  SUBCASE("integral root in depth three") {
    std::vector<double> v(L.n_core(), 0.5);
    for (int f = 0; f < 3; ++f) v[L.b(1, f)] = f == 2;
    v[L.b(2, 1)] = 1.0;
    const auto paths = find_integral_paths({L, v, 0.0, kInf}, topo);
    REQUIRE(paths.size() == 2);
    std::set<std::pair<int, int>> ends;
    for (const auto& p : paths) {
      REQUIRE(p.elements.size() == 1);
      CHECK(p.elements[0].node == 1);
      CHECK(p.elements[0].feature == 2);
      CHECK(p.n_sub == 2 + p.elements[0].dir);
      ends.emplace(p.elements[0].dir, p.n_sub);
    }
    CHECK(ends.size() == 2);
  }
  SUBCASE("random fractional solutions match the recursive enumerator") {
    std::mt19937 rng(13);
    for (int t = 0; t < 200; ++t) {
      const int D = 3 + t % 3;
      const MasterLayout Lr(D, 4, 2, 3);
      const TreeTopology tp(D);
      const auto sol = random_fractional(rng, Lr);
      std::set<PathSig> expected, got;
      naive_paths(sol, tp, 1, {}, expected);
      const auto paths = find_integral_paths(sol, tp);
      for (const auto& p : paths) {
        got.insert(signature(p));
        const auto& last = p.elements.back();
        CHECK(p.n_sub == 2 * last.node + last.dir);
        for (std::size_t k = 1; k < p.elements.size(); ++k) {
          const auto& a = p.elements[k - 1];
          CHECK(p.elements[k].node == 2 * a.node + a.dir);
        }
      }
      CHECK(got.size() == paths.size());
      CHECK(got == expected);
    }
  }
}

TEST_CASE("relaxation terms") {
  const TreeTopology topo(4);
  Path p{{{1, 2, 0}}, 2};
  const auto terms = relax_terms(p, topo, 4);
  std::multiset<std::tuple<int, int, int>> got;
  for (const auto& t : terms) {
    CHECK(t.coef == 1.0);
    got.emplace(static_cast<int>(t.kind), t.node, t.kind == VarKind::p ? -1 : t.index);
  }
  std::multiset<std::tuple<int, int, int>> want{{static_cast<int>(VarKind::p), 1, -1}};
  for (int f : {0, 1, 3}) want.emplace(static_cast<int>(VarKind::b), 1, f);
  for (int n = 16; n <= 23; ++n) want.emplace(static_cast<int>(VarKind::p), n, -1);
  CHECK(got == want);
}

TEST_CASE("separation trigger") {
  std::mt19937 rng(5);
  const auto d = testing_support::planted_dataset(rng, 60, 5, 2, 0.3);
  const double lambda = 0.01;
  const double lambda_bar = lambda * d.n_samples();
  D2SCache cache(d, lambda_bar);

  // Root split with each side replaced by its optimal depth-2 subtree.
  auto nodes = std::vector<NodeAssignment>(16, NodeAssignment::cut());
  nodes[1] = NodeAssignment::branch(0);
  nodes[2] = NodeAssignment::leaf(0);
  nodes[3] = NodeAssignment::leaf(0);
  DecisionTree tree(3, nodes);
  for (int side : {2, 3}) {
    const Path p{{{1, 0, side - 2}}, side};
    tree = tree.with_subtree(side, graft(*cache.get_or_compute(p.key()), side));
  }
  const auto truth = correctness(tree, d);

  auto sol = tree_solution(tree, d, 0.0);
  for (int i = 0; i < d.n_samples(); ++i) sol.values[sol.layout.theta(i)] = truth[i];
  PbcpStats stats;
  CHECK(separate_pbcp(sol, d, PbcpConfig{}, cache, 1e-5, &stats).empty());
  CHECK(stats.paths == 2);
  CHECK(stats.triggered == 0);

  for (int i = 0; i < d.n_samples(); ++i) sol.values[sol.layout.theta(i)] = 1.0;
  const auto cuts = separate_pbcp(sol, d, PbcpConfig{}, cache);
  // Structure already matches the optimal subtrees, so only the sample bounds bite.
  std::set<std::string> kinds;
  for (const auto& c : cuts) {
    kinds.insert(to_string(c.kind));
    if (c.kind == PbcpCutKind::negative_samples) CHECK(sol.value(c.terms) > c.ub + 1e-6);
    CHECK(terms_value(c.terms, tree, truth) <= c.ub + 1e-9);
  }
  CHECK(kinds == std::set<std::string>{"bns", "bst"});

  const auto basic = separate_pbcp(sol, d, PbcpConfig::parse("basic"), cache);
  REQUIRE(!basic.empty());
  for (const auto& c : basic) CHECK(c.kind == PbcpCutKind::basic);
  CHECK(separate_pbcp(sol, d, PbcpConfig::parse("off"), cache).empty());

  const auto again = separate_pbcp(sol, d, PbcpConfig{}, cache);
  REQUIRE(again.size() == cuts.size());
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    CHECK(again[k].path == cuts[k].path);
    CHECK(again[k].terms == cuts[k].terms);
    CHECK(again[k].ub == cuts[k].ub);
  }
}

TEST_CASE("cuts for a pure subtree") {
  const BinaryDataset d({0, 1, 1, 0, 1, 1, 0, 0}, 2, {1, 1, 1, 0}, {"a", "b"});
  const TreeTopology topo(3);
  const Path p{{{1, 0, 1}}, 3};
  const auto samples = samples_of(d, p);
  REQUIRE(samples == std::vector<int>{1, 2});
  const auto sub = optimal_depth2(d, samples, 0.0);
  REQUIRE(sub.incorrect.empty());

  const auto bns = path_cuts(p, sub, d, topo, PbcpConfig::parse("bns"), samples);
  CHECK(bns.empty());
  const auto both = path_cuts(p, sub, d, topo, PbcpConfig::parse("bns-bst"), samples);
  REQUIRE(both.size() == 1);
  CHECK(both[0].kind == PbcpCutKind::tree_structure);

  const auto basic = path_cuts(p, sub, d, topo, PbcpConfig::parse("basic"), samples);
  REQUIRE(basic.size() == 1);
  CHECK(basic[0].ub == 2.0);
  for (const auto& t : basic[0].terms) CHECK((t.kind == VarKind::theta || t.coef == 0.0));
}

TEST_CASE("config names") {
  for (const char* s : {"off", "basic", "bns", "bst", "bns-bst"}) CHECK(PbcpConfig::parse(s).name() == s);
  CHECK(PbcpConfig{}.name() == "bns-bst");
  CHECK_THROWS(PbcpConfig::parse("all"));
}

// Without a leaf penalty, a subtree kept within depth two of the path end can
// never beat the best depth-2 subtree, so the basic bound holds for every tree.
TEST_CASE("basic bound holds for every depth-3 tree without a leaf penalty") {
  std::mt19937 rng(31);
  const TreeTopology topo(3);
  long active = 0;
  for (int inst = 0; inst < 3; ++inst) {
    const auto d = testing_support::random_dataset(rng, 16, 4, 2 + inst % 2);
    std::vector<std::pair<std::vector<PbcpCut>, std::vector<CutTerm>>> cuts;
    for (int f = 0; f < 4; ++f) {
      for (int dir = 0; dir <= 1; ++dir) {
        const Path p{{{1, f, dir}}, 2 + dir};
        const auto samples = samples_of(d, p);
        if (samples.empty()) continue;
        const auto sub = optimal_depth2(d, samples, 0.0);
        cuts.emplace_back(path_cuts(p, sub, d, topo, PbcpConfig::parse("basic"), samples),
                          relax_terms(p, topo, 4));
      }
    }
    testing_support::enumerate_trees(3, 4, 1, false, [&](const DecisionTree& raw) {
      const auto t = majority_labels(raw, d);
      const auto theta = correctness(t, d);
      for (const auto& [cs, relax] : cuts) {
        if (terms_value(relax, t) != 0.0) continue;
        ++active;
        for (const auto& c : cs) CHECK(satisfied(c, t, theta));
      }
    });
  }
  CHECK(active > 0);
}

// With a leaf penalty the cuts can cut off feasible trees, but grafting the
// optimal depth-2 subtree in their place never loses objective and satisfies
// every variant.
TEST_CASE("grafting the optimal subtree preserves the optimum and meets every cut") {
  std::mt19937 rng(77);
  const TreeTopology topo(3);
  long active = 0, cut_off = 0;
  for (int inst = 0; inst < 3; ++inst) {
    const auto d = testing_support::random_dataset(rng, 18, 4, 2);
    const double lambda_bar = 0.5 + inst;
    struct Entry {
      Path path;
      SubtreeSolution sub;
      std::vector<PbcpCut> cuts;
      std::vector<CutTerm> relax;
    };
    std::vector<Entry> entries;
    for (int f = 0; f < 4; ++f) {
      for (int dir = 0; dir <= 1; ++dir) {
        const Path p{{{1, f, dir}}, 2 + dir};
        const auto samples = samples_of(d, p);
        if (samples.empty()) continue;
        const auto sub = optimal_depth2(d, samples, lambda_bar);
        auto cs = path_cuts(p, sub, d, topo, PbcpConfig::parse("basic"), samples);
        for (auto& c : path_cuts(p, sub, d, topo, PbcpConfig::parse("bns-bst"), samples)) cs.push_back(c);
        entries.push_back({p, sub, cs, relax_terms(p, topo, 4)});
      }
    }
    testing_support::enumerate_trees(3, 4, 1, false, [&](const DecisionTree& raw) {
      const auto t = majority_labels(raw, d);
      const auto theta = correctness(t, d);
      const double value = testing_support::majority_value(t, d, lambda_bar);
      for (const auto& e : entries) {
        if (terms_value(e.relax, t) != 0.0) continue;
        ++active;
        bool ok = true;
        for (const auto& c : e.cuts) ok = ok && satisfied(c, t, theta);
        if (ok) continue;
        ++cut_off;
        const auto g = t.with_subtree(e.path.n_sub, graft(e.sub, e.path.n_sub));
        const auto gtheta = correctness(g, d);
        double gvalue = -lambda_bar * g.leaf_count();
        for (double x : gtheta) gvalue += x;
        CHECK(gvalue >= value - 1e-9);
        for (const auto& c : e.cuts) CHECK(satisfied(c, g, gtheta));
      }
    });
  }
  CHECK(active > 0);
  CHECK(cut_off > 0);
}

TEST_CASE("every cut variant keeps the exact optimum") {
  std::mt19937 rng(2024);
  int compared = 0;
  for (int inst = 0; inst < 30; ++inst) {
    const auto d = testing_support::planted_dataset(rng, 30, 5, 2 + inst % 2, 0.25);
    const double lambda = inst % 3 == 0 ? 0.0 : 0.02;
    const auto exact = exact_dp(d, 3, lambda);
    for (const char* variant : {"basic", "bns", "bst", "bns-bst"}) {
      SolverConfig cfg;
      cfg.depth = 3;
      cfg.lambda = lambda;
      cfg.eqp = false;
      cfg.polish = false;
      cfg.pbcp = PbcpConfig::parse(variant);
      cfg.time_limit = 60;
      const auto r = solve(d, cfg, "pbcp");
      REQUIRE(r.status == SolveStatusKind::optimal);
      CHECK(r.objective == doctest::Approx(exact.objective).epsilon(1e-9));
      ++compared;
    }
  }
  CHECK(compared == 120);
}

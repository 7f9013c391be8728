#include <random>

#include "doctest.h"
#include "recording_backend.hpp"
#include "support.hpp"

#include "bendoct/eqp.hpp"

using namespace bendoct;

namespace {

// The three-sample example: x1 = x2 = (1,0,1), x3 = (1,0,0), classes 0, 1, 2.
BinaryDataset example() { return BinaryDataset({1, 0, 1, 1, 0, 1, 1, 0, 0}, 3, {0, 1, 2}, {"a", "b", "c"}); }

const EqpLinking kLinkings[] = {EqpLinking::basic, EqpLinking::chain, EqpLinking::chain_da,
                                EqpLinking::recursive, EqpLinking::recursive_da};

// Whether the samples of `set` meet a split feature on their way to a leaf.
bool path_meets_split(const DecisionTree& t, const EqpSet& set, const BinaryDataset& d) {
  int n = 1;
  while (t.node(n).is_branch()) {
    const int f = t.node(n).value;
    if (std::find(set.split_features.begin(), set.split_features.end(), f) != set.split_features.end()) {
      return true;
    }
    n = d.x(set.members.front(), f) ? 2 * n + 1 : 2 * n;
  }
  return false;
}

bool tree_uses_split(const DecisionTree& t, const EqpSet& set) {
  for (const auto& a : t.nodes()) {
    if (a.is_branch() && std::count(set.split_features.begin(), set.split_features.end(), a.value)) return true;
  }
  return false;
}

// Fixes the master's core variables to `tree` (theta = true correctness) and
// maximises beta_G. Returns -1 when the fixed point is infeasible.
double max_beta(const BinaryDataset& d, const DecisionTree& tree, const EqpSet& set, const EqpConfig& cfg) {
  auto be = make_highs_backend();
  MasterModel m(TreeTopology(tree.depth()), d, 0.0, CutMode::benders_strong, *be);
  const auto g = emit_eqp_constraints(m, set, cfg);
  const int z = m.add_variable(0, 1, 1000.0, VarType::continuous);
  const Term link[] = {{z, 1}, {g.beta_g, -1}};
  m.add_row(link, -kInf, 0, RowOrigin::eqp);
  const auto v = m.assignment(tree, score(tree, d, 0).correct);
  for (int c = 0; c < m.layout().n_core(); ++c) {
    const Term fix[] = {{c, 1}};
    m.add_row(fix, v[c], v[c], RowOrigin::structural);
  }
  const auto s = be->solve({});
  if (s.status == SolveStatus::infeasible) return -1;
  REQUIRE(s.status == SolveStatus::optimal);
  return s.values[z];
}

}  // namespace

TEST_CASE("equivalent point sets of the worked example") {
  const auto d = example();
  const auto sets = generate_eqp_sets(d, 1);
  REQUIRE(sets.size() == 4);
  CHECK(sets[0].split_features.empty());
  CHECK(sets[0].members == std::vector<int>{0, 1});
  CHECK(sets[1].split_features == std::vector<int>{0});
  CHECK(sets[2].split_features == std::vector<int>{1});
  CHECK(sets[3].split_features == std::vector<int>{2});
  CHECK(sets[3].members == std::vector<int>{0, 1, 2});
  CHECK(sets[3].majority == 1);
  CHECK(sets[3].classes == std::vector<int>{0, 1, 2});

  const auto only_dups = generate_eqp_sets(d, 0);
  REQUIRE(only_dups.size() == 1);
  CHECK(only_dups[0] == sets[0]);
}

TEST_CASE("no sets without duplicate rows") {
  const BinaryDataset d({0, 0, 0, 1, 1, 0, 1, 1}, 2, {0, 1, 0, 1}, {"a", "b"});
  CHECK(generate_eqp_sets(d, 0).empty());
}

TEST_CASE("set generation matches pairwise enumeration") {
  std::mt19937 rng(21);
  for (int t = 0; t < 30; ++t) {
    const auto d = testing_support::random_dataset(rng, 40, 6, 2 + t % 2);
    const auto sets = generate_eqp_sets(d, 2);
    const auto brute = testing_support::brute_eqp(d, 2);
    REQUIRE(sets.size() == brute.size());
    for (std::size_t s = 0; s < sets.size(); ++s) {
      CHECK(sets[s].members == brute[s].members);
      CHECK(sets[s].split_features == brute[s].split);
      int m = 0;
      std::size_t total = 0;
      for (std::size_t c = 0; c < sets[s].groups.size(); ++c) {
        for (int i : sets[s].groups[c]) CHECK(d.y(i) == sets[s].classes[c]);
        m = std::max<int>(m, sets[s].groups[c].size());
        total += sets[s].groups[c].size();
      }
      CHECK(total == sets[s].members.size());
      CHECK(sets[s].majority == m);
      CHECK(m < static_cast<int>(sets[s].members.size()));
    }
  }
}

TEST_CASE("emitted rows") {
  const auto d = example();
  const auto set = generate_eqp_sets(d, 1)[3];

  SUBCASE("basic linking with the basic bound") {
    testing_support::RecordingBackend rb;
    MasterModel m(TreeTopology(2), d, 0.0, CutMode::benders, rb);
    const int before = rb.n_rows();
    const auto g = emit_eqp_constraints(m, set, {1, EqpLinking::basic, EqpBound::basic});
    REQUIRE(rb.n_rows() - before == 2);
    const auto& L = m.layout();
    const std::map<int, double> link{{g.beta_g, 1}, {L.b(1, 2), -1}, {L.b(2, 2), -1}, {L.b(3, 2), -1}};
    CHECK(rb.rows[before].coefs == link);
    CHECK(rb.rows[before].ub == 0);
    const std::map<int, double> bound{{L.theta(0), 1}, {L.theta(1), 1}, {L.theta(2), 1}, {g.beta_g, -2}};
    CHECK(rb.rows[before + 1].coefs == bound);
    CHECK(rb.rows[before + 1].ub == 1);
    CHECK(m.row_counts()[RowOrigin::eqp] == 2);
  }
  SUBCASE("group selection") {
    testing_support::RecordingBackend rb;
    MasterModel m(TreeTopology(2), d, 0.0, CutMode::benders, rb);
    const auto g = emit_eqp_constraints(m, set, {1, EqpLinking::basic, EqpBound::group_selection});
    REQUIRE(g.group_vars.size() == 3);
    const int first = g.first_row + 1;
    std::map<int, double> pick{{g.beta_g, -2}};
    for (int v : g.group_vars) pick[v] = 1;
    CHECK(rb.rows[first].coefs == pick);
    CHECK(rb.rows[first].ub == 1);
    for (int k = 0; k < 3; ++k) {
      const std::map<int, double> eq{{m.layout().theta(k), 1}, {g.group_vars[k], -1}};
      CHECK(rb.rows[first + 1 + k].coefs == eq);
      CHECK((rb.rows[first + 1 + k].lb == 0 && rb.rows[first + 1 + k].ub == 0));
    }
  }
  SUBCASE("recursive variants skip child terms above terminals") {
    testing_support::RecordingBackend rb;
    MasterModel m(TreeTopology(2), d, 0.0, CutMode::benders, rb);
    const auto g = emit_eqp_constraints(m, set, {1, EqpLinking::recursive_da, EqpBound::basic});
    CHECK(g.beta_left[1] >= 0);
    CHECK(g.beta_left[2] == -1);
    CHECK(g.beta_right[3] == -1);
  }
}

TEST_CASE("equivalent point rows admit every tree and pin unsplit sets") {
  std::mt19937 rng(8);
  int checked = 0, pinned = 0;
  for (int inst = 0; inst < 2; ++inst) {
    const auto d = testing_support::random_dataset(rng, 14, 3, 2, 0.5);
    auto sets = generate_eqp_sets(d, 2);
    if (sets.empty()) continue;
    std::vector<DecisionTree> trees;
    testing_support::enumerate_trees(2, 3, 2, true, [&](const DecisionTree& t) { trees.push_back(t); });
    std::shuffle(trees.begin(), trees.end(), rng);
    trees.resize(12);
    for (const auto& set : {sets.front(), sets.back()}) {
      for (auto linking : kLinkings) {
        for (auto bound : {EqpBound::basic, EqpBound::group_selection}) {
          const EqpConfig cfg{2, linking, bound};
          for (const auto& t : trees) {
            const double b = max_beta(d, t, set, cfg);
            CHECK(b >= 0.0);
            ++checked;
            const bool split =
                linking == EqpLinking::basic ? tree_uses_split(t, set) : path_meets_split(t, set, d);
            CHECK(b == doctest::Approx(split ? 1.0 : 0.0));
            pinned += !split;
          }
        }
      }
    }
  }
  CHECK(checked == 480);
  CHECK(pinned > 0);
}

TEST_CASE("variant names") {
  for (auto v : kLinkings) CHECK(parse_eqp_linking(to_string(v)) == v);
  CHECK_THROWS(parse_eqp_linking("sideways"));
}

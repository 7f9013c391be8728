#include <cmath>
#include <random>

#include "doctest.h"
#include "recording_backend.hpp"
#include "support.hpp"

#include "bendoct/benders.hpp"
#include "bendoct/driver.hpp"
#include "bendoct/master.hpp"

using namespace bendoct;
using testing_support::RecordingBackend;
using testing_support::tree_solution;

namespace {

std::string data_file(const char* name) { return std::string(BENDOCT_DATA_DIR) + "/" + name; }

double rhs_value(const BendersCut& c, const DecisionTree& tree) {
  return testing_support::terms_value(c.rhs, tree);
}

DecisionTree example_tree() {
  std::vector<NodeAssignment> nodes(16);
  nodes[1] = NodeAssignment::branch(0);
  nodes[2] = NodeAssignment::branch(1);
  nodes[3] = NodeAssignment::leaf(0);
  nodes[4] = NodeAssignment::leaf(1);
  nodes[5] = NodeAssignment::leaf(0);
  return DecisionTree(3, nodes);
}

}  // namespace

TEST_CASE("master structure") {
  SUBCASE("variable and row counts on monk1 at depth 3") {
    const auto d = encode(load_csv(data_file("monk1.csv"), "class"), Encoding::onehot);
    RecordingBackend rb;
    MasterModel m(TreeTopology(3), d, 0.01, CutMode::benders_strong, rb);
    const auto& L = m.layout();
    CHECK(L.n_internal() * L.n_features() == 105);
    CHECK(L.n_nodes() == 15);
    CHECK(L.n_nodes() * L.n_classes() == 30);
    CHECK(L.n_samples() == 124);
    CHECK(rb.n_variables() == 105 + 15 + 30 + 124);
    CHECK(m.row_counts()[RowOrigin::structural] == 7 + 8 + 15);
    for (int n = 1; n <= 15; ++n) {
      const auto& row = rb.rows[n - 1].coefs;
      CHECK(row.count(L.b(n <= 7 ? n : 1, 0)) == (n <= 7));
      CHECK(row.size() == static_cast<std::size_t>((n <= 7 ? 15 : 0) + 1 + TreeTopology::depth_of(n)));
    }
    for (int c = 0; c < L.n_core(); ++c) {
      const bool theta = c >= L.theta(0);
      CHECK(rb.cols[c].type == (theta ? VarType::continuous : VarType::binary));
      CHECK(rb.cols[c].ub == 1.0);
    }
  }
  SUBCASE("plain cuts relax the predictions") {
    std::mt19937 rng(1);
    const auto d = testing_support::random_dataset(rng, 10, 3, 2);
    RecordingBackend rb;
    MasterModel m(TreeTopology(2), d, 0.0, CutMode::benders, rb);
    CHECK(rb.cols[m.layout().w(3, 1)].type == VarType::continuous);
    CHECK(rb.cols[m.layout().p(3)].type == VarType::binary);
    CHECK(rb.cols[m.layout().p(3)].obj == 0.0);
    CHECK(rb.cols[m.layout().theta(0)].obj == doctest::Approx(0.1));
  }
  SUBCASE("depth 1 rows") {
    std::mt19937 rng(2);
    const auto d = testing_support::random_dataset(rng, 4, 2, 2);
    RecordingBackend rb;
    MasterModel m(TreeTopology(1), d, 0.25, CutMode::benders, rb);
    const auto& L = m.layout();
    REQUIRE(rb.rows.size() == 6);
    const std::map<int, double> root{{L.b(1, 0), 1}, {L.b(1, 1), 1}, {L.p(1), 1}};
    const std::map<int, double> left{{L.p(2), 1}, {L.p(1), 1}};
    const std::map<int, double> right{{L.p(3), 1}, {L.p(1), 1}};
    CHECK(rb.rows[0].coefs == root);
    CHECK(rb.rows[1].coefs == left);
    CHECK(rb.rows[2].coefs == right);
    for (int r = 0; r < 3; ++r) CHECK((rb.rows[r].lb == 1 && rb.rows[r].ub == 1));
    const std::map<int, double> pred{{L.w(2, 0), 1}, {L.w(2, 1), 1}, {L.p(2), -1}};
    CHECK(rb.rows[4].coefs == pred);
    CHECK(rb.cols[L.p(1)].obj == -0.25);
  }
  SUBCASE("every tree satisfies the structural rows") {
    std::mt19937 rng(3);
    const auto d = testing_support::random_dataset(rng, 6, 2, 2);
    RecordingBackend rb;
    MasterModel m(TreeTopology(2), d, 0.0, CutMode::benders_strong, rb);
    int trees = 0;
    testing_support::enumerate_trees(2, 2, 2, true, [&](const DecisionTree& t) {
      auto v = m.assignment(t, score(t, d, 0).correct);
      CHECK(rb.max_violation(v) == 0.0);
      CHECK(extract_tree(m.snapshot(v, 0, 0)) == t);
      ++trees;
    });
    CHECK(trees > 50);
  }
}

TEST_CASE("tree extraction") {
  std::mt19937 rng(4);
  const auto d = testing_support::random_dataset(rng, 5, 4, 2);
  SUBCASE("example assignment") {
    const auto sol = tree_solution(example_tree(), d, 1.0);
    CHECK(extract_tree(sol) == example_tree());
  }
  SUBCASE("root leaf") {
    const MasterLayout L(3, 4, 2, 5);
    std::vector<double> v(L.n_core(), 0.0);
    v[L.p(1)] = 1;
    v[L.w(1, 1)] = 1;
    const auto t = extract_tree({L, v});
    CHECK(t == DecisionTree::single_leaf(3, 1));
  }
  SUBCASE("fractional prediction picks the larger mass") {
    auto sol = tree_solution(example_tree(), d, 1.0);
    sol.values[sol.layout.w(5, 0)] = 0.3;
    sol.values[sol.layout.w(5, 1)] = 0.7;
    CHECK(extract_tree(sol).node(5) == NodeAssignment::leaf(1));
    sol.values[sol.layout.w(5, 0)] = 0.5;
    sol.values[sol.layout.w(5, 1)] = 0.5;
    CHECK(extract_tree(sol).node(5) == NodeAssignment::leaf(0));
  }
  SUBCASE("fractional structure is rejected") {
    auto sol = tree_solution(example_tree(), d, 1.0);
    sol.values[sol.layout.b(1, 0)] = 0.5;
    sol.values[sol.layout.b(1, 1)] = 0.5;
    CHECK_THROWS_AS(extract_tree(sol), TreeError);
    CHECK_FALSE(sol.structurally_integral(1e-5));
  }
}

TEST_CASE("highs backend") {
  auto be = make_highs_backend();
  // max 3x + 2y + z,  x + y <= 1.5,  y + z <= 1,  x, y binary, z in [0, 0.6]
  const int x = be->add_variable(0, 1, 3, VarType::binary);
  const int y = be->add_variable(0, 1, 2, VarType::binary);
  const int z = be->add_variable(0, 0.6, 1, VarType::continuous);
  const Term r1[] = {{x, 1}, {y, 1}};
  const Term r2[] = {{y, 1}, {z, 1}};
  be->add_row(r1, -kInf, 1.5);
  be->add_row(r2, -kInf, 1);
  CHECK(be->n_rows() == 2);

  int incumbents = 0;
  SolveOptions opt;
  opt.on_incumbent = [&](std::span<const double> v, double obj) {
    ++incumbents;
    CHECK(v.size() == 3);
    CHECK(obj <= 3.6 + 1e-9);
    return false;
  };
  be->set_warm_start({1, 0, kUnset});
  const auto s = be->solve(opt);
  CHECK(s.status == SolveStatus::optimal);
  CHECK(s.objective == doctest::Approx(3.6));
  CHECK(s.values[x] == doctest::Approx(1));
  CHECK(s.bound == doctest::Approx(3.6));

  SolveOptions lp;
  lp.relax_integrality = true;
  const auto r = be->solve(lp);
  CHECK(r.status == SolveStatus::optimal);
  CHECK(r.objective == doctest::Approx(3 + 0.5 * 2 + 0.5));

  const Term dup[] = {{x, 1}, {x, 1}};
  be->add_row(dup, -kInf, 1);  // forces x = 0
  const auto s2 = be->solve({});
  CHECK(s2.objective == doctest::Approx(2.0));
  CHECK(s2.values[x] == doctest::Approx(0));
}

TEST_CASE("worked-example Benders cut") {
  const BinaryDataset d({0, 1, 1, 0}, 4, {1}, {"1", "2"});
  const TreeTopology topo(3);
  CHECK(example_tree().route(d.row(0)) == 5);

  const auto cut = benders_cut(topo, d, 0, 5, false);
  const std::vector<CutTerm> expected{
      CutTerm::b(1, 1), CutTerm::b(1, 2), CutTerm::w(1, 1),
      CutTerm::b(2, 0), CutTerm::b(2, 3), CutTerm::w(2, 1),
      CutTerm::b(5, 0), CutTerm::b(5, 1), CutTerm::b(5, 2), CutTerm::b(5, 3), CutTerm::w(5, 1)};
  CHECK(cut.rhs == expected);
  CHECK_FALSE(cut.strengthened);

  const auto sep = separate_benders(tree_solution(example_tree(), d, 1.0), d, CutMode::benders_strong);
  REQUIRE(sep.size() == 1);
  CHECK(sep[0].rhs == expected);
  CHECK(sep[0].row().front() == CutTerm::theta(0));
}

TEST_CASE("Benders separation") {
  const BinaryDataset d({0, 1, 1, 0, 1, 1, 1, 0}, 4, {1, 0}, {"1", "2"});
  SUBCASE("correct samples get no cut") {
    const auto sep = separate_benders(tree_solution(example_tree(), d, 1.0), d, CutMode::benders);
    REQUIRE(sep.size() == 1);
    CHECK(sep[0].sample == 0);
  }
  SUBCASE("theta already at the bound") {
    auto sol = tree_solution(example_tree(), d, 1.0);
    sol.values[sol.layout.theta(0)] = 0.0;
    CHECK(separate_benders(sol, d, CutMode::benders).empty());
  }
  SUBCASE("strong mode needs integral predictions") {
    auto sol = tree_solution(example_tree(), d, 1.0);
    sol.values[sol.layout.w(5, 0)] = 0.5;
    sol.values[sol.layout.w(5, 1)] = 0.5;
    CHECK_THROWS(separate_benders(sol, d, CutMode::benders_strong));
    CHECK_NOTHROW(separate_benders(sol, d, CutMode::benders));
  }
  SUBCASE("terminal leaves get the strengthened form") {
    std::vector<NodeAssignment> nodes(8);
    nodes[1] = NodeAssignment::branch(0);
    nodes[2] = NodeAssignment::leaf(0);
    nodes[3] = NodeAssignment::branch(1);
    nodes[6] = NodeAssignment::leaf(0);
    nodes[7] = NodeAssignment::leaf(0);
    const DecisionTree t(2, nodes);
    const BinaryDataset d2({1, 1, 0, 0}, 4, {1}, {"a", "b"});
    REQUIRE(t.route(d2.row(0)) == 7);
    const auto sep = separate_benders(tree_solution(t, d2, 1.0), d2, CutMode::benders_strong);
    REQUIRE(sep.size() == 1);
    CHECK(sep[0].strengthened);
    const std::vector<CutTerm> expected{
        CutTerm::b(1, 2), CutTerm::b(1, 3), CutTerm::w(1, 1),
        CutTerm::b(3, 2, 0.5), CutTerm::b(3, 3, 0.5), CutTerm::w(6, 1, 0.5),
        CutTerm::w(3, 1), CutTerm::w(7, 1)};
    CHECK(sep[0].rhs == expected);
    const auto plain = separate_benders(tree_solution(t, d2, 1.0), d2, CutMode::benders);
    CHECK_FALSE(plain[0].strengthened);
  }
}

TEST_CASE("Benders cuts are valid on every tree") {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 4; ++trial) {
    const int F = 2 + trial % 2, K = 2;
    const auto d = testing_support::random_dataset(rng, 8, F, K);
    std::vector<DecisionTree> trees;
    testing_support::enumerate_trees(2, F, K, true, [&](const DecisionTree& t) { trees.push_back(t); });
    for (const auto& sep_tree : trees) {
      for (auto mode : {CutMode::benders, CutMode::benders_strong}) {
        for (const auto& c : separate_benders(tree_solution(sep_tree, d, 1.0), d, mode)) {
          CHECK(rhs_value(c, sep_tree) == 0.0);
          for (const auto& t : trees) {
            if (t.predict(d.row(c.sample)) == d.y(c.sample)) {
              CHECK(rhs_value(c, t) >= 1.0 - 1e-12);
            }
          }
          if (c.strengthened) {
            const auto p = benders_cut(sep_tree.topology(), d, c.sample, c.leaf, false);
            const int sib = TreeTopology::sibling(c.leaf);
            for (const auto& t : trees) {
              const bool sib_predicts = t.node(sib).is_leaf() && t.node(sib).value == d.y(c.sample);
              if (!sib_predicts) CHECK(rhs_value(c, t) <= rhs_value(p, t) + 1e-12);
            }
          }
        }
      }
    }
  }
}

TEST_CASE("min-cut Benders cuts") {
  std::mt19937 rng(15);
  for (int trial = 0; trial < 3; ++trial) {
    const int F = 2 + trial % 2, K = 2;
    const auto d = testing_support::random_dataset(rng, 6, F, K);
    std::vector<DecisionTree> trees;
    testing_support::enumerate_trees(2, F, K, true, [&](const DecisionTree& t) { trees.push_back(t); });

    SUBCASE("integral points") {
      for (const auto& sep_tree : trees) {
        const auto sol = tree_solution(sep_tree, d, 1.0);
        for (int i = 0; i < d.n_samples(); ++i) {
          const auto c = min_cut(sol, d, i);
          const bool ok = sep_tree.predict(d.row(i)) == d.y(i);
          CHECK(sol.value(c.rhs) == doctest::Approx(ok ? 1.0 : 0.0));
          if (ok) continue;
          for (const auto& t : trees) {
            if (t.predict(d.row(i)) == d.y(i)) CHECK(rhs_value(c, t) >= 1.0 - 1e-12);
          }
        }
        CHECK(separate_benders_fractional(sol, d).size() == separate_benders(sol, d, CutMode::benders).size());
      }
    }

    SUBCASE("fractional points are no worse than any routed cut") {
      std::uniform_int_distribution<std::size_t> pick(0, trees.size() - 1);
      for (int k = 0; k < 40; ++k) {
        const auto& ta = trees[pick(rng)];
        const auto& tb = trees[pick(rng)];
        auto sol = tree_solution(ta, d, 1.0);
        const auto sb = tree_solution(tb, d, 1.0);
        for (std::size_t v = 0; v < sol.values.size(); ++v) sol.values[v] = 0.5 * (sol.values[v] + sb.values[v]);
        for (int i = 0; i < d.n_samples(); ++i) {
          const auto c = min_cut(sol, d, i);
          for (const auto& t : trees) {
            const int leaf = t.route(d.row(i));
            if (t.node(leaf).value == d.y(i)) continue;
            CHECK(sol.value(c.rhs) <= sol.value(benders_cut(t.topology(), d, i, leaf, false).rhs) + 1e-12);
          }
          for (const auto& t : trees) {
            if (t.predict(d.row(i)) == d.y(i)) CHECK(rhs_value(c, t) >= 1.0 - 1e-12);
          }
        }
      }
    }
  }
}

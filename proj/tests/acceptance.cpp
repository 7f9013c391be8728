// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"

#include "bendoct/backend.hpp"
#include "bendoct/benders.hpp"
#include "bendoct/d2s.hpp"
#include "bendoct/driver.hpp"
#include "bendoct/eqp.hpp"
#include "bendoct/heuristics.hpp"
#include "bendoct/oracle.hpp"

using namespace bendoct;
namespace ts = testing_support;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Check {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (!ok && failures_++ < 5) messages_ << (messages_.tellp() > 0 ? "; " : "") << what;
  }
  Outcome done(const std::string& summary) const {
    std::ostringstream s;
    s << summary << " (" << checks_ << " checks";
    if (failures_) s << ", " << failures_ << " failed: " << messages_.str();
    s << ")";
    return {failures_ == 0, s.str()};
  }

 private:
  long checks_ = 0;
  long failures_ = 0;
  std::ostringstream messages_;
};

std::string data_file(const char* name) { return std::string(BENDOCT_DATA_DIR) + "/" + name; }

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// Shared between criteria 1 and 6.
struct ConfigResult {
  std::string name;
  bool eqp = false;
  bool pbcp = false;
  SolveReport report;
};
struct InstanceResult {
  std::string label;
  BinaryDataset data;
  int depth = 0;
  double lambda = 0;
  double exact = 0;
  std::vector<ConfigResult> configs;
};
std::vector<InstanceResult> g_instances;

BinaryDataset instance_data(std::mt19937& rng, int I, int F, int K) {
  std::bernoulli_distribution planted(0.5);
  return planted(rng) ? ts::planted_dataset(rng, I, F, K, 0.2) : ts::random_dataset(rng, I, F, K);
}

void run_criterion1_instances() {
  if (!g_instances.empty()) return;
  std::mt19937 rng(20250101);
  const double lambdas[] = {0.0, 0.01, 0.05};
  for (int n = 0; n < 50; ++n) {
    InstanceResult inst;
    inst.depth = 2 + n % 2;
    inst.lambda = lambdas[(n / 2) % 3];
    std::uniform_int_distribution<int> K(2, 3);
    // Depth 3 uses the smaller end of the size range; see the README.
    std::uniform_int_distribution<int> I(inst.depth == 2 ? 20 : 15, inst.depth == 2 ? 80 : 40);
    std::uniform_int_distribution<int> F(3, inst.depth == 2 ? 10 : 6);
    const int i = I(rng), f = F(rng), k = K(rng);
    inst.data = instance_data(rng, i, f, k);
    inst.label = "I" + std::to_string(i) + "/F" + std::to_string(f) + "/K" + std::to_string(k) + "/D" +
                 std::to_string(inst.depth) + "/l" + fmt("%g", inst.lambda);
    inst.exact = exact_dp(inst.data, inst.depth, inst.lambda).objective;
    for (auto cuts : {CutMode::benders, CutMode::benders_strong}) {
      for (bool eqp : {false, true}) {
        for (bool pbcp : {false, true}) {
          SolverConfig cfg;
          cfg.depth = inst.depth;
          cfg.lambda = inst.lambda;
          cfg.cuts = cuts;
          cfg.eqp = eqp;
          cfg.eqp_config = {2, EqpLinking::recursive_da, EqpBound::group_selection};
          cfg.pbcp = PbcpConfig::parse(pbcp ? "bns-bst" : "off");
          cfg.time_limit = 600;
          ConfigResult cr;
          cr.name = std::string(to_string(cuts)) + (eqp ? "+eqp" : "") + (pbcp ? "+pbcp" : "");
          cr.eqp = eqp;
          cr.pbcp = pbcp;
          cr.report = solve(inst.data, cfg, inst.label);
          inst.configs.push_back(std::move(cr));
        }
      }
    }
    g_instances.push_back(std::move(inst));
  }
}

Outcome criterion1() {
  const auto t0 = Clock::now();
  run_criterion1_instances();
  const double minutes = std::chrono::duration<double>(Clock::now() - t0).count() / 60;
  Check c;
  int solves = 0;
  for (const auto& inst : g_instances) {
    for (const auto& cr : inst.configs) {
      ++solves;
      c.expect(cr.report.status == SolveStatusKind::optimal, inst.label + " " + cr.name + " not optimal");
      c.expect(std::abs(cr.report.objective - inst.exact) <= 1e-9,
               inst.label + " " + cr.name + fmt(" objective %.12g vs %.12g", cr.report.objective, inst.exact));
    }
  }
  c.expect(minutes < 30.0, fmt("took %.1f min", minutes));
  return c.done(std::to_string(g_instances.size()) + " instances, " + std::to_string(solves) + " solves, " +
                fmt("%.1f min", minutes));
}

Outcome criterion2() {
  std::mt19937 rng(7);
  Check c;
  int n = 0;
  for (int t = 0; t < 240; ++t) {
    const int F = 2 + t % 5, K = 2 + t % 2;
    const auto d = ts::random_dataset(rng, 50, F, K);
    std::vector<int> all(50);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(std::uniform_int_distribution<int>(1, 40)(rng));
    std::sort(all.begin(), all.end());
    for (double lb : {0.0, 0.5, 2.0}) {
      const auto s = optimal_depth2(d, all, lb);
      c.expect(s.penalized_score == ts::brute_depth2(d, all, lb), "subset " + std::to_string(t));
      ++n;
    }
  }
  return c.done(std::to_string(n) + " subset/penalty pairs");
}

Outcome criterion3() {
  std::mt19937 rng(3);
  Check c;
  for (int t = 0; t < 100; ++t) {
    const int F = 3 + t % 5, K = 2 + t % 2;
    const auto d = ts::random_dataset(rng, 40, F, K, 0.25 + 0.005 * t);
    std::vector<int> s;
    for (int i = 0; i < 40; ++i) {
      if (rng() % 4) s.push_back(i);
    }
    const FrequencyCounters fc(d, s);
    for (int k = 0; k < K; ++k) {
      int size = 0;
      for (int i : s) size += d.y(i) == k;
      c.expect(fc.total(k) == size, "class total");
      for (int fa = 0; fa < F; ++fa) {
        for (int va = 0; va < 2; ++va) {
          int direct = 0;
          for (int i : s) direct += d.y(i) == k && d.x(i, fa) == va;
          c.expect(fc.count(k, fa, va) == direct, "single-feature counter");
        }
        for (int fb = 0; fb < F; ++fb) {
          int sum = 0;
          for (int va = 0; va < 2; ++va) {
            for (int vb = 0; vb < 2; ++vb) {
              int direct = 0;
              for (int i : s) direct += d.y(i) == k && d.x(i, fa) == va && d.x(i, fb) == vb;
              c.expect(fc.count(k, fa, va, fb, vb) == direct, "terminal counter");
              sum += fc.count(k, fa, va, fb, vb);
            }
          }
          c.expect(sum == size, "terminal counters sum to the class size");
        }
      }
    }
  }
  return c.done("100 datasets");
}

Outcome criterion4() {
  std::mt19937 rng(44);
  Check c;
  long cuts = 0, strengthened = 0;
  for (int trial = 0; trial < 3; ++trial) {
    const int F = 3 + trial % 2, K = 2, I = 12 + trial;
    const auto d = ts::random_dataset(rng, I, F, K);
    std::vector<DecisionTree> trees;
    ts::enumerate_trees(2, F, K, true, [&](const DecisionTree& t) { trees.push_back(t); });
    for (const auto& sep : trees) {
      for (auto mode : {CutMode::benders, CutMode::benders_strong}) {
        for (const auto& cut : separate_benders(ts::tree_solution(sep, d, 1.0), d, mode)) {
          ++cuts;
          strengthened += cut.strengthened;
          c.expect(ts::terms_value(cut.rhs, sep) < 1.0 - 1e-9, "cut not violated by its separating tree");
          for (const auto& t : trees) {
            if (t.predict(d.row(cut.sample)) != d.y(cut.sample)) continue;
            c.expect(ts::terms_value(cut.rhs, t) >= 1.0 - 1e-12, "cut removes a correct classification");
          }
        }
      }
    }
  }
  return c.done(std::to_string(cuts) + " cuts (" + std::to_string(strengthened) + " strengthened)");
}

Outcome criterion5() {
  // Tree: root on feature 1, node 2 on feature 2, leaves 3 (class 1), 4 (class 2), 5 (class 1).
  std::vector<NodeAssignment> nodes(16);
  nodes[1] = NodeAssignment::branch(0);
  nodes[2] = NodeAssignment::branch(1);
  nodes[3] = NodeAssignment::leaf(0);
  nodes[4] = NodeAssignment::leaf(1);
  nodes[5] = NodeAssignment::leaf(0);
  const DecisionTree tree(3, nodes);
  const BinaryDataset d({0, 1, 1, 0}, 4, {1}, {"1", "2"});
  Check c;
  c.expect(tree.route(d.row(0)) == 5, "sample reaches node 5");
  const std::vector<CutTerm> expected{
      CutTerm::b(1, 1), CutTerm::b(1, 2), CutTerm::w(1, 1),
      CutTerm::b(2, 0), CutTerm::b(2, 3), CutTerm::w(2, 1),
      CutTerm::b(5, 0), CutTerm::b(5, 1), CutTerm::b(5, 2), CutTerm::b(5, 3), CutTerm::w(5, 1)};
  const auto sep = separate_benders(ts::tree_solution(tree, d, 1.0), d, CutMode::benders);
  c.expect(sep.size() == 1, "one cut");
  if (!sep.empty()) c.expect(sep[0].rhs == expected, "coefficients");
  return c.done("leaf-5 branch terms on node 5");
}

// LP bound of the master over the full family of flow cuts, reached by
// separating minimum cuts at the LP optimum until none is violated.
double lp_bound(const BinaryDataset& d, int depth, double lambda, bool eqp) {
  auto be = make_highs_backend();
  MasterModel m(TreeTopology(depth), d, lambda, CutMode::benders, *be);
  if (eqp) {
    const EqpConfig cfg{2, EqpLinking::recursive_da, EqpBound::group_selection};
    for (const auto& set : generate_eqp_sets(d, cfg.max_split)) emit_eqp_constraints(m, set, cfg);
  }
  SolveOptions opt;
  opt.relax_integrality = true;
  double bound = kInf;
  for (int round = 0; round < 1000; ++round) {
    const auto lp = be->solve(opt);
    if (lp.status != SolveStatus::optimal) throw std::runtime_error("LP relaxation failed");
    bound = lp.objective;
    const auto cuts = separate_benders_fractional(m.snapshot(lp.values, lp.objective, lp.objective), d, 1e-9);
    if (cuts.empty()) break;
    for (const auto& cut : cuts) m.add_cut(cut.row(), -kInf, 0.0, RowOrigin::benders);
  }
  return bound;
}

Outcome criterion6() {
  run_criterion1_instances();
  Check c;
  int lp_checked = 0;
  for (const auto& inst : g_instances) {
    double off = std::nan("");
    for (const auto& cr : inst.configs) {
      if (!cr.eqp && !cr.pbcp) off = cr.report.objective;
    }
    for (const auto& cr : inst.configs) {
      if (!cr.eqp && !cr.pbcp) continue;
      c.expect(std::abs(cr.report.objective - off) <= 1e-9, inst.label + " " + cr.name + " changes the optimum");
    }
    const double without = lp_bound(inst.data, inst.depth, inst.lambda, false);
    const double with = lp_bound(inst.data, inst.depth, inst.lambda, true);
    c.expect(with <= without + 1e-7, inst.label + fmt(" LP bound %.9g with vs %.9g without", with, without));
    ++lp_checked;
  }
  return c.done(std::to_string(lp_checked) + " instances");
}

Outcome criterion7() {
  Check c;
  const auto iris = load_csv(data_file("iris.csv"), "class");
  const auto wine = load_csv(data_file("wine.csv"), "class");
  const auto monk = load_csv(data_file("monk1.csv"), "class");
  const int got[5] = {encode(iris, Encoding::qb5).n_features(), encode(iris, Encoding::qt5).n_features(),
                      encode(wine, Encoding::qb5).n_features(), encode(wine, Encoding::qt5).n_features(),
                      encode(monk, Encoding::onehot).n_features()};
  const int want[5] = {20, 16, 65, 52, 15};
  const char* names[5] = {"iris qb5", "iris qt5", "wine qb5", "wine qt5", "monk1 onehot"};
  std::string summary;
  for (int k = 0; k < 5; ++k) {
    c.expect(got[k] == want[k], std::string(names[k]) + " gave " + std::to_string(got[k]));
    summary += std::string(k ? ", " : "") + names[k] + "=" + std::to_string(got[k]);
  }
  return c.done(summary);
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

Outcome criterion8() {
  std::mt19937 rng(88);
  Check c;
  for (int t = 0; t < 100; ++t) {
    const int depth = 2 + t % 2, F = 4 + t % 4, K = 2 + t % 2;
    const double lambda = (t % 5) * 0.01;
    const auto d = instance_data(rng, 30 + t % 40, F, K);
    const double opt = exact_dp(d, depth, lambda).objective;
    D2SCache cache(d, lambda * d.n_samples());
    try {
      const auto cart = cart_warmstart(d, depth, lambda);
      check_compatible(cart, d);
      c.expect(cart.depth() == depth, "cart depth");
      c.expect(score(cart, d, lambda).objective <= opt + 1e-12, "cart above the optimum");

      const auto start = t % 2 ? cart : random_tree(rng, depth, F, K);
      const auto p = polish(start, d, lambda, cache);
      check_compatible(p, d);
      const double ps = score(p, d, lambda).objective;
      c.expect(ps >= score(start, d, lambda).objective - 1e-12, "polish decreased the objective");
      c.expect(ps <= opt + 1e-12, "polish above the optimum");
      c.expect(polish(p, d, lambda, cache) == p, "polish not idempotent");
    } catch (const std::exception& e) {
      c.expect(false, std::string("invalid tree: ") + e.what());
    }
  }
  return c.done("100 trials");
}

Outcome criterion9() {
  const double lambdas[] = {0.08,  0.06,  0.04,   0.02,   0.01,   0.008,  0.006, 0.004,
                            0.002, 0.001, 0.0008, 0.0006, 0.0004, 0.0002, 0.0001};
  const auto d = encode(load_csv(data_file("monk1.csv"), "class"), Encoding::onehot);
  Check c;
  double slowest = 0, total = 0;
  for (double lambda : lambdas) {
    SolverConfig cfg;
    cfg.depth = 3;
    cfg.lambda = lambda;
    cfg.time_limit = 600;
    const auto r = solve(d, cfg, "monk1");
    const double exact = exact_dp(d, 3, lambda).objective;
    const std::string tag = fmt("lambda %g", lambda);
    c.expect(r.status == SolveStatusKind::optimal, tag + " status " + to_string(r.status));
    c.expect(r.wall_time <= 600, tag + fmt(" took %.0f s", r.wall_time));
    c.expect(std::abs(r.objective - exact) <= 1e-9, tag + fmt(" objective %.12g vs %.12g", r.objective, exact));
    slowest = std::max(slowest, r.wall_time);
    total += r.wall_time;
    std::fprintf(stderr, "  monk1 lambda=%g: %s %.6f (exact %.6f) in %.1f s\n", lambda, to_string(r.status),
                 r.objective, exact, r.wall_time);
  }
  return c.done(fmt("15 lambdas, slowest %.1f s, total %.1f s", slowest, total));
}

Outcome criterion10() {
  Check c;
  const BinaryDataset example({1, 0, 1, 1, 0, 1, 1, 0, 0}, 3, {0, 1, 2}, {"a", "b", "c"});
  std::mt19937 rng(10);
  std::vector<BinaryDataset> sets{example};
  for (int t = 0; t < 30; ++t) sets.push_back(ts::random_dataset(rng, 30 + t, 4 + t % 4, 2 + t % 2));
  long total = 0;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    const auto got = generate_eqp_sets(sets[s], 2);
    const auto brute = ts::brute_eqp(sets[s], 2);
    c.expect(got.size() == brute.size(), "dataset " + std::to_string(s) + " set count");
    for (std::size_t k = 0; k < std::min(got.size(), brute.size()); ++k) {
      c.expect(got[k].members == brute[k].members && got[k].split_features == brute[k].split,
               "dataset " + std::to_string(s) + " set " + std::to_string(k));
    }
    total += got.size();
  }
  c.expect(generate_eqp_sets(example, 1).size() == 4, "worked example has four sets");
  return c.done(std::to_string(total) + " sets over 31 datasets");
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                        criterion5, criterion6, criterion7, criterion8,
                                                        criterion9, criterion10};
  std::set<int> wanted;
  for (int a = 1; a < argc; ++a) wanted.insert(std::atoi(argv[a]));
  int failed = 0;
  for (int k = 1; k <= static_cast<int>(criteria.size()); ++k) {
    if (!wanted.empty() && !wanted.count(k)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[k - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("criterion %2d: %s  %s [%.1f s]\n", k, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}

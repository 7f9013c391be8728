#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

#include "bendoct/driver.hpp"
#include "bendoct/oracle.hpp"

using namespace bendoct;

namespace {

SolverConfig small_config(int depth, double lambda) {
  SolverConfig c;
  c.depth = depth;
  c.lambda = lambda;
  c.time_limit = 120;
  return c;
}

std::filesystem::path write_csv(const std::string& name, const BinaryDataset& d) {
  const auto dir = std::filesystem::temp_directory_path() / "bendoct_driver_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / (name + ".csv");
  std::ofstream out(path);
  for (int f = 0; f < d.n_features(); ++f) out << "x" << f << ",";
  out << "class\n";
  for (int i = 0; i < d.n_samples(); ++i) {
    for (int f = 0; f < d.n_features(); ++f) out << (d.x(i, f) ? "yes" : "no") << ",";
    out << d.class_names()[d.y(i)] << "\n";
  }
  return path;
}

}  // namespace

TEST_CASE("single class data solves to one leaf") {
  std::mt19937 rng(6);
  auto base = testing_support::random_dataset(rng, 20, 4, 2);
  const BinaryDataset d(base.bits(), 4, std::vector<int>(20, 0), base.class_names());
  const auto r = solve(d, small_config(3, 0.05), "pure");
  CHECK(r.status == SolveStatusKind::optimal);
  CHECK(r.objective == doctest::Approx(0.95).epsilon(1e-12));
  CHECK(r.leaf_count == 1);
  CHECK(r.backend == "highs");
  CHECK(r.mode == "iterative");
}

TEST_CASE("every configuration reaches the same optimum") {
  std::mt19937 rng(19);
  for (int inst = 0; inst < 4; ++inst) {
    const auto d = testing_support::planted_dataset(rng, 40, 6, 2 + inst % 2, 0.2);
    const int depth = 2 + inst % 2;
    const double lambda = inst % 2 ? 0.01 : 0.05;
    const double exact = exact_dp(d, depth, lambda).objective;
    for (auto cuts : {CutMode::benders, CutMode::benders_strong}) {
      for (bool eqp : {false, true}) {
        for (const char* pbcp : {"off", "bns-bst"}) {
          auto cfg = small_config(depth, lambda);
          cfg.cuts = cuts;
          cfg.eqp = eqp;
          cfg.eqp_config = {2, EqpLinking::recursive_da, EqpBound::group_selection};
          cfg.pbcp = PbcpConfig::parse(pbcp);
          const auto r = solve(d, cfg);
          REQUIRE(r.status == SolveStatusKind::optimal);
          CHECK(r.objective == doctest::Approx(exact).epsilon(1e-9));
          const auto s = score(r.tree, d, lambda);
          CHECK(s.objective == doctest::Approx(r.objective).epsilon(1e-12));
          CHECK(r.gap_percent <= 1e-4);
        }
      }
    }
  }
}

TEST_CASE("solves are deterministic and monotone in lambda") {
  std::mt19937 rng(29);
  const auto d = testing_support::planted_dataset(rng, 50, 6, 2, 0.2);
  const auto a = solve(d, small_config(3, 0.01));
  const auto b = solve(d, small_config(3, 0.01));
  CHECK(a.objective == b.objective);
  CHECK(a.tree == b.tree);

  double prev_obj = 2.0;
  int prev_leaves = 1 << 30;
  for (double lambda : {0.0, 0.005, 0.01, 0.02, 0.05, 0.1, 0.5}) {
    const auto r = solve(d, small_config(3, lambda));
    REQUIRE(r.status == SolveStatusKind::optimal);
    CHECK(r.objective <= prev_obj + 1e-12);
    CHECK(r.leaf_count <= prev_leaves);
    prev_obj = r.objective;
    prev_leaves = r.leaf_count;
  }
  CHECK(prev_leaves == 1);
}

TEST_CASE("a tiny time limit is reported, not hidden") {
  std::mt19937 rng(31);
  const auto d = testing_support::random_dataset(rng, 300, 10, 3);
  auto cfg = small_config(4, 0.0);
  cfg.time_limit = 0.5;
  const auto r = solve(d, cfg);
  CHECK(r.status != SolveStatusKind::error);
  CHECK(r.objective <= r.bound + 1e-9);
  CHECK(score(r.tree, d, 0.0).objective == doctest::Approx(r.objective).epsilon(1e-12));
  if (r.status == SolveStatusKind::time_limit) CHECK(r.gap_percent >= 0.0);
}

TEST_CASE("aggregation") {
  std::vector<SolveReport> reports(4);
  reports[0].status = SolveStatusKind::optimal;
  reports[0].wall_time = 5;
  reports[1].status = SolveStatusKind::optimal;
  reports[1].wall_time = 7;
  reports[2].status = SolveStatusKind::time_limit;
  reports[2].gap_percent = 10;
  reports[2].wall_time = 600;
  reports[3].status = SolveStatusKind::optimal;
  reports[3].wall_time = 1;
  const auto rows = aggregate(reports, {"iris", "iris", "iris", "wine"});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].dataset == "iris");
  CHECK(rows[0].instances == 3);
  CHECK(rows[0].solved == 2);
  CHECK(rows[0].mean_time_solved == doctest::Approx(6.0));
  CHECK(rows[0].mean_gap_unsolved == doctest::Approx(10.0));
  CHECK(rows[1].solved == 1);
  CHECK(rows[1].mean_gap_unsolved == 0.0);
  CHECK(render_table(rows).find("iris") != std::string::npos);
  CHECK_THROWS(aggregate(reports, {"iris"}));
}

TEST_CASE("grid keeps input order and groups by dataset") {
  std::mt19937 rng(37);
  const auto p1 = write_csv("alpha", testing_support::planted_dataset(rng, 30, 4, 2));
  const auto p2 = write_csv("beta", testing_support::planted_dataset(rng, 30, 4, 2));
  std::vector<InstanceSpec> specs;
  for (const auto& p : {p1, p2}) {
    for (double lambda : {0.01, 0.05}) {
      InstanceSpec s;
      s.dataset = p.string();
      s.config = small_config(2, lambda);
      specs.push_back(s);
    }
  }
  std::swap(specs[1], specs[2]);
  const auto res = run_grid(specs, 3);
  REQUIRE(res.reports.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(res.reports[k].instance == specs[k].id());
    CHECK(res.reports[k].status == SolveStatusKind::optimal);
  }
  REQUIRE(res.table.size() == 2);
  CHECK(res.table[0].dataset == "alpha");
  CHECK(res.table[0].solved == 2);
  CHECK(res.table[1].dataset == "beta");
  CHECK(specs[0].id() == "alpha/onehot/D2/l0.01/benders-strong/eqp/bns-bst");

  InstanceSpec missing;
  missing.dataset = "/nonexistent/none.csv";
  const auto err = solve_instance(missing);
  CHECK(err.status == SolveStatusKind::error);
  CHECK(!err.message.empty());
}

TEST_CASE("json report lines") {
  std::mt19937 rng(43);
  const auto d = testing_support::planted_dataset(rng, 30, 4, 2);
  const auto r = solve(d, small_config(2, 0.01), "demo");
  const auto line = to_json_line(r);
  CHECK(line.find('\n') == std::string::npos);
  const auto j = nlohmann::json::parse(line);
  CHECK(j["instance"] == "demo");
  CHECK(j["status"] == "optimal");
  CHECK(j["objective"].get<double>() == doctest::Approx(r.objective));
  CHECK(j["leaves"] == r.leaf_count);
  CHECK(j["config"]["depth"] == 2);
  CHECK(parse_tree(j["tree"].get<std::string>()) == r.tree);
}

TEST_CASE("option parsing") {
  CHECK(parse_encoding("qt5") == Encoding::qt5);
  CHECK_THROWS(parse_encoding("qt7"));
  CHECK(parse_cut_mode("benders") == CutMode::benders);
  CHECK(parse_cut_mode("benders-strong") == CutMode::benders_strong);
  CHECK_THROWS(parse_cut_mode("strong"));
}

TEST_CASE("objective lattice step") {
  for (int n : {7, 45, 124}) {
    for (double lambda : {0.0, 0.0001, 0.01, 0.05, 0.3}) {
      for (int depth : {1, 2, 3}) {
        std::vector<double> values;
        for (int c = 0; c <= n; ++c) {
          for (int leaves = 1; leaves <= (1 << depth); ++leaves) values.push_back(double(c) / n - lambda * leaves);
        }
        std::sort(values.begin(), values.end());
        double step = 1.0;
        for (std::size_t k = 1; k < values.size(); ++k) {
          if (values[k] - values[k - 1] > 1e-9 / n) step = std::min(step, values[k] - values[k - 1]);
        }
        CHECK(objective_step(n, lambda, depth) == doctest::Approx(step).epsilon(1e-9));
      }
    }
  }
}

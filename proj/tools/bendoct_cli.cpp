// bendoct: optimal decision trees by logic-based Benders decomposition.

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "bendoct/driver.hpp"
#include "bendoct/oracle.hpp"

using namespace bendoct;
using nlohmann::json;

namespace {

struct Flags {
  std::string dataset, label = "class", encoding = "onehot";
  int depth = 3;
  double lambda = 0.01;
  std::string cuts = "benders-strong", eqp = "recursive-da", pbcp = "bns-bst";
  bool eqp_groups = true, polish = true, warmstart = true;
  int eqp_fr = 2;
  double time_limit = 600.0;
  int seed = 0;
  std::string out;

  InstanceSpec spec() const {
    InstanceSpec s;
    s.dataset = dataset;
    s.label = label;
    s.encoding = parse_encoding(encoding);
    auto& c = s.config;
    c.depth = depth;
    c.lambda = lambda;
    c.cuts = parse_cut_mode(cuts);
    c.eqp = eqp != "off";
    if (c.eqp) c.eqp_config.linking = parse_eqp_linking(eqp);
    c.eqp_config.bound = eqp_groups ? EqpBound::group_selection : EqpBound::basic;
    c.eqp_config.max_split = eqp_fr;
    c.pbcp = PbcpConfig::parse(pbcp);
    c.polish = polish;
    c.warm_start = warmstart;
    c.time_limit = time_limit;
    c.seed = seed;
    return s;
  }
};

void add_instance_flags(CLI::App* app, Flags& f) {
  app->add_option("--dataset", f.dataset, "CSV file with a header row")->required()->check(CLI::ExistingFile);
  app->add_option("--label", f.label, "label column")->capture_default_str();
  app->add_option("--depth", f.depth, "maximum tree depth")->capture_default_str()->check(CLI::Range(1, 12));
  app->add_option("--lambda", f.lambda, "leaf penalty")->capture_default_str()->check(CLI::NonNegativeNumber);
  app->add_option("--encoding", f.encoding, "onehot|qb5|qt5")
      ->capture_default_str()
      ->check(CLI::IsMember({"onehot", "qb5", "qt5"}));
}

void emit(const SolveReport& r, const std::string& out) {
  const std::string line = to_json_line(r);
  if (out.empty()) {
    std::cout << line << "\n";
    return;
  }
  std::ofstream os(out, std::ios::app);
  if (!os) throw std::runtime_error("cannot open " + out);
  os << line << "\n";
}

template <class T>
void take(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

// Grid config: datasets x depths x lambdas x configs, with shared defaults.
std::vector<InstanceSpec> grid_specs(const json& cfg, const std::filesystem::path& base) {
  Flags defaults;
  take(cfg, "time_limit", defaults.time_limit);
  take(cfg, "seed", defaults.seed);
  std::vector<int> depths{defaults.depth};
  std::vector<double> lambdas{defaults.lambda};
  take(cfg, "depths", depths);
  take(cfg, "lambdas", lambdas);
  json configs = cfg.value("configs", json::array({json::object()}));

  std::vector<InstanceSpec> specs;
  for (const auto& d : cfg.at("datasets")) {
    for (int depth : depths) {
      for (double lambda : lambdas) {
        for (const auto& c : configs) {
          Flags f = defaults;
          std::filesystem::path p = d.at("path").get<std::string>();
          f.dataset = (p.is_relative() ? base / p : p).string();
          take(d, "label", f.label);
          take(d, "encoding", f.encoding);
          f.depth = depth;
          f.lambda = lambda;
          take(c, "cuts", f.cuts);
          take(c, "eqp", f.eqp);
          take(c, "eqp_groups", f.eqp_groups);
          take(c, "eqp_fr", f.eqp_fr);
          take(c, "pbcp", f.pbcp);
          take(c, "polish", f.polish);
          take(c, "warmstart", f.warmstart);
          take(c, "time_limit", f.time_limit);
          take(c, "seed", f.seed);
          specs.push_back(f.spec());
        }
      }
    }
  }
  if (specs.empty()) throw std::invalid_argument("grid config produces no instances");
  return specs;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal decision trees by logic-based Benders decomposition"};
  app.require_subcommand(1);

  Flags f;
  auto* solve_cmd = app.add_subcommand("solve", "solve one instance");
  add_instance_flags(solve_cmd, f);
  solve_cmd->add_option("--cuts", f.cuts, "benders|benders-strong")
      ->capture_default_str()
      ->check(CLI::IsMember({"benders", "benders-strong"}));
  solve_cmd->add_option("--eqp", f.eqp, "off|basic|chain|chain-da|recursive|recursive-da")
      ->capture_default_str()
      ->check(CLI::IsMember({"off", "basic", "chain", "chain-da", "recursive", "recursive-da"}));
  solve_cmd->add_flag("--eqp-groups,!--no-eqp-groups", f.eqp_groups, "group-selection EQP bound");
  solve_cmd->add_option("--eqp-fr", f.eqp_fr, "largest split set size")->capture_default_str()->check(
      CLI::Range(0, 2));
  solve_cmd->add_option("--pbcp", f.pbcp, "off|basic|bns|bst|bns-bst")
      ->capture_default_str()
      ->check(CLI::IsMember({"off", "basic", "bns", "bst", "bns-bst"}));
  solve_cmd->add_flag("--polish,!--no-polish", f.polish, "polish incumbents with depth-2 subtrees");
  solve_cmd->add_flag("--warmstart,!--no-warmstart", f.warmstart, "CART warm start");
  solve_cmd->add_option("--time-limit", f.time_limit, "seconds")->capture_default_str()->check(
      CLI::PositiveNumber);
  solve_cmd->add_option("--seed", f.seed)->capture_default_str();
  solve_cmd->add_option("--out", f.out, "append the JSON record here instead of stdout");

  std::string grid_config;
  int workers = 1;
  std::string grid_out, table_out;
  auto* grid_cmd = app.add_subcommand("grid", "solve a grid of instances");
  grid_cmd->add_option("--config", grid_config, "JSON grid description")->required()->check(CLI::ExistingFile);
  grid_cmd->add_option("--workers", workers, "concurrent solves")->capture_default_str()->check(
      CLI::PositiveNumber);
  grid_cmd->add_option("--out", grid_out, "JSON-lines results (overrides the config)");
  grid_cmd->add_option("--table", table_out, "aggregate table (overrides the config)");

  Flags of;
  auto* oracle_cmd = app.add_subcommand("oracle", "exact dynamic program for small instances");
  add_instance_flags(oracle_cmd, of);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_cmd->parsed()) {
      const auto r = solve_instance(f.spec());
      emit(r, f.out);
      if (r.status == SolveStatusKind::error) {
        std::cerr << "error: " << r.message << "\n";
        return 2;
      }
    } else if (grid_cmd->parsed()) {
      std::ifstream in(grid_config);
      const json cfg = json::parse(in);
      const auto base = std::filesystem::path(grid_config).parent_path();
      take(cfg, "workers", workers);
      if (grid_out.empty()) take(cfg, "out", grid_out);
      if (table_out.empty()) take(cfg, "table", table_out);
      const auto result = run_grid(grid_specs(cfg, base), workers);
      for (const auto& r : result.reports) emit(r, grid_out);
      const std::string table = render_table(result.table);
      if (table_out.empty()) {
        std::cerr << table;
      } else {
        std::ofstream(table_out) << table;
      }
    } else if (oracle_cmd->parsed()) {
      const auto spec = of.spec();
      const auto data = encode(load_csv(spec.dataset, spec.label), spec.encoding);
      const auto r = exact_dp(data, of.depth, of.lambda);
      json j{{"objective", r.objective},
             {"correct", r.correct_count},
             {"leaves", r.leaf_count},
             {"tree", to_text(r.tree)}};
      std::cout << j.dump() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

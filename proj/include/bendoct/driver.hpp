#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "bendoct/dataset.hpp"
#include "bendoct/eqp.hpp"
#include "bendoct/master.hpp"
#include "bendoct/pbcp.hpp"
#include "bendoct/tree.hpp"

namespace bendoct {

enum class Encoding { onehot, qb5, qt5 };
const char* to_string(Encoding e);
Encoding parse_encoding(const std::string& s);
CutMode parse_cut_mode(const std::string& s);

/// onehot treats every column as categorical; qb5/qt5 quantise continuous
/// columns into 5-quantile buckets/thresholds and one-hot the rest.
BinaryDataset encode(const RawDataset& raw, Encoding encoding);

struct SolverConfig {
  int depth = 3;
  double lambda = 0.01;
  CutMode cuts = CutMode::benders_strong;
  bool eqp = true;
  EqpConfig eqp_config;
  PbcpConfig pbcp;
  bool polish = true;
  bool warm_start = true;
  double time_limit = 600.0;
  double eps_int = 1e-5;
  double eps_cut = 1e-6;
  int seed = 0;
  int lp_rounds = 40;  // cut rounds on the LP relaxation before branching
};

enum class SolveStatusKind { optimal, time_limit, error };
const char* to_string(SolveStatusKind s);

struct SolveReport {
  std::string instance;
  SolveStatusKind status = SolveStatusKind::error;
  std::string message;
  double objective = 0.0;
  double bound = 0.0;
  double gap_percent = 0.0;
  double wall_time = 0.0;
  std::string backend;
  std::string mode;  // "callback" or "iterative"
  int rounds = 0;
  int correct_count = 0;
  int leaf_count = 0;
  std::map<std::string, long> cuts;  // rows per family
  long eqp_sets = 0;
  long d2s_calls = 0;
  long d2s_hits = 0;
  long pbcp_paths = 0;
  long polish_improvements = 0;
  DecisionTree tree;
  SolverConfig config;
};

/// Smallest positive difference between the objectives (correct / n_samples
/// - lambda * leaves) of two trees of the given depth.
double objective_step(int n_samples, double lambda, int depth);

/// Full pipeline on an encoded dataset. Setup errors throw; a time limit is
/// reported through the status.
SolveReport solve(const BinaryDataset& data, const SolverConfig& config, const std::string& instance = "");

struct InstanceSpec {
  std::string dataset;  // path to CSV
  std::string label = "class";
  Encoding encoding = Encoding::onehot;
  SolverConfig config;

  std::string id() const;
};

/// Loads, encodes and solves; any failure becomes an error report.
SolveReport solve_instance(const InstanceSpec& spec);

struct AggregateRow {
  std::string dataset;
  int instances = 0;
  int solved = 0;
  double mean_time_solved = 0.0;
  double mean_gap_unsolved = 0.0;
};

struct GridResult {
  std::vector<SolveReport> reports;  // same order as the specs
  std::vector<AggregateRow> table;
};

std::vector<AggregateRow> aggregate(const std::vector<SolveReport>& reports,
                                    const std::vector<std::string>& dataset_of_report);
GridResult run_grid(const std::vector<InstanceSpec>& specs, int parallelism);

std::string to_json_line(const SolveReport& report);
std::string render_table(const std::vector<AggregateRow>& rows);

}  // namespace bendoct

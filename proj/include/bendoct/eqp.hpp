#pragma once

#include <string>
#include <vector>

#include "bendoct/dataset.hpp"
#include "bendoct/master.hpp"

namespace bendoct {

/// Samples that agree on every feature outside `split_features` but carry at
/// least two classes.
struct EqpSet {
  std::vector<int> members;         // sorted
  std::vector<int> split_features;  // F*, sorted
  std::vector<int> classes;         // classes present, ascending
  std::vector<std::vector<int>> groups;  // members per entry of `classes`
  int majority = 0;                 // largest group size

  bool operator==(const EqpSet&) const = default;
};

enum class EqpLinking { basic, chain, chain_da, recursive, recursive_da };
enum class EqpBound { basic, group_selection };

struct EqpConfig {
  int max_split = 2;
  EqpLinking linking = EqpLinking::recursive_da;
  EqpBound bound = EqpBound::group_selection;
};

const char* to_string(EqpLinking v);
const char* to_string(EqpBound v);
EqpLinking parse_eqp_linking(const std::string& s);

/// All sets over split sets of size <= max_split, in order of (|F*|, F*
/// lexicographic, smallest member). Sets repeated under different split sets
/// are kept once per split set.
std::vector<EqpSet> generate_eqp_sets(const BinaryDataset& data, int max_split);

struct EqpConstraintGroup {
  int beta_g = -1;
  std::vector<int> beta_node;   // per node id, -1 when absent
  std::vector<int> beta_left;   // recursive variants only
  std::vector<int> beta_right;
  std::vector<int> group_vars;  // G_k per entry of EqpSet::classes
  int first_row = -1;
  int n_rows = 0;
};

EqpConstraintGroup emit_eqp_constraints(MasterModel& model, const EqpSet& set, const EqpConfig& config);

}  // namespace bendoct

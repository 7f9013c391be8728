#pragma once

#include <stdexcept>

#include "bendoct/dataset.hpp"
#include "bendoct/tree.hpp"

namespace bendoct {

struct OracleResult {
  int correct_count = 0;
  int leaf_count = 0;
  double objective = 0.0;
  DecisionTree tree;
};

struct OracleLimits {
  int max_depth = 4;
  int max_features = 16;
};

class OracleGuardError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exact optimum of accuracy - lambda * leaves over trees of depth <= `depth`
/// by memoised recursion over sample subsets, with the depth-2 subroutine as
/// the base case.
OracleResult exact_dp(const BinaryDataset& data, int depth, double lambda, OracleLimits limits = {});

}  // namespace bendoct

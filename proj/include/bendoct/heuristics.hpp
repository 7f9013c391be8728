#pragma once

#include <vector>

#include "bendoct/d2s.hpp"
#include "bendoct/dataset.hpp"
#include "bendoct/tree.hpp"

namespace bendoct {

/// Greedy Gini tree grown to `depth` (ties to the smallest feature, no split
/// without a strict impurity decrease), then pruned by weakest-link
/// cost-complexity on training error while the error added per removed leaf
/// is at most lambda.
DecisionTree cart_warmstart(const BinaryDataset& data, int depth, double lambda);

/// Every leaf predicts the majority class of the samples reaching it (smallest
/// index on ties); empty leaves keep their class.
DecisionTree relabel_majority(const DecisionTree& tree, const BinaryDataset& data);

/// Subtree roots for polishing: non-cut nodes of height <= 2 in `tree` whose
/// parent has height > 2, or the root.
std::vector<int> polish_roots(const DecisionTree& tree);

/// Samples reaching node `n` of `tree`, as path conditions.
PathKey path_to(const DecisionTree& tree, int n);

/// Replaces each polishing subtree by the optimal depth-2 subtree of its
/// samples when that strictly improves the penalised score, repeating until
/// nothing changes. `cache` must use lambda * |I|.
DecisionTree polish(const DecisionTree& tree, const BinaryDataset& data, double lambda, D2SCache& cache);

}  // namespace bendoct

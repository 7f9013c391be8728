#pragma once

#include <vector>

#include "bendoct/dataset.hpp"
#include "bendoct/master.hpp"
#include "bendoct/tree.hpp"

namespace bendoct {

/// theta_sample <= sum(rhs). Coefficients are 1, or 1/2 on the parent-branch
/// and sibling-prediction terms of a strengthened cut.
struct BendersCut {
  int sample = -1;
  int leaf = 0;
  bool strengthened = false;
  std::vector<CutTerm> rhs;

  /// Row form: theta - sum(rhs) <= 0.
  std::vector<CutTerm> row() const;
};

/// Cut for `sample` misclassified at `leaf`. With `strengthen` and a terminal
/// leaf the parent-branch terms are halved and paired with the sibling's
/// prediction of the sample's class.
BendersCut benders_cut(const TreeTopology& topology, const BinaryDataset& data, int sample,
                       int leaf, bool strengthen);

struct BendersTolerances {
  double eps_int = 1e-5;
  double eps_cut = 1e-6;
};

/// One cut per sample whose theta exceeds the cut's right-hand side at `sol`
/// by more than eps_cut, ordered by sample id. In benders-strong mode the
/// strengthened form replaces the plain one when the leaf is terminal and the
/// sibling does not predict the sample's class.
std::vector<BendersCut> separate_benders(const MpSolution& sol, const BinaryDataset& data,
                                         CutMode mode, const BendersTolerances& tol = {});

/// Minimum cut of the sample's flow network at a possibly fractional point:
/// every node pays its prediction edge plus, per child, the cheaper of the
/// branch edge into the child and the child's own cut. At an integral point
/// it coincides with the plain routed cut. `leaf` is 0.
BendersCut min_cut(const MpSolution& sol, const BinaryDataset& data, int sample);

/// min_cut for every sample whose theta exceeds it by more than eps_cut.
std::vector<BendersCut> separate_benders_fractional(const MpSolution& sol, const BinaryDataset& data,
                                                    double eps_cut = 1e-6);

}  // namespace bendoct

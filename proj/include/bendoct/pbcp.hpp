#pragma once

#include <string>
#include <vector>

#include "bendoct/d2s.hpp"
#include "bendoct/master.hpp"

namespace bendoct {

struct PathElement {
  int node;
  int feature;
  int dir;  // 0 left, 1 right

  bool operator==(const PathElement&) const = default;
};

/// A root-descending path whose branch variables are all integral; it ends
/// at `n_sub`, the child of the last element in its direction.
struct Path {
  std::vector<PathElement> elements;
  int n_sub = 1;

  PathKey key() const;
  bool operator==(const Path&) const = default;
};

/// Depth-first walk from the root through nodes of full height > 2 whose b is
/// integral on some feature. Every prefix is reported, each branching node
/// contributing its left and right extension.
std::vector<Path> find_integral_paths(const MpSolution& sol, const TreeTopology& topology,
                                      double eps_int = 1e-5);

struct PbcpConfig {
  bool enabled = true;
  bool negative_samples = true;  // replaces the basic bound
  bool tree_structure = true;    // added alongside the bound

  static PbcpConfig parse(const std::string& s);  // off|basic|bns|bst|bns-bst
  std::string name() const;
};

enum class PbcpCutKind { basic, negative_samples, tree_structure };
const char* to_string(PbcpCutKind kind);

/// lhs(terms) <= ub.
struct PbcpCut {
  PbcpCutKind kind;
  Path path;
  std::vector<CutTerm> terms;
  double ub = 0.0;
};

struct PbcpStats {
  long paths = 0;
  long triggered = 0;
};

/// Expression that is zero exactly when the path's branch rules hold, no node
/// on it predicts, and no node more than two levels below n_sub is a leaf.
std::vector<CutTerm> relax_terms(const Path& path, const TreeTopology& topology, int n_features);

/// Cuts for every path where the relaxation scores the subtree's samples
/// better than the optimal depth-2 subtree, at the lambda * |I| scale.
std::vector<PbcpCut> separate_pbcp(const MpSolution& sol, const BinaryDataset& data,
                                   const PbcpConfig& config, D2SCache& cache,
                                   double eps_int = 1e-5, PbcpStats* stats = nullptr);

/// Cuts for one path from its D2S solution, without the trigger test.
std::vector<PbcpCut> path_cuts(const Path& path, const SubtreeSolution& sub, const BinaryDataset& data,
                               const TreeTopology& topology, const PbcpConfig& config,
                               const std::vector<int>& path_samples);

}  // namespace bendoct

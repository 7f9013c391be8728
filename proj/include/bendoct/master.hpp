#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "bendoct/backend.hpp"
#include "bendoct/dataset.hpp"
#include "bendoct/tree.hpp"

namespace bendoct {

enum class CutMode { benders, benders_strong };
enum class RowOrigin { structural, benders, eqp, pbcp };
inline constexpr int kRowOrigins = 4;

const char* to_string(CutMode mode);
const char* to_string(RowOrigin origin);

enum class VarKind { b, p, w, theta };

/// A master variable named by role rather than column index.
/// `index` is the feature for b, the class for w and the sample for theta.
struct CutTerm {
  VarKind kind;
  int node;
  int index;
  double coef;

  static CutTerm b(int n, int f, double c = 1.0) { return {VarKind::b, n, f, c}; }
  static CutTerm p(int n, double c = 1.0) { return {VarKind::p, n, 0, c}; }
  static CutTerm w(int n, int k, double c = 1.0) { return {VarKind::w, n, k, c}; }
  static CutTerm theta(int i, double c = 1.0) { return {VarKind::theta, 0, i, c}; }

  bool operator==(const CutTerm&) const = default;
};

/// Column layout of the core master variables: b over internal nodes, then p,
/// w over all nodes, then theta. Auxiliary columns follow.
class MasterLayout {
 public:
  MasterLayout() = default;
  MasterLayout(int depth, int n_features, int n_classes, int n_samples);

  int depth() const { return depth_; }
  int n_nodes() const { return n_nodes_; }
  int n_internal() const { return n_internal_; }
  int n_features() const { return n_features_; }
  int n_classes() const { return n_classes_; }
  int n_samples() const { return n_samples_; }
  int n_core() const { return theta_offset_ + n_samples_; }

  int b(int n, int f) const { return (n - 1) * n_features_ + f; }
  int p(int n) const { return p_offset_ + n - 1; }
  int w(int n, int k) const { return w_offset_ + (n - 1) * n_classes_ + k; }
  int theta(int i) const { return theta_offset_ + i; }
  int column(const CutTerm& t) const;

 private:
  int depth_ = 0, n_nodes_ = 0, n_internal_ = 0;
  int n_features_ = 0, n_classes_ = 0, n_samples_ = 0;
  int p_offset_ = 0, w_offset_ = 0, theta_offset_ = 0;
};

/// Snapshot of master values, integral or fractional.
struct MpSolution {
  MasterLayout layout;
  std::vector<double> values;
  double objective = 0.0;
  double bound = kInf;

  double b(int n, int f) const { return values[layout.b(n, f)]; }
  double p(int n) const { return values[layout.p(n)]; }
  double w(int n, int k) const { return values[layout.w(n, k)]; }
  double theta(int i) const { return values[layout.theta(i)]; }
  double value(const CutTerm& t) const { return t.coef * values[layout.column(t)]; }
  double value(std::span<const CutTerm> terms) const;

  /// b and p within eps of 0/1 (w may be fractional).
  bool structurally_integral(double eps) const;
  bool integral(double eps) const;
};

struct RowCounts {
  std::array<int, kRowOrigins> rows{};
  int operator[](RowOrigin o) const { return rows[static_cast<int>(o)]; }
};

/// The master problem: maximise (1/|I|) sum theta - lambda sum p subject to the
/// structural tree constraints, plus whatever rows the cut families add.
class MasterModel {
 public:
  MasterModel(const TreeTopology& topology, const BinaryDataset& data, double lambda, CutMode mode,
              IpBackend& backend);

  const MasterLayout& layout() const { return layout_; }
  const TreeTopology& topology() const { return topology_; }
  const BinaryDataset& data() const { return *data_; }
  double lambda() const { return lambda_; }
  CutMode mode() const { return mode_; }
  IpBackend& backend() { return *backend_; }

  int add_variable(double lb, double ub, double objective, VarType type);
  int add_row(std::span<const Term> terms, double lb, double ub, RowOrigin origin);
  int add_cut(std::span<const CutTerm> terms, double lb, double ub, RowOrigin origin);
  const RowCounts& row_counts() const { return counts_; }
  int n_variables() const { return backend_->n_variables(); }

  /// Core-variable assignment of a tree with theta set from `correct`;
  /// auxiliary columns are left unset.
  std::vector<double> assignment(const DecisionTree& tree, std::span<const std::uint8_t> correct) const;
  MpSolution snapshot(std::vector<double> values, double objective, double bound) const;

 private:
  TreeTopology topology_;
  const BinaryDataset* data_;
  double lambda_;
  CutMode mode_;
  IpBackend* backend_;
  MasterLayout layout_;
  RowCounts counts_;
};

/// Node n branches on f when b_nf rounds to 1, is a leaf when p_n does (class
/// with the largest w, smallest index on ties), and is cut otherwise.
/// Throws when b or p is further than eps from integral.
DecisionTree extract_tree(const MpSolution& sol, double eps = 1e-5);

}  // namespace bendoct

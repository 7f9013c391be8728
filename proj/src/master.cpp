#include "bendoct/master.hpp"

#include <cmath>

namespace bendoct {

const char* to_string(CutMode mode) {
  return mode == CutMode::benders ? "benders" : "benders-strong";
}

const char* to_string(RowOrigin origin) {
  switch (origin) {
    case RowOrigin::structural:
      return "structural";
    case RowOrigin::benders:
      return "benders";
    case RowOrigin::eqp:
      return "eqp";
    case RowOrigin::pbcp:
      return "pbcp";
  }
  return "?";
}

MasterLayout::MasterLayout(int depth, int n_features, int n_classes, int n_samples)
    : depth_(depth),
      n_nodes_((2 << depth) - 1),
      n_internal_((1 << depth) - 1),
      n_features_(n_features),
      n_classes_(n_classes),
      n_samples_(n_samples) {
  p_offset_ = n_internal_ * n_features_;
  w_offset_ = p_offset_ + n_nodes_;
  theta_offset_ = w_offset_ + n_nodes_ * n_classes_;
}

int MasterLayout::column(const CutTerm& t) const {
  switch (t.kind) {
    case VarKind::b:
      if (t.node < 1 || t.node > n_internal_ || t.index < 0 || t.index >= n_features_) break;
      return b(t.node, t.index);
    case VarKind::p:
      if (t.node < 1 || t.node > n_nodes_) break;
      return p(t.node);
    case VarKind::w:
      if (t.node < 1 || t.node > n_nodes_ || t.index < 0 || t.index >= n_classes_) break;
      return w(t.node, t.index);
    case VarKind::theta:
      if (t.index < 0 || t.index >= n_samples_) break;
      return theta(t.index);
  }
  throw std::out_of_range("cut term references a variable outside the master layout");
}

double MpSolution::value(std::span<const CutTerm> terms) const {
  double v = 0.0;
  for (const auto& t : terms) v += value(t);
  return v;
}

bool MpSolution::structurally_integral(double eps) const {
  const auto near_int = [&](double v) { return std::abs(v - std::round(v)) <= eps; };
  for (int n = 1; n <= layout.n_internal(); ++n) {
    for (int f = 0; f < layout.n_features(); ++f) {
      if (!near_int(b(n, f))) return false;
    }
  }
  for (int n = 1; n <= layout.n_nodes(); ++n) {
    if (!near_int(p(n))) return false;
  }
  return true;
}

bool MpSolution::integral(double eps) const {
  if (!structurally_integral(eps)) return false;
  for (int n = 1; n <= layout.n_nodes(); ++n) {
    for (int k = 0; k < layout.n_classes(); ++k) {
      if (std::abs(w(n, k) - std::round(w(n, k))) > eps) return false;
    }
  }
  return true;
}

MasterModel::MasterModel(const TreeTopology& topology, const BinaryDataset& data, double lambda,
                         CutMode mode, IpBackend& backend)
    : topology_(topology),
      data_(&data),
      lambda_(lambda),
      mode_(mode),
      backend_(&backend),
      layout_(topology.depth(), data.n_features(), data.n_classes(), data.n_samples()) {
  if (lambda < 0) throw std::invalid_argument("lambda must be nonnegative");
  if (backend.n_variables() != 0) throw BackendError("master needs an empty backend");
  const int N = layout_.n_nodes(), F = layout_.n_features(), K = layout_.n_classes();
  const int I = layout_.n_samples();

  try {
    for (int n = 1; n <= layout_.n_internal(); ++n) {
      for (int f = 0; f < F; ++f) backend.add_variable(0, 1, 0, VarType::binary);
    }
    for (int n = 1; n <= N; ++n) backend.add_variable(0, 1, -lambda, VarType::binary);
    const VarType wtype = mode == CutMode::benders ? VarType::continuous : VarType::binary;
    for (int n = 1; n <= N; ++n) {
      for (int k = 0; k < K; ++k) backend.add_variable(0, 1, 0, wtype);
    }
    for (int i = 0; i < I; ++i) backend.add_variable(0, 1, 1.0 / I, VarType::continuous);

    std::vector<CutTerm> row;
    for (int n = 1; n <= N; ++n) {
      row.clear();
      if (topology_.is_internal(n)) {
        for (int f = 0; f < F; ++f) row.push_back(CutTerm::b(n, f));
      }
      row.push_back(CutTerm::p(n));
      for (int a : topology_.ancestors(n)) row.push_back(CutTerm::p(a));
      add_cut(row, 1, 1, RowOrigin::structural);
    }
    for (int n = 1; n <= N; ++n) {
      row.clear();
      for (int k = 0; k < K; ++k) row.push_back(CutTerm::w(n, k));
      row.push_back(CutTerm::p(n, -1.0));
      add_cut(row, 0, 0, RowOrigin::structural);
    }
  } catch (const BackendError& e) {
    throw BackendError(std::string("building master: ") + e.what());
  }
}

int MasterModel::add_variable(double lb, double ub, double objective, VarType type) {
  return backend_->add_variable(lb, ub, objective, type);
}

int MasterModel::add_row(std::span<const Term> terms, double lb, double ub, RowOrigin origin) {
  const int r = backend_->add_row(terms, lb, ub);
  ++counts_.rows[static_cast<int>(origin)];
  return r;
}

int MasterModel::add_cut(std::span<const CutTerm> terms, double lb, double ub, RowOrigin origin) {
  std::vector<Term> row;
  row.reserve(terms.size());
  for (const auto& t : terms) row.push_back({layout_.column(t), t.coef});
  return add_row(row, lb, ub, origin);
}

std::vector<double> MasterModel::assignment(const DecisionTree& tree,
                                            std::span<const std::uint8_t> correct) const {
  if (tree.depth() != topology_.depth()) throw TreeError("tree depth does not match master");
  check_compatible(tree, *data_);
  std::vector<double> v(backend_->n_variables(), kUnset);
  for (int c = 0; c < layout_.n_core(); ++c) v[c] = 0.0;
  for (int n = 1; n <= layout_.n_nodes(); ++n) {
    const auto& a = tree.node(n);
    if (a.is_branch()) v[layout_.b(n, a.value)] = 1.0;
    if (a.is_leaf()) {
      v[layout_.p(n)] = 1.0;
      v[layout_.w(n, a.value)] = 1.0;
    }
  }
  for (int i = 0; i < layout_.n_samples(); ++i) v[layout_.theta(i)] = correct[i] ? 1.0 : 0.0;
  return v;
}

MpSolution MasterModel::snapshot(std::vector<double> values, double objective, double bound) const {
  if (static_cast<int>(values.size()) < layout_.n_core()) {
    throw BackendError("solution vector shorter than the master layout");
  }
  return MpSolution{layout_, std::move(values), objective, bound};
}

DecisionTree extract_tree(const MpSolution& sol, double eps) {
  const auto& L = sol.layout;
  const auto as_bit = [&](double v, const char* what, int n) {
    if (std::abs(v - std::round(v)) > eps) {
      throw TreeError(std::string("non-integral ") + what + " at node " + std::to_string(n));
    }
    return std::round(v) >= 1.0;
  };
  std::vector<NodeAssignment> nodes(static_cast<std::size_t>(L.n_nodes()) + 1);
  for (int n = 1; n <= L.n_nodes(); ++n) {
    int branch = -1;
    if (n <= L.n_internal()) {
      for (int f = 0; f < L.n_features(); ++f) {
        if (as_bit(sol.b(n, f), "b", n)) {
          if (branch >= 0) throw TreeError("node " + std::to_string(n) + " branches twice");
          branch = f;
        }
      }
    }
    const bool leaf = as_bit(sol.p(n), "p", n);
    if (branch >= 0 && leaf) throw TreeError("node " + std::to_string(n) + " is branch and leaf");
    if (branch >= 0) {
      nodes[n] = NodeAssignment::branch(branch);
    } else if (leaf) {
      int best = 0;
      for (int k = 1; k < L.n_classes(); ++k) {
        if (sol.w(n, k) > sol.w(n, best) + eps) best = k;
      }
      nodes[n] = NodeAssignment::leaf(best);
    }
  }
  return DecisionTree(L.depth(), std::move(nodes));
}

}  // namespace bendoct

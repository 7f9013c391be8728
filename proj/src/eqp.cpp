#include "bendoct/eqp.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace bendoct {

const char* to_string(EqpLinking v) {
  switch (v) {
    case EqpLinking::basic:
      return "basic";
    case EqpLinking::chain:
      return "chain";
    case EqpLinking::chain_da:
      return "chain-da";
    case EqpLinking::recursive:
      return "recursive";
    case EqpLinking::recursive_da:
      return "recursive-da";
  }
  return "?";
}

const char* to_string(EqpBound v) { return v == EqpBound::basic ? "basic" : "group-selection"; }

EqpLinking parse_eqp_linking(const std::string& s) {
  for (auto v : {EqpLinking::basic, EqpLinking::chain, EqpLinking::chain_da, EqpLinking::recursive,
                 EqpLinking::recursive_da}) {
    if (s == to_string(v)) return v;
  }
  throw std::invalid_argument("unknown EQP variant '" + s + "'");
}

namespace {

void split_sets(int n_features, std::vector<int>& current, int next,
                std::vector<std::vector<int>>& out, int target) {
  if (static_cast<int>(current.size()) == target) {
    out.push_back(current);
    return;
  }
  for (int f = next; f < n_features; ++f) {
    current.push_back(f);
    split_sets(n_features, current, f + 1, out, target);
    current.pop_back();
  }
}

}  // namespace

std::vector<EqpSet> generate_eqp_sets(const BinaryDataset& data, int max_split) {
  if (max_split < 0) throw std::invalid_argument("max_split must be nonnegative");
  const int F = data.n_features();
  std::vector<std::vector<int>> split_list;
  std::vector<int> current;
  for (int size = 0; size <= std::min(max_split, F); ++size) {
    split_sets(F, current, 0, split_list, size);
  }

  std::vector<EqpSet> out;
  std::string key(F, '0');
  for (const auto& split : split_list) {
    std::unordered_map<std::string, std::vector<int>> groups;
    std::vector<std::string> order;
    for (int i = 0; i < data.n_samples(); ++i) {
      const auto row = data.row(i);
      for (int f = 0; f < F; ++f) key[f] = row[f] ? '1' : '0';
      for (int f : split) key[f] = '*';
      auto [it, inserted] = groups.try_emplace(key);
      if (inserted) order.push_back(key);
      it->second.push_back(i);
    }
    // `order` follows first appearance, i.e. smallest member id.
    for (const auto& k : order) {
      const auto& members = groups[k];
      if (members.size() < 2) continue;
      std::vector<std::vector<int>> by_class(data.n_classes());
      for (int i : members) by_class[data.y(i)].push_back(i);
      EqpSet set;
      set.members = members;
      set.split_features = split;
      for (int c = 0; c < data.n_classes(); ++c) {
        if (by_class[c].empty()) continue;
        set.classes.push_back(c);
        set.majority = std::max(set.majority, static_cast<int>(by_class[c].size()));
        set.groups.push_back(std::move(by_class[c]));
      }
      if (set.classes.size() >= 2) out.push_back(std::move(set));
    }
  }
  return out;
}

EqpConstraintGroup emit_eqp_constraints(MasterModel& model, const EqpSet& set, const EqpConfig& config) {
  if (set.members.size() < 2 || set.classes.size() < 2) throw std::invalid_argument("not an EQP set");
  const auto& topo = model.topology();
  const auto& data = model.data();
  const int F = data.n_features();
  const int N = topo.n_nodes();
  const auto x = data.row(set.members.front());
  std::vector<bool> in_split(F, false);
  for (int f : set.split_features) in_split[f] = true;

  EqpConstraintGroup g;
  g.beta_node.assign(N + 1, -1);
  g.beta_left.assign(N + 1, -1);
  g.beta_right.assign(N + 1, -1);
  g.first_row = model.backend().n_rows();

  std::vector<Term> row;
  const auto add = [&](double lb, double ub) {
    model.add_row(row, lb, ub, RowOrigin::eqp);
    row.clear();
  };
  const auto split_terms = [&](int n, double coef) {
    for (int f : set.split_features) row.push_back({model.layout().b(n, f), coef});
  };
  // Branch rules at n that keep the set together and send it in direction `dir`.
  const auto stay_terms = [&](int n, int dir, double coef) {
    for (int f = 0; f < F; ++f) {
      if (!in_split[f] && x[f] == dir) row.push_back({model.layout().b(n, f), coef});
    }
  };

  g.beta_g = model.add_variable(0, 1, 0, VarType::continuous);

  switch (config.linking) {
    case EqpLinking::basic:
      row.push_back({g.beta_g, 1});
      for (int n = 1; n <= topo.n_internal(); ++n) split_terms(n, -1);
      add(-kInf, 0);
      break;

    case EqpLinking::chain:
    case EqpLinking::chain_da: {
      const bool da = config.linking == EqpLinking::chain_da;
      for (int n = 1; n <= topo.n_internal(); ++n) {
        g.beta_node[n] = model.add_variable(0, 1, 0, da ? VarType::continuous : VarType::binary);
      }
      for (int n = 1; n <= topo.n_internal(); ++n) {
        const int bn = g.beta_node[n];
        const auto left = topo.ancestors_left(n);
        const auto right = topo.ancestors_right(n);
        if (!da) {
          row.push_back({bn, static_cast<double>(left.size() + right.size() + 1)});
          split_terms(n, -1);
          for (int a : left) stay_terms(a, 0, -1);
          for (int a : right) stay_terms(a, 1, -1);
          add(-kInf, 0);
          continue;
        }
        row.push_back({bn, 1});
        split_terms(n, -1);
        add(-kInf, 0);
        for (int a : left) {
          row.push_back({bn, 1});
          stay_terms(a, 0, -1);
          add(-kInf, 0);
        }
        for (int a : right) {
          row.push_back({bn, 1});
          stay_terms(a, 1, -1);
          add(-kInf, 0);
        }
      }
      row.push_back({g.beta_g, 1});
      for (int n = 1; n <= topo.n_internal(); ++n) row.push_back({g.beta_node[n], -1});
      add(-kInf, 0);
      break;
    }

    case EqpLinking::recursive:
    case EqpLinking::recursive_da: {
      const bool da = config.linking == EqpLinking::recursive_da;
      const VarType side_type = da ? VarType::continuous : VarType::binary;
      for (int n = 1; n <= topo.n_internal(); ++n) {
        g.beta_node[n] = model.add_variable(0, 1, 0, VarType::continuous);
      }
      for (int n = 1; n <= topo.n_internal(); ++n) {
        if (!topo.is_internal(TreeTopology::left(n))) continue;  // children are terminal
        g.beta_left[n] = model.add_variable(0, 1, 0, side_type);
        g.beta_right[n] = model.add_variable(0, 1, 0, side_type);
      }
      for (int n = 1; n <= topo.n_internal(); ++n) {
        row.push_back({g.beta_node[n], 1});
        split_terms(n, -1);
        if (g.beta_left[n] >= 0) {
          row.push_back({g.beta_left[n], -1});
          row.push_back({g.beta_right[n], -1});
        }
        add(-kInf, 0);
        if (g.beta_left[n] < 0) continue;
        for (int dir = 0; dir <= 1; ++dir) {
          const int side = dir == 0 ? g.beta_left[n] : g.beta_right[n];
          const int child = g.beta_node[dir == 0 ? TreeTopology::left(n) : TreeTopology::right(n)];
          if (da) {
            row.push_back({side, 1});
            stay_terms(n, dir, -1);
            add(-kInf, 0);
            row.push_back({side, 1});
            row.push_back({child, -1});
            add(-kInf, 0);
          } else {
            row.push_back({side, 2});
            stay_terms(n, dir, -1);
            row.push_back({child, -1});
            add(-kInf, 0);
          }
        }
      }
      row.push_back({g.beta_g, 1});
      row.push_back({g.beta_node[1], -1});
      add(-kInf, 0);
      break;
    }
  }

  const auto theta = [&](int i) { return model.layout().theta(i); };
  const int J = static_cast<int>(set.members.size());
  if (config.bound == EqpBound::basic) {
    for (int i : set.members) row.push_back({theta(i), 1});
    row.push_back({g.beta_g, -static_cast<double>(J - set.majority)});
    add(-kInf, set.majority);
  } else {
    const int K = static_cast<int>(set.classes.size());
    for (int c = 0; c < K; ++c) g.group_vars.push_back(model.add_variable(0, 1, 0, VarType::continuous));
    for (int v : g.group_vars) row.push_back({v, 1});
    row.push_back({g.beta_g, -static_cast<double>(K - 1)});
    add(-kInf, 1);
    for (int c = 0; c < K; ++c) {
      for (int i : set.groups[c]) row.push_back({theta(i), 1});
      row.push_back({g.group_vars[c], -static_cast<double>(set.groups[c].size())});
      add(0, 0);
    }
  }
  g.n_rows = model.backend().n_rows() - g.first_row;
  return g;
}

}  // namespace bendoct

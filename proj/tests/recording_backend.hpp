#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "bendoct/backend.hpp"

namespace testing_support {

// Stores the model instead of solving it, so tests can inspect rows.
class RecordingBackend : public bendoct::IpBackend {
 public:
  struct Column {
    double lb, ub, obj;
    bendoct::VarType type;
  };
  struct Row {
    std::map<int, double> coefs;
    double lb, ub;
  };

  int add_variable(double lb, double ub, double objective, bendoct::VarType type) override {
    cols.push_back({lb, ub, objective, type});
    return static_cast<int>(cols.size()) - 1;
  }
  int add_row(std::span<const bendoct::Term> terms, double lb, double ub) override {
    Row r{{}, lb, ub};
    for (const auto& t : terms) r.coefs[t.var] += t.coef;
    rows.push_back(std::move(r));
    return static_cast<int>(rows.size()) - 1;
  }
  int n_variables() const override { return static_cast<int>(cols.size()); }
  int n_rows() const override { return static_cast<int>(rows.size()); }
  void set_warm_start(std::vector<double> values) override { warm = std::move(values); }
  bendoct::BackendSolution solve(const bendoct::SolveOptions&) override {
    throw std::logic_error("recording backend cannot solve");
  }
  std::string name() const override { return "recording"; }
  void write_model(const std::filesystem::path&) const override {}

  // Largest violation of any row at `x`.
  double max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (const auto& r : rows) {
      double v = 0.0;
      for (const auto& [c, a] : r.coefs) v += a * x[c];
      worst = std::max({worst, r.lb - v, v - r.ub});
    }
    for (std::size_t c = 0; c < cols.size(); ++c) {
      worst = std::max({worst, cols[c].lb - x[c], x[c] - cols[c].ub});
    }
    return worst;
  }

  std::vector<Column> cols;
  std::vector<Row> rows;
  std::vector<double> warm;
};

}  // namespace testing_support

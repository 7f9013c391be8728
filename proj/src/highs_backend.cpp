#include <algorithm>
#include <cmath>

#include "Highs.h"
#include "bendoct/backend.hpp"

namespace bendoct {

namespace {

class HighsBackend final : public IpBackend {
 public:
  int add_variable(double lb, double ub, double objective, VarType type) override {
    col_lower_.push_back(lb);
    col_upper_.push_back(ub);
    col_cost_.push_back(objective);
    integrality_.push_back(type == VarType::binary ? HighsVarType::kInteger
                                                   : HighsVarType::kContinuous);
    return static_cast<int>(col_cost_.size()) - 1;
  }

  int add_row(std::span<const Term> terms, double lb, double ub) override {
    std::vector<Term> merged(terms.begin(), terms.end());
    std::sort(merged.begin(), merged.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
    for (std::size_t j = 0; j < merged.size();) {
      const int var = merged[j].var;
      if (var < 0 || var >= n_variables()) throw BackendError("row references unknown column");
      double coef = 0.0;
      for (; j < merged.size() && merged[j].var == var; ++j) coef += merged[j].coef;
      if (coef == 0.0) continue;
      row_index_.push_back(var);
      row_value_.push_back(coef);
    }
    row_start_.push_back(static_cast<HighsInt>(row_index_.size()));
    row_lower_.push_back(lb);
    row_upper_.push_back(ub);
    return n_rows() - 1;
  }

  int n_variables() const override { return static_cast<int>(col_cost_.size()); }
  int n_rows() const override { return static_cast<int>(row_lower_.size()); }

  void set_warm_start(std::vector<double> values) override {
    if (!values.empty() && static_cast<int>(values.size()) != n_variables()) {
      throw BackendError("warm start has wrong length");
    }
    warm_start_ = std::move(values);
  }

  BackendSolution solve(const SolveOptions& options) override {
    Highs highs;
    highs.setOptionValue("output_flag", false);
    highs.setOptionValue("threads", 1);
    highs.setOptionValue("random_seed", options.seed);
    highs.setOptionValue("mip_rel_gap", 0.0);
    highs.setOptionValue("mip_abs_gap", options.abs_gap);
    if (std::isfinite(options.time_limit)) {
      highs.setOptionValue("time_limit", std::max(options.time_limit, 0.01));
    }
    if (highs.passModel(build_lp(options.relax_integrality)) == HighsStatus::kError) {
      throw BackendError("HiGHS rejected the model");
    }

    const bool mip = !options.relax_integrality && has_integers();
    if (mip && !warm_start_.empty()) {
      HighsSolution start;
      start.col_value = warm_start_;
      for (auto& v : start.col_value) {
        if (std::isnan(v)) v = kHighsUndefined;
      }
      highs.setSolution(start);
    }

    bool interrupt = false;
    if (mip && options.on_incumbent) {
      highs.setCallback(
          [&](int type, const std::string&, const HighsCallbackOutput* out, HighsCallbackInput* in,
              void*) {
            if (type == kCallbackMipImprovingSolution) {
              if (options.on_incumbent(out->mip_solution, out->objective_function_value)) {
                interrupt = true;
              }
            } else if (type == kCallbackMipInterrupt && interrupt) {
              in->user_interrupt = true;
            }
          },
          nullptr);
      highs.startCallback(kCallbackMipImprovingSolution);
      highs.startCallback(kCallbackMipInterrupt);
    }

    const HighsStatus run_status = highs.run();
    BackendSolution out;
    const auto model_status = highs.getModelStatus();
    const auto& info = highs.getInfo();
    switch (model_status) {
      case HighsModelStatus::kOptimal:
        out.status = SolveStatus::optimal;
        break;
      case HighsModelStatus::kTimeLimit:
        out.status = SolveStatus::time_limit;
        break;
      case HighsModelStatus::kInterrupt:
        out.status = SolveStatus::interrupted;
        break;
      case HighsModelStatus::kInfeasible:
        out.status = SolveStatus::infeasible;
        break;
      default:
        out.status = SolveStatus::error;
    }
    if (run_status == HighsStatus::kError && out.status == SolveStatus::optimal) {
      out.status = SolveStatus::error;
    }
    out.has_solution = info.primal_solution_status == kSolutionStatusFeasible;
    if (out.has_solution) {
      out.values = highs.getSolution().col_value;
      out.objective = info.objective_function_value;
    }
    if (mip) {
      out.bound = std::isfinite(info.mip_dual_bound) ? info.mip_dual_bound : kInf;
    } else if (out.status == SolveStatus::optimal) {
      out.bound = out.objective;
    }
    return out;
  }

  std::string name() const override { return "highs"; }

  void write_model(const std::filesystem::path& path) const override {
    Highs highs;
    highs.setOptionValue("output_flag", false);
    highs.passModel(build_lp(false));
    if (highs.writeModel(path.string()) == HighsStatus::kError) {
      throw BackendError("cannot write model to '" + path.string() + "'");
    }
  }

 private:
  bool has_integers() const {
    for (auto t : integrality_) {
      if (t != HighsVarType::kContinuous) return true;
    }
    return false;
  }

  HighsLp build_lp(bool relax) const {
    HighsLp lp;
    lp.num_col_ = n_variables();
    lp.num_row_ = n_rows();
    lp.col_cost_ = col_cost_;
    lp.col_lower_ = col_lower_;
    lp.col_upper_ = col_upper_;
    lp.row_lower_ = row_lower_;
    lp.row_upper_ = row_upper_;
    for (auto& v : lp.col_lower_) v = std::isinf(v) ? -kHighsInf : v;
    for (auto& v : lp.col_upper_) v = std::isinf(v) ? kHighsInf : v;
    for (auto& v : lp.row_lower_) v = std::isinf(v) ? -kHighsInf : v;
    for (auto& v : lp.row_upper_) v = std::isinf(v) ? kHighsInf : v;
    lp.sense_ = ObjSense::kMaximize;
    lp.a_matrix_.format_ = MatrixFormat::kRowwise;
    lp.a_matrix_.num_col_ = lp.num_col_;
    lp.a_matrix_.num_row_ = lp.num_row_;
    lp.a_matrix_.start_ = row_start_;
    lp.a_matrix_.index_ = row_index_;
    lp.a_matrix_.value_ = row_value_;
    if (!relax && has_integers()) lp.integrality_ = integrality_;
    return lp;
  }

  std::vector<double> col_lower_, col_upper_, col_cost_;
  std::vector<HighsVarType> integrality_;
  std::vector<double> row_lower_, row_upper_;
  std::vector<HighsInt> row_start_{0};
  std::vector<HighsInt> row_index_;
  std::vector<double> row_value_;
  std::vector<double> warm_start_;
};

}  // namespace

std::unique_ptr<IpBackend> make_highs_backend() { return std::make_unique<HighsBackend>(); }

}  // namespace bendoct

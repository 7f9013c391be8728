#pragma once

#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bendoct {

class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();
/// Warm-start entry left for the backend to complete.
inline constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

enum class VarType { continuous, binary };

struct Term {
  int var;
  double coef;
};

enum class SolveStatus { optimal, time_limit, interrupted, infeasible, error };

struct BackendSolution {
  SolveStatus status = SolveStatus::error;
  bool has_solution = false;
  std::vector<double> values;
  double objective = 0.0;
  double bound = kInf;  // best bound for a maximisation problem
};

struct SolveOptions {
  double time_limit = kInf;
  bool relax_integrality = false;
  int seed = 0;
  double abs_gap = 1e-9;
  /// Called with each improved MIP incumbent. Returning true interrupts the solve.
  std::function<bool(std::span<const double> values, double objective)> on_incumbent;
};

/// Maximisation model with incremental columns and rows.
class IpBackend {
 public:
  virtual ~IpBackend() = default;

  virtual int add_variable(double lb, double ub, double objective, VarType type) = 0;
  virtual int add_row(std::span<const Term> terms, double lb, double ub) = 0;
  virtual int n_variables() const = 0;
  virtual int n_rows() const = 0;

  /// Full-length assignment; entries equal to kUnset (NaN) are completed by the backend.
  virtual void set_warm_start(std::vector<double> values) = 0;
  virtual BackendSolution solve(const SolveOptions& options) = 0;

  virtual bool supports_lazy_constraints() const { return false; }
  virtual std::string name() const = 0;
  virtual void write_model(const std::filesystem::path& path) const = 0;
};

std::unique_ptr<IpBackend> make_highs_backend();

}  // namespace bendoct

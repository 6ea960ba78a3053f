// Dense two-phase simplex for small linear programs.
//
//   minimize    c^T x
//   subject to  A x <= b,  E x = f,  lower <= x <= upper   (bounds may be infinite)
#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "relucert/numerics.hpp"

namespace relucert {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct LinearProgram {
  Vector objective;
  Matrix ineq_lhs;
  Vector ineq_rhs;
  Matrix eq_lhs;
  Vector eq_rhs;
  Vector lower;
  Vector upper;

  Eigen::Index num_vars() const { return objective.size(); }
  /// Throws DimensionError / Error on inconsistent shapes or non-finite coefficients.
  void validate() const;
};

/// Row-by-row assembly of a LinearProgram; variables default to free.
class LpBuilder {
 public:
  using Terms = std::vector<std::pair<Eigen::Index, double>>;

  explicit LpBuilder(Eigen::Index num_vars);

  Eigen::Index num_vars() const { return lower_.size(); }
  /// Appends `count` free variables and returns the index of the first.
  Eigen::Index add_variables(Eigen::Index count);

  void set_bounds(Eigen::Index var, double lower, double upper);
  void set_objective(Eigen::Index var, double coef) { objective_(var) = coef; }
  /// sum(coef * x[var]) <= rhs
  void add_le(Terms terms, double rhs);
  /// sum(coef * x[var]) >= rhs
  void add_ge(Terms terms, double rhs);
  /// sum(coef * x[var]) == rhs
  void add_eq(Terms terms, double rhs);

  LinearProgram build() const;

 private:
  struct Row {
    Terms terms;
    double rhs;
  };
  Vector objective_;
  Vector lower_;
  Vector upper_;
  std::vector<Row> le_rows_;
  std::vector<Row> eq_rows_;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

/// Result of a solve. For Optimal outcomes the multipliers certify
///   c = -A^T ineq_dual + E^T eq_dual + lower_dual - upper_dual,
/// with ineq_dual, lower_dual, upper_dual >= 0.
struct LpOutcome {
  LpStatus status = LpStatus::Infeasible;
  double value = 0.0;
  Vector x;
  Vector ineq_dual;
  Vector eq_dual;
  Vector lower_dual;
  Vector upper_dual;
  int pivots = 0;

  bool optimal() const { return status == LpStatus::Optimal; }
};

/// Raised when the simplex exceeds its pivot budget or loses numerical footing.
class SolverError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kPivotTol = 1e-9;
inline constexpr double kFeasibilityTol = 1e-7;

/// Deterministic for a fixed input.
LpOutcome solve_lp(const LinearProgram& lp);

/// Lagrangian dual value of the multipliers in `out`.
double dual_objective(const LinearProgram& lp, const LpOutcome& out);

/// Largest constraint violation of `x` (inequalities, equalities, bounds).
double max_violation(const LinearProgram& lp, const Vector& x);

}  // namespace relucert

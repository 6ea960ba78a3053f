#include "relucert/lp.hpp"

#include <algorithm>
#include <cmath>

namespace relucert {

void LinearProgram::validate() const {
  const Eigen::Index n = objective.size();
  if (lower.size() != n || upper.size() != n) throw DimensionError("LP: bound vectors must match the objective");
  if (ineq_lhs.rows() != ineq_rhs.size() || (ineq_lhs.rows() > 0 && ineq_lhs.cols() != n))
    throw DimensionError("LP: inequality system has inconsistent shape");
  if (eq_lhs.rows() != eq_rhs.size() || (eq_lhs.rows() > 0 && eq_lhs.cols() != n))
    throw DimensionError("LP: equality system has inconsistent shape");
  if (!objective.allFinite() || !ineq_lhs.allFinite() || !ineq_rhs.allFinite() || !eq_lhs.allFinite() ||
      !eq_rhs.allFinite())
    throw Error("LP: coefficients must be finite");
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::isnan(lower(j)) || std::isnan(upper(j)) || lower(j) == kInf || upper(j) == -kInf)
      throw Error("LP: invalid variable bound");
  }
}

LpBuilder::LpBuilder(Eigen::Index num_vars)
    : objective_(Vector::Zero(num_vars)),
      lower_(Vector::Constant(num_vars, -kInf)),
      upper_(Vector::Constant(num_vars, kInf)) {}

Eigen::Index LpBuilder::add_variables(Eigen::Index count) {
  const Eigen::Index first = num_vars();
  objective_.conservativeResize(first + count);
  lower_.conservativeResize(first + count);
  upper_.conservativeResize(first + count);
  objective_.tail(count).setZero();
  lower_.tail(count).setConstant(-kInf);
  upper_.tail(count).setConstant(kInf);
  return first;
}

void LpBuilder::set_bounds(Eigen::Index var, double lower, double upper) {
  lower_(var) = lower;
  upper_(var) = upper;
}

void LpBuilder::add_le(Terms terms, double rhs) { le_rows_.push_back({std::move(terms), rhs}); }

void LpBuilder::add_ge(Terms terms, double rhs) {
  for (auto& t : terms) t.second = -t.second;
  le_rows_.push_back({std::move(terms), -rhs});
}

void LpBuilder::add_eq(Terms terms, double rhs) { eq_rows_.push_back({std::move(terms), rhs}); }

LinearProgram LpBuilder::build() const {
  const Eigen::Index n = num_vars();
  auto fill = [n](const std::vector<Row>& rows, Matrix& lhs, Vector& rhs) {
    lhs = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), n);
    rhs = Vector(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (const auto& [var, coef] : rows[r].terms) lhs(static_cast<Eigen::Index>(r), var) += coef;
      rhs(static_cast<Eigen::Index>(r)) = rows[r].rhs;
    }
  };
  LinearProgram lp;
  lp.objective = objective_;
  lp.lower = lower_;
  lp.upper = upper_;
  fill(le_rows_, lp.ineq_lhs, lp.ineq_rhs);
  fill(eq_rows_, lp.eq_lhs, lp.eq_rhs);
  return lp;
}

namespace {

constexpr double kOptimalityTol = 1e-9;
constexpr double kHarrisTol = 1e-9;
// Largest constraint violation accepted in a reported optimum, relative to the data scale.
constexpr double kSolutionTol = 1e-6;
constexpr int kDegenerateStreakForBland = 50;

enum class VarKind { Fixed, ShiftLower, ShiftUpper, Free };

struct VarMap {
  VarKind kind;
  double offset;
  Eigen::Index col;
  Eigen::Index col_neg;
};

// min cost^T y  s.t.  a y = rhs,  y >= 0,  rhs >= 0.
// Structural columns first, then slacks, then one artificial column per row that
// has no +1 slack; every row owns an identity column (its slack or artificial).
struct StandardForm {
  Matrix a;
  Vector rhs;
  Vector cost;
  double cost_offset = 0.0;
  std::vector<Eigen::Index> basis;
  Eigen::Index first_artificial = 0;
  std::vector<double> row_sign;
  std::vector<double> row_scale;  // each row was multiplied by this before the sign flip
  std::vector<VarMap> vars;
};

StandardForm to_standard_form(const LinearProgram& lp) {
  StandardForm sf;
  const Eigen::Index n = lp.num_vars();
  Eigen::Index ny = 0;
  std::vector<Eigen::Index> bounded;  // original vars with an upper-bound row
  for (Eigen::Index j = 0; j < n; ++j) {
    const double lo = lp.lower(j), hi = lp.upper(j);
    VarMap vm{VarKind::Free, 0.0, -1, -1};
    if (std::isfinite(lo) && std::isfinite(hi) && lo == hi) {
      vm = {VarKind::Fixed, lo, -1, -1};
    } else if (std::isfinite(lo)) {
      vm = {VarKind::ShiftLower, lo, ny++, -1};
      if (std::isfinite(hi)) bounded.push_back(j);
    } else if (std::isfinite(hi)) {
      vm = {VarKind::ShiftUpper, hi, ny++, -1};
    } else {
      vm = {VarKind::Free, 0.0, ny, ny + 1};
      ny += 2;
    }
    sf.vars.push_back(vm);
  }

  const Eigen::Index n_ineq = lp.ineq_lhs.rows();
  const Eigen::Index n_eq = lp.eq_lhs.rows();
  const Eigen::Index n_bound = static_cast<Eigen::Index>(bounded.size());
  const Eigen::Index m = n_ineq + n_eq + n_bound;
  const Eigen::Index n_slack = n_ineq + n_bound;

  Matrix rows = Matrix::Zero(m, ny + n_slack);
  Vector rhs(m);
  auto add_structural = [&](Eigen::Index r, Eigen::Index j, double coef, double& constant) {
    const VarMap& vm = sf.vars[static_cast<std::size_t>(j)];
    switch (vm.kind) {
      case VarKind::Fixed: constant += coef * vm.offset; break;
      case VarKind::ShiftLower:
        rows(r, vm.col) += coef;
        constant += coef * vm.offset;
        break;
      case VarKind::ShiftUpper:
        rows(r, vm.col) -= coef;
        constant += coef * vm.offset;
        break;
      case VarKind::Free:
        rows(r, vm.col) += coef;
        rows(r, vm.col_neg) -= coef;
        break;
    }
  };
  for (Eigen::Index i = 0; i < n_ineq; ++i) {
    double constant = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (lp.ineq_lhs(i, j) != 0.0) add_structural(i, j, lp.ineq_lhs(i, j), constant);
    rows(i, ny + i) = 1.0;
    rhs(i) = lp.ineq_rhs(i) - constant;
  }
  for (Eigen::Index i = 0; i < n_eq; ++i) {
    const Eigen::Index r = n_ineq + i;
    double constant = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (lp.eq_lhs(i, j) != 0.0) add_structural(r, j, lp.eq_lhs(i, j), constant);
    rhs(r) = lp.eq_rhs(i) - constant;
  }
  for (Eigen::Index k = 0; k < n_bound; ++k) {
    const Eigen::Index r = n_ineq + n_eq + k;
    const Eigen::Index j = bounded[static_cast<std::size_t>(k)];
    rows(r, sf.vars[static_cast<std::size_t>(j)].col) = 1.0;
    rows(r, ny + n_ineq + k) = 1.0;
    rhs(r) = lp.upper(j) - lp.lower(j);
  }

  // Equilibrate rows so pivots are compared on a common scale. The scale comes
  // from the original row, so round-off left on free columns after fixed
  // variables are substituted out is not amplified.
  sf.row_scale.assign(static_cast<std::size_t>(m), 1.0);
  for (Eigen::Index r = 0; r < n_ineq + n_eq; ++r) {
    const double big = r < n_ineq ? lp.ineq_lhs.row(r).cwiseAbs().maxCoeff()
                                   : lp.eq_lhs.row(r - n_ineq).cwiseAbs().maxCoeff();
    if (big == 0.0) continue;
    const double f = 1.0 / big;
    rows.row(r).head(ny) *= f;
    rhs(r) *= f;
    sf.row_scale[static_cast<std::size_t>(r)] = f;
  }

  sf.row_sign.assign(static_cast<std::size_t>(m), 1.0);
  std::vector<Eigen::Index> needs_artificial;
  sf.basis.assign(static_cast<std::size_t>(m), -1);
  for (Eigen::Index r = 0; r < m; ++r) {
    if (rhs(r) < 0.0) {
      rows.row(r) *= -1.0;
      rhs(r) = -rhs(r);
      sf.row_sign[static_cast<std::size_t>(r)] = -1.0;
    }
    const bool has_slack = r < n_ineq || r >= n_ineq + n_eq;
    const Eigen::Index slack = r < n_ineq ? ny + r : ny + r - n_eq;
    if (has_slack && rows(r, slack) > 0.0)
      sf.basis[static_cast<std::size_t>(r)] = slack;
    else
      needs_artificial.push_back(r);
  }

  const Eigen::Index n_art = static_cast<Eigen::Index>(needs_artificial.size());
  sf.first_artificial = ny + n_slack;
  sf.a = Matrix::Zero(m, ny + n_slack + n_art);
  sf.a.leftCols(ny + n_slack) = rows;
  for (Eigen::Index k = 0; k < n_art; ++k) {
    const Eigen::Index r = needs_artificial[static_cast<std::size_t>(k)];
    sf.a(r, sf.first_artificial + k) = 1.0;
    sf.basis[static_cast<std::size_t>(r)] = sf.first_artificial + k;
  }
  sf.rhs = std::move(rhs);

  sf.cost = Vector::Zero(sf.a.cols());
  for (Eigen::Index j = 0; j < n; ++j) {
    const VarMap& vm = sf.vars[static_cast<std::size_t>(j)];
    const double c = lp.objective(j);
    switch (vm.kind) {
      case VarKind::Fixed: sf.cost_offset += c * vm.offset; break;
      case VarKind::ShiftLower:
        sf.cost(vm.col) = c;
        sf.cost_offset += c * vm.offset;
        break;
      case VarKind::ShiftUpper:
        sf.cost(vm.col) = -c;
        sf.cost_offset += c * vm.offset;
        break;
      case VarKind::Free:
        sf.cost(vm.col) = c;
        sf.cost(vm.col_neg) = -c;
        break;
    }
  }
  return sf;
}

enum class SimplexResult { Optimal, Unbounded };

// Tableau layout: row 0 holds reduced costs and -objective in the last column;
// rows 1..m hold B^-1 [A | b].
class Tableau {
 public:
  Tableau(const StandardForm& sf, int max_pivots)
      : t_(sf.a.rows() + 1, sf.a.cols() + 1),
        basis_(sf.basis),
        m_(sf.a.rows()),
        n_(sf.a.cols()),
        max_pivots_(max_pivots) {
    t_.setZero();
    t_.block(1, 0, m_, n_) = sf.a;
    t_.block(1, n_, m_, 1) = sf.rhs;
  }

  void price(const Vector& cost) {
    t_.row(0).head(n_) = cost.transpose();
    t_(0, n_) = 0.0;
    for (Eigen::Index r = 0; r < m_; ++r) {
      const double cb = cost(basis_[static_cast<std::size_t>(r)]);
      if (cb != 0.0) t_.row(0) -= cb * t_.row(r + 1);
    }
  }

  SimplexResult run(Eigen::Index enter_limit) {
    for (;;) {
      const Eigen::Index e = choose_entering(enter_limit);
      if (e < 0) return SimplexResult::Optimal;
      const Eigen::Index r = choose_leaving(e);
      if (r < 0) return SimplexResult::Unbounded;
      const double step = std::max(t_(r + 1, n_), 0.0) / t_(r + 1, e);
      degenerate_streak_ = step <= 1e-12 ? degenerate_streak_ + 1 : 0;
      if (degenerate_streak_ > kDegenerateStreakForBland) bland_ = true;
      pivot(r, e);
    }
  }

  void pivot(Eigen::Index r, Eigen::Index e) {
    if (++pivots_ > max_pivots_) throw SolverError("simplex exceeded its pivot budget");
    t_.row(r + 1) /= t_(r + 1, e);
    Vector factors = t_.col(e);
    factors(r + 1) = 0.0;
    const Eigen::RowVectorXd pivot_row = t_.row(r + 1);
    t_.noalias() -= factors * pivot_row;
    basis_[static_cast<std::size_t>(r)] = e;
  }

  double objective() const { return -t_(0, n_); }
  double entry(Eigen::Index r, Eigen::Index c) const { return t_(r + 1, c); }
  double rhs(Eigen::Index r) const { return t_(r + 1, n_); }
  const std::vector<Eigen::Index>& basis() const { return basis_; }
  int pivots() const { return pivots_; }

 private:
  Eigen::Index choose_entering(Eigen::Index limit) const {
    Eigen::Index best = -1;
    double best_val = -kOptimalityTol;
    for (Eigen::Index j = 0; j < limit; ++j) {
      const double d = t_(0, j);
      if (d < best_val) {
        best = j;
        if (bland_) break;
        best_val = d;
      }
    }
    return best;
  }

  Eigen::Index choose_leaving(Eigen::Index e) const {
    if (bland_) {
      // Smallest ratio, ties to the smallest basic index.
      Eigen::Index best = -1;
      double best_ratio = kInf;
      for (Eigen::Index i = 0; i < m_; ++i) {
        const double a = t_(i + 1, e);
        if (a <= kPivotTol) continue;
        const double ratio = std::max(t_(i + 1, n_), 0.0) / a;
        if (best < 0 || ratio < best_ratio - 1e-12 ||
            (ratio <= best_ratio + 1e-12 &&
             basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(best)])) {
          best = i;
          best_ratio = std::min(best_ratio, ratio);
        }
      }
      return best;
    }
    // Harris two-pass test: bound the step with a small feasibility slack, then
    // take the largest pivot among the rows that block within that bound.
    double bound = kInf;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double a = t_(i + 1, e);
      if (a > kPivotTol) bound = std::min(bound, (std::max(t_(i + 1, n_), 0.0) + kHarrisTol) / a);
    }
    Eigen::Index best = -1;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double a = t_(i + 1, e);
      if (a <= kPivotTol || std::max(t_(i + 1, n_), 0.0) / a > bound) continue;
      if (best < 0 || a > t_(best + 1, e)) best = i;
    }
    return best;
  }

  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> t_;
  std::vector<Eigen::Index> basis_;
  Eigen::Index m_;
  Eigen::Index n_;
  int max_pivots_;
  int pivots_ = 0;
  int degenerate_streak_ = 0;
  bool bland_ = false;
};

}  // namespace

LpOutcome solve_lp(const LinearProgram& lp) {
  lp.validate();
  const Eigen::Index n = lp.num_vars();
  for (Eigen::Index j = 0; j < n; ++j)
    if (lp.lower(j) > lp.upper(j)) return LpOutcome{};

  const StandardForm sf = to_standard_form(lp);
  const Eigen::Index m = sf.a.rows();
  const Eigen::Index cols = sf.a.cols();
  const int max_pivots = static_cast<int>(50 * (cols + m));
  Tableau tab(sf, max_pivots);

  // Phase I: drive the artificial variables to zero.
  if (sf.first_artificial < cols) {
    Vector phase1 = Vector::Zero(cols);
    phase1.tail(cols - sf.first_artificial).setOnes();
    tab.price(phase1);
    tab.run(sf.first_artificial);
    const double scale = 1.0 + (m > 0 ? sf.rhs.lpNorm<Eigen::Infinity>() : 0.0);
    if (tab.objective() > kFeasibilityTol * scale) {
      LpOutcome out;
      out.status = LpStatus::Infeasible;
      out.pivots = tab.pivots();
      return out;
    }
    for (Eigen::Index r = 0; r < m; ++r) {
      if (tab.basis()[static_cast<std::size_t>(r)] < sf.first_artificial) continue;
      Eigen::Index best = -1;
      double best_abs = kPivotTol;
      for (Eigen::Index j = 0; j < sf.first_artificial; ++j) {
        if (std::abs(tab.entry(r, j)) > best_abs) {
          best = j;
          best_abs = std::abs(tab.entry(r, j));
        }
      }
      // A row with no admissible pivot is redundant; its artificial stays basic at zero.
      if (best >= 0) tab.pivot(r, best);
    }
  }

  tab.price(sf.cost);
  if (tab.run(sf.first_artificial) == SimplexResult::Unbounded) {
    LpOutcome out;
    out.status = LpStatus::Unbounded;
    out.pivots = tab.pivots();
    return out;
  }

  // Re-solve the final basis against the original data to shed tableau drift.
  Vector y = Vector::Zero(cols);
  Vector row_dual = Vector::Zero(m);
  if (m > 0) {
    Matrix basis_cols(m, m);
    Vector basis_cost(m);
    for (Eigen::Index r = 0; r < m; ++r) {
      basis_cols.col(r) = sf.a.col(tab.basis()[static_cast<std::size_t>(r)]);
      basis_cost(r) = sf.cost(tab.basis()[static_cast<std::size_t>(r)]);
    }
    const Eigen::PartialPivLU<Matrix> lu(basis_cols);
    Vector yb = lu.solve(sf.rhs);
    const double resid = (basis_cols * yb - sf.rhs).lpNorm<Eigen::Infinity>();
    if (!yb.allFinite() || resid > kFeasibilityTol || yb.minCoeff() < -kFeasibilityTol) {
      for (Eigen::Index r = 0; r < m; ++r) yb(r) = tab.rhs(r);
    }
    for (Eigen::Index r = 0; r < m; ++r) y(tab.basis()[static_cast<std::size_t>(r)]) = std::max(yb(r), 0.0);
    row_dual = lu.transpose().solve(basis_cost);
    if (!row_dual.allFinite()) throw SolverError("singular final basis");
  }

  LpOutcome out;
  out.status = LpStatus::Optimal;
  out.pivots = tab.pivots();
  out.x = Vector(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const VarMap& vm = sf.vars[static_cast<std::size_t>(j)];
    switch (vm.kind) {
      case VarKind::Fixed: out.x(j) = vm.offset; break;
      case VarKind::ShiftLower: out.x(j) = vm.offset + y(vm.col); break;
      case VarKind::ShiftUpper: out.x(j) = vm.offset - y(vm.col); break;
      case VarKind::Free: out.x(j) = y(vm.col) - y(vm.col_neg); break;
    }
  }
  out.value = lp.objective.dot(out.x);
  {
    double scale = 1.0 + out.x.lpNorm<Eigen::Infinity>();
    if (lp.ineq_rhs.size() > 0) scale = std::max(scale, 1.0 + lp.ineq_rhs.lpNorm<Eigen::Infinity>());
    if (lp.eq_rhs.size() > 0) scale = std::max(scale, 1.0 + lp.eq_rhs.lpNorm<Eigen::Infinity>());
    if (max_violation(lp, out.x) > kSolutionTol * scale) throw SolverError("simplex lost feasibility to round-off");
  }

  const Eigen::Index n_ineq = lp.ineq_lhs.rows();
  const Eigen::Index n_eq = lp.eq_lhs.rows();
  out.ineq_dual = Vector(n_ineq);
  for (Eigen::Index i = 0; i < n_ineq; ++i)
    out.ineq_dual(i) = std::max(
        0.0, -sf.row_sign[static_cast<std::size_t>(i)] * sf.row_scale[static_cast<std::size_t>(i)] * row_dual(i));
  out.eq_dual = Vector(n_eq);
  for (Eigen::Index i = 0; i < n_eq; ++i)
    out.eq_dual(i) = sf.row_sign[static_cast<std::size_t>(n_ineq + i)] *
                     sf.row_scale[static_cast<std::size_t>(n_ineq + i)] * row_dual(n_ineq + i);

  // Whatever stationarity leaves over is carried by the variable bounds.
  Vector resid = lp.objective;
  if (n_ineq > 0) resid += lp.ineq_lhs.transpose() * out.ineq_dual;
  if (n_eq > 0) resid -= lp.eq_lhs.transpose() * out.eq_dual;
  out.lower_dual = Vector::Zero(n);
  out.upper_dual = Vector::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (resid(j) > 0.0 && std::isfinite(lp.lower(j))) out.lower_dual(j) = resid(j);
    if (resid(j) < 0.0 && std::isfinite(lp.upper(j))) out.upper_dual(j) = -resid(j);
  }
  return out;
}

double dual_objective(const LinearProgram& lp, const LpOutcome& out) {
  double value = 0.0;
  if (lp.ineq_rhs.size() > 0) value -= lp.ineq_rhs.dot(out.ineq_dual);
  if (lp.eq_rhs.size() > 0) value += lp.eq_rhs.dot(out.eq_dual);
  for (Eigen::Index j = 0; j < lp.num_vars(); ++j) {
    if (out.lower_dual(j) != 0.0) value += lp.lower(j) * out.lower_dual(j);
    if (out.upper_dual(j) != 0.0) value -= lp.upper(j) * out.upper_dual(j);
  }
  return value;
}

double max_violation(const LinearProgram& lp, const Vector& x) {
  double v = 0.0;
  if (lp.ineq_lhs.rows() > 0) v = std::max(v, (lp.ineq_lhs * x - lp.ineq_rhs).maxCoeff());
  if (lp.eq_lhs.rows() > 0) v = std::max(v, (lp.eq_lhs * x - lp.eq_rhs).cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (std::isfinite(lp.lower(j))) v = std::max(v, lp.lower(j) - x(j));
    if (std::isfinite(lp.upper(j))) v = std::max(v, x(j) - lp.upper(j));
  }
  return v;
}

}  // namespace relucert

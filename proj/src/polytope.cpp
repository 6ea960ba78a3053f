#include "relucert/polytope.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>

#include "relucert/lp.hpp"

namespace relucert {

HPolytope::HPolytope(Matrix a, Vector rhs) : A(std::move(a)), b(std::move(rhs)) {
  if (A.rows() != b.size()) throw DimensionError("polytope: A and b disagree on the row count");
  if (A.cols() < 1) throw DimensionError("polytope: dimension must be at least 1");
  if (!A.allFinite() || !b.allFinite()) throw Error("polytope: coefficients must be finite");
}

HPolytope HPolytope::empty(Eigen::Index dim) { return HPolytope(Matrix::Zero(1, dim), Vector::Constant(1, -1.0)); }

HPolytope HPolytope::box(const Vector& lower, const Vector& upper) {
  const Eigen::Index d = lower.size();
  Matrix a(2 * d, d);
  a << Matrix::Identity(d, d), -Matrix::Identity(d, d);
  Vector rhs(2 * d);
  rhs << upper, -lower;
  return HPolytope(std::move(a), std::move(rhs));
}

bool HPolytope::has_empty_marker() const {
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    if (A.row(i).cwiseAbs().maxCoeff() <= kAdjacencyTol && b(i) < -kAdjacencyTol) return true;
  return false;
}

bool HPolytope::contains(const Vector& x, double tol) const {
  if (A.rows() == 0) return true;
  return (A * x - b).maxCoeff() <= tol;
}

void HPolytope::add_row(const Eigen::RowVectorXd& a, double beta) {
  A.conservativeResize(A.rows() + 1, Eigen::NoChange);
  b.conservativeResize(b.size() + 1);
  A.row(A.rows() - 1) = a;
  b(b.size() - 1) = beta;
}

namespace {

// Fixed-width bitset sized at runtime; one bit per constraint row.
class Bits {
 public:
  explicit Bits(std::size_t n = 0) : words_((n + 63) / 64, 0) {}
  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  Bits operator&(const Bits& o) const {
    Bits r;
    r.words_.resize(words_.size());
    for (std::size_t w = 0; w < words_.size(); ++w) r.words_[w] = words_[w] & o.words_[w];
    return r;
  }
  bool subset_of(const Bits& o) const {
    for (std::size_t w = 0; w < words_.size(); ++w)
      if (words_[w] & ~o.words_[w]) return false;
    return true;
  }
  int count() const {
    int c = 0;
    for (auto w : words_) c += std::popcount(w);
    return c;
  }

 private:
  std::vector<std::uint64_t> words_;
};

struct ConeGenerators {
  std::vector<Vector> rays;  // extreme rays of the pointed part, unit inf-norm
  Matrix lines;              // orthonormal basis of the lineality space (columns)
};

void normalize_inf(Vector& v) {
  const double s = v.cwiseAbs().maxCoeff();
  if (s > 0.0) v /= s;
}

// Generators of {y : g y >= 0} by Motzkin's double description method.
ConeGenerators double_description(Matrix g) {
  const Eigen::Index m = g.rows(), D = g.cols();
  for (Eigen::Index r = 0; r < m; ++r) {
    const double n = g.row(r).norm();
    if (n > 0.0) g.row(r) /= n;
  }

  // Greedy choice of linearly independent rows; their span is the row space.
  std::vector<Eigen::Index> basis_rows;
  Matrix q(D, 0);
  for (Eigen::Index r = 0; r < m && q.cols() < D; ++r) {
    Vector v = g.row(r).transpose();
    if (q.cols() > 0) {
      v -= q * (q.transpose() * v);
      v -= q * (q.transpose() * v);
    }
    const double n = v.norm();
    if (n <= 1e-9) continue;
    q.conservativeResize(Eigen::NoChange, q.cols() + 1);
    q.col(q.cols() - 1) = v / n;
    basis_rows.push_back(r);
  }
  const Eigen::Index rank = q.cols();

  ConeGenerators out;
  if (rank == 0) {
    out.lines = Matrix::Identity(D, D);
    return out;
  }
  {
    Eigen::HouseholderQR<Matrix> qr(q);
    const Matrix full = qr.householderQ() * Matrix::Identity(D, D);
    out.lines = full.rightCols(D - rank);
  }

  Matrix gr(rank, D);
  for (Eigen::Index k = 0; k < rank; ++k) gr.row(k) = g.row(basis_rows[static_cast<std::size_t>(k)]);
  const Matrix init = gr.transpose() * (gr * gr.transpose()).ldlt().solve(Matrix::Identity(rank, rank));

  std::vector<Vector> rays;
  std::vector<Bits> zeros;
  for (Eigen::Index k = 0; k < rank; ++k) {
    Vector y = init.col(k);
    normalize_inf(y);
    Bits z(static_cast<std::size_t>(m));
    for (Eigen::Index j = 0; j < rank; ++j)
      if (j != k) z.set(static_cast<std::size_t>(basis_rows[static_cast<std::size_t>(j)]));
    rays.push_back(std::move(y));
    zeros.push_back(std::move(z));
  }

  std::vector<bool> in_basis(static_cast<std::size_t>(m), false);
  for (auto r : basis_rows) in_basis[static_cast<std::size_t>(r)] = true;

  for (Eigen::Index r = 0; r < m; ++r) {
    if (in_basis[static_cast<std::size_t>(r)]) continue;
    const std::size_t n_rays = rays.size();
    std::vector<double> val(n_rays);
    std::vector<std::size_t> pos, neg, zer;
    for (std::size_t i = 0; i < n_rays; ++i) {
      val[i] = g.row(r).dot(rays[i]);
      if (val[i] > kAdjacencyTol)
        pos.push_back(i);
      else if (val[i] < -kAdjacencyTol)
        neg.push_back(i);
      else
        zer.push_back(i);
    }
    if (neg.empty()) {
      for (auto i : zer) zeros[i].set(static_cast<std::size_t>(r));
      continue;
    }

    std::vector<Vector> next;
    std::vector<Bits> next_zeros;
    for (auto i : pos) {
      next.push_back(rays[i]);
      next_zeros.push_back(zeros[i]);
    }
    for (auto i : zer) {
      next.push_back(rays[i]);
      zeros[i].set(static_cast<std::size_t>(r));
      next_zeros.push_back(zeros[i]);
    }
    for (auto p : pos) {
      for (auto n : neg) {
        Bits common = zeros[p] & zeros[n];
        if (common.count() < rank - 2) continue;
        bool adjacent = true;
        for (std::size_t o = 0; o < n_rays && adjacent; ++o)
          if (o != p && o != n && common.subset_of(zeros[o])) adjacent = false;
        if (!adjacent) continue;
        Vector y = val[p] * rays[n] - val[n] * rays[p];
        normalize_inf(y);
        common.set(static_cast<std::size_t>(r));
        next.push_back(std::move(y));
        next_zeros.push_back(std::move(common));
        if (next.size() > kMaxGenerators) throw CapacityError("polytope: generator count exceeds the cap");
      }
    }
    rays = std::move(next);
    zeros = std::move(next_zeros);
  }
  out.rays = std::move(rays);
  return out;
}

void check_dim(Eigen::Index d) {
  if (d < 1) throw DimensionError("polytope: dimension must be at least 1");
  if (d > kMaxPolytopeDim) throw CapacityError("polytope: dimension exceeds the cap of 10");
}

void push_unique(std::vector<Vector>& list, Vector v) {
  for (const auto& w : list)
    if ((w - v).cwiseAbs().maxCoeff() <= kAdjacencyTol * (1.0 + v.cwiseAbs().maxCoeff())) return;
  list.push_back(std::move(v));
}

// Row-reduces an equality system [a | beta] so pivots are 1 and rows read like x_j = c.
Matrix reduce_equalities(Matrix e, Eigen::Index d) {
  Eigen::Index row = 0;
  for (Eigen::Index col = 0; col < d && row < e.rows(); ++col) {
    Eigen::Index best;
    const double piv = e.col(col).tail(e.rows() - row).cwiseAbs().maxCoeff(&best);
    if (piv <= 1e-9) continue;
    best += row;
    e.row(row).swap(e.row(best));
    const double pivot = e(row, col);
    e.row(row) /= pivot;
    for (Eigen::Index i = 0; i < e.rows(); ++i) {
      const double f = e(i, col);
      if (i != row && f != 0.0) e.row(i) -= f * e.row(row);
    }
    ++row;
  }
  return e.topRows(row);
}

}  // namespace

VPolytope h_to_v(const HPolytope& p) {
  const Eigen::Index d = p.dim();
  check_dim(d);
  if (p.rows() < 1) throw Error("polytope: h_to_v needs at least one inequality");
  VPolytope out;
  out.dimension = d;
  if (p.has_empty_marker()) return out;

  // Homogenize: (x, t) with t >= 0 and b t - A x >= 0.
  Matrix g(p.rows() + 1, d + 1);
  g.topLeftCorner(p.rows(), d) = -p.A;
  g.topRightCorner(p.rows(), 1) = p.b;
  g.row(p.rows()).setZero();
  g(p.rows(), d) = 1.0;
  const ConeGenerators cone = double_description(std::move(g));

  std::vector<Vector> rays;
  for (const auto& y : cone.rays) {
    const double t = y(d);
    if (t > kAdjacencyTol) {
      push_unique(out.vertices, y.head(d) / t);
    } else {
      Vector r = y.head(d);
      if (r.cwiseAbs().maxCoeff() <= kAdjacencyTol) continue;
      normalize_inf(r);
      push_unique(rays, std::move(r));
    }
  }
  for (Eigen::Index k = 0; k < cone.lines.cols(); ++k) {
    Vector r = cone.lines.col(k).head(d);
    if (r.cwiseAbs().maxCoeff() <= kAdjacencyTol) continue;
    normalize_inf(r);
    push_unique(rays, r);
    push_unique(rays, -r);
  }
  if (out.vertices.empty()) return out;
  out.rays = std::move(rays);
  return out;
}

HPolytope v_to_h(const VPolytope& v) {
  const Eigen::Index d = v.dim();
  check_dim(d);
  if (v.empty()) return HPolytope::empty(d);

  // (a, beta) with a.v <= beta for every vertex and a.r <= 0 for every ray.
  const Eigen::Index m = static_cast<Eigen::Index>(v.vertices.size() + v.rays.size());
  Matrix g(m, d + 1);
  Eigen::Index r = 0;
  for (const auto& x : v.vertices) {
    g.row(r).head(d) = -x.transpose();
    g(r++, d) = 1.0;
  }
  for (const auto& x : v.rays) {
    g.row(r).head(d) = -x.transpose();
    g(r++, d) = 0.0;
  }
  const ConeGenerators cone = double_description(std::move(g));

  // The trivial inequality 0 <= 1, seen modulo the lineality space.
  Vector trivial = Vector::Unit(d + 1, d);
  if (cone.lines.cols() > 0) trivial -= cone.lines * (cone.lines.transpose() * trivial);
  const bool has_trivial = trivial.norm() > 1e-9;
  if (has_trivial) trivial /= trivial.norm();

  HPolytope out(Matrix(0, d), Vector(0));
  if (cone.lines.cols() > 0) {
    const Matrix eq = reduce_equalities(cone.lines.transpose(), d);
    for (Eigen::Index k = 0; k < eq.rows(); ++k) {
      out.add_row(eq.row(k).head(d), eq(k, d));
      out.add_row(-eq.row(k).head(d), -eq(k, d));
    }
  }
  for (const auto& y : cone.rays) {
    const double n = y.head(d).norm();
    if (n <= kAdjacencyTol) continue;
    if (has_trivial && (y / y.norm() - trivial).norm() <= 1e-7) continue;
    out.add_row(y.head(d).transpose() / n, y(d) / n);
  }
  return out;
}

HPolytope hull_of_union(const std::vector<VPolytope>& parts) {
  if (parts.empty()) throw Error("polytope: hull_of_union needs at least one part");
  VPolytope all;
  all.dimension = parts.front().dim();
  for (const auto& part : parts) {
    if (part.dim() != all.dimension) throw DimensionError("polytope: parts of different dimension");
    if (part.empty()) continue;
    for (const auto& x : part.vertices) push_unique(all.vertices, x);
    for (const auto& x : part.rays) push_unique(all.rays, x);
  }
  return v_to_h(all);
}

HPolytope intersect(const HPolytope& p, const HPolytope& q) {
  if (p.dim() != q.dim()) throw DimensionError("polytope: intersecting polytopes of different dimension");
  Matrix a(p.rows() + q.rows(), p.dim());
  a << p.A, q.A;
  Vector b(p.rows() + q.rows());
  b << p.b, q.b;
  return remove_redundant(HPolytope(std::move(a), std::move(b)));
}

HPolytope remove_redundant(const HPolytope& p) {
  const Eigen::Index d = p.dim();
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double n = p.A.row(i).norm();
    if (n <= kAdjacencyTol) {
      if (p.b(i) < -kAdjacencyTol) return HPolytope::empty(d);
      continue;
    }
    Eigen::RowVectorXd a = p.A.row(i) / n;
    const double beta = p.b(i) / n;
    bool dup = false;
    for (std::size_t k = 0; k < rows.size() && !dup; ++k) {
      if ((rows[k] - a).cwiseAbs().maxCoeff() <= 1e-12) {
        rhs[k] = std::min(rhs[k], beta);
        dup = true;
      }
    }
    if (!dup) {
      rows.push_back(std::move(a));
      rhs.push_back(beta);
    }
  }

  std::vector<bool> keep(rows.size(), true);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    LinearProgram lp;
    lp.objective = -rows[i].transpose();
    lp.lower = Vector::Constant(d, -kInf);
    lp.upper = Vector::Constant(d, kInf);
    Eigen::Index cnt = 0;
    for (std::size_t k = 0; k < rows.size(); ++k)
      if (keep[k] && k != i) ++cnt;
    lp.ineq_lhs.resize(cnt, d);
    lp.ineq_rhs.resize(cnt);
    Eigen::Index r = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (!keep[k] || k == i) continue;
      lp.ineq_lhs.row(r) = rows[k];
      lp.ineq_rhs(r++) = rhs[k];
    }
    lp.eq_lhs.resize(0, d);
    lp.eq_rhs.resize(0);
    const LpOutcome out = solve_lp(lp);
    if (out.status == LpStatus::Infeasible) return HPolytope::empty(d);
    if (out.optimal() && -out.value <= rhs[i] + 1e-9) keep[i] = false;
  }

  HPolytope result(Matrix(0, d), Vector(0));
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (keep[i]) result.add_row(rows[i], rhs[i]);
  return result;
}

bool is_empty(const HPolytope& p) {
  if (p.has_empty_marker()) return true;
  if (p.rows() == 0) return false;
  LinearProgram lp;
  lp.objective = Vector::Zero(p.dim());
  lp.ineq_lhs = p.A;
  lp.ineq_rhs = p.b;
  lp.eq_lhs.resize(0, p.dim());
  lp.eq_rhs.resize(0);
  lp.lower = Vector::Constant(p.dim(), -kInf);
  lp.upper = Vector::Constant(p.dim(), kInf);
  return solve_lp(lp).status == LpStatus::Infeasible;
}

}  // namespace relucert

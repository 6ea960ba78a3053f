// Convex polytopes in H- and V-representation, converted by the double
// description method (floating point, tolerance based).
#pragma once

#include <vector>

#include "relucert/numerics.hpp"

namespace relucert {

/// Raised when a conversion exceeds the dimension or generator caps.
class CapacityError : public Error {
 public:
  using Error::Error;
};

inline constexpr Eigen::Index kMaxPolytopeDim = 10;
inline constexpr std::size_t kMaxGenerators = 100000;
inline constexpr double kAdjacencyTol = 1e-8;

/// {x : A x <= b}. Equalities are stored as pairs of opposite rows. The empty
/// set is represented by the single row 0 x <= -1.
struct HPolytope {
  Matrix A;
  Vector b;

  HPolytope() = default;
  HPolytope(Matrix a, Vector rhs);

  static HPolytope empty(Eigen::Index dim);
  static HPolytope box(const Vector& lower, const Vector& upper);

  Eigen::Index dim() const { return A.cols(); }
  Eigen::Index rows() const { return A.rows(); }
  /// True when the representation carries an infeasible 0 <= negative row.
  /// A polytope can be empty without it; see is_empty().
  bool has_empty_marker() const;
  bool contains(const Vector& x, double tol = 1e-9) const;
  /// Appends a <= beta.
  void add_row(const Eigen::RowVectorXd& a, double beta);
};

/// conv(vertices) + cone(rays). No vertices means the empty set.
struct VPolytope {
  Eigen::Index dimension = 0;
  std::vector<Vector> vertices;
  std::vector<Vector> rays;

  Eigen::Index dim() const { return dimension; }
  bool empty() const { return vertices.empty(); }
};

VPolytope h_to_v(const HPolytope& p);
HPolytope v_to_h(const VPolytope& v);
HPolytope hull_of_union(const std::vector<VPolytope>& parts);
HPolytope intersect(const HPolytope& p, const HPolytope& q);

/// Drops rows implied by the others (one LP per row). Returns the empty
/// marker when the system is infeasible.
HPolytope remove_redundant(const HPolytope& p);

bool is_empty(const HPolytope& p);

}  // namespace relucert

// Shared numeric primitives: sign splitting, row norms, Hoelder conjugates,
// uncertainty sets and their support functions, per-layer interval bounds.
#pragma once

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace relucert {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Absolute tolerance for algebraic identities.
inline constexpr double kAlgebraicTol = 1e-9;
/// Absolute tolerance for quantities derived from an LP solve.
inline constexpr double kSolverTol = 1e-6;

/// Norm orders with exact conjugates.
enum class Norm { L1, L2, Linf };

Norm parse_norm(const std::string& text);
std::string to_string(Norm p);

/// 1/p + 1/p* = 1.
Norm holder_conjugate(Norm p);

double vector_norm(const Vector& v, Norm q);

/// Entrywise max(A, 0).
Matrix pos_part(const Matrix& a);
/// Entrywise min(A, 0).
Matrix neg_part(const Matrix& a);
Vector pos_part(const Vector& a);
Vector neg_part(const Vector& a);

/// Per-row q-norm of `a`.
Vector row_norm(const Matrix& a, Norm q);

struct BallSet {
  Vector center;
  double radius = 0.0;
  Norm norm = Norm::Linf;
};

struct BoxSet {
  Vector center;
  Vector eps_lo;
  Vector eps_hi;
};

/// Neighbourhood B(x) of a clean input: an lp ball or an asymmetric box.
class UncertaintySet {
 public:
  static UncertaintySet ball(Vector center, double radius, Norm norm);
  static UncertaintySet box(Vector center, Vector eps_lo, Vector eps_hi);

  const Vector& center() const;
  Eigen::Index dim() const { return center().size(); }

  bool is_ball() const { return std::holds_alternative<BallSet>(set_); }
  const BallSet& as_ball() const { return std::get<BallSet>(set_); }
  const BoxSet& as_box() const { return std::get<BoxSet>(set_); }

  /// True for boxes and l-infinity balls, the sets an LP can encode.
  bool is_polyhedral() const;
  /// Coordinate-wise lower corner; only valid when is_polyhedral().
  Vector box_lower() const;
  Vector box_upper() const;

  /// The same set re-centred at `center`.
  UncertaintySet recentered(Vector center) const;

 private:
  explicit UncertaintySet(std::variant<BallSet, BoxSet> s) : set_(std::move(s)) {}
  std::variant<BallSet, BoxSet> set_;
};

/// max over xi in `set` of a^T xi.
double support_value(const UncertaintySet& set, const Vector& a);

/// max over xi in (set - center) of a^T xi.
double centered_support(const UncertaintySet& set, const Vector& a);

/// Element-wise interval [lower, upper].
struct Interval {
  Vector lower;
  Vector upper;

  Eigen::Index size() const { return lower.size(); }
  bool contains(const Vector& v, double tol) const;
  /// Componentwise intersection; lower is clamped so lower <= upper survives round-off.
  Interval intersect(const Interval& other) const;
};

/// Pre-activation intervals, indexed by layer number starting at 1.
class LayerBounds {
 public:
  LayerBounds() = default;

  void push_back(Interval b) { layers_.push_back(std::move(b)); }
  void truncate(std::size_t count) { layers_.resize(count); }

  /// Number of layers with bounds (layers 1..count()).
  std::size_t count() const { return layers_.size(); }
  const Interval& layer(std::size_t i) const;
  Interval& layer(std::size_t i);

  /// Number of neurons with lower < 0 < upper, summed over layers [1, upto].
  std::size_t unstable_count(std::size_t upto) const;

 private:
  std::vector<Interval> layers_;
};

}  // namespace relucert

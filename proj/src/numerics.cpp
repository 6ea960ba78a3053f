#include "relucert/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace relucert {

Norm parse_norm(const std::string& text) {
  if (text == "1") return Norm::L1;
  if (text == "2") return Norm::L2;
  if (text == "inf" || text == "Inf" || text == "INF") return Norm::Linf;
  throw Error("unsupported norm order '" + text + "' (expected 1, 2 or inf)");
}

std::string to_string(Norm p) {
  switch (p) {
    case Norm::L1: return "1";
    case Norm::L2: return "2";
    case Norm::Linf: return "inf";
  }
  return "?";
}

Norm holder_conjugate(Norm p) {
  switch (p) {
    case Norm::L1: return Norm::Linf;
    case Norm::L2: return Norm::L2;
    case Norm::Linf: return Norm::L1;
  }
  throw Error("unsupported norm order");
}

double vector_norm(const Vector& v, Norm q) {
  if (v.size() == 0) return 0.0;
  switch (q) {
    case Norm::L1: return v.lpNorm<1>();
    case Norm::L2: return v.norm();
    case Norm::Linf: return v.lpNorm<Eigen::Infinity>();
  }
  throw Error("unsupported norm order");
}

Matrix pos_part(const Matrix& a) { return a.cwiseMax(0.0); }
Matrix neg_part(const Matrix& a) { return a.cwiseMin(0.0); }
Vector pos_part(const Vector& a) { return a.cwiseMax(0.0); }
Vector neg_part(const Vector& a) { return a.cwiseMin(0.0); }

Vector row_norm(const Matrix& a, Norm q) {
  Vector out(a.rows());
  for (Eigen::Index r = 0; r < a.rows(); ++r) out(r) = vector_norm(a.row(r).transpose(), q);
  return out;
}

namespace {

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw Error(std::string(what) + " must be finite");
}

}  // namespace

UncertaintySet UncertaintySet::ball(Vector center, double radius, Norm norm) {
  require_finite(center, "set center");
  if (!(radius >= 0.0) || !std::isfinite(radius)) throw Error("ball radius must be finite and >= 0");
  return UncertaintySet(BallSet{std::move(center), radius, norm});
}

UncertaintySet UncertaintySet::box(Vector center, Vector eps_lo, Vector eps_hi) {
  require_finite(center, "set center");
  if (eps_lo.size() != center.size() || eps_hi.size() != center.size())
    throw DimensionError("box radii must match the centre dimension");
  require_finite(eps_lo, "eps_lo");
  require_finite(eps_hi, "eps_hi");
  if ((eps_lo.array() < 0.0).any() || (eps_hi.array() < 0.0).any())
    throw Error("box radii must be nonnegative");
  return UncertaintySet(BoxSet{std::move(center), std::move(eps_lo), std::move(eps_hi)});
}

const Vector& UncertaintySet::center() const {
  return std::visit([](const auto& s) -> const Vector& { return s.center; }, set_);
}

bool UncertaintySet::is_polyhedral() const {
  return !is_ball() || as_ball().norm == Norm::Linf || as_ball().radius == 0.0;
}

Vector UncertaintySet::box_lower() const {
  if (!is_polyhedral()) throw Error("set is not polyhedral (l1/l2 ball)");
  if (is_ball()) return as_ball().center.array() - as_ball().radius;
  return as_box().center - as_box().eps_lo;
}

Vector UncertaintySet::box_upper() const {
  if (!is_polyhedral()) throw Error("set is not polyhedral (l1/l2 ball)");
  if (is_ball()) return as_ball().center.array() + as_ball().radius;
  return as_box().center + as_box().eps_hi;
}

UncertaintySet UncertaintySet::recentered(Vector center) const {
  if (center.size() != dim()) throw DimensionError("recentred set dimension mismatch");
  if (is_ball()) return ball(std::move(center), as_ball().radius, as_ball().norm);
  return box(std::move(center), as_box().eps_lo, as_box().eps_hi);
}

double centered_support(const UncertaintySet& set, const Vector& a) {
  if (a.size() != set.dim()) throw DimensionError("support direction dimension mismatch");
  if (set.is_ball()) {
    const auto& b = set.as_ball();
    if (b.radius == 0.0) return 0.0;
    return b.radius * vector_norm(a, holder_conjugate(b.norm));
  }
  const auto& b = set.as_box();
  return pos_part(a).dot(b.eps_hi) - neg_part(a).dot(b.eps_lo);
}

double support_value(const UncertaintySet& set, const Vector& a) {
  return a.dot(set.center()) + centered_support(set, a);
}

bool Interval::contains(const Vector& v, double tol) const {
  if (v.size() != lower.size()) return false;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double scale = 1.0 + std::abs(v(j));
    if (v(j) < lower(j) - tol * scale || v(j) > upper(j) + tol * scale) return false;
  }
  return true;
}

Interval Interval::intersect(const Interval& other) const {
  Interval out{lower.cwiseMax(other.lower), upper.cwiseMin(other.upper)};
  // Two sound enclosures can only cross by round-off; collapse to a point.
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    if (out.lower(j) > out.upper(j)) {
      const double mid = 0.5 * (out.lower(j) + out.upper(j));
      out.lower(j) = out.upper(j) = mid;
    }
  }
  return out;
}

const Interval& LayerBounds::layer(std::size_t i) const {
  if (i == 0 || i > layers_.size()) throw Error("no bounds for layer " + std::to_string(i));
  return layers_[i - 1];
}

Interval& LayerBounds::layer(std::size_t i) {
  if (i == 0 || i > layers_.size()) throw Error("no bounds for layer " + std::to_string(i));
  return layers_[i - 1];
}

std::size_t LayerBounds::unstable_count(std::size_t upto) const {
  std::size_t n = 0;
  for (std::size_t i = 1; i <= std::min(upto, layers_.size()); ++i) {
    const auto& b = layers_[i - 1];
    for (Eigen::Index j = 0; j < b.size(); ++j)
      if (b.lower(j) < 0.0 && b.upper(j) > 0.0) ++n;
  }
  return n;
}

}  // namespace relucert

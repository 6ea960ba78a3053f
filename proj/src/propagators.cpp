#include "relucert/propagators.hpp"

namespace relucert {

NeuronStatus classify_neuron(double lower, double upper) {
  if (lower < 0.0 && upper > 0.0) return NeuronStatus::Unstable;
  if (lower >= 0.0 && upper > 0.0) return NeuronStatus::StablePositive;
  return NeuronStatus::StableNegative;
}

RelaxationMode RelaxationMode::fixed(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("fixed lower slope must lie in [0, 1]");
  return {Kind::Fixed, alpha};
}

namespace {

// Area between the lower line z = alpha x and the triangle's upper edge over [l, u].
double band_area(double alpha, double l, double u) {
  const double s = u / (u - l);
  const double gap_l = s * (l - l) - alpha * l;
  const double gap_u = s * (u - l) - alpha * u;
  return 0.5 * (gap_l + gap_u) * (u - l);
}

}  // namespace

ReluRelaxation relu_relaxation(const Interval& bounds, RelaxationMode mode) {
  const Eigen::Index n = bounds.size();
  ReluRelaxation r{Vector::Zero(n), Vector::Zero(n), Vector::Zero(n), Vector::Zero(n), {}};
  r.status.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    const double l = bounds.lower(j);
    const double u = bounds.upper(j);
    if (l > u) throw Error("relu_relaxation: lower bound exceeds upper bound");
    const NeuronStatus st = classify_neuron(l, u);
    r.status.push_back(st);
    if (st == NeuronStatus::StablePositive) {
      r.lower_slope(j) = r.upper_slope(j) = 1.0;
    } else if (st == NeuronStatus::Unstable) {
      const double s = u / (u - l);
      r.upper_slope(j) = s;
      r.upper_offset(j) = -u * l / (u - l);
      switch (mode.kind) {
        case RelaxationMode::Kind::SameSlope: r.lower_slope(j) = s; break;
        case RelaxationMode::Kind::Adaptive:
          r.lower_slope(j) = band_area(1.0, l, u) <= band_area(0.0, l, u) ? 1.0 : 0.0;
          break;
        case RelaxationMode::Kind::Fixed: r.lower_slope(j) = mode.alpha; break;
      }
    }
  }
  return r;
}

AffineBounds backsubstitute(const Network& net, const std::vector<ReluRelaxation>& relaxations,
                            std::size_t layer, const Matrix& objective) {
  if (layer == 0 || layer > net.depth()) throw Error("backsubstitute: layer out of range");
  if (objective.cols() != net.width(layer)) throw DimensionError("backsubstitute: objective width mismatch");
  if (relaxations.size() + 1 < layer)
    throw Error("backsubstitute: missing relaxation for layer " + std::to_string(relaxations.size() + 1));

  Matrix lo = objective;
  Matrix up = objective;
  Vector lo_c = Vector::Zero(objective.rows());
  Vector up_c = Vector::Zero(objective.rows());
  for (std::size_t k = layer; k >= 1; --k) {
    lo_c += lo * net.bias(k);
    up_c += up * net.bias(k);
    lo = lo * net.weights(k);
    up = up * net.weights(k);
    if (k == 1) break;

    const ReluRelaxation& rel = relaxations[k - 2];
    if (rel.size() != net.width(k - 1)) throw DimensionError("backsubstitute: relaxation width mismatch");
    const Matrix lo_pos = pos_part(lo), lo_neg = neg_part(lo);
    lo_c += lo_pos * rel.lower_offset + lo_neg * rel.upper_offset;
    lo = lo_pos * rel.lower_slope.asDiagonal() + lo_neg * rel.upper_slope.asDiagonal();
    const Matrix up_pos = pos_part(up), up_neg = neg_part(up);
    up_c += up_pos * rel.upper_offset + up_neg * rel.lower_offset;
    up = up_pos * rel.upper_slope.asDiagonal() + up_neg * rel.lower_slope.asDiagonal();
  }
  return {std::move(lo), std::move(up), std::move(lo_c), std::move(up_c), layer};
}

Interval concretize(const AffineBounds& ab, const UncertaintySet& set) {
  if (ab.lower_coef.cols() != set.dim()) throw DimensionError("concretize: set dimension mismatch");
  const Eigen::Index m = ab.lower_coef.rows();
  Interval out{Vector(m), Vector(m)};
  const Vector& x = set.center();
  for (Eigen::Index j = 0; j < m; ++j) {
    const Vector lo = ab.lower_coef.row(j).transpose();
    const Vector up = ab.upper_coef.row(j).transpose();
    out.lower(j) = lo.dot(x) - centered_support(set, -lo) + ab.lower_const(j);
    out.upper(j) = up.dot(x) + centered_support(set, up) + ab.upper_const(j);
  }
  return out;
}

LayerBounds ibp_bounds(const Network& net, const UncertaintySet& set) {
  if (set.dim() != net.input_dim()) throw DimensionError("ibp_bounds: set dimension mismatch");
  LayerBounds out;
  {
    const Matrix& w = net.weights(1);
    Interval b{Vector(w.rows()), Vector(w.rows())};
    for (Eigen::Index j = 0; j < w.rows(); ++j) {
      const Vector row = w.row(j).transpose();
      b.lower(j) = -support_value(set, -row) + net.bias(1)(j);
      b.upper(j) = support_value(set, row) + net.bias(1)(j);
    }
    out.push_back(std::move(b));
  }
  for (std::size_t i = 2; i <= net.depth(); ++i) {
    const Interval& prev = out.layer(i - 1);
    const Vector lo = prev.lower.cwiseMax(0.0);
    const Vector up = prev.upper.cwiseMax(0.0);
    const Matrix& w = net.weights(i);
    const Matrix wp = pos_part(w), wn = neg_part(w);
    out.push_back({wp * lo + wn * up + net.bias(i), wn * lo + wp * up + net.bias(i)});
  }
  return out;
}

std::vector<ReluRelaxation> relaxations_for(const LayerBounds& bounds, RelaxationMode mode,
                                           std::size_t count) {
  std::vector<ReluRelaxation> rels;
  rels.reserve(count);
  for (std::size_t i = 1; i <= count; ++i) rels.push_back(relu_relaxation(bounds.layer(i), mode));
  return rels;
}

LayerBounds linear_bounds(const Network& net, const UncertaintySet& set, RelaxationMode mode,
                          bool include_output) {
  if (set.dim() != net.input_dim()) throw DimensionError("linear_bounds: set dimension mismatch");
  const std::size_t last = include_output ? net.depth() : net.depth() - 1;
  LayerBounds out;
  std::vector<ReluRelaxation> rels;
  for (std::size_t i = 1; i <= last; ++i) {
    const Matrix eye = Matrix::Identity(net.width(i), net.width(i));
    out.push_back(concretize(backsubstitute(net, rels, i, eye), set));
    if (i < net.depth()) rels.push_back(relu_relaxation(out.layer(i), mode));
  }
  return out;
}

LayerBounds same_slope_closed_form(const Network& net, const UncertaintySet& set, bool include_output) {
  if (set.dim() != net.input_dim()) throw DimensionError("same_slope_closed_form: set dimension mismatch");
  const std::size_t last = include_output ? net.depth() : net.depth() - 1;
  LayerBounds out;
  if (last == 0) return out;

  // lambda[j-1] holds Lambda^(j); upper_offsets[j-1] holds beta-bar^(j).
  std::vector<Matrix> lambda{net.weights(1)};
  std::vector<Vector> upper_offsets;
  Vector phi = net.weights(1) * set.center() + net.bias(1);

  auto input_terms = [&](const Matrix& lam1, Vector& lo, Vector& up) {
    for (Eigen::Index j = 0; j < lam1.rows(); ++j) {
      const Vector row = lam1.row(j).transpose();
      lo(j) -= centered_support(set, -row);
      up(j) += centered_support(set, row);
    }
  };

  {
    Vector lo = phi, up = phi;
    input_terms(lambda[0], lo, up);
    out.push_back({std::move(lo), std::move(up)});
  }
  for (std::size_t i = 2; i <= last; ++i) {
    const ReluRelaxation rel = relu_relaxation(out.layer(i - 1), RelaxationMode::same_slope());
    upper_offsets.push_back(rel.upper_offset);
    const Matrix w_sigma = net.weights(i) * rel.upper_slope.asDiagonal();
    for (auto& lam : lambda) lam = w_sigma * lam;
    lambda.push_back(net.weights(i));
    phi = w_sigma * phi + net.bias(i);

    Vector lo = phi, up = phi;
    input_terms(lambda[0], lo, up);
    for (std::size_t j = 2; j <= i; ++j) {
      lo += neg_part(lambda[j - 1]) * upper_offsets[j - 2];
      up += pos_part(lambda[j - 1]) * upper_offsets[j - 2];
    }
    out.push_back({std::move(lo), std::move(up)});
  }
  return out;
}

}  // namespace relucert

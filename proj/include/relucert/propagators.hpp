// Greedy bound propagation: interval bound propagation and linear-relaxation
// backsubstitution (Fast-Lin / CROWN style).
#pragma once

#include <optional>
#include <vector>

#include "relucert/network.hpp"
#include "relucert/numerics.hpp"

namespace relucert {

enum class NeuronStatus { StableNegative, StablePositive, Unstable };

/// Strict lower < 0 < upper is unstable; ties go to the stable branch, and
/// lower == upper is stable by the sign of the common value (0 -> negative).
NeuronStatus classify_neuron(double lower, double upper);

/// Selection rule for the lower slope alpha of unstable neurons.
struct RelaxationMode {
  enum class Kind { SameSlope, Adaptive, Fixed };
  Kind kind = Kind::SameSlope;
  double alpha = 0.0;  // used by Fixed only

  static RelaxationMode same_slope() { return {Kind::SameSlope, 0.0}; }
  static RelaxationMode adaptive() { return {Kind::Adaptive, 0.0}; }
  static RelaxationMode fixed(double alpha);
};

/// Linear lower/upper relaxation of one ReLU layer:
///   lower_slope .* x + lower_offset <= relu(x) <= upper_slope .* x + upper_offset
/// for every x in the interval that produced it.
struct ReluRelaxation {
  Vector lower_slope;
  Vector upper_slope;
  Vector lower_offset;
  Vector upper_offset;
  std::vector<NeuronStatus> status;

  Eigen::Index size() const { return lower_slope.size(); }
};

ReluRelaxation relu_relaxation(const Interval& bounds, RelaxationMode mode);

/// Affine enclosure of C x^(layer) in terms of the network input:
///   lower_coef x0 + lower_const <= C x^(layer) <= upper_coef x0 + upper_const.
struct AffineBounds {
  Matrix lower_coef;
  Matrix upper_coef;
  Vector lower_const;
  Vector upper_const;
  std::size_t layer = 0;
};

/// Replaces every ReLU below `layer` by its relaxation, picking the lower or
/// upper line per coefficient sign. `relaxations[i-1]` relaxes layer i; at
/// least layer-1 entries are needed.
AffineBounds backsubstitute(const Network& net, const std::vector<ReluRelaxation>& relaxations,
                            std::size_t layer, const Matrix& objective);

/// Worst case of an affine enclosure over the uncertainty set.
Interval concretize(const AffineBounds& ab, const UncertaintySet& set);

/// Interval bound propagation for layers 1..depth().
LayerBounds ibp_bounds(const Network& net, const UncertaintySet& set);

/// Layer-by-layer backsubstitution bounds for layers 1..depth()-1, plus the
/// logit layer when `include_output` is set.
LayerBounds linear_bounds(const Network& net, const UncertaintySet& set, RelaxationMode mode,
                          bool include_output = false);

/// Relaxations of layers 1..count() built from `bounds`.
std::vector<ReluRelaxation> relaxations_for(const LayerBounds& bounds, RelaxationMode mode,
                                           std::size_t count);

/// Same-slope bounds through the closed-form Lambda/phi recursion, without
/// going through backsubstitute(). Same layer coverage as linear_bounds().
LayerBounds same_slope_closed_form(const Network& net, const UncertaintySet& set,
                                   bool include_output = false);

}  // namespace relucert

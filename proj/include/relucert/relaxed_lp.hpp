// The triangle-relaxed network as a linear program.
#pragma once

#include <vector>

#include "relucert/lp.hpp"
#include "relucert/network.hpp"
#include "relucert/numerics.hpp"

namespace relucert {

/// Variables x^(0), x^(1..depth) and z^(1..depth-1) of a relaxed program over
/// the first `depth` layers, with room for callers to add more rows.
struct RelaxedProgram {
  LpBuilder lp{0};
  std::size_t depth = 0;
  std::vector<Eigen::Index> x_offset;  // x_offset[i] is x^(i)_0, i = 0..depth
  std::vector<Eigen::Index> z_offset;  // z_offset[i] is z^(i)_0, i = 1..depth-1 (entry 0 unused)

  Eigen::Index x(std::size_t layer, Eigen::Index j) const { return x_offset[layer] + j; }
  Eigen::Index z(std::size_t layer, Eigen::Index j) const { return z_offset[layer] + j; }
};

/// Input set, affine layer equalities, interval bounds on x^(1..depth-1) and
/// per-neuron ReLU constraints: the triangle for unstable neurons, z = x or
/// z = 0 for stable ones. Only box and l-inf sets are accepted.
RelaxedProgram relaxed_program(const Network& net, const UncertaintySet& set, const LayerBounds& bounds,
                               std::size_t depth);

/// Sets the objective to minimize sum(coef_j * x^(depth)_j).
void set_layer_objective(RelaxedProgram& prog, const Vector& coef);

/// min c^T x^(L) over the relaxation (the constant c0 is not included in the LP).
LinearProgram build_relaxed_lp(const Network& net, const UncertaintySet& set, const LayerBounds& bounds,
                               const MarginObjective& objective);

/// The input block of an LP solution, clipped onto the input box.
Vector input_point(const RelaxedProgram& prog, const UncertaintySet& set, const Vector& solution);

}  // namespace relucert

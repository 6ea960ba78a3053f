// k-ReLU multi-neuron relaxation: relational constraints over groups of
// unstable neurons, hulls of their branch polytopes, and LP-refined bounds.
#pragma once

#include <vector>

#include "relucert/network.hpp"
#include "relucert/numerics.hpp"
#include "relucert/polytope.hpp"
#include "relucert/propagators.hpp"
#include "relucert/relaxed_lp.hpp"

namespace relucert {

inline constexpr int kMaxGroupSize = 4;

struct NeuronGroup {
  std::size_t layer = 0;
  std::vector<Eigen::Index> neurons;  // 0-based indices within the layer

  std::size_t size() const { return neurons.size(); }
};

/// All of {-1, 0, 1}^k except zero, in lexicographic order.
std::vector<Vector> octahedral_coefficients(int k);

/// True for tuples with a single nonzero entry.
bool is_interval_tuple(const Vector& a);

/// sum_j a_j x^(layer)_{J_j} <= bound for every tuple a.
struct RelationalConstraints {
  NeuronGroup group;
  std::vector<Vector> coefficients;
  std::vector<double> bounds;

  /// The constraints as an H-polytope over x_J.
  HPolytope polytope() const;
};

/// Upper bounds from backsubstitution through the relaxations of the layers
/// below the group, using `bounds` for layers 1..group.layer-1. Interval
/// tuples are also capped by bounds.layer(group.layer) when present.
RelationalConstraints relational_bounds(const Network& net, const UncertaintySet& set, const LayerBounds& bounds,
                                        const NeuronGroup& group, const std::vector<Vector>& coefficients,
                                        RelaxationMode mode);

/// Unstable neurons sorted by triangle area |l u| / 2 (descending, ties by
/// index), cut into consecutive groups of k; the last group may be smaller.
std::vector<NeuronGroup> partition_neurons(const Interval& bounds, std::size_t layer, int k);

/// Branch polytope in (x, z) coordinates: x_j >= 0, z_j = x_j for a positive
/// sign, x_j <= 0, z_j = 0 for a negative one.
HPolytope branch_polytope(const std::vector<int>& signs);

/// Convex hull of the union over all sign patterns of P lifted to (x_J, z_J)
/// intersected with the branch polytope.
HPolytope group_hull(const RelationalConstraints& rel);

struct KReluSet {
  std::size_t layer = 0;
  std::vector<NeuronGroup> groups;
  std::vector<HPolytope> hulls;  // hulls[i] lives in (x_J, z_J) of groups[i]
};

KReluSet build_krelu_set(const Network& net, const UncertaintySet& set, const LayerBounds& bounds, std::size_t layer,
                         int k, RelaxationMode mode);

/// Adds every hull of `kset` as rows over the program's x and z variables.
void add_krelu_constraints(RelaxedProgram& prog, const KReluSet& kset);

/// LP bounds on x^(layer) over the relaxed program of depth `layer` plus all
/// k-ReLU sets, intersected with bounds.layer(layer) when present.
Interval refine_bounds(const Network& net, const UncertaintySet& set, const LayerBounds& bounds,
                       const std::vector<KReluSet>& ksets, std::size_t layer);

}  // namespace relucert

#include "relucert/multi_neuron.hpp"

#include <algorithm>
#include <cmath>

namespace relucert {

std::vector<Vector> octahedral_coefficients(int k) {
  if (k < 1 || k > kMaxGroupSize) throw Error("group size k must lie in [1, 4]");
  std::vector<Vector> out;
  int total = 1;
  for (int i = 0; i < k; ++i) total *= 3;
  for (int code = 0; code < total; ++code) {
    // Base-3 digits, most significant first, mapped 0,1,2 -> -1,0,1.
    Vector a(k);
    int rest = code;
    for (int i = k - 1; i >= 0; --i) {
      a(i) = static_cast<double>(rest % 3 - 1);
      rest /= 3;
    }
    if (!a.isZero()) out.push_back(std::move(a));
  }
  return out;
}

bool is_interval_tuple(const Vector& a) { return (a.array() != 0.0).count() == 1; }

HPolytope RelationalConstraints::polytope() const {
  const Eigen::Index k = static_cast<Eigen::Index>(group.size());
  Matrix a(static_cast<Eigen::Index>(coefficients.size()), k);
  Vector b(a.rows());
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    a.row(static_cast<Eigen::Index>(i)) = coefficients[i].transpose();
    b(static_cast<Eigen::Index>(i)) = bounds[i];
  }
  return HPolytope(std::move(a), std::move(b));
}

RelationalConstraints relational_bounds(const Network& net, const UncertaintySet& set, const LayerBounds& bounds,
                                        const NeuronGroup& group, const std::vector<Vector>& coefficients,
                                        RelaxationMode mode) {
  const std::size_t layer = group.layer;
  if (layer < 1 || layer > net.depth()) throw Error("neuron group layer out of range");
  const Eigen::Index width = net.width(layer);
  const Eigen::Index k = static_cast<Eigen::Index>(group.size());
  for (auto j : group.neurons)
    if (j < 0 || j >= width) throw Error("neuron group index out of range");

  Matrix objective = Matrix::Zero(static_cast<Eigen::Index>(coefficients.size()), width);
  for (std::size_t r = 0; r < coefficients.size(); ++r) {
    if (coefficients[r].size() != k) throw DimensionError("coefficient tuple length differs from the group size");
    for (Eigen::Index j = 0; j < k; ++j)
      objective(static_cast<Eigen::Index>(r), group.neurons[static_cast<std::size_t>(j)]) = coefficients[r](j);
  }
  const auto rels = relaxations_for(bounds, mode, layer - 1);
  const Interval enclosure = concretize(backsubstitute(net, rels, layer, objective), set);

  RelationalConstraints out{group, coefficients, {}};
  for (std::size_t r = 0; r < coefficients.size(); ++r) {
    double c = enclosure.upper(static_cast<Eigen::Index>(r));
    if (bounds.count() >= layer) {
      // The interval enclosure of the same sum, exact for interval tuples.
      const Interval& iv = bounds.layer(layer);
      double box = 0.0;
      for (Eigen::Index j = 0; j < k; ++j) {
        const Eigen::Index n = group.neurons[static_cast<std::size_t>(j)];
        const double a = coefficients[r](j);
        box += std::max(a * iv.lower(n), a * iv.upper(n));
      }
      c = std::min(c, box);
    }
    out.bounds.push_back(c);
  }
  return out;
}

std::vector<NeuronGroup> partition_neurons(const Interval& bounds, std::size_t layer, int k) {
  if (k < 1) throw Error("group size k must be positive");
  std::vector<Eigen::Index> unstable;
  for (Eigen::Index j = 0; j < bounds.size(); ++j)
    if (classify_neuron(bounds.lower(j), bounds.upper(j)) == NeuronStatus::Unstable) unstable.push_back(j);
  auto area = [&](Eigen::Index j) { return std::abs(bounds.lower(j) * bounds.upper(j)) / 2.0; };
  std::stable_sort(unstable.begin(), unstable.end(), [&](Eigen::Index a, Eigen::Index b) { return area(a) > area(b); });

  std::vector<NeuronGroup> groups;
  for (std::size_t i = 0; i < unstable.size(); i += static_cast<std::size_t>(k)) {
    NeuronGroup g{layer, {}};
    for (std::size_t j = i; j < std::min(unstable.size(), i + static_cast<std::size_t>(k)); ++j)
      g.neurons.push_back(unstable[j]);
    groups.push_back(std::move(g));
  }
  return groups;
}

HPolytope branch_polytope(const std::vector<int>& signs) {
  const Eigen::Index k = static_cast<Eigen::Index>(signs.size());
  HPolytope q(Matrix(0, 2 * k), Vector(0));
  for (Eigen::Index j = 0; j < k; ++j) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(2 * k);
    const bool positive = signs[static_cast<std::size_t>(j)] > 0;
    row(j) = positive ? -1.0 : 1.0;
    q.add_row(row, 0.0);
    // z_j - slope x_j = 0 as a pair of rows.
    row.setZero();
    row(k + j) = 1.0;
    if (positive) row(j) = -1.0;
    q.add_row(row, 0.0);
    q.add_row(-row, 0.0);
  }
  return q;
}

HPolytope group_hull(const RelationalConstraints& rel) {
  const Eigen::Index k = static_cast<Eigen::Index>(rel.group.size());
  if (k < 1 || k > kMaxGroupSize) throw Error("group size k must lie in [1, 4]");
  const HPolytope p = rel.polytope();
  Matrix lifted = Matrix::Zero(p.rows(), 2 * k);
  lifted.leftCols(k) = p.A;

  std::vector<VPolytope> parts;
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    std::vector<int> signs(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j) signs[static_cast<std::size_t>(j)] = (mask >> j) & 1u ? 1 : -1;
    const HPolytope q = branch_polytope(signs);
    Matrix a(p.rows() + q.rows(), 2 * k);
    a << lifted, q.A;
    Vector b(p.rows() + q.rows());
    b << p.b, q.b;
    parts.push_back(h_to_v(HPolytope(std::move(a), std::move(b))));
  }
  return hull_of_union(parts);
}

KReluSet build_krelu_set(const Network& net, const UncertaintySet& set, const LayerBounds& bounds, std::size_t layer,
                         int k, RelaxationMode mode) {
  if (k < 1 || k > kMaxGroupSize) throw Error("group size k must lie in [1, 4]");
  KReluSet out;
  out.layer = layer;
  out.groups = partition_neurons(bounds.layer(layer), layer, k);
  for (const auto& g : out.groups) {
    const auto rel = relational_bounds(net, set, bounds, g, octahedral_coefficients(static_cast<int>(g.size())), mode);
    out.hulls.push_back(group_hull(rel));
  }
  return out;
}

void add_krelu_constraints(RelaxedProgram& prog, const KReluSet& kset) {
  if (kset.layer < 1 || kset.layer >= prog.depth) throw Error("k-ReLU set layer has no ReLU variables in this program");
  for (std::size_t g = 0; g < kset.groups.size(); ++g) {
    const auto& group = kset.groups[g];
    const HPolytope& h = kset.hulls[g];
    const Eigen::Index k = static_cast<Eigen::Index>(group.size());
    for (Eigen::Index r = 0; r < h.rows(); ++r) {
      LpBuilder::Terms terms;
      for (Eigen::Index j = 0; j < k; ++j) {
        const Eigen::Index n = group.neurons[static_cast<std::size_t>(j)];
        if (h.A(r, j) != 0.0) terms.emplace_back(prog.x(kset.layer, n), h.A(r, j));
        if (h.A(r, k + j) != 0.0) terms.emplace_back(prog.z(kset.layer, n), h.A(r, k + j));
      }
      prog.lp.add_le(std::move(terms), h.b(r));
    }
  }
}

Interval refine_bounds(const Network& net, const UncertaintySet& set, const LayerBounds& bounds,
                       const std::vector<KReluSet>& ksets, std::size_t layer) {
  RelaxedProgram prog = relaxed_program(net, set, bounds, layer);
  for (const auto& ks : ksets)
    if (ks.layer < layer) add_krelu_constraints(prog, ks);
  LinearProgram lp = prog.lp.build();
  const Eigen::Index n = net.width(layer);
  Interval out{Vector(n), Vector(n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    for (double sign : {1.0, -1.0}) {
      lp.objective.setZero();
      lp.objective(prog.x(layer, j)) = sign;
      const LpOutcome res = solve_lp(lp);
      if (!res.optimal()) throw Error("bound refinement LP is not solvable; the relaxation is inconsistent");
      if (sign > 0.0)
        out.lower(j) = res.value;
      else
        out.upper(j) = -res.value;
    }
  }
  if (bounds.count() >= layer) out = out.intersect(bounds.layer(layer));
  return out;
}

}  // namespace relucert

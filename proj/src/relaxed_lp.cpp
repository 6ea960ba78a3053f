#include "relucert/relaxed_lp.hpp"

#include "relucert/propagators.hpp"

namespace relucert {

RelaxedProgram relaxed_program(const Network& net, const UncertaintySet& set, const LayerBounds& bounds,
                               std::size_t depth) {
  if (!set.is_polyhedral()) throw Error("the LP relaxation needs a box or l-inf input set");
  if (set.dim() != net.input_dim()) throw DimensionError("input set dimension does not match the network");
  if (depth < 1 || depth > net.depth()) throw Error("relaxed program depth out of range");
  if (bounds.count() + 1 < depth) throw Error("relaxed program needs bounds for every hidden layer below its depth");

  RelaxedProgram prog;
  prog.depth = depth;
  LpBuilder& lp = prog.lp;
  prog.x_offset.push_back(lp.add_variables(net.input_dim()));
  prog.z_offset.push_back(-1);
  const Vector lo = set.box_lower(), hi = set.box_upper();
  for (Eigen::Index j = 0; j < net.input_dim(); ++j) lp.set_bounds(prog.x(0, j), lo(j), hi(j));

  for (std::size_t i = 1; i <= depth; ++i) {
    const Eigen::Index n = static_cast<Eigen::Index>(net.width(i));
    prog.x_offset.push_back(lp.add_variables(n));
    const Matrix& w = net.weights(i);
    const Vector& b = net.bias(i);
    // x^(i) = W z^(i-1) + b, with z^(0) = x^(0).
    for (Eigen::Index r = 0; r < n; ++r) {
      LpBuilder::Terms terms{{prog.x(i, r), 1.0}};
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        if (w(r, c) == 0.0) continue;
        terms.emplace_back(i == 1 ? prog.x(0, c) : prog.z(i - 1, c), -w(r, c));
      }
      lp.add_eq(std::move(terms), b(r));
    }
    if (i == depth) break;

    prog.z_offset.push_back(lp.add_variables(n));
    const Interval& iv = bounds.layer(i);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double l = iv.lower(j), u = iv.upper(j);
      const Eigen::Index xv = prog.x(i, j), zv = prog.z(i, j);
      lp.set_bounds(xv, l, u);
      switch (classify_neuron(l, u)) {
        case NeuronStatus::StableNegative: lp.set_bounds(zv, 0.0, 0.0); break;
        case NeuronStatus::StablePositive:
          lp.set_bounds(zv, l, u);
          lp.add_eq({{zv, 1.0}, {xv, -1.0}}, 0.0);
          break;
        case NeuronStatus::Unstable: {
          const double s = u / (u - l);
          lp.set_bounds(zv, 0.0, u);
          lp.add_ge({{zv, 1.0}, {xv, -1.0}}, 0.0);
          lp.add_le({{zv, 1.0}, {xv, -s}}, -s * l);
          break;
        }
      }
    }
  }
  return prog;
}

void set_layer_objective(RelaxedProgram& prog, const Vector& coef) {
  for (Eigen::Index j = 0; j < coef.size(); ++j) prog.lp.set_objective(prog.x(prog.depth, j), coef(j));
}

LinearProgram build_relaxed_lp(const Network& net, const UncertaintySet& set, const LayerBounds& bounds,
                               const MarginObjective& objective) {
  RelaxedProgram prog = relaxed_program(net, set, bounds, net.depth());
  set_layer_objective(prog, objective.c);
  return prog.lp.build();
}

Vector input_point(const RelaxedProgram& prog, const UncertaintySet& set, const Vector& solution) {
  const Eigen::Index n = set.dim();
  return solution.segment(prog.x(0, 0), n).cwiseMax(set.box_lower()).cwiseMin(set.box_upper());
}

}  // namespace relucert

#include "relucert/certifier.hpp"

#include <algorithm>
#include <chrono>
#include <limits>

#include "relucert/lp.hpp"
#include "relucert/multi_neuron.hpp"
#include "relucert/relaxed_lp.hpp"

namespace relucert {

namespace {

struct MethodName {
  Method method;
  const char* name;
};

constexpr MethodName kMethodNames[] = {
    {Method::Ibp, "ibp"},           {Method::FastLin, "fastlin"},        {Method::Crown, "crown"},
    {Method::Lp, "lp"},             {Method::LpRecursive, "lp-recursive"}, {Method::KRelu, "krelu"},
    {Method::Exact, "exact"},
};

using Clock = std::chrono::steady_clock;

}  // namespace

Method parse_method(const std::string& name) {
  for (const auto& m : kMethodNames)
    if (name == m.name) return m.method;
  throw Error("unknown method '" + name + "'");
}

std::string to_string(Method m) {
  for (const auto& e : kMethodNames)
    if (e.method == m) return e.name;
  return "?";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Certified: return "certified";
    case Verdict::Falsified: return "falsified";
    case Verdict::Unknown: break;
  }
  return "unknown";
}

double CertificationResult::min_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : margins) m = std::min(m, v);
  return m;
}

namespace {

void check_inputs(const Network& net, const Vector& x, const UncertaintySet& set) {
  if (x.size() != net.input_dim() || set.dim() != net.input_dim())
    throw DimensionError("input and set dimensions must match the network input");
  if ((set.center() - x).cwiseAbs().maxCoeff() > 1e-12) throw Error("the uncertainty set must be centred at the input");
}

CertificationResult start(const Network& net, const Vector& x, const UncertaintySet& set, Method method) {
  check_inputs(net, x, set);
  CertificationResult r;
  r.method = method;
  r.objectives = margin_objectives(net, x);
  return r;
}

// Keeps `candidate` as counterexample if it flips the prediction.
void offer_counterexample(CertificationResult& r, const Network& net, Eigen::Index khat, const Vector& candidate) {
  if (r.counterexample) return;
  if (predicted_class(net, candidate) != khat) r.counterexample = candidate;
}

void finish(CertificationResult& r, Clock::time_point t0) {
  const bool all_positive = std::all_of(r.margins.begin(), r.margins.end(), [](double m) { return m > 0.0; });
  if (all_positive) {
    r.verdict = Verdict::Certified;
    r.counterexample.reset();
  } else {
    r.verdict = r.counterexample ? Verdict::Falsified : Verdict::Unknown;
  }
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
}

Matrix objective_matrix(const std::vector<MarginObjective>& objs) {
  Matrix c(static_cast<Eigen::Index>(objs.size()), objs.front().c.size());
  for (std::size_t i = 0; i < objs.size(); ++i) c.row(static_cast<Eigen::Index>(i)) = objs[i].c.transpose();
  return c;
}

// Margin LPs over a relaxed program; LP minimizers that flip the class become counterexamples.
void solve_margins(CertificationResult& r, const Network& net, const Vector& x, const UncertaintySet& set,
                   RelaxedProgram& prog) {
  const Eigen::Index khat = predicted_class(net, x);
  LinearProgram lp = prog.lp.build();
  for (const auto& obj : r.objectives) {
    lp.objective.setZero();
    lp.objective.segment(prog.x(prog.depth, 0), obj.c.size()) = obj.c;
    const LpOutcome out = solve_lp(lp);
    if (!out.optimal()) throw Error("margin LP is not solvable; the relaxation is inconsistent");
    const double margin = out.value + obj.c0;
    r.margins.push_back(margin);
    if (margin <= 0.0) offer_counterexample(r, net, khat, input_point(prog, set, out.x));
  }
}

}  // namespace

CertificationResult certify_greedy(const Network& net, const Vector& x, const UncertaintySet& set, Method method) {
  const auto t0 = Clock::now();
  CertificationResult r = start(net, x, set, method);
  const std::size_t L = net.depth();
  if (method == Method::Ibp) {
    LayerBounds b = ibp_bounds(net, set);
    const Interval logits = b.layer(L);
    for (const auto& obj : r.objectives)
      r.margins.push_back(pos_part(obj.c).dot(logits.lower) + neg_part(obj.c).dot(logits.upper) + obj.c0);
    b.truncate(L - 1);
    r.bounds = std::move(b);
  } else if (method == Method::FastLin || method == Method::Crown) {
    const RelaxationMode mode = method == Method::FastLin ? RelaxationMode::same_slope() : RelaxationMode::adaptive();
    r.bounds = linear_bounds(net, set, mode);
    const auto rels = relaxations_for(r.bounds, mode, L - 1);
    const Interval out = concretize(backsubstitute(net, rels, L, objective_matrix(r.objectives)), set);
    for (std::size_t i = 0; i < r.objectives.size(); ++i)
      r.margins.push_back(out.lower(static_cast<Eigen::Index>(i)) + r.objectives[i].c0);
  } else {
    throw Error("certify_greedy expects ibp, fastlin or crown");
  }
  finish(r, t0);
  return r;
}

CertificationResult certify_lp(const Network& net, const Vector& x, const UncertaintySet& set,
                               const LayerBounds& bounds) {
  const auto t0 = Clock::now();
  CertificationResult r = start(net, x, set, Method::Lp);
  r.bounds = bounds;
  r.bounds.truncate(std::min(bounds.count(), net.depth() - 1));
  RelaxedProgram prog = relaxed_program(net, set, r.bounds, net.depth());
  solve_margins(r, net, x, set, prog);
  finish(r, t0);
  return r;
}

CertificationResult certify_lp(const Network& net, const Vector& x, const UncertaintySet& set, RelaxationMode mode) {
  check_inputs(net, x, set);
  return certify_lp(net, x, set, linear_bounds(net, set, mode));
}

LayerBounds lp_recursive_bounds(const Network& net, const UncertaintySet& set, std::size_t neuron_cap,
                                bool include_output) {
  const std::size_t L = net.depth();
  std::size_t hidden = 0;
  for (std::size_t i = 1; i < L; ++i) hidden += static_cast<std::size_t>(net.width(i));
  if (hidden > neuron_cap) throw BudgetExceeded("recursive LP bounds: too many hidden neurons");
  LayerBounds b = ibp_bounds(net, set);
  b.truncate(std::min<std::size_t>(1, L - 1));
  for (std::size_t i = 2; i < L; ++i) b.push_back(refine_bounds(net, set, b, {}, i));
  if (include_output) b.push_back(refine_bounds(net, set, b, {}, L));
  return b;
}

CertificationResult certify_lp_recursive(const Network& net, const Vector& x, const UncertaintySet& set,
                                         std::size_t neuron_cap) {
  const auto t0 = Clock::now();
  check_inputs(net, x, set);
  CertificationResult r = certify_lp(net, x, set, lp_recursive_bounds(net, set, neuron_cap));
  r.method = Method::LpRecursive;
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

namespace {

struct KReluAnalysis {
  LayerBounds bounds;
  std::vector<KReluSet> ksets;
};

// Layer by layer: hulls on the refined bounds so far, then greedy and LP
// bounds for the next layer.
KReluAnalysis krelu_analysis(const Network& net, const UncertaintySet& set, int k, RelaxationMode mode) {
  const std::size_t L = net.depth();
  const LayerBounds base = linear_bounds(net, set, mode);
  KReluAnalysis a;
  if (L > 1) a.bounds.push_back(base.layer(1));
  for (std::size_t l = 1; l + 1 <= L; ++l) {
    a.ksets.push_back(build_krelu_set(net, set, a.bounds, l, k, mode));
    if (l + 1 == L) break;
    const auto rels = relaxations_for(a.bounds, mode, l);
    const Eigen::Index n = net.width(l + 1);
    const Interval greedy = concretize(backsubstitute(net, rels, l + 1, Matrix::Identity(n, n)), set);
    LayerBounds candidate = a.bounds;
    candidate.push_back(greedy.intersect(base.layer(l + 1)));
    a.bounds.push_back(refine_bounds(net, set, candidate, a.ksets, l + 1));
  }
  return a;
}

}  // namespace

LayerBounds krelu_bounds(const Network& net, const UncertaintySet& set, int k, RelaxationMode mode,
                         bool include_output) {
  KReluAnalysis a = krelu_analysis(net, set, k, mode);
  if (include_output) a.bounds.push_back(refine_bounds(net, set, a.bounds, a.ksets, net.depth()));
  return a.bounds;
}

CertificationResult certify_krelu(const Network& net, const Vector& x, const UncertaintySet& set, int k,
                                  RelaxationMode mode) {
  const auto t0 = Clock::now();
  CertificationResult r = start(net, x, set, Method::KRelu);
  const KReluAnalysis a = krelu_analysis(net, set, k, mode);
  r.bounds = a.bounds;
  RelaxedProgram prog = relaxed_program(net, set, a.bounds, net.depth());
  for (const auto& ks : a.ksets) add_krelu_constraints(prog, ks);
  solve_margins(r, net, x, set, prog);
  finish(r, t0);
  return r;
}

CertificationResult exact_certify(const Network& net, const Vector& x, const UncertaintySet& set,
                                  std::size_t budget) {
  const auto t0 = Clock::now();
  CertificationResult r = start(net, x, set, Method::Exact);
  const std::size_t L = net.depth();
  r.bounds = linear_bounds(net, set, RelaxationMode::adaptive());

  struct Neuron {
    std::size_t layer;
    Eigen::Index index;
    double score;
  };
  std::vector<Neuron> order;
  for (std::size_t i = 1; i < L; ++i) {
    const Interval& iv = r.bounds.layer(i);
    for (Eigen::Index j = 0; j < iv.size(); ++j)
      if (classify_neuron(iv.lower(j), iv.upper(j)) == NeuronStatus::Unstable)
        order.push_back({i, j, std::abs(iv.lower(j) * iv.upper(j))});
  }
  if (order.size() > budget) throw BudgetExceeded("exact verification: unstable neurons exceed the budget");
  std::stable_sort(order.begin(), order.end(), [](const Neuron& a, const Neuron& b) { return a.score > b.score; });

  const Eigen::Index khat = predicted_class(net, x);
  for (const auto& obj : r.objectives) {
    double best = std::numeric_limits<double>::infinity();
    Vector best_x = x;

    auto search = [&](auto&& self, const LayerBounds& bounds) -> void {
      RelaxedProgram prog = relaxed_program(net, set, bounds, L);
      set_layer_objective(prog, obj.c);
      const LpOutcome out = solve_lp(prog.lp.build());
      if (out.status == LpStatus::Infeasible) return;
      if (!out.optimal()) throw Error("branch LP is unbounded");
      const Vector x0 = input_point(prog, set, out.x);
      const double attained = evaluate(obj, forward(net, x0));
      if (attained < best) {
        best = attained;
        best_x = x0;
      }
      const double lower = out.value + obj.c0;
      if (lower >= best - 1e-9 * (1.0 + std::abs(best))) return;
      for (const auto& nrn : order) {
        const Interval& iv = bounds.layer(nrn.layer);
        if (classify_neuron(iv.lower(nrn.index), iv.upper(nrn.index)) != NeuronStatus::Unstable) continue;
        // Visit the side the LP optimum already sits on first.
        const bool positive_first = out.x(prog.x(nrn.layer, nrn.index)) >= 0.0;
        for (int pass = 0; pass < 2; ++pass) {
          const bool positive = (pass == 0) == positive_first;
          LayerBounds child = bounds;
          Interval& civ = child.layer(nrn.layer);
          if (positive)
            civ.lower(nrn.index) = 0.0;
          else
            civ.upper(nrn.index) = 0.0;
          self(self, child);
        }
        return;
      }
      // Leaf: every ReLU is fixed and the LP is exact; its optimum was recorded above.
    };
    search(search, r.bounds);
    r.margins.push_back(best);
    if (best <= 0.0) offer_counterexample(r, net, khat, best_x);
  }
  finish(r, t0);
  return r;
}

CertificationResult certify(const Network& net, const Vector& x, const UncertaintySet& set,
                            const CertifyOptions& options) {
  switch (options.method) {
    case Method::Ibp:
    case Method::FastLin:
    case Method::Crown: return certify_greedy(net, x, set, options.method);
    case Method::Lp: return certify_lp(net, x, set, options.mode);
    case Method::LpRecursive: return certify_lp_recursive(net, x, set);
    case Method::KRelu: return certify_krelu(net, x, set, options.k, options.mode);
    case Method::Exact: return exact_certify(net, x, set, options.budget);
  }
  throw Error("unknown method");
}

}  // namespace relucert

// Acceptance checks: one PASS/FAIL line per criterion.
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "relucert/certifier.hpp"
#include "relucert/lp.hpp"
#include "relucert/multi_neuron.hpp"
#include "relucert/polytope.hpp"
#include "relucert/propagators.hpp"
#include "relucert/relaxed_lp.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace relucert;
using relucert::testing::Rng;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
  std::printf("criterion %2d: %s  %s (%s)\n", id, ok ? "PASS" : "FAIL", what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// Sweep shape: 2-4 affine layers, hidden widths 2..kMaxHidden, 2-4 inputs, 2-4 classes.
constexpr int kSweepNets = 50;
constexpr int kSweepInputs = 20;
constexpr int kSweepSamples = 1000;
constexpr int kMaxHidden = 12;
constexpr double kSlack = 1e-6;

Network sweep_network(int index, Rng& rng) {
  const int depth = rng.integer(2, 4);
  std::vector<Eigen::Index> widths{rng.integer(2, 4)};
  for (int i = 1; i < depth; ++i) widths.push_back(rng.integer(2, kMaxHidden));
  widths.push_back(rng.integer(2, 4));
  return random_network(static_cast<std::uint64_t>(5000 + index), widths);
}

struct SweepStats {
  long instances = 0;
  long exact_instances = 0;
  long soundness_violations = 0;
  long ordering_violations = 0;
  long ordering_checks = 0;
  long false_certifications = 0;
  long bad_counterexamples = 0;
  long certified_checked = 0;
  long falsified_checked = 0;
  double closed_form_max_diff = 0.0;
  double seconds = 0.0;
  std::string first_problem;
};

void note(SweepStats& s, const std::string& what) {
  if (s.first_problem.empty()) s.first_problem = what;
}

double max_diff(const LayerBounds& a, const LayerBounds& b) {
  double d = 0.0;
  for (std::size_t i = 1; i <= a.count(); ++i)
    d = std::max({d, (a.layer(i).lower - b.layer(i).lower).cwiseAbs().maxCoeff(),
                  (a.layer(i).upper - b.layer(i).upper).cwiseAbs().maxCoeff()});
  return d;
}

SweepStats run_sweep() {
  SweepStats s;
  const auto t0 = Clock::now();
  Rng rng(20240601);
  for (int n = 0; n < kSweepNets; ++n) {
    const Network net = sweep_network(n, rng);
    for (int i = 0; i < kSweepInputs; ++i) {
      const Vector x = relucert::testing::uniform_vector(rng, net.input_dim(), -1.0, 1.0);
      for (double eps : {0.01, 0.1}) {
        const auto set = UncertaintySet::ball(x, eps, Norm::Linf);
        ++s.instances;

        std::vector<CertificationResult> results;
        results.reserve(8);
        for (Method m : {Method::Ibp, Method::FastLin, Method::Crown, Method::Lp, Method::LpRecursive,
                         Method::KRelu}) {
          CertifyOptions opt;
          opt.method = m;
          results.push_back(certify(net, x, set, opt));
        }
        // The two-step LP on the Fast-Lin bounds, for the ordering check.
        const CertificationResult& fastlin = results[1];
        results.push_back(certify_lp(net, x, set, fastlin.bounds));
        const CertificationResult& lp_on_fastlin = results.back();
        std::optional<CertificationResult> exact;
        try {
          exact = exact_certify(net, x, set, 16);
          ++s.exact_instances;
        } catch (const BudgetExceeded&) {
        }

        // Closed-form same-slope bounds against generic backsubstitution.
        s.closed_form_max_diff =
            std::max(s.closed_form_max_diff, max_diff(same_slope_closed_form(net, set, true),
                                                      linear_bounds(net, set, RelaxationMode::same_slope(), true)));

        // Soundness against sampled inputs.
        std::vector<const CertificationResult*> all;
        for (const auto& r : results) all.push_back(&r);
        if (exact) all.push_back(&*exact);
        for (int k = 0; k < kSweepSamples; ++k) {
          const Vector p = relucert::testing::sample_in_set(set, rng);
          const auto trace = forward_trace(net, p);
          for (const auto* r : all) {
            for (std::size_t l = 1; l <= r->bounds.count(); ++l) {
              const Interval& b = r->bounds.layer(l);
              const Vector& v = trace[l - 1];
              if ((v.array() < b.lower.array() - kSlack).any() || (v.array() > b.upper.array() + kSlack).any()) {
                ++s.soundness_violations;
                note(s, fmt("%s bound escaped: net %d input %d eps %g layer %zu", to_string(r->method).c_str(), n,
                            i, eps, l));
              }
            }
            for (std::size_t o = 0; o < r->objectives.size(); ++o)
              if (evaluate(r->objectives[o], trace.back()) < r->margins[o] - kSlack) {
                ++s.soundness_violations;
                note(s, fmt("%s margin undercut: net %d input %d eps %g", to_string(r->method).c_str(), n, i, eps));
              }
          }
        }

        // Falsification certificates must hold on their own.
        for (const auto* r : all) {
          if (r->verdict != Verdict::Falsified) continue;
          ++s.falsified_checked;
          const bool ok = r->counterexample && predicted_class(net, *r->counterexample) != predicted_class(net, x) &&
                          ((*r->counterexample - x).cwiseAbs().array() <= eps + 1e-12).all();
          if (!ok) {
            ++s.bad_counterexamples;
            note(s, fmt("bad counterexample from %s: net %d input %d", to_string(r->method).c_str(), n, i));
          }
        }
        if (!exact) continue;

        for (std::size_t o = 0; o < exact->margins.size(); ++o) {
          ++s.ordering_checks;
          if (fastlin.margins[o] > lp_on_fastlin.margins[o] + kSlack ||
              lp_on_fastlin.margins[o] > exact->margins[o] + kSlack) {
            ++s.ordering_violations;
            note(s, fmt("ordering violated: net %d input %d eps %g", n, i, eps));
          }
        }
        for (const auto* r : all) {
          if (r->verdict != Verdict::Certified) continue;
          ++s.certified_checked;
          if (exact->verdict != Verdict::Certified) {
            ++s.false_certifications;
            note(s, fmt("false certification by %s: net %d input %d", to_string(r->method).c_str(), n, i));
          }
        }
      }
    }
  }
  s.seconds = seconds_since(t0);
  return s;
}

void criterion_k1_equivalence() {
  Rng rng(77);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Network net = sweep_network(100 + t, rng);
    const Vector x = relucert::testing::uniform_vector(rng, net.input_dim(), -1.0, 1.0);
    const auto set = UncertaintySet::ball(x, 0.1, Norm::Linf);
    // certify_lp on the same LP-refined hidden bounds that k = 1 produces.
    const auto lp = certify_lp(net, x, set, lp_recursive_bounds(net, set));
    const auto k1 = certify_krelu(net, x, set, 1, RelaxationMode::adaptive());
    for (std::size_t o = 0; o < lp.margins.size(); ++o) worst = std::max(worst, std::abs(lp.margins[o] - k1.margins[o]));
  }
  report(4, worst <= 1e-6, "k=1 k-ReLU margins equal certify_lp on LP-refined bounds, 20 instances",
         fmt("max |difference| %.2e", worst));
}

void criterion_multi_neuron_gain() {
  const auto t0 = Clock::now();
  const Network net = relucert::testing::correlated_net();
  const auto set = UncertaintySet::ball(Vector::Zero(2), 1.0, Norm::Linf);

  const double k2 = krelu_bounds(net, set, 2, RelaxationMode::adaptive(), true).layer(2).upper(0);
  const LayerBounds greedy = linear_bounds(net, set, RelaxationMode::adaptive());
  const auto tri = solve_lp(build_relaxed_lp(net, set, greedy, MarginObjective{Vector{{-1.0}}, 0.0, 0}));
  const double triangle = tri.optimal() ? -tri.value : std::nan("");

  // Exact maximum: one LP per activation pattern of the two hidden neurons.
  double exact = -kInf;
  for (int mask = 0; mask < 4; ++mask) {
    LpBuilder b(2);
    b.set_bounds(0, -1.0, 1.0);
    b.set_bounds(1, -1.0, 1.0);
    Vector objective = Vector::Zero(2);
    for (Eigen::Index j = 0; j < 2; ++j) {
      const LpBuilder::Terms pre{{0, net.weights(1)(j, 0)}, {1, net.weights(1)(j, 1)}};
      if (mask >> j & 1) {
        b.add_ge(pre, 0.0);
        objective -= net.weights(1).row(j).transpose();
      } else {
        b.add_le(pre, 0.0);
      }
    }
    b.set_objective(0, objective(0));
    b.set_objective(1, objective(1));
    const auto out = solve_lp(b.build());
    if (out.optimal()) exact = std::max(exact, -out.value);
  }
  const double secs = seconds_since(t0);
  const bool ok = std::abs(k2 - 2.0) <= 1e-6 && std::abs(triangle - 3.0) <= 1e-6 && std::abs(exact - 2.0) <= 1e-6 &&
                  secs < 1.0;
  report(5, ok, "correlated net output upper bound: k=2 vs triangle LP vs branch enumeration",
         fmt("k=2 %.9f, triangle %.9f, exact %.9f, %.3f s", k2, triangle, exact, secs));
}

void criterion_triangle() {
  const Interval iv{Vector{{-1.0}}, Vector{{1.0}}};
  bool ok = true;
  std::string detail;
  for (RelaxationMode mode : {RelaxationMode::adaptive(), RelaxationMode::same_slope()}) {
    const ReluRelaxation r = relu_relaxation(iv, mode);
    ok = ok && r.upper_slope(0) == 0.5 && r.upper_offset(0) == 0.5;
    detail += fmt("%sslope %.17g offset %.17g", detail.empty() ? "" : "; ", r.upper_slope(0), r.upper_offset(0));
  }
  report(6, ok, "triangle upper edge for l=-1, u=1", detail);
}

void criterion_polytope() {
  Rng rng(31337);
  long disagreements = 0, points = 0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index d = 1 + t % 4;
    const HPolytope p = relucert::testing::random_bounded(rng, d);
    const HPolytope q = v_to_h(h_to_v(p));
    for (int s = 0; s < 10000; ++s) {
      const Vector x = relucert::testing::uniform_vector(rng, d, -1.3, 1.3);
      ++points;
      if (!relucert::testing::agree(p, q, x, 1e-7)) ++disagreements;
    }
  }
  long hull_mismatches = 0;
  for (int t = 0; t < 50; ++t) {
    std::vector<VPolytope> parts;
    std::vector<relucert::testing::Point2> all;
    const int n_parts = rng.integer(1, 4);
    for (int k = 0; k < n_parts; ++k) {
      VPolytope part{2, {}, {}};
      const int n = rng.integer(1, 4);
      for (int i = 0; i < n; ++i) {
        const Vector v = relucert::testing::uniform_vector(rng, 2, -2.0, 2.0);
        part.vertices.push_back(v);
        all.emplace_back(v(0), v(1));
      }
      parts.push_back(part);
    }
    const HPolytope h = hull_of_union(parts);
    const auto hull = relucert::testing::convex_hull_2d(all);
    bool match = true;
    for (const auto& v : all) match = match && h.contains(Vector{{v.x(), v.y()}}, 1e-7);
    for (int s = 0; s < 2000; ++s) {
      const Vector v = relucert::testing::uniform_vector(rng, 2, -2.5, 2.5);
      const relucert::testing::Point2 pt(v(0), v(1));
      if (h.contains(v, -1e-7) && !relucert::testing::in_convex_polygon(hull, pt, 1e-7)) match = false;
      if (hull.size() >= 3 && relucert::testing::in_convex_polygon(hull, pt, -1e-7) && !h.contains(v, 1e-7))
        match = false;
    }
    if (!match) ++hull_mismatches;
  }
  report(7, disagreements == 0 && hull_mismatches == 0,
         "DD round trip on 100 H-polytopes (d<=4, 1e4 points) and 50 planar hull-of-union cases",
         fmt("%ld/%ld membership disagreements, %ld/50 hull mismatches", disagreements, points, hull_mismatches));
}

void criterion_lp() {
  Rng rng(8080);
  int mismatches = 0, duality = 0, solved = 0;
  for (int t = 0; t < 200; ++t) {
    const LinearProgram lp = relucert::testing::random_bounded_lp(rng, false);
    const auto out = solve_lp(lp);
    const auto oracle = relucert::testing::brute_force_lp(lp);
    if (!oracle || !out.optimal()) {
      if (oracle.has_value() != out.optimal()) ++mismatches;
      continue;
    }
    ++solved;
    if (std::abs(out.value - *oracle) > 1e-6) ++mismatches;
    if (dual_objective(lp, out) > out.value + 1e-9) ++duality;
  }
  report(8, mismatches == 0 && duality == 0 && solved == 200,
         "simplex vs vertex enumeration on 200 bounded LPs (<=6 variables), weak duality",
         fmt("%d solved, %d mismatches, %d weak-duality violations", solved, mismatches, duality));
}

void criterion_octahedral() {
  bool ok = true;
  std::string detail;
  for (int k = 1; k <= 3; ++k) {
    const auto a = octahedral_coefficients(k);
    long intervals = 0;
    for (const auto& v : a) intervals += is_interval_tuple(v) ? 1 : 0;
    const long expected = static_cast<long>(std::pow(3, k)) - 1;
    ok = ok && static_cast<long>(a.size()) == expected && intervals == 2 * k;
    detail += fmt("%sk=%d: %zu tuples, %ld interval", detail.empty() ? "" : "; ", k, a.size(), intervals);
  }
  report(10, ok, "octahedral coefficient count 3^k - 1 with 2k interval tuples", detail);
}

}  // namespace

int main() {
  const SweepStats s = run_sweep();
  const std::string sweep = fmt("%ld instances, %ld with exact, %.1f s", s.instances, s.exact_instances, s.seconds);
  const std::string first = s.first_problem.empty() ? "" : "; first: " + s.first_problem;
  report(1, s.soundness_violations == 0 && s.seconds <= 60.0,
         "soundness sweep, 50 nets x 20 inputs x eps {0.01, 0.1}, 1000 samples, every method",
         fmt("%ld violations; ", s.soundness_violations) + sweep + first);
  report(2, s.ordering_violations == 0 && s.ordering_checks > 0,
         "fastlin <= lp <= exact on sweep instances with <= 16 unstable neurons",
         fmt("%ld objectives checked, %ld violations", s.ordering_checks, s.ordering_violations));
  report(3, s.false_certifications == 0 && s.bad_counterexamples == 0,
         "certified verdicts confirmed by exact, counterexamples forward-verify",
         fmt("%ld certified and %ld falsified checked, %ld false certifications, %ld bad counterexamples",
             s.certified_checked, s.falsified_checked, s.false_certifications, s.bad_counterexamples));
  criterion_k1_equivalence();
  criterion_multi_neuron_gain();
  criterion_triangle();
  criterion_polytope();
  criterion_lp();
  report(9, s.closed_form_max_diff <= 1e-9, "closed-form same-slope bounds equal backsubstitution on the sweep",
         fmt("max |difference| %.2e", s.closed_form_max_diff));
  criterion_octahedral();
  return failures == 0 ? 0 : 1;
}

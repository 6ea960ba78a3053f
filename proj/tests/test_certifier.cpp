#include "doctest.h"
#include "relucert/certifier.hpp"
#include "relucert/lp.hpp"
#include "relucert/relaxed_lp.hpp"
#include "support/oracles.hpp"

using namespace relucert;
using doctest::Approx;
using relucert::testing::correlated_net;
using relucert::testing::identity_net;
using relucert::testing::Rng;

namespace {

const UncertaintySet kUnitBall = UncertaintySet::ball(Vector::Zero(2), 1.0, Norm::Linf);

// The correlated network with a second, constant logit 1.5.
Network correlated_two_logit() {
  Layer l1{Matrix{{1.0, -1.0}, {1.0, 1.0}}, Vector::Zero(2)};
  Layer l2{Matrix{{1.0, 1.0}, {0.0, 0.0}}, Vector{{0.0, 1.5}}};
  return Network({l1, l2});
}

double lp_value(const LinearProgram& lp) {
  const auto out = solve_lp(lp);
  REQUIRE(out.optimal());
  return out.value;
}

}  // namespace

TEST_CASE("method and verdict names") {
  for (const char* name : {"ibp", "fastlin", "crown", "lp", "lp-recursive", "krelu", "exact"})
    CHECK(to_string(parse_method(name)) == name);
  CHECK_THROWS_AS(parse_method("milp"), Error);
  CHECK(to_string(Verdict::Falsified) == "falsified");
}

TEST_CASE("greedy certification of the identity network") {
  const Network net = identity_net(2);
  const Vector x{{1.0, 0.0}};
  for (Method m : {Method::Ibp, Method::FastLin, Method::Crown}) {
    const auto ok = certify_greedy(net, x, UncertaintySet::ball(x, 0.4, Norm::Linf), m);
    REQUIRE(ok.margins.size() == 1);
    CHECK(ok.margins[0] == Approx(0.2));
    CHECK(ok.verdict == Verdict::Certified);
    const auto bad = certify_greedy(net, x, UncertaintySet::ball(x, 0.6, Norm::Linf), m);
    CHECK(bad.margins[0] == Approx(-0.2));
    CHECK(bad.verdict == Verdict::Unknown);
    CHECK_FALSE(bad.counterexample);
  }
}

TEST_CASE("greedy margins on the correlated two-logit network") {
  const Network net = correlated_two_logit();
  const Vector x = Vector::Zero(2);
  CHECK(predicted_class(net, x) == 1);
  const auto fl = certify_greedy(net, x, kUnitBall, Method::FastLin);
  CHECK(fl.margins[0] == Approx(-1.5));
  const auto ibp = certify_greedy(net, x, kUnitBall, Method::Ibp);
  CHECK(ibp.margins[0] == Approx(1.5 - 4.0));
  CHECK_THROWS_AS(certify_greedy(net, x, kUnitBall, Method::Lp), Error);
  CHECK_THROWS_AS(certify_greedy(net, Vector{{0.1, 0.0}}, kUnitBall, Method::Ibp), Error);
}

TEST_CASE("relaxed LP of the correlated network") {
  const Network net = correlated_net();
  const LayerBounds b = linear_bounds(net, kUnitBall, RelaxationMode::same_slope());
  const double lo = lp_value(build_relaxed_lp(net, kUnitBall, b, MarginObjective{Vector{{1.0}}, 0.0, 0}));
  const double hi = -lp_value(build_relaxed_lp(net, kUnitBall, b, MarginObjective{Vector{{-1.0}}, 0.0, 0}));
  CHECK(lo == Approx(0.0).epsilon(1e-9));
  CHECK(hi == Approx(3.0));
  // The LP lower bound beats the Fast-Lin bound of -1 on the same instance.
  CHECK(lo >= linear_bounds(net, kUnitBall, RelaxationMode::same_slope(), true).layer(2).lower(0));

  const Vector x{{0.2, -0.4}};
  const auto clean = UncertaintySet::ball(x, 0.0, Norm::Linf);
  const LayerBounds cb = linear_bounds(net, clean, RelaxationMode::adaptive());
  CHECK(lp_value(build_relaxed_lp(net, clean, cb, MarginObjective{Vector{{1.0}}, 0.0, 0})) ==
        Approx(forward(net, x)(0)));

  CHECK_THROWS_AS(build_relaxed_lp(net, UncertaintySet::ball(Vector::Zero(2), 1.0, Norm::L2), b,
                                   MarginObjective{Vector{{1.0}}, 0.0, 0}),
                  Error);
}

TEST_CASE("LP, k-ReLU and exact verification of the correlated two-logit network") {
  const Network net = correlated_two_logit();
  const Vector x = Vector::Zero(2);
  const auto lp = certify_lp(net, x, kUnitBall, RelaxationMode::adaptive());
  CHECK(lp.margins[0] == Approx(1.5 - 3.0));
  const auto k2 = certify_krelu(net, x, kUnitBall, 2, RelaxationMode::adaptive());
  CHECK(k2.margins[0] == Approx(1.5 - 2.0));
  CHECK(k2.margins[0] >= lp.margins[0] + 0.5 - 1e-6);
  const auto k1 = certify_krelu(net, x, kUnitBall, 1, RelaxationMode::adaptive());
  CHECK(k1.margins[0] == Approx(lp.margins[0]));

  const auto ex = exact_certify(net, x, kUnitBall);
  CHECK(ex.margins[0] == Approx(-0.5));
  CHECK(ex.verdict == Verdict::Falsified);
  REQUIRE(ex.counterexample);
  CHECK(predicted_class(net, *ex.counterexample) != 1);
  CHECK((ex.counterexample->cwiseAbs().array() <= 1.0 + 1e-12).all());
}

TEST_CASE("exact minimum of the correlated output") {
  // Margin (z1 + z2 + 1) - 0, so the margin minus one is the output minimum.
  Layer l1{Matrix{{1.0, -1.0}, {1.0, 1.0}}, Vector::Zero(2)};
  Layer l2{Matrix{{1.0, 1.0}, {0.0, 0.0}}, Vector{{1.0, 0.0}}};
  const Network net({l1, l2});
  const auto ex = exact_certify(net, Vector::Zero(2), kUnitBall);
  CHECK(ex.margins[0] - 1.0 == Approx(0.0).epsilon(1e-9));
  CHECK(ex.verdict == Verdict::Certified);
  // Dense grid check of the same minimum.
  double grid_min = 1e300;
  for (int i = 0; i <= 40; ++i)
    for (int j = 0; j <= 40; ++j)
      grid_min = std::min(grid_min, forward(correlated_net(), Vector{{-1.0 + i / 20.0, -1.0 + j / 20.0}})(0));
  CHECK(grid_min == Approx(0.0));
}

TEST_CASE("lp-recursive bounds") {
  const Network net = correlated_net();
  const LayerBounds b = lp_recursive_bounds(net, kUnitBall);
  REQUIRE(b.count() == 1);
  CHECK(b.layer(1).lower.isApprox(Vector{{-2.0, -2.0}}));
  CHECK(b.layer(1).upper.isApprox(Vector{{2.0, 2.0}}));
  CHECK_THROWS_AS(lp_recursive_bounds(random_network(1, {2, 20, 20, 2}), kUnitBall, 30), BudgetExceeded);
}

TEST_CASE("stable networks are verified exactly by every LP method") {
  // Positive weights on a positive input region keep every ReLU active.
  Layer l1{Matrix{{1.0, 0.5}, {0.2, 1.0}}, Vector{{1.0, 1.0}}};
  Layer l2{Matrix{{1.0, -1.0}, {0.0, 1.0}}, Vector{{0.3, 0.0}}};
  const Network net({l1, l2});
  const Vector x{{1.0, 0.5}};
  const auto set = UncertaintySet::ball(x, 0.1, Norm::Linf);
  const auto obj = margin_objectives(net, x)[0];
  const double exact = relucert::testing::corner_min_margin(net, set, obj);
  CHECK(certify_lp(net, x, set, RelaxationMode::adaptive()).margins[0] == Approx(exact));
  CHECK(exact_certify(net, x, set).margins[0] == Approx(exact));
  CHECK(certify_krelu(net, x, set, 2, RelaxationMode::adaptive()).margins[0] == Approx(exact));
}

TEST_CASE("zero radius reproduces the clean margins") {
  const Network net = random_network(9, {3, 5, 4, 3});
  const Vector x{{0.1, 0.5, -0.3}};
  const auto set = UncertaintySet::ball(x, 0.0, Norm::Linf);
  const Vector logits = forward(net, x);
  for (Method m : {Method::Ibp, Method::FastLin, Method::Crown, Method::Lp, Method::LpRecursive, Method::KRelu,
                   Method::Exact}) {
    CertifyOptions opt;
    opt.method = m;
    const auto r = certify(net, x, set, opt);
    REQUIRE(r.margins.size() == r.objectives.size());
    for (std::size_t i = 0; i < r.margins.size(); ++i)
      CHECK(r.margins[i] == Approx(evaluate(r.objectives[i], logits)).epsilon(1e-7));
  }
}

TEST_CASE("exact verification respects its budget") {
  const Network net = random_network(3, {4, 12, 12, 3});
  const Vector x = Vector::Zero(4);
  CHECK_THROWS_AS(exact_certify(net, x, UncertaintySet::ball(x, 2.0, Norm::Linf), 2), BudgetExceeded);
}

TEST_CASE("ordering, soundness and verdict consistency on random networks") {
  Rng rng(101);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index depth = rng.integer(2, 3);
    std::vector<Eigen::Index> widths{rng.integer(2, 4)};
    for (Eigen::Index i = 1; i < depth; ++i) widths.push_back(rng.integer(2, 5));
    widths.push_back(rng.integer(2, 3));
    const Network net = random_network(static_cast<std::uint64_t>(1000 + trial), widths);
    const Vector x = relucert::testing::uniform_vector(rng, widths[0], -1.0, 1.0);
    const auto set = UncertaintySet::ball(x, rng.coin() ? 0.05 : 0.3, Norm::Linf);

    const auto fl = certify_greedy(net, x, set, Method::FastLin);
    const auto lp = certify_lp(net, x, set, fl.bounds);
    const auto kr = certify_krelu(net, x, set, 2, RelaxationMode::adaptive());
    const auto k1 = certify_krelu(net, x, set, 1, RelaxationMode::adaptive());
    const auto rec = certify_lp_recursive(net, x, set);
    if (linear_bounds(net, set, RelaxationMode::adaptive()).unstable_count(net.depth() - 1) > 12) continue;
    const auto ex = exact_certify(net, x, set);
    ++checked;
    for (std::size_t i = 0; i < fl.margins.size(); ++i) {
      CHECK(fl.margins[i] <= lp.margins[i] + 1e-6);
      CHECK(lp.margins[i] <= ex.margins[i] + 1e-6);
      CHECK(kr.margins[i] <= ex.margins[i] + 1e-6);
      CHECK(rec.margins[i] <= ex.margins[i] + 1e-6);
      CHECK(kr.margins[i] >= rec.margins[i] - 1e-6);
      CHECK(std::abs(k1.margins[i] - rec.margins[i]) <= 1e-6);
    }
    for (const auto* r : {&fl, &lp, &kr, &k1, &rec, &ex}) {
      if (r->verdict == Verdict::Certified) CHECK(ex.verdict == Verdict::Certified);
      if (r->verdict == Verdict::Falsified) {
        REQUIRE(r->counterexample);
        CHECK(predicted_class(net, *r->counterexample) != predicted_class(net, x));
        CHECK(((*r->counterexample - x).cwiseAbs().array() <= set.as_ball().radius + 1e-12).all());
      }
    }
    for (int s = 0; s < 200; ++s) {
      const Vector logits = forward(net, relucert::testing::sample_in_set(set, rng));
      for (std::size_t i = 0; i < ex.margins.size(); ++i) {
        CHECK(evaluate(ex.objectives[i], logits) >= ex.margins[i] - 1e-6);
        CHECK(evaluate(kr.objectives[i], logits) >= kr.margins[i] - 1e-6);
      }
    }
  }
  CHECK(checked > 20);
}

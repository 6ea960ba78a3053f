// End-to-end certification: greedy propagators, the triangle-relaxed LP,
// k-ReLU refined LPs and an exact branch-and-bound oracle.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "relucert/network.hpp"
#include "relucert/numerics.hpp"
#include "relucert/propagators.hpp"

namespace relucert {

enum class Method { Ibp, FastLin, Crown, Lp, LpRecursive, KRelu, Exact };

Method parse_method(const std::string& name);
std::string to_string(Method m);

enum class Verdict { Certified, Unknown, Falsified };

std::string to_string(Verdict v);

struct CertificationResult {
  Method method = Method::Ibp;
  std::vector<MarginObjective> objectives;
  /// Lower bound (exact minimum for Method::Exact) of each objective over the set.
  std::vector<double> margins;
  Verdict verdict = Verdict::Unknown;
  /// Set only for falsified results; lies in the set and changes the prediction.
  std::optional<Vector> counterexample;
  double seconds = 0.0;
  /// Pre-activation bounds of the hidden layers the method worked with.
  LayerBounds bounds;

  double min_margin() const;
};

/// Raised when an exact or recursive-LP run would exceed its size budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

inline constexpr std::size_t kDefaultExactBudget = 16;
inline constexpr std::size_t kRecursiveNeuronCap = 256;

/// IBP, Fast-Lin (same slope) or CROWN (adaptive slope).
CertificationResult certify_greedy(const Network& net, const Vector& x, const UncertaintySet& set, Method method);

/// Two-step LP verification on the given hidden-layer bounds.
CertificationResult certify_lp(const Network& net, const Vector& x, const UncertaintySet& set,
                               const LayerBounds& bounds);
/// Bounds from a greedy propagator.
CertificationResult certify_lp(const Network& net, const Vector& x, const UncertaintySet& set, RelaxationMode mode);

/// Bounds of every hidden neuron from its own relaxed LP, layer by layer;
/// the logits are bounded the same way when `include_output` is set.
LayerBounds lp_recursive_bounds(const Network& net, const UncertaintySet& set,
                                std::size_t neuron_cap = kRecursiveNeuronCap, bool include_output = false);
CertificationResult certify_lp_recursive(const Network& net, const Vector& x, const UncertaintySet& set,
                                         std::size_t neuron_cap = kRecursiveNeuronCap);

/// Hidden-layer bounds refined with k-ReLU hulls (plus the logits when
/// `include_output` is set).
LayerBounds krelu_bounds(const Network& net, const UncertaintySet& set, int k, RelaxationMode mode,
                         bool include_output = false);

/// k-ReLU: hidden bounds refined layer by layer with group hulls, then margin
/// LPs over the relaxation plus every hull.
CertificationResult certify_krelu(const Network& net, const Vector& x, const UncertaintySet& set, int k,
                                  RelaxationMode mode);

/// Branch and bound over the unstable ReLUs (at most `budget` of them).
CertificationResult exact_certify(const Network& net, const Vector& x, const UncertaintySet& set,
                                  std::size_t budget = kDefaultExactBudget);

struct CertifyOptions {
  Method method = Method::Crown;
  int k = 2;
  RelaxationMode mode = RelaxationMode::adaptive();
  std::size_t budget = kDefaultExactBudget;
};

CertificationResult certify(const Network& net, const Vector& x, const UncertaintySet& set,
                            const CertifyOptions& options);

}  // namespace relucert

// Fully-connected ReLU feedforward networks.
//
// Layers are numbered from 1: layer i maps z^(i-1) to the pre-activation
// x^(i) = W^(i) z^(i-1) + b^(i), with z^(0) = x^(0) the input and
// z^(i) = relu(x^(i)) for hidden layers. The last layer produces logits and
// has no activation.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "relucert/numerics.hpp"

namespace relucert {

struct Layer {
  Matrix weights;  // [n_i x n_{i-1}], one row per output neuron
  Vector bias;     // [n_i]
};

class Network {
 public:
  /// Validates dimension chaining and finiteness.
  explicit Network(std::vector<Layer> layers);

  std::size_t depth() const { return layers_.size(); }
  Eigen::Index input_dim() const { return layers_.front().weights.cols(); }
  Eigen::Index output_dim() const { return layers_.back().weights.rows(); }
  /// n_i for i in [0, depth()].
  Eigen::Index width(std::size_t i) const;

  /// W^(i), b^(i) for i in [1, depth()].
  const Layer& layer(std::size_t i) const;
  const Matrix& weights(std::size_t i) const { return layer(i).weights; }
  const Vector& bias(std::size_t i) const { return layer(i).bias; }

  const std::vector<Layer>& layers() const { return layers_; }

 private:
  std::vector<Layer> layers_;
};

/// f(x) = x^(L).
Vector forward(const Network& net, const Vector& x);

/// Pre-activations x^(1), ..., x^(L); entry i-1 holds layer i.
std::vector<Vector> forward_trace(const Network& net, const Vector& x);

/// Smallest index attaining the maximum logit.
Eigen::Index argmax(const Vector& logits);
Eigen::Index predicted_class(const Network& net, const Vector& x);

/// Linear objective c^T x^(L) + c0 over the logits.
struct MarginObjective {
  Vector c;
  double c0 = 0.0;
  /// Class k the predicted class is compared against.
  Eigen::Index target_class = 0;
};

/// Thrown when there is nothing to certify (fewer than two logits).
class NothingToCertify : public Error {
 public:
  using Error::Error;
};

/// e_khat - e_k for every k != khat(x), in increasing k.
std::vector<MarginObjective> margin_objectives(const Network& net, const Vector& x);

double evaluate(const MarginObjective& obj, const Vector& logits);

/// Seeded network with weights and biases uniform in [-scale, scale].
/// `widths` lists n_0, ..., n_L; the result is identical for a fixed seed on
/// every platform.
Network random_network(std::uint64_t seed, const std::vector<Eigen::Index>& widths, double scale = 1.0);

// JSON file format: {"layers": [{"weights": [[...], ...], "bias": [...]}, ...]}.
Network network_from_json(const std::string& text);
std::string network_to_json(const Network& net);
Network load_network(const std::filesystem::path& path);
void save_network(const Network& net, const std::filesystem::path& path);

}  // namespace relucert

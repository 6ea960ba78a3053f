#include "relucert/network.hpp"

#include <random>

namespace relucert {

Network::Network(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw Error("a network needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    const std::string where = "layer " + std::to_string(i + 1);
    if (l.weights.rows() == 0 || l.weights.cols() == 0) throw DimensionError(where + ": empty weight matrix");
    if (l.bias.size() != l.weights.rows()) throw DimensionError(where + ": bias length != rows(W)");
    if (i > 0 && l.weights.cols() != layers_[i - 1].weights.rows())
      throw DimensionError(where + ": columns(W) != rows of the previous layer");
    if (!l.weights.allFinite() || !l.bias.allFinite()) throw Error(where + ": non-finite entry");
  }
}

Eigen::Index Network::width(std::size_t i) const {
  if (i == 0) return input_dim();
  return layer(i).weights.rows();
}

const Layer& Network::layer(std::size_t i) const {
  if (i == 0 || i > layers_.size()) throw Error("layer index " + std::to_string(i) + " out of range");
  return layers_[i - 1];
}

std::vector<Vector> forward_trace(const Network& net, const Vector& x) {
  if (x.size() != net.input_dim())
    throw DimensionError("input has dimension " + std::to_string(x.size()) + ", network expects " +
                         std::to_string(net.input_dim()));
  std::vector<Vector> pre;
  pre.reserve(net.depth());
  Vector z = x;
  for (std::size_t i = 1; i <= net.depth(); ++i) {
    pre.push_back(net.weights(i) * z + net.bias(i));
    if (i < net.depth()) z = pre.back().cwiseMax(0.0);
  }
  return pre;
}

Vector forward(const Network& net, const Vector& x) { return forward_trace(net, x).back(); }

Eigen::Index argmax(const Vector& logits) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < logits.size(); ++k)
    if (logits(k) > logits(best)) best = k;
  return best;
}

Eigen::Index predicted_class(const Network& net, const Vector& x) { return argmax(forward(net, x)); }

std::vector<MarginObjective> margin_objectives(const Network& net, const Vector& x) {
  const Eigen::Index n = net.output_dim();
  if (n < 2) throw NothingToCertify("network has a single output; nothing to certify");
  const Eigen::Index top = predicted_class(net, x);
  std::vector<MarginObjective> out;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k == top) continue;
    Vector c = Vector::Zero(n);
    c(top) = 1.0;
    c(k) = -1.0;
    out.push_back({std::move(c), 0.0, k});
  }
  return out;
}

Network random_network(std::uint64_t seed, const std::vector<Eigen::Index>& widths, double scale) {
  if (widths.size() < 2) throw Error("random_network: need at least input and output widths");
  for (auto w : widths)
    if (w < 1) throw Error("random_network: widths must be positive");
  std::mt19937_64 rng(seed);
  // 53 random mantissa bits; std distributions are not portable across standard libraries.
  auto uniform = [&] { return scale * (2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0); };
  std::vector<Layer> layers;
  for (std::size_t i = 1; i < widths.size(); ++i) {
    Layer l{Matrix(widths[i], widths[i - 1]), Vector(widths[i])};
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = uniform();
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = uniform();
    layers.push_back(std::move(l));
  }
  return Network(std::move(layers));
}

double evaluate(const MarginObjective& obj, const Vector& logits) { return obj.c.dot(logits) + obj.c0; }

}  // namespace relucert

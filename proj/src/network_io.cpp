#include <fstream>
#include <sstream>

#include "json.hpp"

#include "relucert/network.hpp"

namespace relucert {

using nlohmann::json;

Network network_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("network JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("layers") || !doc["layers"].is_array())
    throw Error("network JSON: expected an object with a 'layers' array");

  std::vector<Layer> layers;
  for (const auto& entry : doc["layers"]) {
    if (!entry.contains("weights") || !entry.contains("bias")) throw Error("network JSON: layer needs 'weights' and 'bias'");
    const auto& rows = entry["weights"];
    const auto& bias = entry["bias"];
    if (!rows.is_array() || rows.empty() || !bias.is_array()) throw Error("network JSON: malformed layer");
    const auto n_out = static_cast<Eigen::Index>(rows.size());
    const auto n_in = static_cast<Eigen::Index>(rows.front().size());
    Layer l{Matrix(n_out, n_in), Vector(static_cast<Eigen::Index>(bias.size()))};
    for (Eigen::Index r = 0; r < n_out; ++r) {
      const auto& row = rows[static_cast<std::size_t>(r)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n_in)
        throw DimensionError("network JSON: ragged weight matrix");
      for (Eigen::Index c = 0; c < n_in; ++c) l.weights(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = bias[static_cast<std::size_t>(r)].get<double>();
    layers.push_back(std::move(l));
  }
  return Network(std::move(layers));
}

std::string network_to_json(const Network& net) {
  json layers = json::array();
  for (const auto& l : net.layers()) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) row.push_back(l.weights(r, c));
      rows.push_back(std::move(row));
    }
    json bias = json::array();
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) bias.push_back(l.bias(r));
    layers.push_back({{"weights", std::move(rows)}, {"bias", std::move(bias)}});
  }
  return json{{"layers", std::move(layers)}}.dump(2) + "\n";
}

Network load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open network file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return network_from_json(ss.str());
}

void save_network(const Network& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write network file " + path.string());
  out << network_to_json(net);
}

}  // namespace relucert

#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "relucert/multi_neuron.hpp"

namespace relucert::cli {

using nlohmann::ordered_json;

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::Certified: return kExitCertified;
    case Verdict::Falsified: return kExitFalsified;
    case Verdict::Unknown: break;
  }
  return kExitUnknown;
}

namespace {

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector from_json_array(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array()) throw Error(what + " must be a JSON array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(what + " must be a JSON array of numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(path + ": " + e.what());
  }
}

Vector parse_csv(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error("not a number: '" + item + "'");
    }
  }
  return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << text;
}

// Options shared by the commands that read a network, an input and a set.
struct InputArgs {
  std::string network;
  std::string input_path;
  std::string input_vec;
  double epsilon = 0.0;
  std::string norm = "inf";
  std::string box_path;

  void attach(CLI::App& app) {
    app.add_option("--network", network, "network JSON file")->required();
    auto* in = app.add_option("--input", input_path, "input vector as a JSON array");
    auto* vec = app.add_option("--input-vec", input_vec, "input vector as comma separated values");
    in->excludes(vec);
    auto* eps = app.add_option("--epsilon", epsilon, "ball radius");
    app.add_option("--norm", norm, "ball norm: 1, 2 or inf");
    auto* box = app.add_option("--box", box_path, "JSON file {\"lower\": [...], \"upper\": [...]}");
    eps->excludes(box);
  }

  Vector input() const {
    if (!input_path.empty()) return from_json_array(read_json(input_path), "input");
    if (!input_vec.empty()) return parse_csv(input_vec);
    throw Error("one of --input or --input-vec is required");
  }

  std::pair<UncertaintySet, SetSpec> set(const Vector& x) const {
    SetSpec spec;
    if (!box_path.empty()) {
      const auto j = read_json(box_path);
      if (!j.is_object() || !j.contains("lower") || !j.contains("upper"))
        throw Error(box_path + ": expected an object with \"lower\" and \"upper\"");
      spec.kind = "box";
      spec.lower = from_json_array(j["lower"], "box lower corner");
      spec.upper = from_json_array(j["upper"], "box upper corner");
      if (spec.lower.size() != x.size() || spec.upper.size() != x.size())
        throw DimensionError("box corners must match the input dimension");
      if ((spec.lower.array() > x.array()).any() || (spec.upper.array() < x.array()).any())
        throw Error("the box must contain the input");
      return {UncertaintySet::box(x, x - spec.lower, spec.upper - x), spec};
    }
    spec.kind = "ball";
    spec.norm = parse_norm(norm);
    spec.epsilon = epsilon;
    return {UncertaintySet::ball(x, epsilon, spec.norm), spec};
  }
};

RelaxationMode parse_mode(const std::string& mode) {
  if (mode == "crown") return RelaxationMode::adaptive();
  if (mode == "fastlin") return RelaxationMode::same_slope();
  throw Error("unknown mode '" + mode + "' (expected fastlin or crown)");
}

ordered_json set_json(const SetSpec& spec) {
  ordered_json j;
  j["kind"] = spec.kind;
  if (spec.kind == "box") {
    j["lower"] = to_std(spec.lower);
    j["upper"] = to_std(spec.upper);
  } else {
    j["norm"] = to_string(spec.norm);
    j["epsilon"] = spec.epsilon;
  }
  return j;
}

ordered_json bounds_json(const LayerBounds& b) {
  ordered_json layers = ordered_json::array();
  for (std::size_t i = 1; i <= b.count(); ++i) {
    ordered_json l;
    l["layer"] = i;
    l["lower"] = to_std(b.layer(i).lower);
    l["upper"] = to_std(b.layer(i).upper);
    layers.push_back(l);
  }
  return layers;
}

LayerBounds bounds_for(const std::string& method, const Network& net, const UncertaintySet& set, int k,
                       RelaxationMode mode) {
  if (method == "ibp") return ibp_bounds(net, set);
  if (method == "fastlin") return linear_bounds(net, set, RelaxationMode::same_slope(), true);
  if (method == "crown") return linear_bounds(net, set, RelaxationMode::adaptive(), true);
  if (method == "lp-recursive") return lp_recursive_bounds(net, set, kRecursiveNeuronCap, true);
  if (method == "krelu") return krelu_bounds(net, set, k, mode, true);
  throw Error("bounds: unsupported method '" + method + "'");
}

}  // namespace

ordered_json make_report(const std::string& network_path, const Vector& input, const SetSpec& spec,
                         const CertifyOptions& options, const CertificationResult& result) {
  ordered_json j;
  j["tool"] = "relucert";
  j["version"] = kToolVersion;
  j["network"] = network_path;
  j["input"] = to_std(input);
  j["set"] = set_json(spec);
  j["method"] = to_string(result.method);
  if (options.method == Method::KRelu) j["k"] = options.k;
  if (options.method == Method::Lp || options.method == Method::KRelu)
    j["mode"] = options.mode.kind == RelaxationMode::Kind::SameSlope ? "fastlin" : "crown";
  if (options.method == Method::Exact) j["budget"] = options.budget;
  ordered_json objs = ordered_json::array();
  for (std::size_t i = 0; i < result.objectives.size(); ++i) {
    ordered_json o;
    o["target_class"] = result.objectives[i].target_class;
    o["margin"] = result.margins[i];
    objs.push_back(o);
  }
  const auto khat = std::find(result.objectives.front().c.data(),
                              result.objectives.front().c.data() + result.objectives.front().c.size(), 1.0) -
                    result.objectives.front().c.data();
  j["predicted_class"] = khat;
  j["objectives"] = objs;
  j["min_margin"] = result.min_margin();
  j["verdict"] = to_string(result.verdict);
  j["counterexample"] = result.counterexample ? ordered_json(to_std(*result.counterexample)) : ordered_json(nullptr);
  j["timings"] = {{"seconds", result.seconds}};
  return j;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"relucert: robustness certification for ReLU networks", "relucert"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  InputArgs cert_in;
  std::string method = "crown", mode = "crown", output;
  int k = 2;
  std::size_t budget = kDefaultExactBudget;
  std::uint64_t seed = 0;
  auto* certify_cmd = app.add_subcommand("certify", "certify robustness at one input");
  cert_in.attach(*certify_cmd);
  certify_cmd->add_option("--method", method, "ibp, fastlin, crown, lp, lp-recursive, krelu or exact");
  certify_cmd->add_option("--k", k, "k-ReLU group size (1-4)");
  certify_cmd->add_option("--mode", mode, "greedy bounds feeding lp and krelu: fastlin or crown");
  certify_cmd->add_option("--budget", budget, "exact: maximum number of unstable neurons");
  certify_cmd->add_option("--output", output, "report path (default: stdout)");
  certify_cmd->add_option("--seed", seed, "unused by certify; accepted for uniformity");

  InputArgs bounds_in;
  std::string bounds_methods = "ibp,fastlin,crown", bounds_mode = "crown", bounds_output;
  int bounds_k = 2;
  auto* bounds_cmd = app.add_subcommand("bounds", "pre-activation bounds per layer and method");
  bounds_in.attach(*bounds_cmd);
  bounds_cmd->add_option("--method", bounds_methods, "comma separated: ibp, fastlin, crown, lp-recursive, krelu");
  bounds_cmd->add_option("--k", bounds_k, "k-ReLU group size");
  bounds_cmd->add_option("--mode", bounds_mode, "greedy bounds feeding krelu");
  bounds_cmd->add_option("--output", bounds_output, "JSON path (default: stdout)");

  InputArgs vis_in;
  SvgOptions svg;
  std::string vis_output;
  auto* vis_cmd = app.add_subcommand("visualize", "SVG of the relaxations of a two-neuron layer");
  vis_in.attach(*vis_cmd);
  vis_cmd->add_option("--layer", svg.layer, "hidden layer to draw (1-based)");
  vis_cmd->add_option("--k", svg.k, "k-ReLU group size");
  vis_cmd->add_option("--seed", svg.seed, "seed for sampling the ReLU image");
  vis_cmd->add_option("--samples", svg.samples, "number of sampled inputs");
  vis_cmd->add_option("--output", vis_output, "SVG path (default: stdout)");

  std::string widths_csv, gen_output;
  std::uint64_t gen_seed = 0;
  int depth = 0;
  double scale = 1.0;
  auto* gen_cmd = app.add_subcommand("generate", "write a seeded random network");
  gen_cmd->add_option("--seed", gen_seed, "random seed");
  gen_cmd->add_option("--widths", widths_csv, "layer widths n0,...,nL")->required();
  gen_cmd->add_option("--depth", depth, "number of affine layers (checked against --widths)");
  gen_cmd->add_option("--scale", scale, "weights and biases are uniform in [-scale, scale]");
  gen_cmd->add_option("--output", gen_output, "network path (default: stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }

  try {
    if (certify_cmd->parsed()) {
      const Network net = load_network(cert_in.network);
      const Vector x = cert_in.input();
      const auto [set, spec] = cert_in.set(x);
      CertifyOptions opts;
      opts.method = parse_method(method);
      opts.k = k;
      opts.mode = parse_mode(mode);
      opts.budget = budget;
      const CertificationResult r = certify(net, x, set, opts);
      write_text(output, make_report(cert_in.network, x, spec, opts, r).dump(2) + "\n", out);
      return exit_code(r.verdict);
    }
    if (bounds_cmd->parsed()) {
      const Network net = load_network(bounds_in.network);
      const Vector x = bounds_in.input();
      const auto [set, spec] = bounds_in.set(x);
      ordered_json j;
      j["tool"] = "relucert";
      j["version"] = kToolVersion;
      j["network"] = bounds_in.network;
      j["input"] = to_std(x);
      j["set"] = set_json(spec);
      ordered_json methods;
      std::stringstream ss(bounds_methods);
      std::string m;
      while (std::getline(ss, m, ','))
        methods[m] = bounds_json(bounds_for(m, net, set, bounds_k, parse_mode(bounds_mode)));
      j["methods"] = methods;
      write_text(bounds_output, j.dump(2) + "\n", out);
      return 0;
    }
    if (vis_cmd->parsed()) {
      const Network net = load_network(vis_in.network);
      const Vector x = vis_in.input();
      const auto [set, spec] = vis_in.set(x);
      write_text(vis_output, render_svg(net, set, svg), out);
      return 0;
    }
    if (gen_cmd->parsed()) {
      const Vector w = parse_csv(widths_csv);
      std::vector<Eigen::Index> widths;
      for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (w(i) < 1 || w(i) != std::floor(w(i))) throw Error("widths must be positive integers");
        widths.push_back(static_cast<Eigen::Index>(w(i)));
      }
      if (widths.size() < 2) throw Error("--widths needs at least an input and an output width");
      if (depth != 0 && static_cast<std::size_t>(depth) + 1 != widths.size())
        throw Error("--depth disagrees with the number of widths");
      write_text(gen_output, network_to_json(random_network(gen_seed, widths, scale)), out);
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace relucert::cli

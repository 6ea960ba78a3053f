#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "relucert/certifier.hpp"
#include "relucert/multi_neuron.hpp"

namespace py = pybind11;
using namespace relucert;

namespace {

py::list bounds_to_list(const LayerBounds& b) {
  py::list out;
  for (std::size_t i = 1; i <= b.count(); ++i) out.append(py::make_tuple(b.layer(i).lower, b.layer(i).upper));
  return out;
}

RelaxationMode parse_mode(const std::string& mode) {
  if (mode == "crown") return RelaxationMode::adaptive();
  if (mode == "fastlin") return RelaxationMode::same_slope();
  throw Error("unknown mode '" + mode + "' (expected fastlin or crown)");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Robustness certification for ReLU networks";

  py::register_exception<Error>(m, "Error", PyExc_ValueError);
  py::register_exception<BudgetExceeded>(m, "BudgetExceeded", PyExc_RuntimeError);

  py::class_<Network>(m, "Network")
      .def(py::init([](const std::vector<std::pair<Matrix, Vector>>& layers) {
             std::vector<Layer> ls;
             for (const auto& [w, b] : layers) ls.push_back(Layer{w, b});
             return Network(std::move(ls));
           }),
           py::arg("layers"), "Build from a list of (weights, bias) pairs.")
      .def_static("from_json", &network_from_json, py::arg("text"))
      .def_static("load", [](const std::string& path) { return load_network(path); }, py::arg("path"))
      .def_static("random", &random_network, py::arg("seed"), py::arg("widths"), py::arg("scale") = 1.0)
      .def("to_json", [](const Network& n) { return network_to_json(n); })
      .def_property_readonly("depth", &Network::depth)
      .def_property_readonly("widths",
                             [](const Network& n) {
                               std::vector<Eigen::Index> w;
                               for (std::size_t i = 0; i <= n.depth(); ++i) w.push_back(n.width(i));
                               return w;
                             })
      .def("weights", [](const Network& n, std::size_t i) { return Matrix(n.weights(i)); }, py::arg("layer"))
      .def("bias", [](const Network& n, std::size_t i) { return Vector(n.bias(i)); }, py::arg("layer"))
      .def("forward", [](const Network& n, const Vector& x) { return forward(n, x); }, py::arg("x"))
      .def("predict", [](const Network& n, const Vector& x) { return predicted_class(n, x); }, py::arg("x"));

  py::class_<UncertaintySet>(m, "UncertaintySet")
      .def_static(
          "ball",
          [](const Vector& c, double eps, const std::string& norm) {
            return UncertaintySet::ball(c, eps, parse_norm(norm));
          },
          py::arg("center"), py::arg("epsilon"), py::arg("norm") = "inf")
      .def_static(
          "box", [](const Vector& c, const Vector& lo, const Vector& hi) { return UncertaintySet::box(c, lo, hi); },
          py::arg("center"), py::arg("eps_lo"), py::arg("eps_hi"))
      .def_property_readonly("center", [](const UncertaintySet& s) { return Vector(s.center()); })
      .def_property_readonly("dim", &UncertaintySet::dim);

  m.def(
      "certify",
      [](const Network& net, const Vector& x, const UncertaintySet& set, const std::string& method, int k,
         const std::string& mode, std::size_t budget) {
        CertifyOptions opt;
        opt.method = parse_method(method);
        opt.k = k;
        opt.mode = parse_mode(mode);
        opt.budget = budget;
        const CertificationResult r = certify(net, x, set, opt);
        py::dict d;
        d["method"] = to_string(r.method);
        std::vector<Eigen::Index> targets;
        for (const auto& o : r.objectives) targets.push_back(o.target_class);
        d["target_classes"] = targets;
        d["margins"] = r.margins;
        d["min_margin"] = r.min_margin();
        d["verdict"] = to_string(r.verdict);
        d["counterexample"] = r.counterexample ? py::cast(*r.counterexample) : py::none();
        d["seconds"] = r.seconds;
        d["bounds"] = bounds_to_list(r.bounds);
        return d;
      },
      py::arg("network"), py::arg("x"), py::arg("set"), py::arg("method") = "crown", py::arg("k") = 2,
      py::arg("mode") = "crown", py::arg("budget") = kDefaultExactBudget,
      "Certify robustness at x. Returns a dict with margins, verdict and bounds.");

  m.def(
      "bounds",
      [](const Network& net, const UncertaintySet& set, const std::string& method, int k, const std::string& mode) {
        if (method == "ibp") return bounds_to_list(ibp_bounds(net, set));
        if (method == "fastlin") return bounds_to_list(linear_bounds(net, set, RelaxationMode::same_slope(), true));
        if (method == "crown") return bounds_to_list(linear_bounds(net, set, RelaxationMode::adaptive(), true));
        if (method == "lp-recursive") return bounds_to_list(lp_recursive_bounds(net, set, kRecursiveNeuronCap, true));
        if (method == "krelu") return bounds_to_list(krelu_bounds(net, set, k, parse_mode(mode), true));
        throw Error("bounds: unsupported method '" + method + "'");
      },
      py::arg("network"), py::arg("set"), py::arg("method") = "crown", py::arg("k") = 2, py::arg("mode") = "crown",
      "Pre-activation (lower, upper) arrays for every layer, logits included.");

  m.def(
      "octahedral_coefficients", [](int k) { return octahedral_coefficients(k); }, py::arg("k"));
}

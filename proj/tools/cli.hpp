// Command-line front end. Exit codes: 0 certified, 1 unknown, 2 falsified,
// 3 and above for errors.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "relucert/certifier.hpp"
#include "relucert/lp.hpp"

namespace relucert::cli {

inline constexpr int kExitCertified = 0;
inline constexpr int kExitUnknown = 1;
inline constexpr int kExitFalsified = 2;
inline constexpr int kExitError = 3;

inline constexpr const char* kToolVersion = "0.1.0";

int exit_code(Verdict v);

/// Runs one command line (argv[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Description of the input set for reports.
struct SetSpec {
  std::string kind;  // "ball" or "box"
  Norm norm = Norm::Linf;
  double epsilon = 0.0;
  Vector lower;  // box corners, kind == "box"
  Vector upper;
};

nlohmann::ordered_json make_report(const std::string& network_path, const Vector& input, const SetSpec& spec,
                                   const CertifyOptions& options, const CertificationResult& result);

/// SVG view of the relaxations of a two-neuron layer.
struct SvgOptions {
  std::size_t layer = 1;
  int k = 2;
  int samples = 2000;
  std::uint64_t seed = 0;
};

std::string render_svg(const Network& net, const UncertaintySet& set, const SvgOptions& options);

/// Exact projection of the LP's feasible set onto two variables, counter-clockwise.
std::vector<Eigen::Vector2d> project_2d(const LinearProgram& lp, Eigen::Index i, Eigen::Index j);

}  // namespace relucert::cli

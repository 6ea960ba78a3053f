#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "relucert/multi_neuron.hpp"
#include "relucert/relaxed_lp.hpp"

namespace relucert::cli {

namespace {

using Point = Eigen::Vector2d;

constexpr double kCanvas = 600.0;
constexpr double kMargin = 0.05 * kCanvas;
constexpr int kMaxProjectionQueries = 4096;

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Andrew's monotone chain, counter-clockwise, collinear points dropped.
std::vector<Point> convex_hull(std::vector<Point> pts, double tol) {
  std::sort(pts.begin(), pts.end(),
            [](const Point& a, const Point& b) { return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y()); });
  pts.erase(std::unique(pts.begin(), pts.end(), [&](const Point& a, const Point& b) { return (a - b).norm() <= tol; }),
            pts.end());
  if (pts.size() < 3) return pts;
  double extent = 1.0;
  for (const auto& p : pts) extent = std::max(extent, p.cwiseAbs().maxCoeff());
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= tol * extent) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= tol * extent) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

Point support_point(LinearProgram& lp, Eigen::Index i, Eigen::Index j, const Point& dir) {
  lp.objective.setZero();
  lp.objective(i) -= dir.x();
  lp.objective(j) -= dir.y();
  const LpOutcome res = solve_lp(lp);
  if (res.status == LpStatus::Unbounded) throw Error("projection of an unbounded set");
  if (!res.optimal()) throw Error("projection of an empty set");
  return {res.x(i), res.x(j)};
}

struct Group {
  const char* id;
  const char* label;
  const char* color;
  std::vector<Point> points;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s(buf);
  return s == "-0.000" ? "0.000" : s;
}

// Points of the ReLU image at `layer`: box corners plus seeded uniform samples.
std::vector<Point> relu_image(const Network& net, const UncertaintySet& set, std::size_t layer, int samples,
                              std::uint64_t seed) {
  const Vector lo = set.box_lower(), hi = set.box_upper();
  const Eigen::Index n = lo.size();
  std::vector<Vector> inputs;
  if (n <= 12) {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
      Vector c(n);
      for (Eigen::Index d = 0; d < n; ++d) c(d) = (mask >> d) & 1 ? hi(d) : lo(d);
      inputs.push_back(c);
    }
  }
  std::mt19937_64 rng(seed);
  for (int s = 0; s < samples; ++s) {
    Vector v(n);
    for (Eigen::Index d = 0; d < n; ++d) {
      // 53-bit uniform in [0, 1], platform independent unlike std distributions.
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      v(d) = lo(d) + u * (hi(d) - lo(d));
    }
    inputs.push_back(v);
  }
  std::vector<Point> out;
  out.reserve(inputs.size());
  for (const auto& v : inputs) {
    const Vector pre = forward_trace(net, v)[layer - 1];
    out.emplace_back(std::max(pre(0), 0.0), std::max(pre(1), 0.0));
  }
  return out;
}

}  // namespace

std::vector<Point> project_2d(const LinearProgram& program, Eigen::Index i, Eigen::Index j) {
  LinearProgram lp = program;
  std::vector<Point> ring;
  for (const Point& dir : {Point(1, 0), Point(0, 1), Point(-1, 0), Point(0, -1)}) {
    const Point p = support_point(lp, i, j, dir);
    if (ring.empty() || (p - ring.back()).norm() > 1e-12) ring.push_back(p);
  }
  while (ring.size() > 1 && (ring.front() - ring.back()).norm() <= 1e-12) ring.pop_back();
  if (ring.size() == 1) return ring;

  double scale = 1.0;
  for (const auto& p : ring) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double tol = 1e-9 * scale;

  // Refine each edge by querying its outward normal until no point lies beyond it.
  int queries = 0;
  std::vector<Point> done;
  auto refine = [&](auto&& self, const Point& a, const Point& b) -> void {
    const Point edge = b - a;
    if (edge.norm() <= tol || queries >= kMaxProjectionQueries) return;
    const Point normal = Point(edge.y(), -edge.x()) / edge.norm();
    ++queries;
    const Point v = support_point(lp, i, j, normal);
    if ((v - a).dot(normal) <= tol) return;
    self(self, a, v);
    done.push_back(v);
    self(self, v, b);
  };
  for (std::size_t k = 0; k < ring.size(); ++k) {
    done.push_back(ring[k]);
    refine(refine, ring[k], ring[(k + 1) % ring.size()]);
  }
  return convex_hull(done, tol);
}

std::string render_svg(const Network& net, const UncertaintySet& set, const SvgOptions& options) {
  const std::size_t layer = options.layer;
  if (layer < 1 || layer >= net.depth()) throw Error("visualize: --layer must name a hidden layer");
  if (net.width(layer) != 2) throw Error("visualize: the layer must have exactly 2 neurons");
  if (!set.is_polyhedral()) throw Error("visualize: needs a box or an l-inf ball");
  if (set.dim() != net.input_dim()) throw DimensionError("visualize: input dimension mismatch");
  if (options.samples < 0) throw Error("visualize: --samples must be non-negative");

  const LayerBounds bounds = linear_bounds(net, set, RelaxationMode::adaptive());

  // Pre-activation set of the layer.
  RelaxedProgram pre = relaxed_program(net, set, bounds, layer);
  const LinearProgram pre_lp = pre.lp.build();

  // Optimal single-neuron relaxation: the triangle at the layer.
  RelaxedProgram tri = relaxed_program(net, set, bounds, layer + 1);
  const LinearProgram tri_lp = tri.lp.build();

  // Same-slope band: s x <= z <= s (x - l) on unstable neurons, exact on stable ones.
  RelaxedProgram band = relaxed_program(net, set, bounds, layer);
  const Eigen::Index zb = band.lp.add_variables(2);
  const Interval& b = bounds.layer(layer);
  for (Eigen::Index n = 0; n < 2; ++n) {
    const ReluRelaxation r = relu_relaxation(Interval{b.lower.segment(n, 1), b.upper.segment(n, 1)},
                                             RelaxationMode::same_slope());
    band.lp.add_ge({{zb + n, 1.0}, {band.x(layer, n), -r.lower_slope(0)}}, r.lower_offset(0));
    band.lp.add_le({{zb + n, 1.0}, {band.x(layer, n), -r.upper_slope(0)}}, r.upper_offset(0));
  }
  const LinearProgram band_lp = band.lp.build();

  // Triangle plus the k-ReLU hulls of the layer.
  RelaxedProgram kr = relaxed_program(net, set, bounds, layer + 1);
  add_krelu_constraints(kr, build_krelu_set(net, set, bounds, layer, options.k, RelaxationMode::adaptive()));
  const LinearProgram kr_lp = kr.lp.build();

  std::vector<Group> groups{
      {"input-set", "pre-activation set", "#4c72b0", project_2d(pre_lp, pre.x(layer, 0), pre.x(layer, 1))},
      {"relu-image", "ReLU image (sampled hull)", "#55a868", {}},
      {"snr-band", "same-slope relaxation", "#dd8452", project_2d(band_lp, zb, zb + 1)},
      {"snr-opt", "triangle relaxation", "#c44e52", project_2d(tri_lp, tri.z(layer, 0), tri.z(layer, 1))},
      {"krelu-hull", "k-ReLU relaxation", "#8172b3", project_2d(kr_lp, kr.z(layer, 0), kr.z(layer, 1))},
  };
  {
    std::vector<Point> image = relu_image(net, set, layer, options.samples, options.seed);
    if (layer == 1) {
      // Vertices of the exact first-layer pre-activation set map into the image.
      for (const auto& p : groups[0].points) image.emplace_back(std::max(p.x(), 0.0), std::max(p.y(), 0.0));
    }
    double scale = 1.0;
    for (const auto& p : image) scale = std::max(scale, p.cwiseAbs().maxCoeff());
    groups[1].points = convex_hull(std::move(image), 1e-9 * scale);
  }

  Point lo(0.0, 0.0), hi(0.0, 0.0);
  bool first = true;
  for (const auto& g : groups)
    for (const auto& p : g.points) {
      lo = first ? p : lo.cwiseMin(p);
      hi = first ? p : hi.cwiseMax(p);
      first = false;
    }
  for (int a = 0; a < 2; ++a) {
    if (hi(a) - lo(a) < 1e-9) {
      lo(a) -= 1.0;
      hi(a) += 1.0;
    }
  }
  const double span = kCanvas - 2.0 * kMargin;
  auto map = [&](const Point& p) {
    return Point(kMargin + (p.x() - lo.x()) / (hi.x() - lo.x()) * span,
                 kCanvas - kMargin - (p.y() - lo.y()) / (hi.y() - lo.y()) * span);
  };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"600\" height=\"600\" "
         "viewBox=\"0 0 600 600\">\n"
      << "  <title>relaxations of layer " << layer << "</title>\n"
      << "  <desc>data x: [" << fmt(lo.x()) << ", " << fmt(hi.x()) << "], data y: [" << fmt(lo.y()) << ", "
      << fmt(hi.y()) << "]; pre-activations (x1, x2) and post-activations (z1, z2) share the axes</desc>\n"
      << "  <rect x=\"0\" y=\"0\" width=\"600\" height=\"600\" fill=\"white\"/>\n";
  svg << "  <g id=\"axes\" stroke=\"#444444\" stroke-width=\"1\">\n";
  if (lo.y() <= 0.0 && hi.y() >= 0.0) {
    const double y = map(Point(0.0, 0.0)).y();
    svg << "    <line x1=\"" << fmt(kMargin) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(kCanvas - kMargin)
        << "\" y2=\"" << fmt(y) << "\"/>\n";
  }
  if (lo.x() <= 0.0 && hi.x() >= 0.0) {
    const double x = map(Point(0.0, 0.0)).x();
    svg << "    <line x1=\"" << fmt(x) << "\" y1=\"" << fmt(kMargin) << "\" x2=\"" << fmt(x) << "\" y2=\""
        << fmt(kCanvas - kMargin) << "\"/>\n";
  }
  svg << "    <text x=\"" << fmt(kCanvas - kMargin) << "\" y=\"" << fmt(kCanvas - 8.0)
      << "\" font-size=\"12\" text-anchor=\"end\" stroke=\"none\">x1 / z1</text>\n"
      << "    <text x=\"8\" y=\"" << fmt(kMargin - 10.0) << "\" font-size=\"12\" stroke=\"none\">x2 / z2</text>\n"
      << "  </g>\n";

  double legend_y = 16.0;
  for (const auto& g : groups) {
    svg << "  <g id=\"" << g.id << "\" fill=\"" << g.color << "\" fill-opacity=\"0.3\" stroke=\"" << g.color
        << "\" stroke-width=\"1.5\">\n"
        << "    <title>" << g.label << "</title>\n";
    if (g.points.size() == 1) {
      const Point c = map(g.points.front());
      svg << "    <circle cx=\"" << fmt(c.x()) << "\" cy=\"" << fmt(c.y()) << "\" r=\"4\"/>\n";
    } else {
      svg << "    <polygon points=\"";
      for (std::size_t p = 0; p < g.points.size(); ++p) {
        const Point c = map(g.points[p]);
        svg << (p ? " " : "") << fmt(c.x()) << "," << fmt(c.y());
      }
      svg << "\"/>\n";
    }
    svg << "  </g>\n";
    svg << "  <text x=\"" << fmt(kCanvas - 8.0) << "\" y=\"" << fmt(legend_y) << "\" font-size=\"12\" "
        << "text-anchor=\"end\" fill=\"" << g.color << "\">" << g.label << "</text>\n";
    legend_y += 16.0;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace relucert::cli

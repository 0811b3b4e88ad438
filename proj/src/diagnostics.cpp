#include "rbmm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rbmm/errors.hpp"

namespace rbmm {

namespace {

struct Stats {
  double max = -std::numeric_limits<double>::infinity();
  double min = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  int count = 0;

  void add(double v) {
    max = std::max(max, v);
    min = std::min(min, v);
    sum += v;
    ++count;
  }
};

ProbeReport at_most(std::string quantity, const Stats& s, double target, std::uint64_t seed) {
  ProbeReport r;
  r.quantity = std::move(quantity);
  r.max = s.max;
  r.min = s.min;
  r.mean = s.count ? s.sum / s.count : 0.0;
  r.target = target;
  r.comparison = "max_at_most";
  r.samples = s.count;
  r.seed = seed;
  r.pass = s.count > 0 && s.max <= target;
  return r;
}

}  // namespace

nlohmann::json ProbeReport::to_json() const {
  return {{"quantity", quantity}, {"max", max},         {"min", min},
          {"mean", mean},         {"target", target},   {"comparison", comparison},
          {"pass", pass},         {"samples", samples}, {"seed", seed}};
}

ProbeReport fd_gradient_check(const ValueFn& value, const RgradFn& rgrad, const Point& x, double h,
                              std::uint64_t seed, int directions, double threshold,
                              std::string quantity) {
  if (!(h >= 1e-8 && h <= 1e-2)) throw ContractViolation("fd_gradient_check: h must lie in [1e-8, 1e-2]");
  if (directions < 1) throw ContractViolation("fd_gradient_check: need at least one direction");
  Rng rng(seed);
  const TangentVector g = rgrad(x);
  const double gnorm = std::max(norm(x, g), 1e-12);
  Stats s;
  for (int k = 0; k < directions; ++k) {
    const TangentVector eta = random_unit_tangent(x, rng);
    const double fp = value(retract(x, scale(eta, h)));
    const double fm = value(retract(x, scale(eta, -h)));
    const double fd = (fp - fm) / (2.0 * h);
    s.add(std::abs(fd - inner(x, g, eta)) / gnorm);
  }
  return at_most(std::move(quantity), s, threshold, seed);
}

ProbeReport gsmooth_probe(const Manifold& manifold, const RgradFn& rgrad,
                          const std::vector<std::pair<Point, Point>>& pairs, double target,
                          double tolerance, std::uint64_t seed, std::string quantity) {
  if (!manifold.has_exp_log())
    throw UnsupportedKind("gsmooth_probe needs exact transport, unavailable on " + manifold.describe());
  Stats s;
  for (const auto& [x, y] : pairs) {
    const double d = dist(x, y);
    if (d < 1e-12) continue;
    const TangentVector gx = rgrad(x);
    const TangentVector gy = transport(y, x, rgrad(y));
    s.add(norm(x, TangentVector{x, gx.data - gy.data}) / d);
  }
  ProbeReport r;
  r.quantity = std::move(quantity);
  r.max = s.count ? s.max : 0.0;
  r.min = s.count ? s.min : 0.0;
  r.mean = s.count ? s.sum / s.count : 0.0;
  r.target = target;
  r.comparison = "max_near";
  r.samples = s.count;
  r.seed = seed;
  r.pass = s.count > 0 && std::abs(r.max - target) <= tolerance;
  return r;
}

std::vector<std::pair<Point, Point>> random_pairs(const Manifold& manifold, int count,
                                                  double max_dist, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<Point, Point>> out;
  for (int k = 0; k < count; ++k) {
    Point x = random_point(manifold, rng);
    const TangentVector v = random_unit_tangent(x, rng);
    Point y = exp_map(x, scale(v, uniform(rng, 0.0, max_dist)));
    out.emplace_back(std::move(x), std::move(y));
  }
  return out;
}

std::pair<Point, Point> circle_equilateral_pair() {
  const Manifold c = Manifold::sphere(2);
  const double a = 2.0 * std::numbers::pi / 3.0;
  Matrix x(2, 1), y(2, 1);
  x << std::cos(a), std::sin(a);
  y << std::cos(a), -std::sin(a);
  return {Point{c, x}, Point{c, y}};
}

ProbeReport distance_equivalence_probe(const Manifold& manifold, int samples, std::uint64_t seed,
                                       double radius) {
  if (samples < 1) throw ContractViolation("distance_equivalence_probe: need samples >= 1");
  Rng rng(seed);
  Stats s;
  bool chord_below_arc = true;
  const bool sphere = manifold.kind() == ManifoldKind::Sphere;
  if (!sphere && manifold.kind() != ManifoldKind::SPD)
    throw UnsupportedKind("distance_equivalence_probe supports Sphere and SPD only");
  const Point id{manifold, sphere ? Matrix() : Matrix(Matrix::Identity(manifold.rows(), manifold.rows()))};
  for (int k = 0; k < samples; ++k) {
    const auto draw = [&] {
      if (sphere) return random_point(manifold, rng);
      return exp_map(id, scale(random_unit_tangent(id, rng), uniform(rng, 0.0, radius)));
    };
    const Point x = draw();
    const Point y = draw();
    const double d = dist(x, y);
    if (d < 1e-12) continue;
    const double chord = (x.data - y.data).norm();
    if (chord > d * (1.0 + 1e-12)) chord_below_arc = false;
    s.add(chord / d);
  }
  ProbeReport r;
  r.quantity = sphere ? "chord_over_arc_sphere" : "frobenius_over_geodesic_spd";
  r.max = s.max;
  r.min = s.min;
  r.mean = s.count ? s.sum / s.count : 0.0;
  r.samples = s.count;
  r.seed = seed;
  if (sphere) {
    r.target = 1.0;
    r.comparison = "max_at_most";
    r.pass = s.count > 0 && chord_below_arc;
  } else {
    r.target = 0.0;
    r.comparison = "min_above";
    r.pass = s.count > 0 && s.min > 0.0 && std::isfinite(s.max);
  }
  return r;
}

RateFit rate_fit(const std::vector<double>& seq) {
  if (seq.size() < 10) throw ContractViolation("rate_fit: need at least 10 entries");
  for (double v : seq)
    if (!(v > 0.0)) throw ContractViolation("rate_fit: entries must be positive");
  const std::size_t skip = seq.size() / 10;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  double n = 0;
  for (std::size_t i = skip; i < seq.size(); ++i) {
    const double x = std::log(static_cast<double>(i + 1));
    const double y = std::log(seq[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    n += 1;
  }
  const double vx = sxx - sx * sx / n;
  const double vy = syy - sy * sy / n;
  const double cxy = sxy - sx * sy / n;
  RateFit f;
  f.slope = cxy / vx;
  f.intercept = (sy - f.slope * sx) / n;
  f.r2 = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
  return f;
}

std::vector<double> truncate_at_floor(const std::vector<double>& seq, double floor) {
  std::vector<double> out;
  for (double v : seq) {
    if (v <= floor) break;
    out.push_back(v);
  }
  return out;
}

std::vector<ProbeReport> geometry_suite(const Manifold& m, int samples, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ProbeReport> out;
  const std::string tag = std::string(kind_name(m.kind())) + ":";
  const double reach = std::isfinite(m.injectivity_floor()) ? 0.5 * m.injectivity_floor() : 2.0;

  Stats tangent, retract_zero, on_manifold;
  for (int k = 0; k < samples; ++k) {
    const Point x = random_point(m, rng);
    const TangentVector v = proj_tangent(x, gaussian(rng, m.rows(), m.cols()));
    tangent.add(tangent_residual(v) + (proj_tangent(x, v.data).data - v.data).norm());
    retract_zero.add((retract(x, zero_tangent(x)).data - x.data).norm());
    on_manifold.add(is_valid_point(retract(x, scale(v, 0.3)), 1e-9) ? 0.0 : 1.0);
  }
  out.push_back(at_most(tag + "tangent_projection_idempotent", tangent, 1e-10, seed));
  out.push_back(at_most(tag + "retract_zero", retract_zero, 1e-12, seed));
  out.push_back(at_most(tag + "retract_stays_on_manifold", on_manifold, 0.0, seed));

  if (m.has_exp_log()) {
    Stats roundtrip, isometry, grad_fd, first_order, norm_is_dist;
    for (int k = 0; k < samples; ++k) {
      const Point x = random_point(m, rng);
      const double t = uniform(rng, 0.0, reach);
      const Point y = exp_map(x, scale(random_unit_tangent(x, rng), t));
      const TangentVector lg = log_map(x, y);
      roundtrip.add((exp_map(x, lg).data - y.data).norm());
      norm_is_dist.add(std::abs(norm(x, lg) - dist(x, y)));

      const TangentVector u = random_unit_tangent(x, rng);
      const TangentVector w = random_unit_tangent(x, rng);
      const TangentVector tu = transport(x, y, u);
      const TangentVector tw = transport(x, y, w);
      isometry.add(std::abs(inner(y, tu, tw) - inner(x, u, w)) + std::abs(inner(y, tu, tu) - 1.0));

      // d^2(., y) differentiated along a random geodesic through x.
      const TangentVector eta = random_unit_tangent(x, rng);
      const double h = 1e-5;
      const auto f = [&y](const Point& z) { const double d = dist(z, y); return d * d; };
      const double fd = (f(exp_map(x, scale(eta, h))) - f(exp_map(x, scale(eta, -h)))) / (2.0 * h);
      const TangentVector g = grad_dist_sq(x, y);
      grad_fd.add(std::abs(fd - inner(x, g, eta)) / std::max(norm(x, g), 1e-12));

      double worst = 0.0;
      for (double s : {1e-2, 1e-3, 1e-4}) {
        const TangentVector step = scale(eta, s);
        worst = std::max(worst, (retract(x, step).data - exp_map(x, step).data).norm() / s);
      }
      first_order.add(worst);
    }
    out.push_back(at_most(tag + "exp_log_roundtrip", roundtrip, 1e-8, seed));
    out.push_back(at_most(tag + "log_norm_equals_dist", norm_is_dist, 1e-8, seed));
    out.push_back(at_most(tag + "transport_isometry", isometry, 1e-10, seed));
    out.push_back(at_most(tag + "grad_dist_sq_fd", grad_fd, 1e-5, seed));
    out.push_back(at_most(tag + "retraction_first_order", first_order, 1e-3, seed));
  }

  if (m.kind() == ManifoldKind::Sphere || m.kind() == ManifoldKind::SPD) {
    ProbeReport r = distance_equivalence_probe(m, samples, seed + 1);
    r.quantity = tag + r.quantity;
    out.push_back(r);
  }

  if (m.kind() == ManifoldKind::Stiefel || m.kind() == ManifoldKind::FixedRank) {
    Stats optimality, frob, transported;
    for (int k = 0; k < samples; ++k) {
      const Matrix a = gaussian(rng, m.rows(), m.cols());
      const Point p = proj_manifold(m, a);
      const Point q = random_point(m, rng);
      optimality.add((a - p.data).norm() - (a - q.data).norm());
      frob.add(std::abs(dist(p, q) - (p.data - q.data).norm()));
      const TangentVector v = random_unit_tangent(p, rng);
      transported.add(tangent_residual(transport(p, q, v)));
    }
    out.push_back(at_most(tag + "projection_optimality", optimality, 1e-12, seed));
    out.push_back(at_most(tag + "dist_is_frobenius", frob, 1e-12, seed));
    out.push_back(at_most(tag + "projection_transport_tangent", transported, 1e-10, seed));
  }
  return out;
}

std::vector<ProbeReport> problem_gradient_probes(const BlockProblem& problem, const ProductPoint& state,
                                                 std::uint64_t seed, double h) {
  std::vector<ProbeReport> out;
  for (std::size_t i = 0; i < problem.blocks(); ++i) {
    const Marginal m = marginal_of(problem, state, i);
    out.push_back(fd_gradient_check([&m](const Point& p) { return m.value_at(p); },
                                    [&m](const Point& p) { return m.rgrad(p); }, state[i], h,
                                    seed + i, 20, 1e-4, "block_" + std::to_string(i) + "_gradient"));
  }
  return out;
}

}  // namespace rbmm

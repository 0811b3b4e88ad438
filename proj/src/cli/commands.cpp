#include "rbmm/cli/commands.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include <CLI11.hpp>

#include "rbmm/cli/experiment.hpp"
#include "rbmm/diagnostics.hpp"
#include "rbmm/errors.hpp"
#include "rbmm/io.hpp"

namespace rbmm::cli {

namespace fs = std::filesystem;

namespace {

template <class F>
int guarded(std::ostream& log, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ContractViolation& e) {
    log << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericalError& e) {
    log << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const fs::filesystem_error& e) {
    log << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

RunConfig load(const std::string& path, const Overrides& o) {
  RunConfig c = parse_config_file(path);
  if (o.seed) c.seed = *o.seed;
  if (o.out_dir) {
    if (o.out_dir->empty()) throw ConfigError("--out is empty");
    c.out_dir = *o.out_dir;
  }
  return c;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream f(path);
  if (!f) throw ContractViolation("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

fs::path prepare_out(const RunConfig& c) {
  const fs::path dir(c.out_dir);
  fs::create_directories(dir);
  return dir;
}

// Reference shapes for application-independent geometry checks.
std::vector<Manifold> reference_manifolds() {
  return {Manifold::euclidean(3, 2), Manifold::sphere(3), Manifold::stiefel(5, 2), Manifold::spd(3),
          Manifold::fixed_rank(5, 4, 2)};
}

std::vector<ProbeReport> geometry_probes(const RunConfig& c, const Experiment& e) {
  std::vector<Manifold> kinds = reference_manifolds();
  for (const Manifold& m : e.problem.manifolds)
    if (std::find(kinds.begin(), kinds.end(), m) == kinds.end()) kinds.push_back(m);
  std::vector<ProbeReport> out;
  for (const Manifold& m : kinds) {
    for (ProbeReport r : geometry_suite(m, c.probe_samples, c.seed)) {
      r.quantity = m.describe() + "/" + r.quantity;
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<ProbeReport> gradient_probes(const RunConfig& c, Experiment& e) {
  if (c.gradient_fault > 0.0) {
    auto egrad = e.problem.egrad;
    const double f = 1.0 + c.gradient_fault;
    e.problem.egrad = [egrad, f](const ProductPoint& s, std::size_t i) -> Matrix { return f * egrad(s, i); };
  }
  // Move off the initial point, which can be stationary for a block.
  Rng rng(c.seed);
  ProductPoint at = e.init;
  for (auto& x : at.blocks) x = retract(x, scale(random_unit_tangent(x, rng), 0.1));
  return problem_gradient_probes(e.problem, at, c.seed);
}

std::vector<ProbeReport> gsmooth_probes(const RunConfig& c) {
  std::vector<ProbeReport> out;
  // F = d^2(., p)/2 with p = (1, 0) on the unit circle.
  const Manifold circle = Manifold::sphere(2);
  const Point p{circle, (Matrix(2, 1) << 1.0, 0.0).finished()};
  const RgradFn circle_grad = [p](const Point& x) { return scale(grad_dist_sq(x, p), 0.5); };
  out.push_back(gsmooth_probe(circle, circle_grad, {circle_equilateral_pair()}, 2.0, 1e-3, c.seed,
                              "circle_half_sq_dist_ratio"));

  const Manifold plane = Manifold::euclidean(3);
  Rng rng(c.seed);
  const Point q = random_point(plane, rng);
  const RgradFn plane_grad = [q](const Point& x) { return scale(grad_dist_sq(x, q), 0.5); };
  out.push_back(gsmooth_probe(plane, plane_grad, random_pairs(plane, c.probe_samples, 2.0, c.seed), 1.0,
                              1e-9, c.seed, "euclidean_half_sq_dist_ratio"));

  // The squared distance is not 1-smooth on the sphere: some pair must exceed ratio 1.
  const Manifold sphere = Manifold::sphere(3);
  const Point s = random_point(sphere, rng);
  const RgradFn sphere_grad = [s](const Point& x) { return scale(grad_dist_sq(x, s), 0.5); };
  std::vector<std::pair<Point, Point>> pairs;
  for (auto& pr : random_pairs(sphere, c.probe_samples, 1.0, c.seed + 1)) {
    if (dist(pr.first, s) < 3.0 && dist(pr.second, s) < 3.0) pairs.push_back(std::move(pr));
  }
  ProbeReport r = gsmooth_probe(sphere, sphere_grad, pairs, 1.0, 0.0, c.seed, "sphere_half_sq_dist_ratio");
  r.comparison = "max_above";
  r.pass = r.samples > 0 && r.max > 1.0;
  out.push_back(r);
  return out;
}

}  // namespace

int run_experiment(const RunConfig& c, std::ostream& log) {
  return guarded(log, [&] {
    const auto start = std::chrono::steady_clock::now();
    const std::vector<TrialResult> trials = run_trials(c);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const fs::path dir = prepare_out(c);
    for (const auto& t : trials) io::write_trace_csv((dir / trace_file_name(t.trial)).string(), t.run.trace);
    write_json(dir / "summary.json", summarize(c, trials, wall));
    for (const auto& t : trials)
      log << "trial " << t.trial << ": objective " << io::format_double(t.run.trace.back().objective) << ", "
          << t.error_name << ' ' << t.error << '\n';
    return static_cast<int>(kOk);
  });
}

int run_probes(const RunConfig& c, std::ostream& log) {
  return guarded(log, [&] {
    Rng rng = trial_rng(c.seed, 0);
    Experiment e = build_experiment(c, rng);
    std::vector<ProbeReport> reports;
    const auto take = [&reports](std::vector<ProbeReport> more) {
      for (auto& r : more) reports.push_back(std::move(r));
    };
    if (c.probes == "all" || c.probes == "geometry") take(geometry_probes(c, e));
    if (c.probes == "all" || c.probes == "gradient") take(gradient_probes(c, e));
    if (c.probes == "all" || c.probes == "gsmooth") take(gsmooth_probes(c));

    bool pass = true;
    nlohmann::json list = nlohmann::json::array();
    for (const auto& r : reports) {
      pass = pass && r.pass;
      list.push_back(r.to_json());
      if (!r.pass) log << "probe failed: " << r.quantity << " (max " << r.max << ", target " << r.target << ")\n";
    }
    const fs::path dir = prepare_out(c);
    write_json(dir / "probes.json", {{"config", c.to_json()}, {"pass", pass}, {"probes", list}});
    log << reports.size() << " probes, " << (pass ? "all passed" : "some failed") << '\n';
    return static_cast<int>(pass ? kOk : kProbeFailed);
  });
}

int generate_data(const RunConfig& c, std::ostream& log) {
  return guarded(log, [&] {
    if (c.application == Application::QuadraticDemo)
      throw ConfigError("quadratic-demo has no synthetic data");
    Rng rng = trial_rng(c.seed, 0);
    const Experiment e = build_experiment(c, rng);
    const fs::path dir = prepare_out(c);
    for (const auto& [name, array] : e.data) {
      io::write_binary((dir / (name + ".bin")).string(), array);
      io::write_csv((dir / (name + ".csv")).string(), array);
      log << "wrote " << name << " (" << array.size() << " values)\n";
    }
    return static_cast<int>(kOk);
  });
}

int run_command(const std::string& path, const Overrides& o, std::ostream& log) {
  RunConfig c;
  if (int rc = guarded(log, [&] { c = load(path, o); return static_cast<int>(kOk); })) return rc;
  return run_experiment(c, log);
}

int probe_command(const std::string& path, const Overrides& o, std::ostream& log) {
  RunConfig c;
  if (int rc = guarded(log, [&] { c = load(path, o); return static_cast<int>(kOk); })) return rc;
  return run_probes(c, log);
}

int gen_data_command(const std::string& path, const Overrides& o, std::ostream& log) {
  RunConfig c;
  if (int rc = guarded(log, [&] { c = load(path, o); return static_cast<int>(kOk); })) return rc;
  return generate_data(c, log);
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Riemannian block majorization-minimization experiments"};
  app.require_subcommand(1);
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  const auto add = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "Run configuration (INI)")->required();
    sub->add_option("--seed", seed, "Override the configured seed");
    sub->add_option("--out", out, "Override the output directory");
    return sub;
  };
  CLI::App* run = add("run", "Run the configured experiment and write traces and a summary");
  CLI::App* probe = add("probe", "Run the diagnostic probes and write probes.json");
  CLI::App* gen = add("gen-data", "Write the synthetic dataset of the configured application");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(kConfigError);
  }
  Overrides o;
  for (CLI::App* sub : {run, probe, gen}) {
    if (!sub->parsed()) continue;
    if (sub->count("--seed")) o.seed = seed;
    if (sub->count("--out")) o.out_dir = out;
  }
  if (run->parsed()) return run_command(config, o, std::cerr);
  if (probe->parsed()) return probe_command(config, o, std::cerr);
  return gen_data_command(config, o, std::cerr);
}

}  // namespace rbmm::cli

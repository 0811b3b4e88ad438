#include "rbmm/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace rbmm::cli {

namespace {

using App = Application;

const std::map<std::string, App> kApplications = {
    {"quadratic-demo", App::QuadraticDemo},
    {"subspace-tracking", App::SubspaceTracking},
    {"optimistic-likelihood", App::OptimisticLikelihood},
    {"cp-dictionary", App::CpDictionary},
    {"rpca", App::Rpca},
};

const std::set<std::string> kCommon = {
    "application", "surrogate", "lambda",  "lambda_ratio", "trials",        "seed",
    "max_cycles",  "stationarity_every",   "stop_tol",     "threads",       "out_dir",
    "probes",      "probe_samples",        "gradient_fault",
};

const std::map<App, std::set<std::string>> kSpecific = {
    {App::QuadraticDemo, {"init_a", "init_b"}},
    {App::SubspaceTracking,
     {"dim", "rank", "time_points", "samples", "noise", "max_angle", "lambda_theta", "init"}},
    {App::OptimisticLikelihood,
     {"dim", "samples", "train_samples", "rho2", "inner_tol", "inner_budget"}},
    {App::CpDictionary, {"dims", "rank", "noise", "first_factor", "factor_rank"}},
    {App::Rpca, {"rows", "cols", "rank", "corruption", "sparsity", "fidelity", "smoothing"}},
};

const std::map<App, std::set<std::string>> kSurrogates = {
    {App::QuadraticDemo, {"proximal", "exact"}},
    {App::SubspaceTracking, {"proximal"}},
    {App::OptimisticLikelihood, {"proximal", "exact"}},
    {App::CpDictionary, {"proximal", "als"}},
    {App::Rpca, {"proximal", "exact"}},
};

template <class T>
T convert(const std::string& key, const std::string& raw) {
  std::istringstream in(raw);
  T v;
  in >> v;
  if (!in || !(in >> std::ws).eof()) throw ConfigError("config: bad value for " + key + ": '" + raw + "'");
  return v;
}

class Reader {
 public:
  explicit Reader(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

  template <class T>
  void get(const std::string& key, T& out) {
    if (auto it = kv_.find(key); it != kv_.end()) out = convert<T>(key, it->second);
  }
  template <class T>
  void get(const std::string& key, std::optional<T>& out) {
    if (auto it = kv_.find(key); it != kv_.end()) out = convert<T>(key, it->second);
  }
  void get(const std::string& key, std::string& out) {
    if (auto it = kv_.find(key); it != kv_.end()) out = it->second;
  }
  bool has(const std::string& key) const { return kv_.count(key) > 0; }

 private:
  std::map<std::string, std::string> kv_;
};

std::vector<int> parse_dims(const std::string& raw) {
  std::vector<int> out;
  std::istringstream in(raw);
  std::string tok;
  while (std::getline(in, tok, 'x')) out.push_back(convert<int>("dims", tok));
  if (out.size() < 2) throw ConfigError("config: dims needs at least two modes, e.g. 30x20x10");
  return out;
}

void positive(const std::string& key, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("config: " + key + " must be positive");
}

void nonnegative(const std::string& key, double v) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("config: " + key + " must be nonnegative");
}

void validate(const RunConfig& c) {
  if (c.trials < 1) throw ConfigError("config: trials must be at least 1");
  if (c.max_cycles < 1) throw ConfigError("config: max_cycles must be at least 1");
  if (c.stationarity_every < 1) throw ConfigError("config: stationarity_every must be at least 1");
  if (c.threads < 0) throw ConfigError("config: threads must be nonnegative");
  if (c.stop_tol) positive("stop_tol", *c.stop_tol);
  nonnegative("lambda", c.lambda);
  positive("lambda_ratio", c.lambda_ratio);
  if (c.out_dir.empty()) throw ConfigError("config: out_dir is empty");
  if (c.probe_samples < 1) throw ConfigError("config: probe_samples must be at least 1");
  nonnegative("gradient_fault", c.gradient_fault);
  if (c.probes != "all" && c.probes != "geometry" && c.probes != "gradient" && c.probes != "gsmooth")
    throw ConfigError("config: probes must be all, geometry, gradient or gsmooth");
  if (!kSurrogates.at(c.application).count(c.surrogate))
    throw ConfigError(std::string("config: surrogate '") + c.surrogate + "' is not available for " +
                      application_name(c.application));

  switch (c.application) {
    case App::QuadraticDemo: break;
    case App::SubspaceTracking:
      positive("dim", c.dim);
      positive("rank", c.rank);
      if (2 * c.rank > c.dim) throw ConfigError("config: subspace-tracking needs 2 * rank <= dim");
      if (c.time_points < 2) throw ConfigError("config: time_points must be at least 2");
      positive("samples", c.samples);
      nonnegative("noise", c.noise);
      positive("max_angle", c.max_angle);
      nonnegative("lambda_theta", c.lambda_theta);
      if (c.init != "random" && c.init != "truth") throw ConfigError("config: init must be random or truth");
      break;
    case App::OptimisticLikelihood:
      positive("dim", c.dim);
      if (c.samples < 2 || c.train_samples < 2)
        throw ConfigError("config: samples and train_samples must be at least 2");
      positive("rho2", c.rho2);
      positive("inner_tol", c.inner_tol);
      if (c.inner_budget < 1) throw ConfigError("config: inner_budget must be at least 1");
      break;
    case App::CpDictionary:
      for (int d : c.dims) positive("dims", d);
      positive("rank", c.rank);
      nonnegative("noise", c.noise);
      if (c.first_factor != "euclidean" && c.first_factor != "stiefel" && c.first_factor != "fixed-rank")
        throw ConfigError("config: first_factor must be euclidean, stiefel or fixed-rank");
      if (c.first_factor == "stiefel" && c.rank > c.dims[0])
        throw ConfigError("config: a Stiefel first factor needs rank <= dims[0]");
      if (c.first_factor == "fixed-rank" && (c.factor_rank < 1 || c.factor_rank > std::min(c.dims[0], c.rank)))
        throw ConfigError("config: factor_rank must lie in [1, min(dims[0], rank)]");
      break;
    case App::Rpca:
      positive("rows", c.rows);
      positive("cols", c.cols);
      positive("rank", c.rank);
      if (c.rank >= std::min(c.rows, c.cols)) throw ConfigError("config: rank must be below min(rows, cols)");
      if (!(c.corruption >= 0.0 && c.corruption <= 1.0)) throw ConfigError("config: corruption must lie in [0, 1]");
      if (c.sparsity) positive("sparsity", *c.sparsity);
      positive("fidelity", c.fidelity);
      positive("smoothing", c.smoothing);
      break;
  }
}

}  // namespace

const char* application_name(Application a) {
  for (const auto& [name, app] : kApplications)
    if (app == a) return name.c_str();
  return "unknown";
}

RunConfig parse_config_text(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.message() + " at line " + std::to_string(e.line()));
  }
  std::map<std::string, std::string> kv;
  for (const auto& [key, node] : tree) {
    if (!node.empty()) throw ConfigError("config: sections are not supported ([" + key + "])");
    kv[key] = node.data();
  }

  auto app_it = kv.find("application");
  if (app_it == kv.end()) throw ConfigError("config: missing required key 'application'");
  auto known = kApplications.find(app_it->second);
  if (known == kApplications.end()) throw ConfigError("config: unknown application '" + app_it->second + "'");

  RunConfig c;
  c.application = known->second;
  for (const auto& [key, value] : kv) {
    if (!kCommon.count(key) && !kSpecific.at(c.application).count(key))
      throw ConfigError("config: key '" + key + "' does not apply to " + app_it->second);
  }

  // Application defaults that differ from the struct defaults.
  switch (c.application) {
    case App::QuadraticDemo: break;
    case App::SubspaceTracking:
      c.lambda = 0.0;
      c.max_cycles = 300;
      break;
    case App::OptimisticLikelihood:
      c.dim = 10;
      c.samples = 50;
      c.lambda = 0.1;
      c.max_cycles = 1000;
      break;
    case App::CpDictionary:
      c.noise = 0.0;
      c.lambda = 0.1;
      c.lambda_ratio = 0.5;
      c.max_cycles = 500;
      break;
    case App::Rpca:
      c.rank = 2;
      c.lambda = 0.1;
      c.max_cycles = 500;
      break;
  }

  Reader r(kv);
  r.get("surrogate", c.surrogate);
  r.get("lambda", c.lambda);
  r.get("lambda_ratio", c.lambda_ratio);
  r.get("trials", c.trials);
  r.get("seed", c.seed);
  r.get("max_cycles", c.max_cycles);
  r.get("stationarity_every", c.stationarity_every);
  r.get("stop_tol", c.stop_tol);
  r.get("threads", c.threads);
  r.get("out_dir", c.out_dir);
  r.get("probes", c.probes);
  r.get("probe_samples", c.probe_samples);
  r.get("gradient_fault", c.gradient_fault);
  r.get("init_a", c.init_a);
  r.get("init_b", c.init_b);
  r.get("dim", c.dim);
  r.get("rank", c.rank);
  r.get("time_points", c.time_points);
  r.get("samples", c.samples);
  r.get("noise", c.noise);
  r.get("max_angle", c.max_angle);
  r.get("lambda_theta", c.lambda_theta);
  r.get("init", c.init);
  r.get("train_samples", c.train_samples);
  r.get("rho2", c.rho2);
  r.get("inner_tol", c.inner_tol);
  r.get("inner_budget", c.inner_budget);
  if (r.has("dims")) c.dims = parse_dims(kv.at("dims"));
  r.get("first_factor", c.first_factor);
  r.get("factor_rank", c.factor_rank);
  r.get("rows", c.rows);
  r.get("cols", c.cols);
  r.get("corruption", c.corruption);
  r.get("sparsity", c.sparsity);
  r.get("fidelity", c.fidelity);
  r.get("smoothing", c.smoothing);

  validate(c);
  if (c.application == App::Rpca && !c.sparsity)
    c.sparsity = 1.0 / std::sqrt(static_cast<double>(std::max(c.rows, c.cols)));
  return c;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open " + path);
  std::ostringstream text;
  text << f.rdbuf();
  return parse_config_text(text.str());
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j = {
      {"application", application_name(application)},
      {"surrogate", surrogate},
      {"lambda", lambda},
      {"lambda_ratio", lambda_ratio},
      {"trials", trials},
      {"seed", seed},
      {"max_cycles", max_cycles},
      {"stationarity_every", stationarity_every},
      {"stop_tol", stop_tol ? nlohmann::json(*stop_tol) : nlohmann::json()},
      {"threads", threads},
      {"out_dir", out_dir},
      {"probes", probes},
      {"probe_samples", probe_samples},
      {"gradient_fault", gradient_fault},
  };
  switch (application) {
    case App::QuadraticDemo:
      j["init_a"] = init_a;
      j["init_b"] = init_b;
      break;
    case App::SubspaceTracking:
      j["dim"] = dim;
      j["rank"] = rank;
      j["time_points"] = time_points;
      j["samples"] = samples;
      j["noise"] = noise;
      j["max_angle"] = max_angle;
      j["lambda_theta"] = lambda_theta;
      j["init"] = init;
      break;
    case App::OptimisticLikelihood:
      j["dim"] = dim;
      j["samples"] = samples;
      j["train_samples"] = train_samples;
      j["rho2"] = rho2;
      j["inner_tol"] = inner_tol;
      j["inner_budget"] = inner_budget;
      break;
    case App::CpDictionary:
      j["dims"] = dims;
      j["rank"] = rank;
      j["noise"] = noise;
      j["first_factor"] = first_factor;
      if (first_factor == "fixed-rank") j["factor_rank"] = factor_rank;
      break;
    case App::Rpca:
      j["rows"] = rows;
      j["cols"] = cols;
      j["rank"] = rank;
      j["corruption"] = corruption;
      j["sparsity"] = sparsity ? nlohmann::json(*sparsity) : nlohmann::json();
      j["fidelity"] = fidelity;
      j["smoothing"] = smoothing;
      break;
  }
  return j;
}

}  // namespace rbmm::cli

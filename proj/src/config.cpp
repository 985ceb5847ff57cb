#include "clab/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace clab {

using nlohmann::json;

namespace {

const std::vector<std::string> kProfileKeys{"c", "amp", "kappa", "omega", "phase"};

std::string at(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void check_keys(const json& obj, const std::string& path) {
  if (!obj.is_object()) throw ConfigError("'" + (path.empty() ? "<root>" : path) + "' must be an object");
  const auto& allowed = config_keys().at(path);
  for (const auto& [k, v] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      throw ConfigError("unknown key '" + at(path, k) + "'");
    }
  }
}

double get_number(const json& obj, const std::string& path, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError("'" + at(path, key) + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError("'" + at(path, key) + "' must be finite");
  return x;
}

double require_number(const json& obj, const std::string& path, const std::string& key) {
  if (!obj.contains(key)) throw ConfigError("missing key '" + at(path, key) + "'");
  return get_number(obj, path, key, 0.0);
}

long long get_integer(const json& obj, const std::string& path, const std::string& key, long long fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError("'" + at(path, key) + "' must be an integer");
  return v.get<long long>();
}

std::uint64_t get_u64(const json& obj, const std::string& path, const std::string& key, std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned()) throw ConfigError("'" + at(path, key) + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::vector<double> get_numbers(const json& obj, const std::string& path, const std::string& key) {
  const json& v = obj.at(key);
  if (!v.is_array()) throw ConfigError("'" + at(path, key) + "' must be an array of numbers");
  std::vector<double> out;
  for (const json& e : v) {
    if (!e.is_number() || !std::isfinite(e.get<double>())) {
      throw ConfigError("'" + at(path, key) + "' must be an array of finite numbers");
    }
    out.push_back(e.get<double>());
  }
  return out;
}

void positive(double x, const std::string& name) {
  if (!(x > 0.0)) throw ConfigError("'" + name + "' must be > 0");
}

CylinderGeometry parse_geometry(const json& j) {
  check_keys(j, "geometry");
  if (j.contains("dimension")) {
    const long long n = get_integer(j, "geometry", "dimension", 2);
    if (n != 2) throw ConfigError("'geometry.dimension' = " + std::to_string(n) + " unsupported: the cross-section must be an interval (dimension 2)");
  }
  CylinderGeometry g;
  g.d_lo = get_number(j, "geometry", "d_lo", g.d_lo);
  g.d_hi = get_number(j, "geometry", "d_hi", g.d_hi);
  g.ell = get_number(j, "geometry", "ell", g.ell);
  g.delta = get_number(j, "geometry", "delta", g.delta);
  if (j.contains("gamma_side")) {
    const json& s = j.at("gamma_side");
    if (!s.is_string() || (s != "lo" && s != "hi")) throw ConfigError("'geometry.gamma_side' must be \"lo\" or \"hi\"");
    g.gamma_side = s == "hi" ? GammaSide::Hi : GammaSide::Lo;
  }
  auto count = [&](const char* key, int fallback) {
    const long long n = get_integer(j, "geometry", key, fallback);
    if (n < 4 || n > 4097) throw ConfigError(std::string("'geometry.") + key + "' must lie in [4, 4097]");
    return static_cast<int>(n);
  };
  g.nx_prime = count("nx_prime", g.nx_prime);
  g.nx_n = count("nx_n", g.nx_n);
  g.nt = count("nt", g.nt);
  try {
    g.validate();
  } catch (const GridError& e) {
    throw ConfigError(std::string("geometry: ") + e.what());
  }
  return g;
}

WeightConfig parse_weight(const json& j) {
  check_keys(j, "weight");
  WeightConfig w;
  if (j.contains("D0") == j.contains("region_family")) {
    throw ConfigError("'weight' needs exactly one of 'D0' and 'region_family'");
  }
  if (j.contains("D0")) {
    const auto v = get_numbers(j, "weight", "D0");
    if (v.size() != 2 || !(v[0] < v[1])) throw ConfigError("'weight.D0' must be [lo, hi] with lo < hi");
    w.D0 = Interval{v[0], v[1]};
  } else {
    const json& r = j.at("region_family");
    check_keys(r, "weight.region_family");
    RegionFamilyRequest q;
    q.delta1 = require_number(r, "weight.region_family", "delta1");
    q.x0_prime = require_number(r, "weight.region_family", "x0_prime");
    q.epsilon0 = get_number(r, "weight.region_family", "epsilon0", q.epsilon0);
    q.kappa0 = get_number(r, "weight.region_family", "kappa0", q.kappa0);
    positive(q.delta1, "weight.region_family.delta1");
    positive(q.epsilon0, "weight.region_family.epsilon0");
    positive(q.kappa0, "weight.region_family.kappa0");
    w.region_family = q;
  }
  if (j.contains("delta0")) {
    w.delta0 = get_number(j, "weight", "delta0", 0.0);
    positive(*w.delta0, "weight.delta0");
  }
  w.lambda = get_number(j, "weight", "lambda", w.lambda);
  w.margin = get_number(j, "weight", "margin", w.margin);
  positive(w.lambda, "weight.lambda");
  if (!(w.margin > 1.0)) throw ConfigError("'weight.margin' must be > 1");
  if (w.region_family) {
    w.region_family->lambda = w.lambda;
    w.region_family->margin = w.margin;
    if (w.delta0) throw ConfigError("'weight.delta0' is fixed by 'region_family.delta1'; remove one of them");
  }
  return w;
}

SeparableProfile parse_profile(const json& j, const std::string& path, SeparableProfile p) {
  check_keys(j, path);
  p.c = get_number(j, path, "c", p.c);
  p.amp = get_number(j, path, "amp", p.amp);
  p.kappa = get_number(j, path, "kappa", p.kappa);
  p.omega = get_number(j, path, "omega", p.omega);
  p.phase = get_number(j, path, "phase", p.phase);
  return p;
}

InstanceConfig parse_instance(const json& j) {
  check_keys(j, "instance");
  InstanceConfig c;
  if (j.contains("recipe")) {
    if (!j.at("recipe").is_string()) throw ConfigError("'instance.recipe' must be a string");
    c.recipe_name = j.at("recipe").get<std::string>();
  }
  c.recipe = named_recipe(c.recipe_name);
  if (j.contains("a")) {
    c.recipe.a.coeffs = get_numbers(j, "instance", "a");
    if (c.recipe.a.coeffs.empty()) throw ConfigError("'instance.a' must list at least one coefficient");
  }
  for (const char* key : {"b", "f_target", "p0"}) {
    if (!j.contains(key)) continue;
    SeparableProfile& p = std::string(key) == "b" ? c.recipe.b
                          : std::string(key) == "f_target" ? c.recipe.f_target
                                                           : c.recipe.p0;
    p = parse_profile(j.at(key), std::string("instance.") + key, p);
  }
  if (j.contains("noise_levels")) {
    c.noise_levels = get_numbers(j, "instance", "noise_levels");
    for (double x : c.noise_levels) {
      if (x < 0.0) throw ConfigError("'instance.noise_levels' entries must be >= 0");
    }
  }
  c.seed = get_u64(j, "instance", "seed", c.seed);
  return c;
}

RegularizationParams parse_solver(const json& j) {
  check_keys(j, "solver");
  RegularizationParams p;
  p.mu = get_number(j, "solver", "mu", p.mu);
  p.carleman_s = get_number(j, "solver", "carleman_s", p.carleman_s);
  p.cg_tol = get_number(j, "solver", "cg_tol", p.cg_tol);
  const long long maxit = get_integer(j, "solver", "cg_maxit", p.cg_maxit);
  p.cauchy_weight = get_number(j, "solver", "cauchy_weight", p.cauchy_weight);
  p.face_weight = get_number(j, "solver", "face_weight", p.face_weight);
  if (j.contains("precondition")) {
    if (!j.at("precondition").is_boolean()) throw ConfigError("'solver.precondition' must be a boolean");
    p.precondition = j.at("precondition").get<bool>();
  }
  positive(p.mu, "solver.mu");
  positive(p.cg_tol, "solver.cg_tol");
  positive(p.cauchy_weight, "solver.cauchy_weight");
  positive(p.face_weight, "solver.face_weight");
  if (p.carleman_s < 0.0) throw ConfigError("'solver.carleman_s' must be >= 0");
  if (maxit < 1 || maxit > 100000000) throw ConfigError("'solver.cg_maxit' must be a positive integer");
  p.cg_maxit = static_cast<int>(maxit);
  return p;
}

VerifyConfig parse_verify(const json& j) {
  check_keys(j, "verify");
  VerifyConfig v;
  const long long n = get_integer(j, "verify", "corpus_size", v.corpus_size);
  if (n < 1 || n > 10000) throw ConfigError("'verify.corpus_size' must lie in [1, 10000]");
  v.corpus_size = static_cast<int>(n);
  v.corpus_seed = get_u64(j, "verify", "corpus_seed", v.corpus_seed);
  if (j.contains("s_grid")) v.s_grid = get_numbers(j, "verify", "s_grid");
  if (v.s_grid.empty() || !std::is_sorted(v.s_grid.begin(), v.s_grid.end()) ||
      std::adjacent_find(v.s_grid.begin(), v.s_grid.end()) != v.s_grid.end() || !(v.s_grid.front() > 0.0)) {
    throw ConfigError("'verify.s_grid' must be strictly increasing and positive");
  }
  v.C_cap = get_number(j, "verify", "C_cap", v.C_cap);
  positive(v.C_cap, "verify.C_cap");
  if (j.contains("time_dependent")) {
    if (!j.at("time_dependent").is_boolean()) throw ConfigError("'verify.time_dependent' must be a boolean");
    v.time_dependent = j.at("time_dependent").get<bool>();
  }
  return v;
}

ExperimentConfig from_json(const json& j) {
  check_keys(j, "");
  ExperimentConfig c;
  if (j.contains("geometry")) c.geometry = parse_geometry(j.at("geometry"));
  if (j.contains("weight")) c.weight = parse_weight(j.at("weight"));
  if (j.contains("instance")) c.instance = parse_instance(j.at("instance"));
  if (j.contains("solver")) c.solver = parse_solver(j.at("solver"));
  if (j.contains("verify")) c.verify = parse_verify(j.at("verify"));
  if (j.contains("output")) {
    if (!j.at("output").is_string()) throw ConfigError("'output' must be a string");
    c.output = j.at("output").get<std::string>();
  }
  if (c.weight && c.weight->D0 && c.geometry) {
    const Interval d0 = *c.weight->D0;
    if (d0.lo < c.geometry->d_lo - 1e-12 || d0.hi > c.geometry->d_hi + 1e-12) {
      throw ConfigError("'weight.D0' must lie inside [geometry.d_lo, geometry.d_hi]");
    }
  }
  if (c.weight && c.geometry && c.weight->region_family &&
      !(c.weight->region_family->delta1 < c.geometry->delta)) {
    throw ConfigError("'weight.region_family.delta1' must be < geometry.delta");
  }
  c.canonical = j.dump();
  return c;
}

}  // namespace

const std::map<std::string, std::vector<std::string>>& config_keys() {
  static const std::map<std::string, std::vector<std::string>> keys{
      {"", {"geometry", "weight", "instance", "solver", "verify", "output"}},
      {"geometry", {"dimension", "d_lo", "d_hi", "ell", "delta", "gamma_side", "nx_prime", "nx_n", "nt"}},
      {"weight", {"D0", "region_family", "delta0", "lambda", "margin"}},
      {"weight.region_family", {"delta1", "x0_prime", "epsilon0", "kappa0"}},
      {"instance", {"recipe", "a", "b", "f_target", "p0", "noise_levels", "seed"}},
      {"instance.b", kProfileKeys},
      {"instance.f_target", kProfileKeys},
      {"instance.p0", kProfileKeys},
      {"solver", {"mu", "carleman_s", "cg_tol", "cg_maxit", "cauchy_weight", "face_weight", "precondition"}},
      {"verify", {"corpus_size", "corpus_seed", "s_grid", "C_cap", "time_dependent"}},
  };
  return keys;
}

Recipe named_recipe(const std::string& name) {
  Recipe r;
  const SeparableProfile decaying_cos{0.0, 1.0, -1.0, 1.0, 0.0};  // e^{-t} cos x'
  if (name == "quadratic") {
    r.a.coeffs = {0.0, 0.0, 1.0};
  } else if (name == "worked") {
    r.a.coeffs = {0.0, 0.0, 1.0};
    r.b = decaying_cos;
  } else if (name == "quartic") {
    r.a.coeffs = {0.0, 0.0, 1.0, 0.0, 1.0};
    r.b = decaying_cos;
  } else if (name != "custom") {
    throw ConfigError("'instance.recipe' must be one of quadratic, worked, quartic, custom");
  }
  return r;
}

Command parse_command(const std::string& name) {
  if (name == "plan") return Command::Plan;
  if (name == "verify") return Command::Verify;
  if (name == "make-instance") return Command::MakeInstance;
  if (name == "reconstruct") return Command::Reconstruct;
  if (name == "sweep") return Command::Sweep;
  if (name == "all") return Command::All;
  throw ConfigError("unknown command '" + name + "'");
}

std::string to_string(Command c) {
  switch (c) {
    case Command::Plan: return "plan";
    case Command::Verify: return "verify";
    case Command::MakeInstance: return "make-instance";
    case Command::Reconstruct: return "reconstruct";
    case Command::Sweep: return "sweep";
    case Command::All: return "all";
  }
  return "?";
}

void ExperimentConfig::require(Command c) const {
  auto need = [&](bool present, const char* block) {
    if (!present) throw ConfigError("command '" + to_string(c) + "' needs the '" + block + "' block");
  };
  need(geometry.has_value(), "geometry");
  if (c != Command::MakeInstance) need(weight.has_value(), "weight");
  if (c == Command::MakeInstance || c == Command::Reconstruct || c == Command::Sweep || c == Command::All) {
    need(instance.has_value(), "instance");
  }
  if (c == Command::Reconstruct || c == Command::Sweep || c == Command::All) need(solver.has_value(), "solver");
  if (c == Command::Sweep || c == Command::All) {
    if (instance->noise_levels.empty()) throw ConfigError("command '" + to_string(c) + "' needs 'instance.noise_levels'");
  }
}

void ExperimentConfig::override_seed(std::uint64_t seed) {
  json j = json::parse(canonical);
  if (!j.contains("instance")) j["instance"] = json::object();
  j["instance"]["seed"] = seed;
  if (instance) instance->seed = seed;
  canonical = j.dump();
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return from_json(j);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigIoError("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

}  // namespace clab

#include "tvpath/run_config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace tvpath {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

Scalar to_number(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  Scalar v = 0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size() || !std::isfinite(v)) {
    throw ConfigError("key '" + key + "': '" + value + "' is not a number");
  }
  return v;
}

int to_int(const std::string& key, const std::string& value) {
  const Scalar v = to_number(key, value);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    throw ConfigError("key '" + key + "': '" + value + "' is not an integer");
  }
  return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("key '" + key + "': '" + value + "' is not a boolean");
}

}  // namespace

ForcingMode parse_forcing_mode(const std::string& s) {
  if (s == "constant") return ForcingMode::Constant;
  if (s == "adaptive") return ForcingMode::Adaptive;
  throw ConfigError("forcing mode must be 'constant' or 'adaptive', got '" + s + "'");
}

std::vector<Scalar> parse_number_list(const std::string& s) {
  std::vector<Scalar> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_number("list", item));
  }
  return out;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (value.empty()) throw ConfigError("key '" + key + "' has no value");
  using Setter = std::function<void(const std::string&)>;
  const std::map<std::string, Setter> setters{
      {"problem", [&](const std::string& v) { problem = v; }},
      {"beta", [&](const std::string& v) { beta = to_number(key, v); }},
      {"rotation_degrees", [&](const std::string& v) { rotation_degrees = to_number(key, v); }},
      {"n", [&](const std::string& v) { n = to_int(key, v); }},
      {"n_rings", [&](const std::string& v) { n_rings = to_int(key, v); }},
      {"n_sectors", [&](const std::string& v) { n_sectors = to_int(key, v); }},
      {"gamma0", [&](const std::string& v) { gamma0 = to_number(key, v); }},
      {"delta0", [&](const std::string& v) { delta0 = to_number(key, v); }},
      {"ratio", [&](const std::string& v) { ratio = to_number(key, v); }},
      {"kappa", [&](const std::string& v) { path.kappa = to_number(key, v); }},
      {"sigma0", [&](const std::string& v) { path.sigma0 = to_number(key, v); }},
      {"sigma_min", [&](const std::string& v) { path.sigma_min = to_number(key, v); }},
      {"sigma_max", [&](const std::string& v) { path.sigma_max = to_number(key, v); }},
      {"fixed_sigma", [&](const std::string& v) { path.fixed_sigma = to_number(key, v); }},
      {"m_budget", [&](const std::string& v) { path.m_budget = to_int(key, v); }},
      {"rho_floor", [&](const std::string& v) { path.rho_floor = to_number(key, v); }},
      {"max_outer", [&](const std::string& v) { path.max_outer = to_int(key, v); }},
      {"stagnation_window", [&](const std::string& v) { path.stagnation_window = to_int(key, v); }},
      {"trace_errors", [&](const std::string& v) { path.trace_errors = to_bool(key, v); }},
      {"nested_grid_thresholds",
       [&](const std::string& v) { path.nested_grid_thresholds = parse_number_list(v); }},
      {"forcing_mode", [&](const std::string& v) { newton.forcing_mode = parse_forcing_mode(v); }},
      {"eta_floor", [&](const std::string& v) { newton.eta_floor = to_number(key, v); }},
      {"tau", [&](const std::string& v) { newton.tau = to_number(key, v); }},
      {"newton_max_outer", [&](const std::string& v) { newton.max_outer = to_int(key, v); }},
      {"max_halvings", [&](const std::string& v) { newton.max_halvings = to_int(key, v); }},
      {"gmres_max_iter", [&](const std::string& v) { newton.gmres.max_iter = to_int(key, v); }},
      {"control_max_iter", [&](const std::string& v) { newton.control_max_iter = to_int(key, v); }},
      {"output_dir", [&](const std::string& v) { output_dir = v; }},
      {"seed",
       [&](const std::string& v) {
         const int s = to_int(key, v);
         if (s < 0) throw ConfigError("key 'seed' must be non-negative");
         seed = static_cast<std::uint64_t>(s);
       }},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError("unknown key '" + key + "'");
  it->second(value);
}

void RunConfig::finalize() {
  if (problem != "example1" && problem != "example2") {
    throw ConfigError("key 'problem' must be example1 or example2, got '" + problem + "'");
  }
  const bool first = problem == "example1";
  if (!beta) beta = first ? 1e-3 : 1e-4;
  if (!(*beta > 0)) throw ConfigError("key 'beta' must be positive");

  const Scalar g0 = gamma0.value_or(first ? 1.0 : 0.01);
  Scalar d0 = 0;
  if (delta0) {
    d0 = *delta0;
    if (ratio && std::abs(g0 / d0 - *ratio) > 1e-12 * std::abs(*ratio)) {
      throw ConfigError("keys 'gamma0', 'delta0' and 'ratio' are inconsistent");
    }
  } else {
    const Scalar r = ratio.value_or(first ? 1e2 : 1e-2);
    if (!(r > 0)) throw ConfigError("key 'ratio' must be positive");
    d0 = g0 / r;
  }
  path.gamma0 = g0;
  path.delta0 = d0;

  if (first && (n_rings < 2 || n_sectors < 8)) {
    throw ConfigError("keys 'n_rings' >= 2 and 'n_sectors' >= 8 required");
  }
  if (!first && (n < 2 || n % 2 != 0)) throw ConfigError("key 'n' must be even and >= 2");
  try {
    path.validate();
    newton.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what());
  }
}

ProblemSpec RunConfig::make_problem() const {
  const Scalar b = beta.value_or(problem == "example1" ? 1e-3 : 1e-4);
  return problem == "example1" ? example1(b) : example2(b, rotation_degrees);
}

MeshPtr RunConfig::make_mesh() const {
  if (problem == "example1") {
    const ProblemSpec spec = make_problem();
    return make_annulus_mesh(spec.domain.radius, 2 * spec.domain.radius, n_rings, n_sectors);
  }
  return make_square_mesh(n);
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty()) throw ConfigError("key '" + key + "' has no value");
    if (!out.emplace(key, value).second) throw ConfigError("key '" + key + "' given twice");
  }
  return out;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const auto kv = parse_key_values(buf.str());
  if (!kv.count("problem")) throw ConfigError("missing required key 'problem'");
  RunConfig cfg;
  for (const auto& [k, v] : kv) cfg.set(k, v);
  return cfg;
}

}  // namespace tvpath

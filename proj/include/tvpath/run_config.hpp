#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tvpath/coupled_newton.hpp"
#include "tvpath/mesh.hpp"
#include "tvpath/path_following.hpp"
#include "tvpath/problems.hpp"

namespace tvpath {

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Everything one run needs. Unset optionals take the per-problem defaults: (gamma0, ratio)
/// = (1, 1e2) for example1 and (0.01, 1e-2) for example2.
struct RunConfig {
  std::string problem = "example1";
  std::optional<Scalar> beta;
  Scalar rotation_degrees = 0;
  int n = 64;
  int n_rings = 24;
  int n_sectors = 224;

  std::optional<Scalar> gamma0;
  std::optional<Scalar> delta0;
  std::optional<Scalar> ratio;
  PathConfig path;
  NewtonConfig newton;

  std::string output_dir;
  std::uint64_t seed = 1;

  /// Applies one key=value pair; keys are the field names above and those of PathConfig and
  /// NewtonConfig (newton_max_outer, gmres_max_iter for the nested ones).
  void set(const std::string& key, const std::string& value);

  /// Resolves defaults and validates. Throws ConfigError.
  void finalize();

  ProblemSpec make_problem() const;
  MeshPtr make_mesh() const;
};

/// Flat key=value lines, '#' starts a comment. Throws ConfigError naming the offending key or
/// line.
std::map<std::string, std::string> parse_key_values(const std::string& text);

/// Reads a file; the key "problem" is required.
RunConfig load_run_config(const std::string& path);

ForcingMode parse_forcing_mode(const std::string& s);
std::vector<Scalar> parse_number_list(const std::string& s);

}  // namespace tvpath

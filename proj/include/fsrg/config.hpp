#pragma once

#include "fsrg/model.hpp"
#include "fsrg/rg.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fsrg {

inline constexpr int kSchemaVersion = 1;

struct ConfigError : Error {
  using Error::Error;
};

struct ProbeSpec {
  double radius = 0.05;      // contour radius r_c in s
  int nodes = 16;
  double cr_step = 1e-3;     // central-difference step for Cauchy-Riemann
  std::vector<Complex> reflection_points;  // s values paired with conj(s)
};

struct RunConfig {
  std::string source;        // config path, empty when parsed from text
  std::string model_path;
  ModelSpec model;
  Complex s = 0.0;
  double g = 0.1;
  Truncation truncation;
  RGConfig rg;
  ProbeSpec probe;
  std::vector<double> sweep;
  double cluster_rel = 1e-8;
  std::uint64_t seed = 1;
  std::string out_dir;
  std::vector<std::string> formats{"kv", "digest"};
};

// Model files and run files carry "schema_version"; unknown keys are rejected.
// Matrices are arrays of rows whose entries are numbers or [re, im] pairs.
ModelSpec parse_model(const std::string& json_text);
ModelSpec load_model(const std::string& path);

// A relative "model" path resolves against `base_dir`.
RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir = ".");
RunConfig load_run_config(const std::string& path);

}  // namespace fsrg

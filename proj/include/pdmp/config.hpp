#ifndef PDMP_CONFIG_HPP
#define PDMP_CONFIG_HPP

#include "pdmp/baselines.hpp"
#include "pdmp/model.hpp"
#include "pdmp/samplers.hpp"
#include "pdmp/types.hpp"

#include <cstdint>
#include <string>

namespace pdmp {

enum class Method { Bps, SigmaBps, Boomerang, Sgld, SgldNd };

std::string to_string(Method method);

struct RunConfig {
  ModelSpec model_spec;

  std::string dataset_path;  // empty when unset
  bool csv_header = false;
  bool use_synthetic = false;
  int synthetic_n = 64;
  double synthetic_noise = 0.1;

  Method method = Method::Bps;
  double lambda_ref = 1.0;
  double gamma = 0.001;  // defaulted per kernel when absent
  double alpha = 1.0;
  double cap_r = 2.0;
  double t_init = 0.1;
  int warmup_events = 1000;
  int thinning_factor = 1;
  int batch_size = 0;
  double lr0 = 1e-5;

  int n_samples = 2000;
  int repeats = 1;
  std::uint64_t seed = 0;
  int map_iterations = 10000;
  double map_step = 0.01;
  std::string out_dir = "runs/out";

  bool is_pdmp() const {
    return method == Method::Bps || method == Method::SigmaBps ||
           method == Method::Boomerang;
  }
  SamplerConfig sampler_config(std::uint64_t chain_seed) const;
  SgldConfig sgld_config(std::uint64_t chain_seed) const;
};

// Strict key = value configuration: unknown or duplicate keys are
// errors, every constraint violation names its field.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

// Canonical form; parse_config_text(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& cfg);

// FNV-1a hash of the canonical form, as fixed-width hex.
std::string config_hash(const RunConfig& cfg);

}  // namespace pdmp

#endif  // PDMP_CONFIG_HPP

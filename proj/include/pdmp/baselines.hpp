#ifndef PDMP_BASELINES_HPP
#define PDMP_BASELINES_HPP

#include "pdmp/model.hpp"
#include "pdmp/samplers.hpp"
#include "pdmp/types.hpp"

#include <cstdint>

namespace pdmp {

enum class SgldDecay { LinearToZero, None };

struct SgldConfig {
  double lr0 = 1e-5;
  SgldDecay decay = SgldDecay::LinearToZero;
  int steps = 10000;
  int thinning_factor = 1;
  int batch_size = 0;  // 0 = full batch
  std::uint64_t seed = 0;

  void validate() const;
};

// One Langevin update with explicit injected noise:
//   w' = w - (lr/2) * grad + sqrt(lr) * xi.
Vec sgld_step(const Vec& w, const Vec& grad_estimate, double lr, const Vec& xi);

// lr_k = lr0 * (1 - k/steps) under linear decay, constant otherwise.
double sgld_learning_rate(const SgldConfig& cfg, int k);

// Iterates from w0; the clock column of the returned chain holds the
// step index.
Chain run_sgld(const Model& model, const SgldConfig& cfg, const Vec& w0);

}  // namespace pdmp

#endif  // PDMP_BASELINES_HPP

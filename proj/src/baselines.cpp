#include "pdmp/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace pdmp {

void SgldConfig::validate() const {
  if (lr0 <= 0.0) throw ConfigError("lr0: must be > 0");
  if (steps < 1) throw ConfigError("sgld_steps: must be >= 1");
  if (thinning_factor < 1) throw ConfigError("thinning_factor: must be >= 1");
  if (batch_size < 0) throw ConfigError("batch_size: must be >= 0");
}

Vec sgld_step(const Vec& w, const Vec& grad_estimate, double lr,
              const Vec& xi) {
  if (lr <= 0.0) throw std::runtime_error("sgld_step: lr must be > 0");
  Vec out = w - 0.5 * lr * grad_estimate + std::sqrt(lr) * xi;
  if (!out.allFinite())
    throw std::runtime_error("sgld_step: non-finite update");
  return out;
}

double sgld_learning_rate(const SgldConfig& cfg, int k) {
  if (cfg.decay == SgldDecay::None) return cfg.lr0;
  return cfg.lr0 * (1.0 - static_cast<double>(k) / cfg.steps);
}

Chain run_sgld(const Model& model, const SgldConfig& cfg, const Vec& w0) {
  cfg.validate();
  if (w0.size() != model.param_dim())
    throw std::runtime_error("run_sgld: initial point dimension mismatch");

  Rng rng(mix_seed(cfg.seed, 0));
  std::unique_ptr<MiniBatchPlan> plan;
  if (cfg.batch_size > 0 && !model.data().empty() &&
      cfg.batch_size < model.data().size())
    plan = std::make_unique<MiniBatchPlan>(cfg.batch_size, model.data().size(),
                                           mix_seed(cfg.seed, 1));

  Chain chain;
  Vec w = w0;
  for (int k = 0; k < cfg.steps; ++k) {
    const double lr = sgld_learning_rate(cfg, k);
    if (lr > 0.0) {
      Vec g = plan ? model.grad_potential_minibatch(w, *plan)
                   : model.grad_potential(w);
      Vec xi = normal_vector(static_cast<int>(w.size()), rng);
      w = sgld_step(w, g, lr, xi);
    }
    if ((k + 1) % cfg.thinning_factor == 0) {
      chain.clocks.push_back(static_cast<double>(k + 1));
      chain.states.push_back(w);
    }
  }
  return chain;
}

}  // namespace pdmp

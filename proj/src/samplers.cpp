#include "pdmp/samplers.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <utility>

namespace pdmp {

std::string to_string(Kernel kernel) {
  switch (kernel) {
    case Kernel::Bps: return "bps";
    case Kernel::SigmaBps: return "sigma-bps";
    case Kernel::Boomerang: return "boomerang";
  }
  return "unknown";
}

std::optional<Kernel> kernel_from_string(const std::string& name) {
  if (name == "bps") return Kernel::Bps;
  if (name == "sigma-bps") return Kernel::SigmaBps;
  if (name == "boomerang") return Kernel::Boomerang;
  return std::nullopt;
}

void SamplerConfig::validate() const {
  if (lambda_ref <= 0.0) throw ConfigError("lambda_ref: must be > 0");
  if (gamma <= 0.0) throw ConfigError("gamma: must be > 0");
  if (alpha < 1.0) throw ConfigError("alpha: must be >= 1");
  if (cap_r <= 1.0) throw ConfigError("r_cap: must be > 1");
  if (t_init <= 0.0) throw ConfigError("t_init: must be > 0");
  if (thinning_factor < 1) throw ConfigError("thinning_factor: must be >= 1");
  if (n_events < 1) throw ConfigError("n_samples: must be >= 1");
  if (batch_size < 0) throw ConfigError("batch_size: must be >= 0");
  if (kernel == Kernel::SigmaBps && warmup_events < 2)
    throw ConfigError("warmup_events: must be >= 2");
}

Mat Chain::to_matrix() const {
  if (states.empty()) return Mat(0, 0);
  Mat m(static_cast<Eigen::Index>(states.size()), states.front().size());
  for (std::size_t i = 0; i < states.size(); ++i)
    m.row(static_cast<Eigen::Index>(i)) = states[i].transpose();
  return m;
}

PdmpState bps_flow(const PdmpState& s, double t) {
  if (t < 0.0) throw std::runtime_error("flow: negative time");
  return {s.w + s.v * t, s.v, s.clock + t};
}

PdmpState precond_flow(const PdmpState& s, const Vec& scale, double t) {
  if (t < 0.0) throw std::runtime_error("flow: negative time");
  return {s.w + scale.cwiseProduct(s.v) * t, s.v, s.clock + t};
}

PdmpState boomerang_flow(const PdmpState& s, const BoomerangReference& ref,
                         double t) {
  if (t < 0.0) throw std::runtime_error("flow: negative time");
  const double c = std::cos(t), sn = std::sin(t);
  Vec dw = s.w - ref.w_star;
  PdmpState out;
  out.w = ref.w_star + dw * c + s.v * sn;
  out.v = -dw * sn + s.v * c;
  out.clock = s.clock + t;
  return out;
}

Vec bps_bounce(const Vec& grad, const Vec& v) {
  const double denom = grad.squaredNorm();
  if (denom <= 0.0) throw std::runtime_error("bounce: zero gradient");
  return v - 2.0 * (grad.dot(v) / denom) * grad;
}

Vec precond_bounce(const Vec& grad, const Vec& v, const Vec& scale) {
  Vec ag = scale.cwiseProduct(grad);
  const double denom = ag.squaredNorm();
  if (denom <= 0.0) throw std::runtime_error("bounce: zero preconditioned gradient");
  return v - 2.0 * (ag.dot(v) / denom) * ag;
}

Vec boomerang_bounce(const Vec& grad, const Vec& v, const Vec& sigma_star) {
  const double denom = sigma_star.cwiseProduct(grad).dot(grad);
  if (denom <= 0.0) throw std::runtime_error("bounce: zero scaled gradient");
  return v - 2.0 * (grad.dot(v) / denom) * sigma_star.cwiseProduct(grad);
}

WelfordAccumulator::WelfordAccumulator(int dim)
    : mean_(Vec::Zero(dim)), m2_(Vec::Zero(dim)) {}

void WelfordAccumulator::add(const Vec& x) {
  ++count_;
  Vec delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta.cwiseProduct(x - mean_);
}

Vec WelfordAccumulator::variance() const {
  if (count_ < 2)
    throw std::runtime_error("welford: need at least two observations");
  Vec var = m2_ / static_cast<double>(count_ - 1);
  return var.cwiseMax(kVarClamp);
}

Vec WelfordAccumulator::stddev() const { return variance().cwiseSqrt(); }

namespace {

Vec gradient_estimate(const Model& model, const Vec& w, MiniBatchPlan* plan) {
  return plan ? model.grad_potential_minibatch(w, *plan)
              : model.grad_potential(w);
}

PdmpState kernel_flow(const PdmpState& s, Kernel kernel,
                      const Preconditioner& precond,
                      const BoomerangReference* ref, double t) {
  switch (kernel) {
    case Kernel::Bps: return bps_flow(s, t);
    case Kernel::SigmaBps: return precond_flow(s, precond.scale, t);
    case Kernel::Boomerang: return boomerang_flow(s, *ref, t);
  }
  throw std::runtime_error("unknown kernel");
}

}  // namespace

ipp::RateFn segment_rate(const PdmpState& s, Kernel kernel, const Model& model,
                         MiniBatchPlan* plan, const Preconditioner& precond,
                         const BoomerangReference* ref) {
  switch (kernel) {
    case Kernel::Bps:
      return [s, &model, plan](double t) {
        Vec g = gradient_estimate(model, s.w + s.v * t, plan);
        return std::max(0.0, g.dot(s.v));
      };
    case Kernel::SigmaBps: {
      // The gradient is taken along the actual preconditioned flow.
      Vec av = precond.scale.cwiseProduct(s.v);
      return [s, av = std::move(av), &model, plan](double t) {
        Vec g = gradient_estimate(model, s.w + av * t, plan);
        return std::max(0.0, g.dot(av));
      };
    }
    case Kernel::Boomerang: {
      BoomerangReference refc = *ref;
      return [s, refc = std::move(refc), &model, plan](double t) {
        PdmpState st = boomerang_flow(s, refc, t);
        Vec g = gradient_estimate(model, st.w, plan);
        return std::max(0.0, g.dot(st.v));
      };
    }
  }
  throw std::runtime_error("unknown kernel");
}

Vec refresh_velocity(Kernel kernel, int dim, const SamplerConfig& cfg,
                     const Preconditioner& precond,
                     const BoomerangReference* ref, Rng& rng) {
  Vec z = normal_vector(dim, rng);
  switch (kernel) {
    case Kernel::Bps:
      return cfg.gamma * z;
    case Kernel::SigmaBps:
      return precond.scale.cwiseProduct(z);
    case Kernel::Boomerang:
      return ref->sigma_star.cwiseSqrt().cwiseProduct(z);
  }
  throw std::runtime_error("unknown kernel");
}

namespace {

// Shared event loop for warm-up and main chains. Calls sink after
// every event with the 1-based event index.
void run_event_loop(const Model& model, const SamplerConfig& cfg,
                    Kernel kernel, const Preconditioner& precond,
                    const BoomerangReference* ref, PdmpState& state,
                    MiniBatchPlan* plan, Rng& rng, int n_events,
                    ipp::ThinningAudit& audit, std::uint64_t& bounces,
                    std::uint64_t& refreshes,
                    const std::function<void(int, const PdmpState&)>& sink) {
  ipp::Envelope env({cfg.alpha, cfg.cap_r, cfg.t_init});
  std::exponential_distribution<double> ref_time(cfg.lambda_ref);

  for (int i = 1; i <= n_events; ++i) {
    try {
      ipp::RateFn rate = segment_rate(state, kernel, model, plan, precond, ref);
      env.init(rate);
      const double tau_ref = ref_time(rng);
      const std::optional<double> tau =
          ipp::propose_event(env, rate, rng, audit, tau_ref);

      if (tau) {
        state = kernel_flow(state, kernel, precond, ref, *tau);
        Vec g = gradient_estimate(model, state.w, plan);
        const double scaled_norm =
            kernel == Kernel::Bps ? g.norm()
            : kernel == Kernel::SigmaBps
                ? precond.scale.cwiseProduct(g).norm()
                : ref->sigma_star.cwiseSqrt().cwiseProduct(g).norm();
        if (scaled_norm > 0.0) {
          switch (kernel) {
            case Kernel::Bps: state.v = bps_bounce(g, state.v); break;
            case Kernel::SigmaBps:
              state.v = precond_bounce(g, state.v, precond.scale);
              break;
            case Kernel::Boomerang:
              state.v = boomerang_bounce(g, state.v, ref->sigma_star);
              break;
          }
          ++bounces;
        } else {
          // Exactly at a stationary point: no direction to reflect.
          state.v = refresh_velocity(kernel, static_cast<int>(state.v.size()),
                                     cfg, precond, ref, rng);
          ++refreshes;
        }
      } else {
        state = kernel_flow(state, kernel, precond, ref, tau_ref);
        state.v = refresh_velocity(kernel, static_cast<int>(state.v.size()),
                                   cfg, precond, ref, rng);
        ++refreshes;
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("event " + std::to_string(i) + " at clock " +
                               std::to_string(state.clock) + ": " + e.what());
    }
    sink(i, state);
  }
}

std::unique_ptr<MiniBatchPlan> make_plan(const Model& model, int batch_size,
                                         std::uint64_t seed) {
  if (batch_size <= 0 || model.data().empty() ||
      batch_size >= model.data().size())
    return nullptr;  // full-batch gradients
  return std::make_unique<MiniBatchPlan>(batch_size, model.data().size(), seed);
}

}  // namespace

Preconditioner welford_warmup(const Model& model, const SamplerConfig& cfg,
                              const Vec& w0, PdmpState* final_state) {
  if (cfg.warmup_events < 2)
    throw std::runtime_error("welford_warmup: need at least two events");

  SamplerConfig wcfg = cfg;
  wcfg.kernel = Kernel::Bps;

  Rng rng(mix_seed(cfg.seed, 101));
  auto plan = make_plan(model, cfg.batch_size, mix_seed(cfg.seed, 102));

  Preconditioner identity;
  identity.scale = Vec::Ones(model.param_dim());

  PdmpState state;
  state.w = w0;
  state.v = refresh_velocity(Kernel::Bps, model.param_dim(), wcfg, identity,
                             nullptr, rng);

  WelfordAccumulator acc(model.param_dim());
  ipp::ThinningAudit audit;
  std::uint64_t bounces = 0, refreshes = 0;
  run_event_loop(model, wcfg, Kernel::Bps, identity, nullptr, state,
                 plan.get(), rng, cfg.warmup_events, audit, bounces, refreshes,
                 [&](int, const PdmpState& s) { acc.add(s.w); });

  Preconditioner out;
  out.scale = acc.stddev();
  out.source = Preconditioner::Source::WelfordWarmup;
  if (final_state) *final_state = state;
  return out;
}

Chain run_chain(const Model& model, const SamplerConfig& cfg, const Vec& w0) {
  cfg.validate();
  if (w0.size() != model.param_dim())
    throw std::runtime_error("run_chain: initial point dimension mismatch");

  Rng rng(mix_seed(cfg.seed, 0));
  auto plan = make_plan(model, cfg.batch_size, mix_seed(cfg.seed, 1));

  Preconditioner precond;
  precond.scale = Vec::Ones(model.param_dim());

  BoomerangReference ref;
  const BoomerangReference* refp = nullptr;

  PdmpState state;
  state.w = w0;

  if (cfg.kernel == Kernel::SigmaBps) {
    PdmpState warm_end;
    precond = welford_warmup(model, cfg, w0, &warm_end);
    state.w = warm_end.w;
  } else if (cfg.kernel == Kernel::Boomerang) {
    ref.w_star = w0;
    ref.sigma_star = cfg.gamma * model.diag_hessian_nll(w0).cwiseInverse();
    refp = &ref;
  }

  state.v = refresh_velocity(cfg.kernel, model.param_dim(), cfg, precond,
                             refp, rng);
  state.clock = 0.0;

  Chain chain;
  chain.audit.hist_upper = cfg.cap_r;
  chain.states.reserve(static_cast<std::size_t>(cfg.n_events / cfg.thinning_factor) + 1);

  run_event_loop(model, cfg, cfg.kernel, precond, refp, state, plan.get(), rng,
                 cfg.n_events, chain.audit, chain.bounce_count,
                 chain.refresh_count,
                 [&](int i, const PdmpState& s) {
                   if (i % cfg.thinning_factor == 0) {
                     chain.clocks.push_back(s.clock);
                     chain.states.push_back(s.w);
                   }
                 });
  return chain;
}

}  // namespace pdmp

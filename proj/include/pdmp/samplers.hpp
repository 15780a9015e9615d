#ifndef PDMP_SAMPLERS_HPP
#define PDMP_SAMPLERS_HPP

#include "pdmp/ipp.hpp"
#include "pdmp/model.hpp"
#include "pdmp/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pdmp {

enum class Kernel { Bps, SigmaBps, Boomerang };

std::string to_string(Kernel kernel);
std::optional<Kernel> kernel_from_string(const std::string& name);

struct PdmpState {
  Vec w;
  Vec v;
  double clock = 0.0;
};

struct SamplerConfig {
  Kernel kernel = Kernel::Bps;
  double lambda_ref = 1.0;  // refreshment rate
  double gamma = 0.001;     // velocity scale (BPS/sigma-BPS warmup) or
                            // reference-covariance scale (Boomerang)
  double alpha = 1.0;
  double cap_r = 2.0;
  double t_init = 0.1;
  int warmup_events = 1000;  // sigma-BPS preconditioning chain length
  int thinning_factor = 1;
  int batch_size = 0;  // 0 = full batch
  int n_events = 2000;
  std::uint64_t seed = 0;

  void validate() const;
};

// Diagonal scaling A = diag(Sigma^{1/2}) estimated during warm-up.
struct Preconditioner {
  Vec scale;  // entries > 0
  enum class Source { Identity, WelfordWarmup } source = Source::Identity;
};

struct BoomerangReference {
  Vec w_star;      // MAP estimate
  Vec sigma_star;  // diagonal of the reference covariance, entries > 0
};

struct Chain {
  std::vector<double> clocks;
  std::vector<Vec> states;
  ipp::ThinningAudit audit;
  std::uint64_t bounce_count = 0;
  std::uint64_t refresh_count = 0;

  Mat to_matrix() const;
};

// Deterministic dynamics.
PdmpState bps_flow(const PdmpState& s, double t);
PdmpState precond_flow(const PdmpState& s, const Vec& scale, double t);
PdmpState boomerang_flow(const PdmpState& s, const BoomerangReference& ref,
                         double t);

// Velocity updates at events. Gradients of zero norm are the caller's
// responsibility (run_chain falls back to a refreshment).
Vec bps_bounce(const Vec& grad, const Vec& v);
Vec precond_bounce(const Vec& grad, const Vec& v, const Vec& scale);
Vec boomerang_bounce(const Vec& grad, const Vec& v, const Vec& sigma_star);

// Streaming mean/variance (Welford recurrences).
class WelfordAccumulator {
 public:
  explicit WelfordAccumulator(int dim);
  void add(const Vec& x);
  std::uint64_t count() const { return count_; }
  const Vec& mean() const { return mean_; }
  Vec variance() const;           // sample variance, clamped >= kVarClamp
  Vec stddev() const;

  static constexpr double kVarClamp = 1e-8;

 private:
  std::uint64_t count_ = 0;
  Vec mean_;
  Vec m2_;
};

// Event rate for the current deterministic segment: the directional
// derivative of the potential along the flow, clamped at zero. A fresh
// mini-batch gradient estimate is drawn at every evaluation.
ipp::RateFn segment_rate(const PdmpState& s, Kernel kernel, const Model& model,
                         MiniBatchPlan* plan, const Preconditioner& precond,
                         const BoomerangReference* ref);

Vec refresh_velocity(Kernel kernel, int dim, const SamplerConfig& cfg,
                     const Preconditioner& precond,
                     const BoomerangReference* ref, Rng& rng);

// Short BPS chain whose event states feed a Welford estimate of the
// per-coordinate standard deviations.
Preconditioner welford_warmup(const Model& model, const SamplerConfig& cfg,
                              const Vec& w0, PdmpState* final_state = nullptr);

// Main loop: alternates envelope-thinned bounce events with
// exponential refreshment events, recording the state at every event.
// sigma-BPS runs its warm-up internally; Boomerang centres its
// reference on w0 with covariance gamma * diag_hessian_nll(w0)^-1.
Chain run_chain(const Model& model, const SamplerConfig& cfg, const Vec& w0);

}  // namespace pdmp

#endif  // PDMP_SAMPLERS_HPP

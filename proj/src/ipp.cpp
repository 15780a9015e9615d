#include "pdmp/ipp.hpp"

#include <cmath>
#include <stdexcept>

namespace pdmp::ipp {

std::optional<double> sample_linear_time(const LinearSegment& seg,
                                         double t_prev, double u) {
  if (!(u > 0.0 && u < 1.0))
    throw std::runtime_error("sample_linear_time: u must lie in (0, 1)");
  if (t_prev < seg.start_time)
    throw std::runtime_error("sample_linear_time: t_prev before segment start");

  const double a = seg.slope;
  const double b = seg.intercept;
  const double target = -std::log1p(-u);  // integrated-rate mass to consume

  if (std::abs(a) < kSlopeEps) {
    if (b <= 0.0) return std::nullopt;
    return t_prev + target / b;
  }

  double h0 = a * t_prev + b;
  if (a > 0.0) {
    // A negative rate at t_prev contributes no mass; integration
    // starts at the zero crossing.
    if (h0 < 0.0) h0 = 0.0;
    const double disc = h0 * h0 + 2.0 * a * target;
    return std::max(t_prev, (-b + std::sqrt(disc)) / a);
  }

  // Falling rate: the process extinguishes at -b/a.
  if (h0 <= 0.0) return std::nullopt;
  const double disc = h0 * h0 + 2.0 * a * target;
  if (disc < 0.0) return std::nullopt;
  return std::max(t_prev, (-b + std::sqrt(disc)) / a);
}

void ThinningAudit::record(double ratio) {
  ratio_min = std::min(ratio_min, ratio);
  ratio_max = std::max(ratio_max, ratio);
  int bin = static_cast<int>(ratio / hist_upper * kHistBins);
  if (bin < 0) bin = 0;
  if (bin >= kHistBins) bin = kHistBins - 1;
  ++ratio_hist[static_cast<std::size_t>(bin)];
}

void ThinningAudit::merge(const ThinningAudit& other) {
  proposals += other.proposals;
  acceptances += other.acceptances;
  rejections += other.rejections;
  bound_violations += other.bound_violations;
  cap_rejections += other.cap_rejections;
  ratio_min = std::min(ratio_min, other.ratio_min);
  ratio_max = std::max(ratio_max, other.ratio_max);
  for (int i = 0; i < kHistBins; ++i)
    ratio_hist[static_cast<std::size_t>(i)] +=
        other.ratio_hist[static_cast<std::size_t>(i)];
}

Envelope::Envelope(EnvelopeConfig cfg) : cfg_(cfg) {
  if (cfg_.alpha < 1.0)
    throw ConfigError("alpha: must be >= 1");
  if (cfg_.cap <= 1.0)
    throw ConfigError("r_cap: must be > 1");
  if (cfg_.t_init <= 0.0)
    throw ConfigError("t_init: must be > 0");
}

void Envelope::init(const RateFn& rate) {
  const double l0 = cfg_.alpha * rate(0.0);
  const double li = cfg_.alpha * rate(cfg_.t_init);
  if (!std::isfinite(l0) || !std::isfinite(li))
    throw std::runtime_error("envelope: non-finite rate evaluation");

  active_.slope = (li - l0) / cfg_.t_init;
  active_.intercept = l0;
  active_.start_time = 0.0;

  times_.clear();
  rates_.clear();
  times_.push_back(0.0);
  rates_.push_back(l0);
  cursor_ = 0.0;
  initialized_ = true;
}

void Envelope::append(double t, double adjusted) {
  if (!times_.empty() && t <= times_.back())
    throw std::runtime_error("envelope: appended times must increase");
  times_.push_back(t);
  rates_.push_back(adjusted);
  refit();
}

void Envelope::refit() {
  const std::size_t n = times_.size();
  if (n < 2) return;
  const double t1 = times_[n - 2], t2 = times_[n - 1];
  const double l1 = rates_[n - 2], l2 = rates_[n - 1];
  active_.slope = (l2 - l1) / (t2 - t1);
  active_.intercept = l2 - active_.slope * t2;
  active_.start_time = 0.0;
}

std::optional<double> propose_event(Envelope& env, const RateFn& rate,
                                    Rng& rng, ThinningAudit& audit,
                                    double horizon) {
  if (!env.initialized())
    throw std::runtime_error("propose_event: envelope not initialized");
  const double alpha = env.config().alpha;
  const double cap = env.config().cap;

  // Walks past dead or extinguished stretches of the envelope.
  auto advance = [&]() -> bool {
    const double t_next = env.cursor() + env.config().t_init;
    if (t_next > horizon) return false;
    const double lam = rate(t_next);
    if (!std::isfinite(lam))
      throw std::runtime_error("propose_event: non-finite rate evaluation");
    env.append(t_next, alpha * lam);
    env.advance_cursor(t_next);
    return true;
  };

  for (std::uint64_t iter = 0; iter < kMaxProposalIters; ++iter) {
    const LinearSegment seg = env.active();

    std::optional<double> proposal;
    if (!seg.is_zero())
      proposal = sample_linear_time(seg, env.cursor(), uniform_open01(rng));
    if (!proposal) {
      if (!advance()) return std::nullopt;
      continue;
    }

    const double t_i = *proposal;
    if (t_i > horizon) return std::nullopt;

    const double h = seg.rate_at(t_i);
    if (h <= 0.0) {
      if (!advance()) return std::nullopt;
      continue;
    }

    const double lam = rate(t_i);
    if (!std::isfinite(lam))
      throw std::runtime_error("propose_event: non-finite rate evaluation");
    const double ratio = lam / h;
    const double u = uniform_open01(rng);

    ++audit.proposals;
    audit.record(ratio);
    if (ratio > 1.0 + kBoundTol) ++audit.bound_violations;

    if (u <= ratio && ratio < cap) {
      ++audit.acceptances;
      return t_i;
    }

    ++audit.rejections;
    if (ratio >= cap) ++audit.cap_rejections;
    env.append(t_i, alpha * lam);
    env.advance_cursor(t_i);
  }
  throw std::runtime_error("propose_event: iteration cap exceeded");
}

}  // namespace pdmp::ipp

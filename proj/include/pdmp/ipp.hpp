#ifndef PDMP_IPP_HPP
#define PDMP_IPP_HPP

#include "pdmp/types.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace pdmp::ipp {

inline constexpr double kSlopeEps = 1e-12;
inline constexpr double kBoundTol = 1e-9;
inline constexpr std::uint64_t kMaxProposalIters = 1'000'000;

// One linear piece h(t) = slope * t + intercept of the proposal rate.
// The intercept may be negative after interpolation; inversion treats
// the rate as max{0, h(t)}.
struct LinearSegment {
  double slope = 0.0;
  double intercept = 0.0;
  double start_time = 0.0;

  double rate_at(double t) const { return slope * t + intercept; }
  bool is_zero() const { return slope == 0.0 && intercept == 0.0; }
};

// First-event time of a Poisson process with rate max{0, a*t + b}
// after t_prev, inverted through the integrated rate. Returns nullopt
// when the rate extinguishes before the event fires.
std::optional<double> sample_linear_time(const LinearSegment& seg,
                                         double t_prev, double u);

// Scaled event rate used for envelope construction; alpha >= 1 keeps
// the envelope pointwise above the unscaled rate.
inline double adjusted_rate(double raw_dot, double alpha) {
  return std::max(0.0, alpha * raw_dot);
}

// Counters for the thinning loop. `proposals` counts tested proposal
// times; advance steps over dead regions are not proposals.
struct ThinningAudit {
  std::uint64_t proposals = 0;
  std::uint64_t acceptances = 0;
  std::uint64_t rejections = 0;
  std::uint64_t bound_violations = 0;  // ratio > 1 + kBoundTol
  std::uint64_t cap_rejections = 0;    // ratio >= R
  double ratio_min = std::numeric_limits<double>::infinity();
  double ratio_max = -std::numeric_limits<double>::infinity();

  static constexpr int kHistBins = 50;
  std::array<std::uint64_t, kHistBins> ratio_hist{};  // on [0, hist_upper]
  double hist_upper = 2.0;

  void record(double ratio);
  void merge(const ThinningAudit& other);
};

// Non-negative event rate along the current deterministic segment.
using RateFn = std::function<double(double)>;

struct EnvelopeConfig {
  double alpha = 1.0;   // >= 1
  double cap = 2.0;     // R > 1: reject outright when ratio >= R
  double t_init = 0.1;  // initial interpolation point and advance stride
};

// Piecewise-linear proposal envelope built by interpolating evaluated
// rates. Holds the growing sets (times, rates) for the current
// deterministic segment; init() clears them for a new segment.
class Envelope {
 public:
  explicit Envelope(EnvelopeConfig cfg);

  // Evaluates the adjusted rate at 0 and t_init, interpolates the
  // active segment through both points, stores only the t=0 point.
  void init(const RateFn& rate);

  const EnvelopeConfig& config() const { return cfg_; }
  const LinearSegment& active() const { return active_; }
  double cursor() const { return cursor_; }
  bool initialized() const { return initialized_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& rates() const { return rates_; }

  // Appends an evaluated point and refits the active segment through
  // the last two stored points.
  void append(double t, double adjusted);

  void advance_cursor(double t) { cursor_ = t; }
  void invalidate() { initialized_ = false; }

 private:
  void refit();

  EnvelopeConfig cfg_;
  LinearSegment active_;
  std::vector<double> times_;
  std::vector<double> rates_;
  double cursor_ = 0.0;
  bool initialized_ = false;
};

// Adaptive thinning loop: proposes from the active segment, accepts a
// time with probability rate/h when the ratio is below the cap, and
// otherwise grows the envelope. Returns nullopt if no event is found
// before `horizon`. Throws after kMaxProposalIters iterations.
std::optional<double> propose_event(
    Envelope& env, const RateFn& rate, Rng& rng, ThinningAudit& audit,
    double horizon = std::numeric_limits<double>::infinity());

}  // namespace pdmp::ipp

#endif  // PDMP_IPP_HPP

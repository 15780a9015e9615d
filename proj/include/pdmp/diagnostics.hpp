#ifndef PDMP_DIAGNOSTICS_HPP
#define PDMP_DIAGNOSTICS_HPP

#include "pdmp/model.hpp"
#include "pdmp/samplers.hpp"
#include "pdmp/types.hpp"

#include <optional>
#include <vector>

namespace pdmp {

struct PrincipalComponent {
  Vec direction;  // unit norm, first nonzero coordinate positive
  Vec scores;     // centred samples projected onto the direction
};

// Dominant eigenvector of the sample covariance by power iteration
// (tolerance 1e-8, at most 1e4 sweeps).
PrincipalComponent first_principal_component(const Mat& samples);

// Least-variance direction, via power iteration on the spectrally
// shifted covariance.
PrincipalComponent last_principal_component(const Mat& samples);

// Effective sample size with Geyer initial-positive-sequence
// truncation of the autocorrelations; clamped to (0, n].
double ess(const std::vector<double>& scores);
double ess(const Vec& scores);

struct PredictiveSummary {
  bool classification = false;
  Mat mean;         // regression: n x q means; classification: n x K probs
  Mat variance;     // regression only: n x q variance across samples
  Mat lower95;      // 2.5% quantile across samples (per column)
  Mat upper95;      // 97.5% quantile
  double sigma2 = 0.0;  // regression likelihood noise, for NLL
};

// Monte-Carlo predictive posterior over the chain states.
PredictiveSummary predictive_posterior(const Model& model, const Chain& chain,
                                       const Mat& test_inputs);

// Expected calibration error over equal-width confidence bins.
double ece(const Mat& probs, const std::vector<int>& labels, int bins = 10);

// Per-row Shannon entropy in nats, with 0 log 0 = 0.
Vec predictive_entropy(const Mat& probs);

struct MetricsRecord {
  std::optional<double> accuracy;
  std::optional<double> nll;
  std::optional<double> rmse;
  std::optional<double> ece;
};

// Mean per-point metrics of the summary against targets (regression)
// or integer labels (classification).
MetricsRecord nll_rmse_acc(const PredictiveSummary& summary,
                           const Mat& targets);

}  // namespace pdmp

#endif  // PDMP_DIAGNOSTICS_HPP

#include "pdmp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pdmp {

namespace {

constexpr double kPowerTol = 1e-8;
constexpr int kPowerMaxIters = 10000;

void canonicalize_sign(Vec& direction) {
  for (Eigen::Index i = 0; i < direction.size(); ++i) {
    if (std::abs(direction[i]) > 1e-14) {
      if (direction[i] < 0.0) direction = -direction;
      return;
    }
  }
}

// Power iteration for the dominant eigenvector of a symmetric PSD
// matrix. The start vector is deterministic.
Vec dominant_eigenvector(const Mat& cov) {
  const Eigen::Index d = cov.rows();
  Vec x = Vec::Ones(d).normalized();
  // Nudge away from a start vector orthogonal to the dominant space.
  for (Eigen::Index i = 0; i < d; ++i) x[i] += 1e-3 * static_cast<double>(i + 1) / static_cast<double>(d);
  x.normalize();
  for (int it = 0; it < kPowerMaxIters; ++it) {
    Vec y = cov * x;
    const double norm = y.norm();
    if (norm <= 0.0) return x;  // zero matrix: any unit vector
    y /= norm;
    const double delta = std::min((y - x).norm(), (y + x).norm());
    x = y;
    if (delta < kPowerTol) break;
  }
  return x;
}

Mat centered(const Mat& samples) {
  return samples.rowwise() - samples.colwise().mean();
}

PrincipalComponent project(const Mat& samples, Vec direction) {
  direction.normalize();
  canonicalize_sign(direction);
  PrincipalComponent pc;
  pc.scores = centered(samples) * direction;
  pc.direction = std::move(direction);
  return pc;
}

}  // namespace

PrincipalComponent first_principal_component(const Mat& samples) {
  if (samples.rows() < 2)
    throw std::runtime_error("pca: need at least two samples");
  Mat xc = centered(samples);
  Mat cov = xc.transpose() * xc / static_cast<double>(samples.rows() - 1);
  if (cov.trace() <= 0.0)
    throw std::runtime_error("pca: samples have zero variance");
  return project(samples, dominant_eigenvector(cov));
}

PrincipalComponent last_principal_component(const Mat& samples) {
  if (samples.rows() < 2)
    throw std::runtime_error("pca: need at least two samples");
  Mat xc = centered(samples);
  Mat cov = xc.transpose() * xc / static_cast<double>(samples.rows() - 1);
  if (cov.trace() <= 0.0)
    throw std::runtime_error("pca: samples have zero variance");
  Vec top = dominant_eigenvector(cov);
  const double lmax = top.dot(cov * top);
  Mat shifted = Mat::Identity(cov.rows(), cov.cols()) * lmax - cov;
  return project(samples, dominant_eigenvector(shifted));
}

double ess(const std::vector<double>& scores) {
  return ess(Eigen::Map<const Vec>(scores.data(),
                                   static_cast<Eigen::Index>(scores.size())));
}

double ess(const Vec& scores) {
  const Eigen::Index n = scores.size();
  if (n < 4) throw std::runtime_error("ess: need at least four samples");

  const double mean = scores.mean();
  Vec x = scores.array() - mean;
  const double c0 = x.squaredNorm() / static_cast<double>(n);
  if (c0 <= 0.0) throw std::runtime_error("ess: constant sequence");

  auto rho = [&](Eigen::Index k) {
    return x.head(n - k).dot(x.tail(n - k)) / static_cast<double>(n) / c0;
  };

  // Sum autocorrelations over initial positive pairs (Geyer).
  double tau = 1.0;
  for (Eigen::Index k = 1; k + 1 < n; k += 2) {
    const double pair = rho(k) + rho(k + 1);
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }

  double value = static_cast<double>(n) / tau;
  if (!(value > 0.0) || value > static_cast<double>(n))
    value = static_cast<double>(n);
  return value;
}

PredictiveSummary predictive_posterior(const Model& model, const Chain& chain,
                                       const Mat& test_inputs) {
  if (chain.states.empty())
    throw std::runtime_error("predictive_posterior: empty chain");

  const Eigen::Index n = test_inputs.rows();
  const std::size_t s = chain.states.size();

  PredictiveSummary out;
  out.classification = model.is_classification();
  out.sigma2 = model.spec().sigma2;

  Mat first = model.predict(chain.states.front(), test_inputs);
  const Eigen::Index q = first.cols();

  // Per-sample predictions, kept for quantiles.
  std::vector<Mat> preds;
  preds.reserve(s);
  preds.push_back(std::move(first));
  for (std::size_t i = 1; i < s; ++i)
    preds.push_back(model.predict(chain.states[i], test_inputs));

  out.mean = Mat::Zero(n, q);
  for (const Mat& p : preds) out.mean += p;
  out.mean /= static_cast<double>(s);

  if (!out.classification) {
    out.variance = Mat::Zero(n, q);
    for (const Mat& p : preds) {
      Mat d = p - out.mean;
      out.variance += d.cwiseProduct(d);
    }
    out.variance /= static_cast<double>(s);
  }

  out.lower95.resize(n, q);
  out.upper95.resize(n, q);
  std::vector<double> col(s);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < q; ++j) {
      for (std::size_t k = 0; k < s; ++k) col[k] = preds[k](i, j);
      std::sort(col.begin(), col.end());
      const auto quantile = [&](double p) {
        const double pos = p * static_cast<double>(s - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, s - 1);
        const double frac = pos - static_cast<double>(lo);
        return col[lo] * (1.0 - frac) + col[hi] * frac;
      };
      out.lower95(i, j) = quantile(0.025);
      out.upper95(i, j) = quantile(0.975);
    }
  }
  return out;
}

double ece(const Mat& probs, const std::vector<int>& labels, int bins) {
  const Eigen::Index n = probs.rows();
  if (n == 0) throw std::runtime_error("ece: empty input");
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw std::runtime_error("ece: probs/labels size mismatch");
  if (bins < 1) throw std::runtime_error("ece: bins must be >= 1");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(probs.row(i).sum() - 1.0) > 1e-6)
      throw std::runtime_error("ece: probability rows must sum to 1");
  }

  std::vector<double> conf_sum(static_cast<std::size_t>(bins), 0.0);
  std::vector<double> acc_sum(static_cast<std::size_t>(bins), 0.0);
  std::vector<std::size_t> count(static_cast<std::size_t>(bins), 0);

  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index pred;
    const double conf = probs.row(i).maxCoeff(&pred);
    int b = static_cast<int>(conf * bins);
    if (b >= bins) b = bins - 1;
    if (b < 0) b = 0;
    conf_sum[static_cast<std::size_t>(b)] += conf;
    acc_sum[static_cast<std::size_t>(b)] += (pred == labels[static_cast<std::size_t>(i)]) ? 1.0 : 0.0;
    ++count[static_cast<std::size_t>(b)];
  }

  double out = 0.0;
  for (int b = 0; b < bins; ++b) {
    const auto c = count[static_cast<std::size_t>(b)];
    if (c == 0) continue;
    const double conf = conf_sum[static_cast<std::size_t>(b)] / static_cast<double>(c);
    const double acc = acc_sum[static_cast<std::size_t>(b)] / static_cast<double>(c);
    out += static_cast<double>(c) / static_cast<double>(n) * std::abs(acc - conf);
  }
  return out;
}

Vec predictive_entropy(const Mat& probs) {
  Vec out(probs.rows());
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    double h = 0.0;
    for (Eigen::Index j = 0; j < probs.cols(); ++j) {
      const double p = probs(i, j);
      if (p < 0.0 || p > 1.0 + 1e-12)
        throw std::runtime_error("entropy: probabilities must lie in [0, 1]");
      if (p > 0.0) h -= p * std::log(p);
    }
    out[i] = h;
  }
  return out;
}

MetricsRecord nll_rmse_acc(const PredictiveSummary& summary,
                           const Mat& targets) {
  const Eigen::Index n = summary.mean.rows();
  if (targets.rows() != n)
    throw std::runtime_error("metrics: summary/target size mismatch");

  MetricsRecord rec;
  constexpr double kLog2Pi = 1.8378770664093454836;

  if (summary.classification) {
    double correct = 0.0, nll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int label = static_cast<int>(targets(i, 0));
      if (label < 0 || label >= summary.mean.cols())
        throw std::runtime_error("metrics: label out of range");
      Eigen::Index pred;
      summary.mean.row(i).maxCoeff(&pred);
      if (pred == label) correct += 1.0;
      nll -= std::log(std::max(summary.mean(i, label), 1e-300));
    }
    rec.accuracy = correct / static_cast<double>(n);
    rec.nll = nll / static_cast<double>(n);
    return rec;
  }

  if (targets.cols() != summary.mean.cols())
    throw std::runtime_error("metrics: summary/target size mismatch");

  double se = 0.0, nll = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < summary.mean.cols(); ++j) {
      const double err = targets(i, j) - summary.mean(i, j);
      se += err * err;
      const double var = summary.variance(i, j) + summary.sigma2;
      nll += 0.5 * (kLog2Pi + std::log(var)) + err * err / (2.0 * var);
    }
  }
  const double total = static_cast<double>(n * summary.mean.cols());
  rec.rmse = std::sqrt(se / total);
  rec.nll = nll / total;
  return rec;
}

}  // namespace pdmp

#ifndef PDMP_MODEL_HPP
#define PDMP_MODEL_HPP

#include "pdmp/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pdmp {

enum class ModelFamily {
  GaussianTarget,
  LinearRegression,
  LogisticRegression,
  MlpRegression,
  MlpClassification,
};

enum class Activation { Tanh, Relu };

enum class PriorKind { Gaussian, Flat };

std::string to_string(ModelFamily family);
std::optional<ModelFamily> model_family_from_string(const std::string& name);

struct ModelSpec {
  ModelFamily family = ModelFamily::GaussianTarget;
  int dim = 2;                      // gaussian-target only
  std::vector<int> hidden;          // MLP hidden layer widths
  Activation activation = Activation::Tanh;
  double sigma2 = 0.01;             // regression likelihood noise
  PriorKind prior = PriorKind::Gaussian;
  double prior_precision = 1.0;

  void validate() const;
};

struct Dataset {
  Mat inputs;   // N x p
  Mat targets;  // N x q (classification: N x 1 integer labels)

  Eigen::Index size() const { return inputs.rows(); }
  bool empty() const { return inputs.rows() == 0; }
};

// Epoch-wise shuffling without replacement. next_batch() walks the
// current permutation; a new permutation is drawn when the epoch ends.
class MiniBatchPlan {
 public:
  MiniBatchPlan(int batch_size, Eigen::Index n, std::uint64_t shuffle_seed);

  int batch_size() const { return batch_size_; }
  Eigen::Index data_size() const { return n_; }
  int batches_per_epoch() const { return batches_per_epoch_; }

  // Indices of the next mini-batch (1 <= size <= batch_size).
  std::vector<Eigen::Index> next_batch();

 private:
  void reshuffle();

  int batch_size_ = 1;
  Eigen::Index n_ = 0;
  int batches_per_epoch_ = 1;
  std::vector<Eigen::Index> perm_;
  Eigen::Index cursor_ = 0;
  Rng rng_;
};

// Target density as a potential-energy provider: U, gradients (full and
// subsampled), and a finite-difference diagonal Hessian of the data term.
class Model {
 public:
  Model(ModelSpec spec, Dataset data);

  const ModelSpec& spec() const { return spec_; }
  const Dataset& data() const { return data_; }
  int param_dim() const { return param_dim_; }
  int input_dim() const { return input_dim_; }
  int output_dim() const { return output_dim_; }
  bool is_classification() const;

  double potential(const Vec& w) const;
  Vec grad_potential(const Vec& w) const;
  Vec grad_potential_minibatch(const Vec& w, MiniBatchPlan& plan) const;

  // Diagonal of the second derivative of the summed negative log
  // likelihood, by central differences of the data-term gradient.
  // Entries are clamped below at kHessianClamp.
  Vec diag_hessian_nll(const Vec& w, MiniBatchPlan& plan) const;
  Vec diag_hessian_nll(const Vec& w) const;  // full-batch plan

  // Per-point predictions: regression returns the mean (N x q);
  // classification returns class probability rows (N x K).
  Mat predict(const Vec& w, const Mat& inputs) const;

  double prior_energy(const Vec& w) const;
  Vec prior_grad(const Vec& w) const;
  double nll(const Vec& w) const;
  Vec grad_nll(const Vec& w) const;
  Vec grad_nll_subset(const Vec& w, const std::vector<Eigen::Index>& idx) const;

  static constexpr double kHessianClamp = 1e-6;
  static constexpr double kHessianStep = 1e-4;

 private:
  ModelSpec spec_;
  Dataset data_;
  int param_dim_ = 0;
  int input_dim_ = 0;
  int output_dim_ = 0;
  std::vector<int> layer_dims_;  // MLP: [in, hidden..., out]
};

struct MapFitResult {
  Vec w;
  std::vector<double> potential_trace;
};

// Full-batch Adam (beta1=0.9, beta2=0.999) on the potential.
MapFitResult map_fit(const Model& model, const Vec& w0, int iterations,
                     double step, std::uint64_t seed = 0);

// 1-D regression task: inputs on [-2, 2], smooth target plus Gaussian
// noise; deterministic per seed.
Dataset synth_regression(std::uint64_t seed, Eigen::Index n,
                         double noise_std = 0.1);

// Comma-separated ingestion: all columns but the last are inputs, the
// last is the target. Classification targets must be integer labels.
Dataset load_csv(const std::string& path, bool header, bool classification);

}  // namespace pdmp

#endif  // PDMP_MODEL_HPP

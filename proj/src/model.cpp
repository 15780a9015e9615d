#include "pdmp/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace pdmp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using WMap = Eigen::Map<const RowMat>;
using BMap = Eigen::Map<const Vec>;

double softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

Mat apply_activation(const Mat& z, Activation act) {
  if (act == Activation::Tanh) return z.array().tanh();
  return z.array().max(0.0);
}

Mat activation_deriv(const Mat& z, Activation act) {
  if (act == Activation::Tanh) {
    Mat t = z.array().tanh();
    return 1.0 - t.array().square();
  }
  return (z.array() > 0.0).cast<double>();
}

}  // namespace

std::string to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::GaussianTarget: return "gaussian-target";
    case ModelFamily::LinearRegression: return "linear-regression";
    case ModelFamily::LogisticRegression: return "logistic-regression";
    case ModelFamily::MlpRegression: return "mlp-regression";
    case ModelFamily::MlpClassification: return "mlp-classification";
  }
  return "unknown";
}

std::optional<ModelFamily> model_family_from_string(const std::string& name) {
  if (name == "gaussian-target") return ModelFamily::GaussianTarget;
  if (name == "linear-regression") return ModelFamily::LinearRegression;
  if (name == "logistic-regression") return ModelFamily::LogisticRegression;
  if (name == "mlp-regression") return ModelFamily::MlpRegression;
  if (name == "mlp-classification") return ModelFamily::MlpClassification;
  return std::nullopt;
}

void ModelSpec::validate() const {
  if (family == ModelFamily::GaussianTarget) {
    if (dim < 1) throw ConfigError("gaussian-target: dim must be >= 1");
    if (prior == PriorKind::Flat)
      throw ConfigError("gaussian-target: requires a gaussian prior");
  }
  for (int h : hidden) {
    if (h < 1) throw ConfigError("hidden: layer widths must be >= 1");
  }
  if (sigma2 <= 0.0) throw ConfigError("sigma2: must be > 0");
  if (prior == PriorKind::Gaussian && prior_precision <= 0.0)
    throw ConfigError("prior_precision: must be > 0");
}

MiniBatchPlan::MiniBatchPlan(int batch_size, Eigen::Index n,
                             std::uint64_t shuffle_seed)
    : batch_size_(batch_size), n_(n), rng_(shuffle_seed) {
  if (n_ < 1) throw std::runtime_error("mini-batch plan: empty dataset");
  if (batch_size_ < 1 || batch_size_ > n_)
    throw std::runtime_error("mini-batch plan: batch size must be in [1, N]");
  batches_per_epoch_ =
      static_cast<int>((n_ + batch_size_ - 1) / batch_size_);
  perm_.resize(static_cast<std::size_t>(n_));
  std::iota(perm_.begin(), perm_.end(), Eigen::Index{0});
  reshuffle();
}

void MiniBatchPlan::reshuffle() {
  std::shuffle(perm_.begin(), perm_.end(), rng_);
  cursor_ = 0;
}

std::vector<Eigen::Index> MiniBatchPlan::next_batch() {
  if (cursor_ >= n_) reshuffle();
  Eigen::Index end = std::min(cursor_ + batch_size_, n_);
  std::vector<Eigen::Index> batch(perm_.begin() + cursor_, perm_.begin() + end);
  cursor_ = end;
  return batch;
}

Model::Model(ModelSpec spec, Dataset data)
    : spec_(std::move(spec)), data_(std::move(data)) {
  spec_.validate();
  if (!data_.empty() && data_.inputs.rows() != data_.targets.rows())
    throw std::runtime_error("dataset: input/target row counts differ");

  switch (spec_.family) {
    case ModelFamily::GaussianTarget:
      if (!data_.empty())
        throw std::runtime_error("gaussian-target: dataset must be empty");
      param_dim_ = spec_.dim;
      return;
    case ModelFamily::LinearRegression:
    case ModelFamily::LogisticRegression:
      if (!spec_.hidden.empty())
        throw ConfigError("hidden: not valid for linear/logistic regression");
      break;
    default:
      break;
  }

  if (data_.empty()) throw std::runtime_error("model requires a dataset");
  input_dim_ = static_cast<int>(data_.inputs.cols());

  if (is_classification()) {
    int max_label = 0;
    for (Eigen::Index i = 0; i < data_.size(); ++i) {
      double t = data_.targets(i, 0);
      if (t != std::floor(t) || t < 0)
        throw std::runtime_error("classification targets must be integer labels >= 0");
      max_label = std::max(max_label, static_cast<int>(t));
    }
    output_dim_ = spec_.family == ModelFamily::LogisticRegression
                      ? 1
                      : std::max(2, max_label + 1);
    if (spec_.family == ModelFamily::LogisticRegression && max_label > 1)
      throw std::runtime_error("logistic-regression: labels must be 0/1");
  } else {
    output_dim_ = static_cast<int>(data_.targets.cols());
  }

  layer_dims_.push_back(input_dim_);
  for (int h : spec_.hidden) layer_dims_.push_back(h);
  layer_dims_.push_back(output_dim_);

  param_dim_ = 0;
  for (std::size_t l = 1; l < layer_dims_.size(); ++l)
    param_dim_ += layer_dims_[l] * (layer_dims_[l - 1] + 1);
}

bool Model::is_classification() const {
  return spec_.family == ModelFamily::LogisticRegression ||
         spec_.family == ModelFamily::MlpClassification;
}

double Model::prior_energy(const Vec& w) const {
  if (spec_.prior == PriorKind::Flat) return 0.0;
  return 0.5 * spec_.prior_precision * w.squaredNorm();
}

Vec Model::prior_grad(const Vec& w) const {
  if (spec_.prior == PriorKind::Flat) return Vec::Zero(w.size());
  return spec_.prior_precision * w;
}

namespace {

// Network outputs for a batch of inputs; optionally keeps the
// per-layer pre-activations and activations for the backward pass.
struct ForwardPass {
  std::vector<Mat> pre;   // z_l, one per affine layer
  std::vector<Mat> act;   // a_0 = x, then activations
};

Mat forward(const Vec& w, const Mat& x, const std::vector<int>& dims,
            Activation activation, ForwardPass* keep) {
  Mat a = x;
  if (keep) keep->act.push_back(a);
  Eigen::Index off = 0;
  const std::size_t n_layers = dims.size() - 1;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const int in = dims[l], out = dims[l + 1];
    WMap W(w.data() + off, out, in);
    off += static_cast<Eigen::Index>(out) * in;
    BMap b(w.data() + off, out);
    off += out;
    Mat z = (a * W.transpose()).rowwise() + b.transpose();
    if (l + 1 < n_layers) {
      a = apply_activation(z, activation);
    } else {
      a = z;
    }
    if (keep) {
      keep->pre.push_back(std::move(z));
      if (l + 1 < n_layers) keep->act.push_back(a);
    }
  }
  return a;
}

// Accumulates parameter gradients given dLoss/dz at the output layer.
Vec backward(const Vec& w, const std::vector<int>& dims, Activation activation,
             const ForwardPass& fp, Mat delta) {
  Vec grad = Vec::Zero(w.size());
  const std::size_t n_layers = dims.size() - 1;

  std::vector<Eigen::Index> offsets(n_layers);
  Eigen::Index off = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    offsets[l] = off;
    off += static_cast<Eigen::Index>(dims[l + 1]) * (dims[l] + 1);
  }

  for (std::size_t l = n_layers; l-- > 0;) {
    const int in = dims[l], out = dims[l + 1];
    Eigen::Map<RowMat> gw(grad.data() + offsets[l], out, in);
    Eigen::Map<Vec> gb(grad.data() + offsets[l] + static_cast<Eigen::Index>(out) * in, out);
    gw = delta.transpose() * fp.act[l];
    gb = delta.colwise().sum().transpose();
    if (l > 0) {
      WMap W(w.data() + offsets[l], out, in);
      delta = (delta * W).cwiseProduct(activation_deriv(fp.pre[l - 1], activation));
    }
  }
  return grad;
}

}  // namespace

double Model::nll(const Vec& w) const {
  if (spec_.family == ModelFamily::GaussianTarget || data_.empty()) return 0.0;

  Mat out = forward(w, data_.inputs, layer_dims_, spec_.activation, nullptr);
  double total = 0.0;
  const Eigen::Index n = data_.size();
  switch (spec_.family) {
    case ModelFamily::LinearRegression:
    case ModelFamily::MlpRegression: {
      const double q = static_cast<double>(output_dim_);
      total = (out - data_.targets).squaredNorm() / (2.0 * spec_.sigma2) +
              static_cast<double>(n) * 0.5 * q *
                  (kLog2Pi + std::log(spec_.sigma2));
      break;
    }
    case ModelFamily::LogisticRegression: {
      for (Eigen::Index i = 0; i < n; ++i)
        total += softplus(out(i, 0)) - data_.targets(i, 0) * out(i, 0);
      break;
    }
    case ModelFamily::MlpClassification: {
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto row = out.row(i);
        double zmax = row.maxCoeff();
        double lse = zmax + std::log((row.array() - zmax).exp().sum());
        total += lse - row(static_cast<int>(data_.targets(i, 0)));
      }
      break;
    }
    default:
      break;
  }
  return total;
}

double Model::potential(const Vec& w) const {
  if (w.size() != param_dim_)
    throw std::runtime_error("potential: parameter dimension mismatch");
  const double prior = prior_energy(w);
  if (!std::isfinite(prior))
    throw std::runtime_error("potential: prior term is not finite");
  const double lik = nll(w);
  if (!std::isfinite(lik))
    throw std::runtime_error("potential: likelihood term is not finite");
  return prior + lik;
}

Vec Model::grad_nll_subset(const Vec& w,
                           const std::vector<Eigen::Index>& idx) const {
  if (spec_.family == ModelFamily::GaussianTarget)
    return Vec::Zero(param_dim_);
  if (idx.empty()) throw std::runtime_error("gradient: empty mini-batch");

  Mat x(static_cast<Eigen::Index>(idx.size()), input_dim_);
  Mat y(static_cast<Eigen::Index>(idx.size()), data_.targets.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = data_.inputs.row(idx[i]);
    y.row(static_cast<Eigen::Index>(i)) = data_.targets.row(idx[i]);
  }

  ForwardPass fp;
  Mat out = forward(w, x, layer_dims_, spec_.activation, &fp);

  Mat delta;
  switch (spec_.family) {
    case ModelFamily::LinearRegression:
    case ModelFamily::MlpRegression:
      delta = (out - y) / spec_.sigma2;
      break;
    case ModelFamily::LogisticRegression: {
      delta.resize(out.rows(), 1);
      for (Eigen::Index i = 0; i < out.rows(); ++i)
        delta(i, 0) = sigmoid(out(i, 0)) - y(i, 0);
      break;
    }
    case ModelFamily::MlpClassification: {
      delta.resize(out.rows(), out.cols());
      for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const auto row = out.row(i);
        double zmax = row.maxCoeff();
        Eigen::RowVectorXd p = (row.array() - zmax).exp();
        p /= p.sum();
        delta.row(i) = p;
        delta(i, static_cast<int>(y(i, 0))) -= 1.0;
      }
      break;
    }
    default:
      return Vec::Zero(param_dim_);
  }
  return backward(w, layer_dims_, spec_.activation, fp, std::move(delta));
}

Vec Model::grad_nll(const Vec& w) const {
  if (spec_.family == ModelFamily::GaussianTarget || data_.empty())
    return Vec::Zero(param_dim_);
  std::vector<Eigen::Index> all(static_cast<std::size_t>(data_.size()));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  return grad_nll_subset(w, all);
}

Vec Model::grad_potential(const Vec& w) const {
  if (w.size() != param_dim_)
    throw std::runtime_error("gradient: parameter dimension mismatch");
  return prior_grad(w) + grad_nll(w);
}

Vec Model::grad_potential_minibatch(const Vec& w, MiniBatchPlan& plan) const {
  if (w.size() != param_dim_)
    throw std::runtime_error("gradient: parameter dimension mismatch");
  if (spec_.family == ModelFamily::GaussianTarget || data_.empty())
    return prior_grad(w);
  // Scaling by the number of batches per epoch keeps the estimator
  // unbiased over an epoch partition even when N % m != 0; it equals
  // N/m for divisible batch sizes.
  const double scale = static_cast<double>(plan.batches_per_epoch());
  return prior_grad(w) + scale * grad_nll_subset(w, plan.next_batch());
}

Vec Model::diag_hessian_nll(const Vec& w, MiniBatchPlan& plan) const {
  if (w.size() != param_dim_)
    throw std::runtime_error("hessian: parameter dimension mismatch");
  Vec diag(param_dim_);
  if (spec_.family == ModelFamily::GaussianTarget || data_.empty()) {
    diag.setConstant(kHessianClamp);
    return diag;
  }

  // Sum of per-batch data gradients over one epoch equals the full
  // data gradient; evaluated per coordinate with a central difference.
  auto epoch_grad_nll = [&](const Vec& at) {
    Vec g = Vec::Zero(param_dim_);
    for (int b = 0; b < plan.batches_per_epoch(); ++b)
      g += grad_nll_subset(at, plan.next_batch());
    return g;
  };

  Vec wp = w;
  for (int j = 0; j < param_dim_; ++j) {
    wp[j] = w[j] + kHessianStep;
    const double gp = epoch_grad_nll(wp)[j];
    wp[j] = w[j] - kHessianStep;
    const double gm = epoch_grad_nll(wp)[j];
    wp[j] = w[j];
    const double second = (gp - gm) / (2.0 * kHessianStep);
    if (!std::isfinite(second))
      throw std::runtime_error("hessian: non-finite second difference at coordinate " +
                               std::to_string(j));
    diag[j] = std::max(second, kHessianClamp);
  }
  return diag;
}

Vec Model::diag_hessian_nll(const Vec& w) const {
  if (spec_.family == ModelFamily::GaussianTarget || data_.empty())
    return Vec::Constant(param_dim_, kHessianClamp);
  MiniBatchPlan full(static_cast<int>(data_.size()), data_.size(), 0);
  return diag_hessian_nll(w, full);
}

Mat Model::predict(const Vec& w, const Mat& inputs) const {
  if (spec_.family == ModelFamily::GaussianTarget)
    throw std::runtime_error("predict: gaussian-target has no predictive model");
  if (inputs.cols() != input_dim_)
    throw std::runtime_error("predict: input dimension mismatch");
  Mat out = forward(w, inputs, layer_dims_, spec_.activation, nullptr);
  switch (spec_.family) {
    case ModelFamily::LogisticRegression: {
      Mat probs(out.rows(), 2);
      for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double p1 = sigmoid(out(i, 0));
        probs(i, 0) = 1.0 - p1;
        probs(i, 1) = p1;
      }
      return probs;
    }
    case ModelFamily::MlpClassification: {
      for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double zmax = out.row(i).maxCoeff();
        Eigen::RowVectorXd p = (out.row(i).array() - zmax).exp();
        out.row(i) = p / p.sum();
      }
      return out;
    }
    default:
      return out;
  }
}

MapFitResult map_fit(const Model& model, const Vec& w0, int iterations,
                     double step, std::uint64_t /*seed*/) {
  if (iterations < 0) throw std::runtime_error("map_fit: iterations must be >= 0");
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  MapFitResult res;
  res.w = w0;
  res.potential_trace.reserve(static_cast<std::size_t>(iterations) + 1);
  res.potential_trace.push_back(model.potential(res.w));

  Vec m = Vec::Zero(w0.size());
  Vec v = Vec::Zero(w0.size());
  for (int k = 1; k <= iterations; ++k) {
    Vec g = model.grad_potential(res.w);
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
    const double bc1 = 1.0 - std::pow(beta1, k);
    const double bc2 = 1.0 - std::pow(beta2, k);
    res.w -= step * (m / bc1).cwiseQuotient(((v / bc2).cwiseSqrt().array() + eps).matrix());
    const double u = model.potential(res.w);
    if (!std::isfinite(u))
      throw std::runtime_error("map_fit: potential diverged at iteration " +
                               std::to_string(k));
    res.potential_trace.push_back(u);
  }
  return res;
}

Dataset synth_regression(std::uint64_t seed, Eigen::Index n, double noise_std) {
  if (n < 2) throw std::runtime_error("synth_regression: n must be >= 2");
  Rng rng(seed);
  std::uniform_real_distribution<double> ux(-2.0, 2.0);
  Dataset d;
  d.inputs.resize(n, 1);
  d.targets.resize(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = ux(rng);
    d.inputs(i, 0) = x;
    d.targets(i, 0) = std::sin(2.0 * x) + 0.5 * x;
  }
  for (Eigen::Index i = 0; i < n; ++i)
    d.targets(i, 0) += noise_std * normal_draw(rng);
  return d;
}

Dataset load_csv(const std::string& path, bool header, bool classification) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (header && lineno == 1) continue;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::runtime_error("csv: bad value '" + cell + "' at line " +
                                 std::to_string(lineno));
      }
    }
    if (row.size() < 2)
      throw std::runtime_error("csv: need at least two columns at line " +
                               std::to_string(lineno));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("csv: inconsistent column count at line " +
                               std::to_string(lineno));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("csv: no data rows in " + path);

  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index p = static_cast<Eigen::Index>(rows.front().size()) - 1;
  Dataset d;
  d.inputs.resize(n, p);
  d.targets.resize(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) d.inputs(i, j) = rows[i][j];
    const double t = rows[i][p];
    if (classification && (t != std::floor(t) || t < 0))
      throw std::runtime_error("csv: classification target at row " +
                               std::to_string(i + 1) + " is not an integer label");
    d.targets(i, 0) = t;
  }
  return d;
}

}  // namespace pdmp

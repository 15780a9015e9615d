#include "pdmp/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace pdmp {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct RawValue {
  std::string text;
  std::size_t line = 0;
};

using RawMap = std::map<std::string, RawValue>;

RawMap tokenize(const std::string& text) {
  RawMap out;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    bool in_quote = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_quote = !in_quote;
      if (line[i] == '#' && !in_quote) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    if (out.count(key))
      throw ConfigError("duplicate key '" + key + "'");
    out[key] = {value, lineno};
  }
  return out;
}

class Fields {
 public:
  explicit Fields(RawMap raw) : raw_(std::move(raw)) {}

  bool has(const std::string& key) {
    known_.push_back(key);
    return raw_.count(key) > 0;
  }

  std::string get_string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    std::string v = raw_[key].text;
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"')
      return v.substr(1, v.size() - 2);
    return v;
  }

  bool get_bool(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const std::string v = raw_[key].text;
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError(key + ": expected true or false");
  }

  double get_double(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    try {
      std::size_t pos = 0;
      double v = std::stod(raw_[key].text, &pos);
      if (pos != raw_[key].text.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw ConfigError(key + ": expected a number");
    }
  }

  long long get_int(const std::string& key, long long fallback) {
    if (!has(key)) return fallback;
    try {
      std::size_t pos = 0;
      long long v = std::stoll(raw_[key].text, &pos);
      if (pos != raw_[key].text.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw ConfigError(key + ": expected an integer");
    }
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    try {
      std::size_t pos = 0;
      std::uint64_t v = std::stoull(raw_[key].text, &pos);
      if (pos != raw_[key].text.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw ConfigError(key + ": expected an unsigned integer");
    }
  }

  std::vector<int> get_int_array(const std::string& key) {
    if (!has(key)) return {};
    std::string v = raw_[key].text;
    if (v.size() < 2 || v.front() != '[' || v.back() != ']')
      throw ConfigError(key + ": expected an array like [25, 10]");
    v = v.substr(1, v.size() - 2);
    std::vector<int> out;
    std::stringstream ss(v);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cell = trim(cell);
      if (cell.empty()) continue;
      try {
        std::size_t pos = 0;
        out.push_back(std::stoi(cell, &pos));
        if (pos != cell.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ConfigError(key + ": expected integer entries");
      }
    }
    return out;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : raw_) {
      if (std::find(known_.begin(), known_.end(), key) == known_.end())
        throw ConfigError("unknown key '" + key + "' (line " +
                          std::to_string(value.line) + ")");
    }
  }

 private:
  RawMap raw_;
  std::vector<std::string> known_;
};

Method method_from_string(const std::string& name) {
  if (name == "bps") return Method::Bps;
  if (name == "sigma-bps") return Method::SigmaBps;
  if (name == "boomerang") return Method::Boomerang;
  if (name == "sgld") return Method::Sgld;
  if (name == "sgld-nd") return Method::SgldNd;
  throw ConfigError(
      "sampler: expected one of bps, sigma-bps, boomerang, sgld, sgld-nd");
}

void validate(const RunConfig& c) {
  c.model_spec.validate();

  const bool needs_data = c.model_spec.family != ModelFamily::GaussianTarget;
  const bool has_data = !c.dataset_path.empty() || c.use_synthetic;
  if (needs_data && !has_data)
    throw ConfigError("dataset: required for model '" +
                      to_string(c.model_spec.family) + "'");
  if (!needs_data && has_data)
    throw ConfigError("dataset: gaussian-target takes no data");
  if (!c.dataset_path.empty() && c.use_synthetic)
    throw ConfigError("dataset: choose either a csv path or synthetic data");
  if (c.use_synthetic && c.model_spec.family != ModelFamily::LinearRegression &&
      c.model_spec.family != ModelFamily::MlpRegression)
    throw ConfigError("synthetic: only supported for regression models");
  if (c.use_synthetic && c.synthetic_n < 2)
    throw ConfigError("synthetic_n: must be >= 2");
  if (c.use_synthetic && c.synthetic_noise < 0.0)
    throw ConfigError("synthetic_noise: must be >= 0");
  if (!c.model_spec.hidden.empty() &&
      c.model_spec.family != ModelFamily::MlpRegression &&
      c.model_spec.family != ModelFamily::MlpClassification)
    throw ConfigError("hidden: only valid for mlp models");

  if (c.lambda_ref <= 0.0) throw ConfigError("lambda_ref: must be > 0");
  if (c.gamma <= 0.0) throw ConfigError("gamma: must be > 0");
  if (c.alpha < 1.0) throw ConfigError("alpha: must be >= 1");
  if (c.cap_r <= 1.0) throw ConfigError("r_cap: must be > 1");
  if (c.t_init <= 0.0) throw ConfigError("t_init: must be > 0");
  if (c.warmup_events < 2) throw ConfigError("warmup_events: must be >= 2");
  if (c.thinning_factor < 1) throw ConfigError("thinning_factor: must be >= 1");
  if (c.batch_size < 0) throw ConfigError("batch_size: must be >= 0");
  if (c.lr0 <= 0.0) throw ConfigError("lr0: must be > 0");
  if (c.n_samples < 1) throw ConfigError("n_samples: must be >= 1");
  if (c.repeats < 1) throw ConfigError("repeats: must be >= 1");
  if (c.map_iterations < 0) throw ConfigError("map_iterations: must be >= 0");
  if (c.map_step <= 0.0) throw ConfigError("map_step: must be > 0");
  if (c.out_dir.empty()) throw ConfigError("out_dir: must not be empty");
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::Bps: return "bps";
    case Method::SigmaBps: return "sigma-bps";
    case Method::Boomerang: return "boomerang";
    case Method::Sgld: return "sgld";
    case Method::SgldNd: return "sgld-nd";
  }
  return "unknown";
}

SamplerConfig RunConfig::sampler_config(std::uint64_t chain_seed) const {
  SamplerConfig s;
  switch (method) {
    case Method::Bps: s.kernel = Kernel::Bps; break;
    case Method::SigmaBps: s.kernel = Kernel::SigmaBps; break;
    case Method::Boomerang: s.kernel = Kernel::Boomerang; break;
    default: throw std::runtime_error("sampler_config: not a pdmp method");
  }
  s.lambda_ref = lambda_ref;
  s.gamma = gamma;
  s.alpha = alpha;
  s.cap_r = cap_r;
  s.t_init = t_init;
  s.warmup_events = warmup_events;
  s.thinning_factor = thinning_factor;
  s.batch_size = batch_size;
  s.n_events = n_samples;
  s.seed = chain_seed;
  return s;
}

SgldConfig RunConfig::sgld_config(std::uint64_t chain_seed) const {
  if (is_pdmp()) throw std::runtime_error("sgld_config: not an sgld method");
  SgldConfig s;
  s.lr0 = lr0;
  s.decay = method == Method::Sgld ? SgldDecay::LinearToZero : SgldDecay::None;
  s.steps = n_samples * thinning_factor;
  s.thinning_factor = thinning_factor;
  s.batch_size = batch_size;
  s.seed = chain_seed;
  return s;
}

RunConfig parse_config_text(const std::string& text) {
  Fields f(tokenize(text));
  RunConfig c;

  const std::string model = f.get_string("model", "");
  if (model.empty()) throw ConfigError("model: required");
  auto family = model_family_from_string(model);
  if (!family)
    throw ConfigError("model: unknown family '" + model + "'");
  c.model_spec.family = *family;
  c.model_spec.dim = static_cast<int>(f.get_int("dim", c.model_spec.dim));
  c.model_spec.hidden = f.get_int_array("hidden");
  const std::string act = f.get_string("activation", "tanh");
  if (act == "tanh") c.model_spec.activation = Activation::Tanh;
  else if (act == "relu") c.model_spec.activation = Activation::Relu;
  else throw ConfigError("activation: expected tanh or relu");
  c.model_spec.sigma2 = f.get_double("sigma2", c.model_spec.sigma2);
  const std::string prior = f.get_string("prior", "gaussian");
  if (prior == "gaussian") c.model_spec.prior = PriorKind::Gaussian;
  else if (prior == "flat") c.model_spec.prior = PriorKind::Flat;
  else throw ConfigError("prior: expected gaussian or flat");
  c.model_spec.prior_precision =
      f.get_double("prior_precision", c.model_spec.prior_precision);

  c.dataset_path = f.get_string("dataset", "");
  c.csv_header = f.get_bool("csv_header", false);
  const std::string synth = f.get_string("synthetic", "");
  if (!synth.empty()) {
    if (synth != "regression")
      throw ConfigError("synthetic: expected 'regression'");
    c.use_synthetic = true;
  }
  c.synthetic_n = static_cast<int>(f.get_int("synthetic_n", c.synthetic_n));
  c.synthetic_noise = f.get_double("synthetic_noise", c.synthetic_noise);

  const std::string sampler = f.get_string("sampler", "");
  if (sampler.empty()) throw ConfigError("sampler: required");
  c.method = method_from_string(sampler);

  c.lambda_ref = f.get_double("lambda_ref", 1.0);
  c.gamma = f.get_double("gamma",
                         c.method == Method::Boomerang ? 0.1 : 0.001);
  c.alpha = f.get_double("alpha", 1.0);
  c.cap_r = f.get_double("r_cap", 2.0);
  c.t_init = f.get_double("t_init", 0.1);
  c.warmup_events = static_cast<int>(f.get_int("warmup_events", 1000));
  c.thinning_factor = static_cast<int>(f.get_int("thinning_factor", 1));
  c.batch_size = static_cast<int>(f.get_int("batch_size", 0));
  c.lr0 = f.get_double("lr0", 1e-5);

  c.n_samples = static_cast<int>(f.get_int("n_samples", 2000));
  c.repeats = static_cast<int>(f.get_int("repeats", 1));
  c.seed = f.get_u64("seed", 0);
  c.map_iterations = static_cast<int>(f.get_int("map_iterations", 10000));
  c.map_step = f.get_double("map_step", 0.01);
  c.out_dir = f.get_string("out_dir", "runs/out");

  f.reject_unknown();
  validate(c);
  return c;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "model = \"" << to_string(c.model_spec.family) << "\"\n";
  if (c.model_spec.family == ModelFamily::GaussianTarget)
    out << "dim = " << c.model_spec.dim << "\n";
  if (!c.model_spec.hidden.empty()) {
    out << "hidden = [";
    for (std::size_t i = 0; i < c.model_spec.hidden.size(); ++i) {
      if (i) out << ", ";
      out << c.model_spec.hidden[i];
    }
    out << "]\n";
  }
  out << "activation = \""
      << (c.model_spec.activation == Activation::Tanh ? "tanh" : "relu")
      << "\"\n";
  out << "sigma2 = " << c.model_spec.sigma2 << "\n";
  out << "prior = \""
      << (c.model_spec.prior == PriorKind::Gaussian ? "gaussian" : "flat")
      << "\"\n";
  out << "prior_precision = " << c.model_spec.prior_precision << "\n";
  if (!c.dataset_path.empty()) {
    out << "dataset = \"" << c.dataset_path << "\"\n";
    out << "csv_header = " << (c.csv_header ? "true" : "false") << "\n";
  }
  if (c.use_synthetic) {
    out << "synthetic = \"regression\"\n";
    out << "synthetic_n = " << c.synthetic_n << "\n";
    out << "synthetic_noise = " << c.synthetic_noise << "\n";
  }
  out << "sampler = \"" << to_string(c.method) << "\"\n";
  out << "lambda_ref = " << c.lambda_ref << "\n";
  out << "gamma = " << c.gamma << "\n";
  out << "alpha = " << c.alpha << "\n";
  out << "r_cap = " << c.cap_r << "\n";
  out << "t_init = " << c.t_init << "\n";
  out << "warmup_events = " << c.warmup_events << "\n";
  out << "thinning_factor = " << c.thinning_factor << "\n";
  out << "batch_size = " << c.batch_size << "\n";
  out << "lr0 = " << c.lr0 << "\n";
  out << "n_samples = " << c.n_samples << "\n";
  out << "repeats = " << c.repeats << "\n";
  out << "seed = " << c.seed << "\n";
  out << "map_iterations = " << c.map_iterations << "\n";
  out << "map_step = " << c.map_step << "\n";
  out << "out_dir = \"" << c.out_dir << "\"\n";
  return out.str();
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = serialize_config(cfg);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

}  // namespace pdmp

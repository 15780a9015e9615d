#include "pdmp.h"

#include "pdmp/config.hpp"
#include "pdmp/runner.hpp"

#include <cstring>
#include <string>
#include <vector>

#define PDMP_API __attribute__((visibility("default")))

struct pdmp_run_config {
  pdmp::RunConfig cfg;
};

namespace {

thread_local std::string g_last_error;

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
pdmp_status guarded(Fn&& fn) {
  try {
    fn();
    return PDMP_OK;
  } catch (const pdmp::ConfigError& e) {
    g_last_error = e.what();
    return PDMP_ERR_CONFIG;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PDMP_ERR_RUNTIME;
  }
}

}  // namespace

extern "C" {

PDMP_API const char* pdmp_version(void) { return "0.1.0"; }

PDMP_API const char* pdmp_last_error(void) { return g_last_error.c_str(); }

PDMP_API void pdmp_free_string(char* s) { std::free(s); }

PDMP_API pdmp_status pdmp_config_load(const char* path, pdmp_run_config** out) {
  if (!path || !out) {
    g_last_error = "config: null argument";
    return PDMP_ERR_CONFIG;
  }
  *out = nullptr;
  return guarded([&] {
    *out = new pdmp_run_config{pdmp::parse_config(path)};
  });
}

PDMP_API pdmp_status pdmp_config_parse(const char* text, pdmp_run_config** out) {
  if (!text || !out) {
    g_last_error = "config: null argument";
    return PDMP_ERR_CONFIG;
  }
  *out = nullptr;
  return guarded([&] {
    *out = new pdmp_run_config{pdmp::parse_config_text(text)};
  });
}

PDMP_API void pdmp_config_free(pdmp_run_config* cfg) { delete cfg; }

PDMP_API pdmp_status pdmp_config_set_seed(pdmp_run_config* cfg, uint64_t seed) {
  if (!cfg) {
    g_last_error = "config: null handle";
    return PDMP_ERR_CONFIG;
  }
  cfg->cfg.seed = seed;
  return PDMP_OK;
}

PDMP_API pdmp_status pdmp_config_set_out_dir(pdmp_run_config* cfg,
                                             const char* dir) {
  if (!cfg || !dir || !*dir) {
    g_last_error = "out_dir: must not be empty";
    return PDMP_ERR_CONFIG;
  }
  cfg->cfg.out_dir = dir;
  return PDMP_OK;
}

PDMP_API pdmp_status pdmp_config_serialize(const pdmp_run_config* cfg,
                                           char** out) {
  if (!cfg || !out) {
    g_last_error = "config: null argument";
    return PDMP_ERR_CONFIG;
  }
  return guarded([&] { *out = copy_string(pdmp::serialize_config(cfg->cfg)); });
}

PDMP_API pdmp_status pdmp_sample(const pdmp_run_config* cfg) {
  if (!cfg) {
    g_last_error = "config: null handle";
    return PDMP_ERR_CONFIG;
  }
  return guarded([&] { pdmp::execute_run(cfg->cfg); });
}

PDMP_API pdmp_status pdmp_diagnose(const char* run_dir) {
  if (!run_dir) {
    g_last_error = "diagnose: null run directory";
    return PDMP_ERR_CONFIG;
  }
  return guarded([&] { pdmp::diagnose_run(run_dir); });
}

PDMP_API pdmp_status pdmp_compare(const char* const* run_dirs, size_t n_dirs,
                                  char** table_out) {
  if (!run_dirs || !table_out || n_dirs == 0) {
    g_last_error = "compare: need at least one run directory";
    return PDMP_ERR_CONFIG;
  }
  return guarded([&] {
    std::vector<std::string> dirs(run_dirs, run_dirs + n_dirs);
    *table_out = copy_string(pdmp::compare_runs(dirs));
  });
}

}  // extern "C"

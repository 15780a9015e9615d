#ifndef PDMP_RUNNER_HPP
#define PDMP_RUNNER_HPP

#include "pdmp/config.hpp"
#include "pdmp/diagnostics.hpp"
#include "pdmp/samplers.hpp"

#include <string>
#include <vector>

namespace pdmp {

// Executes every repeat of a run: MAP fit, warm-up where the kernel
// needs one, sampling, diagnostics; writes chain.csv, metrics.json and
// manifest.json under <out_dir>/rep<i>/.
void execute_run(const RunConfig& cfg);

// Recomputes metrics.json for a stored run directory from its
// manifest and chain.csv.
void diagnose_run(const std::string& run_dir);

// Metric table across stored run directories.
std::string compare_runs(const std::vector<std::string>& run_dirs);

// Chain serialization: header clock,w_0,...,w_{d-1}.
void write_chain_csv(const std::string& path, const Chain& chain);
Chain read_chain_csv(const std::string& path);

}  // namespace pdmp

#endif  // PDMP_RUNNER_HPP

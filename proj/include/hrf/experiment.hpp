#pragma once

// Config-driven experiment runner behind the hrflow command line tool.

#include "hrf/catalog.hpp"
#include "hrf/serialize.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hrf {

/// A failure attributed to a named pipeline stage.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Names accepted in "checks".
const std::vector<std::string>& known_checks();

struct MetricSpec {
  std::string kind = "named";  // named | diag | dense | random
  std::string name = "background";
  Vec diag;
  Mat dense;
  bool adapted = true;  // random only
  double kappa = 10.0;  // random only
};

struct Expectations {
  std::optional<double> extinction_time;
  double extinction_tol = 1e-4;
  std::optional<bool> stable;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::string catalog_name;           // empty when the space is inline
  std::optional<SemidirectData> data; // inline space
  std::vector<Vec> h_basis;           // inline space only
  CatalogParams params;
  MetricSpec metric;
  bool run_flow = false;
  FlowControls flow;
  std::vector<std::string> checks;
  std::vector<double> blowdown_s{1, 2, 4, 8, 16};
  double blowdown_t_ref = 1.0;
  Expectations expect;
  std::uint64_t seed = 1;
  bool gnuplot = true;
  Json source;  // the parsed object, echoed into the output directory
};

/// Parse one experiment object; throws StageError("config-validate", ...).
ExperimentConfig parse_experiment(const Json& j);

/// A file holds one experiment object or {"experiments": [...]}.
std::vector<ExperimentConfig> load_configs(const std::filesystem::path& file);

/// Resolved space and initial metric.
struct ResolvedExperiment {
  CatalogEntry entry;
  ReductiveSplit split;
  Mat g0;
};

/// Builds the split and metric and checks every dimension; throws StageError.
ResolvedExperiment resolve(const ExperimentConfig& c);

struct CheckResult {
  std::string name;
  std::string status;  // "pass", "fail" or "not applicable"
  std::string note;
  Json details;
};

struct RunResult {
  bool ok = false;
  std::string failed_stage;
  std::string message;
  std::vector<CheckResult> checks;
  Json summary;
};

/// Run one experiment writing into `dir` (created).  Never throws for
/// pipeline failures: they are reported in the result, in summary.json and
/// in a FAILED marker file.
RunResult run_experiment(const ExperimentConfig& c, const std::filesystem::path& dir);

/// Independent experiments on up to `jobs` threads, each into out/<name>.
std::vector<RunResult> run_sweep(const std::vector<ExperimentConfig>& configs,
                                 const std::filesystem::path& out, int jobs);

}  // namespace hrf

#pragma once

// Batch driver behind the `heunband` executable. Split from main() so the
// tests can drive configuration checks and report formatting in-process.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "heunband/linalg.hpp"

namespace heunband::cli {

using nlohmann::json;

inline constexpr int exit_pass = 0;
inline constexpr int exit_failure = 1;
inline constexpr int exit_usage = 2;

/// Raised for anything that should end with exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> diagnostics);
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

struct RunConfig {
  std::string name;
  std::string pipeline;
  json params;  // validated parameters with defaults filled in
  std::map<std::string, double> tolerances;  // effective bounds, overrides applied
  bool write_plot = true;
  bool write_matrices = false;
};

/// Accepts one run object, an array of runs, or {"runs": [...]}. Every run is
/// validated before anything is computed; all problems are reported together.
std::vector<RunConfig> load_configs(const json& doc, const std::map<std::string, double>& tol_overrides);

/// Parses repeated `name=value` flags.
std::map<std::string, double> parse_tolerance_flags(const std::vector<std::string>& flags);

/// Default bounds of a pipeline's residuals; empty for verify-all.
std::map<std::string, double> default_tolerances(const std::string& pipeline);

struct NamedMatrix {
  std::string name;
  Matrix values;
};

struct Outcome {
  std::string name;
  json report;  // {config_echo, residuals, spectra, verdict}
  int status = exit_pass;
  std::vector<std::string> messages;  // failing residuals and diagnostics
  std::vector<NamedMatrix> matrices;
  std::vector<double> concentration;
};

Outcome execute(const RunConfig& config, bool want_matrices);

/// Runs the batch with at most `threads` workers; results keep config order.
std::vector<Outcome> execute_all(const std::vector<RunConfig>& configs, bool want_matrices, unsigned threads);

/// HEUNBAND_THREADS, or the hardware concurrency when unset.
unsigned thread_cap();

/// Pretty JSON with every float written to 17 significant digits.
std::string dump_json(const json& j);
std::string format_double(double v);
std::string matrix_csv(const Matrix& m);
std::string residuals_csv(const json& report);
std::string spectra_csv(const json& report);
/// "index value" per line.
std::string plot_data(const std::vector<double>& values);

json families_json();

int main_entry(int argc, char** argv);

}  // namespace heunband::cli

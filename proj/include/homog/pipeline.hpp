#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "homog/analysis.hpp"
#include "homog/cellsolve.hpp"
#include "homog/coefficients.hpp"
#include "homog/corrector.hpp"
#include "homog/domain.hpp"

namespace homog {

struct SlopeWindow {
  double lo = 0.0;
  double hi = 0.0;
};

struct RunConfig {
  std::string coefficient = "trig_product";
  Params params;
  int dim = 1;

  double gamma = 2.0;               // delta = eps^gamma unless deltas is given
  std::vector<double> epsilons;
  std::vector<double> deltas;       // optional explicit table

  int cell_n = 64;
  int cell_n_y = 0;                 // 0: 32 in 1D, 16 in 2D

  double length = 1.0;
  std::vector<int> mesh;            // per eps; empty: smallest power of two >= points_per_delta / delta
  double points_per_delta = 8.0;
  std::string forcing = "1";

  int quad_order = 4;
  std::string extension = "even";
  std::string fine_solver = "quadrature";  // quadrature (1D only) | fem
  std::string sampling = "midpoint";       // midpoint | harmonic (1D only)
  double solver_tol = 1e-10;
  std::string abscissa = "tau";

  std::optional<SlopeWindow> l2_slope;
  std::optional<SlopeWindow> h1_slope;

  std::filesystem::path output = "out";
  bool write_fields = true;
  std::uint64_t seed = 1;

  int cell_samples() const { return cell_n_y > 0 ? cell_n_y : (dim == 1 ? 32 : 16); }
  ScaleCoupling coupling() const;
  int mesh_for(std::size_t i) const;
};

/// Reads a JSON config; unknown keys are rejected so typos do not pass silently.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
/// Canonical JSON of the parsed config, without the output directory.
nlohmann::json canonical_json(const RunConfig& c);
/// 16 hex digits of FNV-1a over the canonical JSON.
std::string config_hash(const RunConfig& c);

struct ConfigIssue {
  bool warning = false;
  std::string message;
};
/// Empty iff the config satisfies every invariant; warnings do not block a run.
std::vector<ConfigIssue> validate_config(const RunConfig& c);

struct JobFailure {
  double epsilon = 0.0;
  std::string stage;
  std::string message;
  bool solver = false;
};

struct CriterionResult {
  std::string name;
  double value = 0.0;
  SlopeWindow window;
  bool pass = false;
};

struct PipelineResult {
  std::filesystem::path directory;
  Mat a0;
  ConvergenceReport report;
  bool fitted = false;
  std::vector<double> boundary_layer_ratios;
  std::vector<double> corrector_ratios;  // |K| / (max(eps, delta) |f|)
  std::vector<bool> under_resolved;
  std::vector<CriterionResult> criteria;
  std::vector<JobFailure> failures;
  std::vector<std::string> warnings;

  bool pass() const;
};

/// Cell solve, then one job per eps (homogenized solve, fine solution,
/// smoothed approximation, errors), then the rate fits. Emits
/// <output>/<hash>/{cell/, fields/, records.csv, report.json, rates_l2.svg, rates_h1.svg}.
/// Throws ConfigError for invalid configs; job failures are collected.
PipelineResult run_pipeline(const RunConfig& c);

/// One eps job, exposed for the CLI and tests.
struct JobOutput {
  ErrorRecord record;
  double boundary_layer = 0.0;
  double corrector_ratio = 0.0;
  bool under_resolved = false;
  GridField u_eps, u0;
  Approximation approx;
};
JobOutput run_job(const RunConfig& c, const CoefficientField& field, const CellCorrectorSet& cells,
                  double eps, double delta, int m);

// Emitters.
std::string records_csv(const std::vector<ErrorRecord>& records);
std::vector<ErrorRecord> parse_records_csv(const std::string& text);
nlohmann::json report_json(const ConvergenceReport& rep);
/// Log-log scatter of one error column with its fitted line.
std::string rates_svg(const ConvergenceReport& rep, const std::string& column);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace homog

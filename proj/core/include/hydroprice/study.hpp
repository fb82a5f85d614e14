#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "hydroprice/calendar_detrend.hpp"
#include "hydroprice/ingest.hpp"
#include "hydroprice/least_squares.hpp"
#include "hydroprice/series_metrics.hpp"

namespace hydroprice {

struct StudyConfig {
  std::filesystem::path prices;
  std::filesystem::path generation;
  double ewmsd_span = kDefaultEwmsdSpan;
  std::vector<double> quantiles = {0.25, 0.5, 0.75, 0.9};
  std::size_t bootstrap_replicates = 1000;
  std::uint64_t seed = 42;
  std::filesystem::path output_dir;
  // Inner fraction of detrended price kept for fitting; 1 keeps every row.
  double trim_fraction = 1.0;
  unsigned threads = 0;  // 0: hardware concurrency
  std::size_t min_rows = 1000;

  // Throws ParameterError.
  void validate() const;
  // Relative input paths resolve against `base_dir`. Unknown keys are
  // rejected.
  static StudyConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static StudyConfig load(const std::filesystem::path& path);
  // Analysis-relevant fields only (no output_dir, no thread count), with
  // input paths as given; the basis for the provenance hash.
  nlohmann::json canonical_json() const;
  nlohmann::json to_json() const;
};

struct FitTask {
  ModelSpec spec;
  std::optional<double> tau;  // nullopt: least squares

  std::string label() const;
};

// Response-major, spec-second, tau-minor. With no quantiles the grid is one
// least-squares task per (response, spec).
std::vector<FitTask> model_grid(std::span<const std::vector<Regressor>> specs,
                                std::span<const double> quantiles,
                                std::span<const Response> responses);

struct FitOutcome {
  FitTask task;
  std::optional<RegressionResult> result;
  std::string error;

  bool ok() const { return result.has_value(); }
};

struct ResultsBundle {
  std::vector<std::pair<std::string, DescriptiveStats>> stats;
  std::vector<std::string> correlation_names;
  Eigen::MatrixXd correlation;
  std::vector<FitOutcome> mean_fits;
  std::vector<FitOutcome> quantile_fits;
  nlohmann::json provenance;
  StudyFrame frame;
  DetrendModel detrend;
  IngestReport ingest;

  std::size_t fit_count() const { return mean_fits.size() + quantile_fits.size(); }
  std::size_t failure_count() const;
  // nullptr when absent or failed.
  const RegressionResult* find(Response response, const std::vector<Regressor>& regressors,
                               std::optional<double> tau) const;
  std::vector<const RegressionResult*> results(Response response, std::optional<double> tau) const;

  // Everything except the frame, which is stored separately as CSV.
  nlohmann::json to_json() const;
  static ResultsBundle from_json(const nlohmann::json& j);
};

// Design matrix (intercept first) and response for one spec.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> design_for(const StudyFrame& frame, const ModelSpec& spec);

// Fits one task. Quantile tasks get bootstrap inference seeded from the
// config seed and the task's identity, so a task's numbers do not depend on
// which other tasks run.
RegressionResult fit_task(const StudyFrame& frame, const FitTask& task, std::size_t replicates,
                          std::uint64_t seed);
std::uint64_t task_seed(std::uint64_t seed, const FitTask& task);

// Full pipeline from files, from parsed inputs, or from joined records.
ResultsBundle run_study(const StudyConfig& config);
ResultsBundle run_study(const StudyConfig& config, std::span<const PriceRow> prices,
                        std::span<const GenerationReading> generation);
ResultsBundle run_study_records(const StudyConfig& config, std::vector<HourlyRecord> records,
                                IngestReport report);

// Ingest, detrend and build the frame without fitting the grid.
struct PreparedFrame {
  std::vector<HourlyRecord> records;
  DetrendModel detrend;
  StudyFrame frame;
};
PreparedFrame prepare_frame(std::vector<HourlyRecord> records, double span);

}  // namespace hydroprice

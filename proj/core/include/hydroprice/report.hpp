#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hydroprice/least_squares.hpp"
#include "hydroprice/series_metrics.hpp"
#include "hydroprice/study.hpp"

namespace hydroprice {

struct RenderedTable {
  std::string csv;   // full precision
  std::string text;  // aligned, two decimals
};

// One row per coefficient, grouped by model, in the order given.
RenderedTable render_table(std::span<const RegressionResult* const> results, const std::string& title = {});

inline constexpr double kCiMultiplier = 1.96;

struct QuantilePlotSeries {
  std::string regressor;
  std::vector<double> taus;
  std::vector<double> estimates;
  std::vector<double> lower;
  std::vector<double> upper;
  double ols_estimate = 0.0;
  double ols_lower = 0.0;
  double ols_upper = 0.0;
};

// Panels for the slope coefficients of `regressors` from the bundle's
// quantile fits (estimate +/- 1.96 SE) and the matching OLS fit.
std::vector<QuantilePlotSeries> quantile_plot_series(const ResultsBundle& bundle, Response response,
                                                     const std::vector<Regressor>& regressors);

// One panel per series. Throws ParameterError for fewer than two quantile
// points or unsorted taus. Output bytes depend only on the input.
std::string render_quantile_plot(std::span<const QuantilePlotSeries> series, const std::string& title);

std::string render_correlation_svg(const std::vector<std::string>& names, const Eigen::MatrixXd& r);

struct ViolinExport {
  std::string data_csv;     // season,value
  std::string summary_csv;  // season,n,min,q25,median,q75,max
  std::size_t retained = 0;
  std::vector<std::string> skipped_groups;
};

// Per season, drop the outer (1 - trim)/2 of each tail by empirical
// quantile. trim must lie in (0.9, 1].
ViolinExport export_violin_data(std::span<const Timestamp> timestamps, std::span<const double> values,
                                double trim);
ViolinExport export_violin_data(const StudyFrame& frame, const std::string& column, double trim);

// Mean hydro/solar/wind share per season.
std::string seasonal_penetration_csv(const StudyFrame& frame);

std::string render_stats_csv(const ResultsBundle& bundle);
std::string render_correlation_csv(const ResultsBundle& bundle);

// Bundle layout: stats.csv, correlation.csv, mean_{price,volatility}.csv,
// qr_{price,volatility}_tau<t>.csv, provenance.json, bundle.json,
// study_frame.csv, detrend_model.json, ingest_report.json.
void write_bundle(const ResultsBundle& bundle, const std::filesystem::path& dir);

// Figures and derived exports: tables.txt, fig_qr_{price,volatility}.svg,
// fig_correlation.svg, violin_<column>.csv, violin_<column>_summary.csv,
// seasonal_penetration.csv.
void write_report(const ResultsBundle& bundle, const std::filesystem::path& dir);

// Reads bundle.json and study_frame.csv back from a bundle directory.
ResultsBundle read_bundle(const std::filesystem::path& dir);

std::string tau_label(double tau);

}  // namespace hydroprice

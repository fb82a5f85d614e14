#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace hydroprice {

enum class Response { detrended_price, detrended_volatility };
enum class Regressor { hydro, wind, solar };

std::string to_string(Response r);
std::string to_string(Regressor r);

struct ModelSpec {
  Response response = Response::detrended_price;
  std::vector<Regressor> regressors;
  bool include_intercept = true;

  // Throws ParameterError for an empty or duplicated regressor list.
  void validate() const;
  std::size_t coefficient_count() const { return regressors.size() + (include_intercept ? 1 : 0); }
  // "b0 + b1*hydro + b2*wind"
  std::string formula() const;
  // "price:hydro+wind"
  std::string key() const;
};

// hydro; hydro + solar; hydro + wind; hydro + wind + solar.
std::vector<ModelSpec> standard_model_specs(Response response);

struct FitMethod {
  enum class Kind { ols, quantile } kind = Kind::ols;
  double tau = 0.0;

  static FitMethod ols() { return {}; }
  static FitMethod quantile(double tau) { return {Kind::quantile, tau}; }
  std::string to_string() const;
};

struct RegressionResult {
  ModelSpec spec;
  FitMethod method;
  std::vector<double> estimates;  // intercept first
  std::vector<double> std_errors;
  std::vector<double> p_values;
  std::size_t n_obs = 0;
  std::size_t residual_dof = 0;
  // Sum of squared residuals for OLS, pinball loss for quantile fits.
  double objective = 0.0;
  // Standard errors collapsed to zero (exact fit, or identical bootstrap
  // replicates); p-values then follow the 0/1 convention.
  bool degenerate = false;
  int iterations = 0;
  std::size_t bootstrap_replicates = 0;

  nlohmann::json to_json() const;
};

struct OlsFit {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd std_errors;
  Eigen::VectorXd t_stats;
  Eigen::VectorXd p_values;
  Eigen::VectorXd fitted;
  Eigen::VectorXd residuals;
  double rss = 0.0;
  double sigma2 = 0.0;
  std::size_t n_obs = 0;
  std::size_t residual_dof = 0;
};

inline constexpr double kRankTolerance = 1e-10;

// Least squares by Householder QR. Rank is judged from the singular values
// of R: anything below kRankTolerance * sigma_max is treated as zero and
// raises CollinearityError naming the first dependent column.
OlsFit fit_ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& response);

// Coefficients only; same rank check.
Eigen::VectorXd ols_coefficients(const Eigen::MatrixXd& design, const Eigen::VectorXd& response);

// Pearson correlation of equal-length columns. Throws DomainError for fewer
// than two rows or a constant column.
Eigen::MatrixXd correlation_matrix(std::span<const std::vector<double>> columns);

}  // namespace hydroprice

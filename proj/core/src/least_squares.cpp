#include "hydroprice/least_squares.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hydroprice/distributions.hpp"
#include "hydroprice/errors.hpp"
#include "hydroprice/format.hpp"

namespace hydroprice {

std::string to_string(Response r) {
  switch (r) {
    case Response::detrended_price: return "price";
    case Response::detrended_volatility: return "volatility";
  }
  return "price";
}

std::string to_string(Regressor r) {
  switch (r) {
    case Regressor::hydro: return "hydro";
    case Regressor::wind: return "wind";
    case Regressor::solar: return "solar";
  }
  return "hydro";
}

void ModelSpec::validate() const {
  if (regressors.empty()) throw ParameterError("model spec has no regressors");
  std::set<Regressor> seen(regressors.begin(), regressors.end());
  if (seen.size() != regressors.size()) throw ParameterError("model spec repeats a regressor");
}

std::string ModelSpec::formula() const {
  std::string s;
  std::size_t k = 0;
  if (include_intercept) s = "b" + std::to_string(k++);
  for (auto r : regressors) {
    if (!s.empty()) s += " + ";
    s += "b" + std::to_string(k++) + "*" + to_string(r);
  }
  return s;
}

std::string ModelSpec::key() const {
  std::string s = to_string(response) + ":";
  for (std::size_t i = 0; i < regressors.size(); ++i) {
    if (i) s += "+";
    s += to_string(regressors[i]);
  }
  return s;
}

std::vector<ModelSpec> standard_model_specs(Response response) {
  using R = Regressor;
  return {
      ModelSpec{response, {R::hydro}, true},
      ModelSpec{response, {R::hydro, R::solar}, true},
      ModelSpec{response, {R::hydro, R::wind}, true},
      ModelSpec{response, {R::hydro, R::wind, R::solar}, true},
  };
}

std::string FitMethod::to_string() const {
  if (kind == Kind::ols) return "ols";
  return "quantile(" + format_double(tau) + ")";
}

nlohmann::json RegressionResult::to_json() const {
  nlohmann::json j;
  j["model"] = spec.formula();
  j["key"] = spec.key();
  j["response"] = hydroprice::to_string(spec.response);
  j["regressors"] = nlohmann::json::array();
  for (auto r : spec.regressors) j["regressors"].push_back(hydroprice::to_string(r));
  j["method"] = method.kind == FitMethod::Kind::ols ? "ols" : "quantile";
  if (method.kind == FitMethod::Kind::quantile) j["tau"] = method.tau;
  j["estimates"] = estimates;
  j["std_errors"] = std_errors;
  j["p_values"] = p_values;
  j["n_obs"] = n_obs;
  j["residual_dof"] = residual_dof;
  j["objective"] = objective;
  j["degenerate"] = degenerate;
  j["iterations"] = iterations;
  if (bootstrap_replicates > 0) j["bootstrap_replicates"] = bootstrap_replicates;
  return j;
}

namespace {

struct QrSolve {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr;
  Eigen::MatrixXd r;
  Eigen::VectorXd coefficients;
};

QrSolve solve_qr(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const auto n = x.rows();
  const auto p = x.cols();
  if (p == 0) throw ParameterError("design has no columns");
  if (y.size() != n) throw ParameterError("design and response lengths differ");
  if (n <= p) throw ParameterError("need more observations than coefficients");
  if (!x.allFinite() || !y.allFinite()) throw DomainError("non-finite value in regression input");

  QrSolve s{Eigen::HouseholderQR<Eigen::MatrixXd>(x), {}, {}};
  s.r = s.qr.matrixQR().topLeftCorner(p, p).triangularView<Eigen::Upper>();

  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(s.r).singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (!(smax > 0.0) || smin <= kRankTolerance * smax) {
    // First column whose diagonal in R vanishes, i.e. which is (numerically)
    // spanned by the columns before it.
    Eigen::Index bad = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < p; ++j) {
      const double colnorm = x.col(j).norm();
      const double rel = colnorm > 0.0 ? std::abs(s.r(j, j)) / colnorm : 0.0;
      if (std::abs(s.r(j, j)) <= kRankTolerance * smax || colnorm == 0.0) {
        bad = j;
        worst = -1.0;
        break;
      }
      if (rel < worst) {
        worst = rel;
        bad = j;
      }
    }
    throw CollinearityError(static_cast<std::size_t>(bad),
                            "design is rank deficient: column " + std::to_string(bad) +
                                " is collinear with earlier columns");
  }

  const Eigen::VectorXd qty = s.qr.householderQ().adjoint() * y;
  s.coefficients = s.r.triangularView<Eigen::Upper>().solve(qty.head(p));
  return s;
}

}  // namespace

Eigen::VectorXd ols_coefficients(const Eigen::MatrixXd& design, const Eigen::VectorXd& response) {
  return solve_qr(design, response).coefficients;
}

OlsFit fit_ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& response) {
  auto s = solve_qr(design, response);
  const auto n = design.rows();
  const auto p = design.cols();

  OlsFit fit;
  fit.coefficients = s.coefficients;
  fit.fitted = design * fit.coefficients;
  fit.residuals = response - fit.fitted;
  fit.rss = fit.residuals.squaredNorm();
  fit.n_obs = static_cast<std::size_t>(n);
  fit.residual_dof = static_cast<std::size_t>(n - p);
  fit.sigma2 = fit.rss / static_cast<double>(fit.residual_dof);

  // diag((X'X)^-1) = row norms of R^-1.
  const Eigen::MatrixXd r_inv =
      s.r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  fit.std_errors = (fit.sigma2 * r_inv.rowwise().squaredNorm().array()).sqrt().matrix();
  fit.t_stats.resize(p);
  fit.p_values.resize(p);
  const double dof = static_cast<double>(fit.residual_dof);
  for (Eigen::Index j = 0; j < p; ++j) {
    if (fit.std_errors(j) > 0.0) {
      fit.t_stats(j) = fit.coefficients(j) / fit.std_errors(j);
      fit.p_values(j) = p_value_t(fit.t_stats(j), dof);
    } else {
      fit.t_stats(j) = fit.coefficients(j) == 0.0 ? 0.0
                                                  : std::copysign(std::numeric_limits<double>::infinity(),
                                                                  fit.coefficients(j));
      fit.p_values(j) = fit.coefficients(j) == 0.0 ? 1.0 : 0.0;
    }
  }
  return fit;
}

Eigen::MatrixXd correlation_matrix(std::span<const std::vector<double>> columns) {
  const auto k = static_cast<Eigen::Index>(columns.size());
  if (k == 0) return {};
  const auto n = static_cast<Eigen::Index>(columns[0].size());
  if (n < 2) throw DomainError("correlation needs at least two rows");
  Eigen::MatrixXd centered(n, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    if (static_cast<Eigen::Index>(columns[j].size()) != n)
      throw ParameterError("correlation columns differ in length");
    centered.col(j) = Eigen::Map<const Eigen::VectorXd>(columns[j].data(), n);
    centered.col(j).array() -= centered.col(j).mean();
  }
  const Eigen::MatrixXd cross = centered.transpose() * centered;
  Eigen::MatrixXd r(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(cross(i, i) > 0.0))
      throw DomainError("correlation undefined for constant column " + std::to_string(i));
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    r(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < k; ++j) {
      const double v = std::clamp(cross(i, j) / std::sqrt(cross(i, i) * cross(j, j)), -1.0, 1.0);
      r(i, j) = v;
      r(j, i) = v;
    }
  }
  return r;
}

}  // namespace hydroprice

#include "hydroprice/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "hydroprice/distributions.hpp"
#include "hydroprice/errors.hpp"
#include "hydroprice/least_squares.hpp"
#include "hydroprice/parallel.hpp"
#include "hydroprice/random.hpp"

namespace hydroprice {

namespace {

void check_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw ParameterError("tau must lie strictly between 0 and 1");
}

// Shrinks `step` so that x + step * dx stays >= 0. Divides only when the
// limit actually tightens.
inline void limit_step(double x, double dx, double& step) {
  if (dx < 0.0 && x + step * dx < 0.0) step = -x / dx;
}

}  // namespace

double pinball_loss(const Eigen::Ref<const Eigen::VectorXd>& residuals, double tau) {
  check_tau(tau);
  double total = 0.0;
  for (Eigen::Index i = 0; i < residuals.size(); ++i) {
    const double r = residuals(i);
    total += r < 0.0 ? r * (tau - 1.0) : r * tau;
  }
  return total;
}

QuantileFit fit_quantile(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double tau,
                         const QuantileSolverOptions& options) {
  check_tau(tau);
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (y.size() != n) throw ParameterError("design and response lengths differ");
  if (n <= p) throw ParameterError("need more observations than coefficients");

  QuantileFit fit;
  fit.tau = tau;

  // Least-squares start; also performs the rank check.
  Eigen::VectorXd beta = ols_coefficients(x, y);
  Eigen::VectorXd r = y - x * beta;

  const double y_scale = y.lpNorm<Eigen::Infinity>() > 0.0 ? y.lpNorm<Eigen::Infinity>() : 1.0;
  if (r.lpNorm<Eigen::Infinity>() <= 1e-12 * y_scale) {
    // Exact fit: zero loss is the global minimum.
    fit.estimates = beta;
    fit.objective = pinball_loss(r, tau);
    fit.converged = true;
    return fit;
  }

  Eigen::VectorXd col_scale(p);
  for (Eigen::Index j = 0; j < p; ++j) col_scale(j) = std::max(x.col(j).lpNorm<1>(), 1e-300);

  const double shift = 0.1 * r.cwiseAbs().mean() + 1e-12 * y_scale;
  Eigen::VectorXd u = r.cwiseMax(0.0).array() + shift;
  Eigen::VectorXd v = (-r).cwiseMax(0.0).array() + shift;
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd zu = Eigen::VectorXd::Constant(n, tau);
  Eigen::VectorXd zv = Eigen::VectorXd::Constant(n, 1.0 - tau);

  // Scratch, allocated once. The predictor direction lives in d*_a, the
  // corrector in d*.
  Eigen::VectorXd w(n), rp(n), wg(n), xd(n), dl(n), du(n), dv(n), dl_a(n), du_a(n), dv_a(n);
  Eigen::VectorXd rd(p), rhs(p), db(p);
  Eigen::MatrixXd xw(n, p), normal(p, p);
  Eigen::LLT<Eigen::MatrixXd> llt;

  // Newton direction for complementarity targets (ru, rv). Eliminating
  // du, dv and dlambda leaves (X' W X) dbeta = X' W g - rd with
  // g = rp - ru / zu + rv / zv, and then dlambda = W (g - X dbeta).
  auto solve_beta = [&]() {
    rhs.noalias() = x.transpose() * wg;
    rhs -= rd;
    db = llt.solve(rhs);
    xd.noalias() = x * db;
  };

  const double two_n = 2.0 * static_cast<double>(n);
  for (int iter = 0; iter <= options.max_iterations; ++iter) {
    xd.noalias() = x * beta;
    double p_inf = 0.0, sum_u = 0.0, sum_v = 0.0, dual_obj = 0.0, comp = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      rp(i) = y(i) - xd(i) - u(i) + v(i);
      p_inf = std::max(p_inf, std::abs(rp(i)));
      sum_u += u(i);
      sum_v += v(i);
      dual_obj += y(i) * lambda(i);
      comp += u(i) * zu(i) + v(i) * zv(i);
    }
    rd.noalias() = -(x.transpose() * lambda);
    const double primal_obj = tau * sum_u + (1.0 - tau) * sum_v;

    fit.primal_infeasibility = p_inf / y_scale;
    fit.dual_infeasibility = rd.cwiseAbs().cwiseQuotient(col_scale).maxCoeff();
    fit.relative_gap = std::max(comp, std::abs(primal_obj - dual_obj)) /
                       (std::max(std::abs(primal_obj), std::abs(dual_obj)) + y_scale);
    fit.iterations = iter;
    if (fit.primal_infeasibility < options.tolerance &&
        fit.dual_infeasibility < options.tolerance && fit.relative_gap < options.tolerance) {
      fit.converged = true;
      break;
    }
    if (iter == options.max_iterations) break;

    const double mu = comp / two_n;
    for (Eigen::Index i = 0; i < n; ++i) {
      w(i) = zu(i) * zv(i) / (u(i) * zv(i) + v(i) * zu(i));
      // Predictor targets ru = -u zu, rv = -v zv give g = rp + u - v.
      wg(i) = w(i) * (rp(i) + u(i) - v(i));
    }
    xw = x.array().colwise() * w.array();
    normal.noalias() = x.transpose() * xw;
    llt.compute(normal);
    if (llt.info() != Eigen::Success) {
      normal.diagonal().array() += 1e-14 * normal.diagonal().maxCoeff();
      llt.compute(normal);
      if (llt.info() != Eigen::Success)
        throw SolverError("quantile solver: normal matrix not positive definite");
    }

    // Predictor.
    solve_beta();
    double ap_aff = 1.0, ad_aff = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double l = w(i) * (rp(i) + u(i) - v(i) - xd(i));
      dl_a(i) = l;
      du_a(i) = u(i) * (l / zu(i) - 1.0);
      dv_a(i) = -v(i) * (1.0 + l / zv(i));
      limit_step(u(i), du_a(i), ap_aff);
      limit_step(v(i), dv_a(i), ap_aff);
      limit_step(zu(i), -l, ad_aff);
      limit_step(zv(i), l, ad_aff);
    }
    double comp_aff = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      comp_aff += (u(i) + ap_aff * du_a(i)) * (zu(i) - ad_aff * dl_a(i)) +
                  (v(i) + ap_aff * dv_a(i)) * (zv(i) + ad_aff * dl_a(i));
    }
    const double sigma = std::clamp(std::pow(comp_aff / two_n / mu, 3.0), 0.0, 1.0);
    const double target = sigma * mu;

    // Corrector. du, dv hold ru, rv and dl holds g until the solve.
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ru = target - u(i) * zu(i) + du_a(i) * dl_a(i);
      const double rv = target - v(i) * zv(i) - dv_a(i) * dl_a(i);
      const double g = rp(i) - ru / zu(i) + rv / zv(i);
      du(i) = ru;
      dv(i) = rv;
      dl(i) = g;
      wg(i) = w(i) * g;
    }
    solve_beta();
    double ap = 1.0, ad = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double l = w(i) * (dl(i) - xd(i));
      dl(i) = l;
      du(i) = (du(i) + u(i) * l) / zu(i);
      dv(i) = (dv(i) - v(i) * l) / zv(i);
      limit_step(u(i), du(i), ap);
      limit_step(v(i), dv(i), ap);
      limit_step(zu(i), -l, ad);
      limit_step(zv(i), l, ad);
    }
    constexpr double kStepFraction = 0.99995;
    ap *= kStepFraction;
    ad *= kStepFraction;

    beta += ap * db;
    u += ap * du;
    v += ap * dv;
    lambda += ad * dl;
    zu -= ad * dl;
    zv += ad * dl;
  }

  if (!fit.converged) {
    throw SolverError("quantile solver did not converge in " +
                      std::to_string(options.max_iterations) +
                      " iterations (primal " + std::to_string(fit.primal_infeasibility) +
                      ", dual " + std::to_string(fit.dual_infeasibility) + ", gap " +
                      std::to_string(fit.relative_gap) + ")");
  }
  fit.estimates = beta;
  fit.objective = pinball_loss(y - x * beta, tau);
  return fit;
}

BootstrapInference bootstrap_se(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double tau,
                                std::size_t replicates, std::uint64_t seed,
                                const Eigen::VectorXd* point, unsigned threads,
                                const QuantileSolverOptions& options) {
  check_tau(tau);
  if (replicates < 100) throw ParameterError("bootstrap needs at least 100 replicates");
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (y.size() != n) throw ParameterError("design and response lengths differ");

  Eigen::VectorXd estimate = point ? *point : fit_quantile(x, y, tau, options).estimates;

  constexpr std::size_t kDrawsPerReplicate = 10;
  Eigen::MatrixXd draws_out(static_cast<Eigen::Index>(replicates), p);
  std::vector<std::size_t> attempts(replicates, 0);

  parallel_for(replicates, threads, [&](std::size_t b) {
    std::mt19937_64 rng(mix_seed(seed, b));
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    Eigen::MatrixXd xb(n, p);
    Eigen::VectorXd yb(n);
    for (std::size_t attempt = 1; attempt <= kDrawsPerReplicate; ++attempt) {
      attempts[b] = attempt;
      for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index k = pick(rng);
        xb.row(i) = x.row(k);
        yb(i) = y(k);
      }
      try {
        draws_out.row(static_cast<Eigen::Index>(b)) = fit_quantile(xb, yb, tau, options).estimates.transpose();
        return;
      } catch (const CollinearityError&) {
      }
    }
    throw DataError("bootstrap replicate " + std::to_string(b) + " stayed rank deficient after " +
                    std::to_string(kDrawsPerReplicate) + " draws");
  });

  BootstrapInference out;
  out.replicates = replicates;
  out.seed = seed;
  for (auto a : attempts) out.draws += a;
  out.std_errors.resize(p);
  out.p_values.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto col = draws_out.col(j);
    const double mean = col.mean();
    const double ss = (col.array() - mean).square().sum();
    double se = std::sqrt(ss / static_cast<double>(replicates - 1));
    if (se <= 1e-10 * std::max(1.0, std::abs(estimate(j)))) {
      se = 0.0;
      out.degenerate = true;
    }
    out.std_errors(j) = se;
    out.p_values(j) = se > 0.0 ? p_value_normal(estimate(j) / se) : (estimate(j) == 0.0 ? 1.0 : 0.0);
  }
  return out;
}

SubgradientCheck check_subgradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double tau,
                                   const Eigen::VectorXd& coefficients, double zero_tolerance) {
  check_tau(tau);
  const Eigen::VectorXd r = y - x * coefficients;
  const Eigen::Index p = x.cols();
  Eigen::VectorXd lhs = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd bound = Eigen::VectorXd::Zero(p);
  const double weight = std::max(tau, 1.0 - tau);
  SubgradientCheck out;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (std::abs(r(i)) <= zero_tolerance * std::max(1.0, std::abs(y(i)))) {
      bound += weight * x.row(i).transpose().cwiseAbs();
      ++out.zero_residuals;
    } else {
      lhs += (r(i) < 0.0 ? tau - 1.0 : tau) * x.row(i).transpose();
    }
  }
  constexpr double kSlack = 1e-6;
  out.max_excess = (lhs.cwiseAbs() - bound).maxCoeff() - kSlack;
  return out;
}

}  // namespace hydroprice

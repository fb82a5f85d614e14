#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

namespace hydroprice {

// sum_i r_i * (tau - 1[r_i < 0]). Throws ParameterError unless 0 < tau < 1.
double pinball_loss(const Eigen::Ref<const Eigen::VectorXd>& residuals, double tau);

struct QuantileSolverOptions {
  int max_iterations = 200;
  double tolerance = 1e-8;  // relative primal/dual infeasibility and gap
};

struct QuantileFit {
  double tau = 0.5;
  Eigen::VectorXd estimates;
  double objective = 0.0;  // pinball loss at `estimates`
  int iterations = 0;
  bool converged = false;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double relative_gap = 0.0;
};

// Linear quantile regression. The problem
//
//   min  tau * 1'u + (1 - tau) * 1'v   s.t.  X b + u - v = y,  u, v >= 0
//
// is solved by a primal-dual interior point method with Mehrotra
// predictor-corrector steps. Each iteration factors the p x p matrix
// X' W X by Cholesky. The start is the least-squares fit, which makes the
// initial point primal and dual feasible. On flat optimal faces the result
// is near the analytic centre of the face, not a vertex.
//
// Throws ParameterError for bad tau or shapes, CollinearityError for a rank
// deficient design and SolverError if max_iterations is exhausted.
QuantileFit fit_quantile(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                         double tau, const QuantileSolverOptions& options = {});

struct BootstrapInference {
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  std::size_t draws = 0;  // including redraws of rank-deficient samples
  Eigen::VectorXd std_errors;
  Eigen::VectorXd p_values;
  bool degenerate = false;
};

// Pairs bootstrap: resample (x_i, y_i) with replacement, refit, and take the
// n-1 standard deviation of each coefficient across replicates. Replicate b
// draws from its own generator seeded with mix_seed(seed, b), so the result
// does not depend on `threads`. A rank-deficient resample is redrawn, at
// most 10 draws per replicate. p-values are two-sided normal tails of
// point / std_error, with `point` fitted here when not supplied.
BootstrapInference bootstrap_se(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                                double tau, std::size_t replicates, std::uint64_t seed,
                                const Eigen::VectorXd* point = nullptr, unsigned threads = 1,
                                const QuantileSolverOptions& options = {});

// Subgradient optimality check at `coefficients`. For every coordinate j,
//   |sum_i x_ij (tau - 1[r_i < 0])|  <=  sum_{r_i == 0} |x_ij| max(tau, 1-tau) + slack
// where residuals with |r_i| <= zero_tolerance * max(1, |y_i|) count as zero.
// Returns the largest excess over the bound (<= 0 means the bound holds).
struct SubgradientCheck {
  double max_excess = 0.0;
  std::size_t zero_residuals = 0;
};
SubgradientCheck check_subgradient(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                                   double tau, const Eigen::VectorXd& coefficients,
                                   double zero_tolerance = 1e-7);

}  // namespace hydroprice

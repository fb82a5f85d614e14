#pragma once

// Reference computations used as test oracles. They deliberately avoid the
// library's own algorithms: plain long-double Gauss-Jordan instead of QR,
// numerical integration instead of continued fractions, exhaustive search
// instead of the interior point method, O(n^2) sums instead of recursions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Matrix = std::vector<std::vector<long double>>;

// Solves A x = b by Gauss-Jordan with partial pivoting. Returns false when a
// pivot vanishes.
inline bool solve(Matrix a, std::vector<long double> b, std::vector<long double>& x) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    if (std::fabs(a[piv][c]) < 1e-300L) return false;
    std::swap(a[piv], a[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const long double f = a[r][c] / a[c][c];
      if (f == 0.0L) continue;
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  x.resize(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return true;
}

inline Matrix inverse(const Matrix& a) {
  const std::size_t n = a.size();
  Matrix inv(n, std::vector<long double>(n));
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<long double> e(n, 0.0L), col;
    e[j] = 1.0L;
    if (!solve(a, e, col)) throw std::runtime_error("oracle: singular matrix");
    for (std::size_t i = 0; i < n; ++i) inv[i][j] = col[i];
  }
  return inv;
}

// Student-t density.
inline long double t_density(long double x, long double dof) {
  const long double c = std::lgamma((dof + 1.0L) / 2.0L) - std::lgamma(dof / 2.0L) -
                        0.5L * std::log(dof * 3.14159265358979323846264338327950288L);
  return std::exp(c - (dof + 1.0L) / 2.0L * std::log1p(x * x / dof));
}

namespace detail {

template <class F>
long double simpson(F& f, long double a, long double b, long double fa, long double fm, long double fb,
                    long double whole, long double eps, int depth) {
  const long double m = 0.5L * (a + b);
  const long double lm = 0.5L * (a + m), rm = 0.5L * (m + b);
  const long double flm = f(lm), frm = f(rm);
  const long double left = (m - a) / 6.0L * (fa + 4.0L * flm + fm);
  const long double right = (b - m) / 6.0L * (fm + 4.0L * frm + fb);
  const long double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0L * eps) return left + right + delta / 15.0L;
  return simpson(f, a, m, fa, flm, fm, left, eps / 2.0L, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, eps / 2.0L, depth - 1);
}

}  // namespace detail

// Adaptive Simpson quadrature of f over [a, b].
template <class F>
long double integrate(F f, long double a, long double b, long double eps = 1e-14L, int depth = 60) {
  const long double fa = f(a), fb = f(b), fm = f(0.5L * (a + b));
  const long double whole = (b - a) / 6.0L * (fa + 4.0L * fm + fb);
  return detail::simpson(f, a, b, fa, fm, fb, whole, eps, depth);
}

// Two-sided Student-t tail by quadrature of the density. The tail
// [|t|, inf) is mapped to [0, 1) with x = |t| + u / (1 - u).
inline double t_two_sided_p(double t, double dof) {
  if (std::isnan(t)) return t;
  if (std::isinf(t)) return 0.0;
  const long double at = std::fabs(static_cast<long double>(t));
  auto g = [&](long double u) -> long double {
    if (u >= 1.0L) return 0.0L;
    const long double one_minus = 1.0L - u;
    const long double x = at + u / one_minus;
    return t_density(x, dof) / (one_minus * one_minus);
  };
  // Split so the adaptive rule sees the shape near both ends.
  long double tail = 0.0L;
  const long double cuts[] = {0.0L, 0.5L, 0.9L, 0.99L, 0.999L, 0.9999L, 1.0L};
  for (std::size_t k = 0; k + 1 < std::size(cuts); ++k)
    tail += integrate(g, cuts[k], cuts[k + 1], 1e-16L);
  return static_cast<double>(std::min(1.0L, 2.0L * tail));
}

struct OlsReference {
  std::vector<double> coefficients;
  std::vector<double> std_errors;
  std::vector<double> t_stats;
  std::vector<double> p_values;
  double rss = 0.0;
};

// Normal equations solved in long double, SEs from the explicit inverse of
// X'X, p-values from quadrature.
inline OlsReference ols_normal_equations(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                         bool with_p_values = true) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto p = static_cast<std::size_t>(x.cols());
  Matrix xtx(p, std::vector<long double>(p, 0.0L));
  std::vector<long double> xty(p, 0.0L);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < p; ++a) {
      const long double xa = x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a));
      xty[a] += xa * y(static_cast<Eigen::Index>(i));
      for (std::size_t b = 0; b < p; ++b)
        xtx[a][b] += xa * static_cast<long double>(x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b)));
    }
  }
  std::vector<long double> beta;
  if (!solve(xtx, xty, beta)) throw std::runtime_error("oracle: singular normal equations");
  long double rss = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    long double fit = 0.0L;
    for (std::size_t a = 0; a < p; ++a) fit += beta[a] * x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a));
    const long double r = y(static_cast<Eigen::Index>(i)) - fit;
    rss += r * r;
  }
  const long double dof = static_cast<long double>(n - p);
  const long double sigma2 = rss / dof;
  const Matrix inv = inverse(xtx);
  OlsReference out;
  out.rss = static_cast<double>(rss);
  for (std::size_t a = 0; a < p; ++a) {
    const long double se = std::sqrt(sigma2 * inv[a][a]);
    out.coefficients.push_back(static_cast<double>(beta[a]));
    out.std_errors.push_back(static_cast<double>(se));
    out.t_stats.push_back(static_cast<double>(beta[a] / se));
    if (with_p_values)
      out.p_values.push_back(t_two_sided_p(static_cast<double>(beta[a] / se), static_cast<double>(dof)));
  }
  return out;
}

inline long double pinball(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<long double>& b,
                           double tau) {
  long double loss = 0.0L;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    long double fit = 0.0L;
    for (Eigen::Index j = 0; j < x.cols(); ++j) fit += b[static_cast<std::size_t>(j)] * x(i, j);
    const long double r = y(i) - fit;
    loss += r >= 0 ? tau * r : (tau - 1.0L) * r;
  }
  return loss;
}

// Minimum pinball loss over every basic solution, i.e. every hyperplane
// through p of the data points. A linear quantile regression always has an
// optimal solution among them.
inline double qr_basic_solution_minimum(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double tau) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto p = static_cast<std::size_t>(x.cols());
  std::vector<std::size_t> idx(p);
  for (std::size_t k = 0; k < p; ++k) idx[k] = k;
  long double best = std::numeric_limits<long double>::infinity();
  while (true) {
    Matrix a(p, std::vector<long double>(p));
    std::vector<long double> rhs(p), b;
    for (std::size_t r = 0; r < p; ++r) {
      for (std::size_t c = 0; c < p; ++c)
        a[r][c] = x(static_cast<Eigen::Index>(idx[r]), static_cast<Eigen::Index>(c));
      rhs[r] = y(static_cast<Eigen::Index>(idx[r]));
    }
    if (solve(a, rhs, b)) best = std::min(best, pinball(x, y, b, tau));
    // Next combination in lexicographic order.
    std::size_t k = p;
    while (k > 0 && idx[k - 1] == n - p + (k - 1)) --k;
    if (k == 0) break;
    ++idx[k - 1];
    for (std::size_t j = k; j < p; ++j) idx[j] = idx[j - 1] + 1;
  }
  return static_cast<double>(best);
}

// EWMSD straight from the weighted-moment definition, O(n^2).
inline std::vector<double> ewmsd_direct(const std::vector<double>& x, double span) {
  const long double decay = 1.0L - 2.0L / (static_cast<long double>(span) + 1.0L);
  std::vector<double> out(x.size());
  std::vector<long double> w;
  for (std::size_t t = 0; t < x.size(); ++t) {
    long double sw = 0.0L, swx = 0.0L, wi = 1.0L;
    w.assign(t + 1, 0.0L);
    for (std::size_t lag = 0; lag <= t; ++lag) {
      w[lag] = wi;
      sw += wi;
      swx += wi * x[t - lag];
      wi *= decay;
      if (wi < 1e-4000L) wi = 0.0L;
    }
    const long double mu = swx / sw;
    long double ss = 0.0L;
    for (std::size_t lag = 0; lag <= t; ++lag) {
      const long double d = x[t - lag] - mu;
      ss += w[lag] * d * d;
    }
    out[t] = static_cast<double>(std::sqrt(ss / sw));
  }
  return out;
}

// Pearson correlation by the two-pass centred formula.
inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  long double ma = 0.0L, mb = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  long double sab = 0.0L, saa = 0.0L, sbb = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return static_cast<double>(sab / std::sqrt(saa * sbb));
}

// Random dense design with an intercept column and p - 1 regressors of
// varying scale, plus a response with Gaussian noise.
struct Instance {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

inline Instance random_instance(std::mt19937_64& rng, std::size_t n, std::size_t p) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> scale(0.5, 20.0), beta(-3.0, 3.0);
  Instance in;
  in.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  in.y.resize(static_cast<Eigen::Index>(n));
  std::vector<double> s(p, 1.0), b(p);
  for (std::size_t j = 1; j < p; ++j) s[j] = scale(rng);
  for (std::size_t j = 0; j < p; ++j) b[j] = beta(rng);
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double xij = j == 0 ? 1.0 : s[j] * z(rng);
      in.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = xij;
      v += b[j] * xij;
    }
    in.y(static_cast<Eigen::Index>(i)) = v + 2.0 * z(rng);
  }
  return in;
}

}  // namespace oracle

#include "hydroprice/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hydroprice/errors.hpp"

namespace hydroprice {

namespace {

constexpr double kLnSqrt2Pi = 0.918938533204672741780329736406;

// lgamma(x) - Stirling(x) for x >= 10.
double lgamma_correction(double x) {
  const double r = 1.0 / x;
  const double r2 = r * r;
  return r * (1.0 / 12.0 +
              r2 * (-1.0 / 360.0 +
                    r2 * (1.0 / 1260.0 +
                          r2 * (-1.0 / 1680.0 +
                                r2 * (1.0 / 1188.0 + r2 * (-691.0 / 360360.0 + r2 * (1.0 / 156.0)))))));
}

// Continued fraction for I_x(a,b), modified Lentz. Converges quickly for
// x < (a+1)/(a+b+2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 100000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) <= kEps) return h;
  }
  throw SolverError("incomplete beta continued fraction did not converge");
}

// x and y = 1 - x are passed separately so that whichever is small keeps
// full relative precision.
double incomplete_beta(double a, double b, double x, double y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const auto front = [](double a_, double b_, double x_, double y_) {
    const double lx = x_ > 0.5 ? std::log1p(-y_) : std::log(x_);
    const double ly = y_ > 0.5 ? std::log1p(-x_) : std::log(y_);
    return std::exp(a_ * lx + b_ * ly - log_beta(a_, b_));
  };
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front(a, b, x, y) * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front(b, a, y, x) * beta_continued_fraction(b, a, y) / b;
}

}  // namespace

double log_beta(double a, double b) {
  const double p = std::min(a, b);
  const double q = std::max(a, b);
  if (p >= 10.0) {
    const double corr = lgamma_correction(p) + lgamma_correction(q) - lgamma_correction(p + q);
    return -0.5 * std::log(q) + kLnSqrt2Pi + corr + (p - 0.5) * std::log(p / (p + q)) +
           q * std::log1p(-p / (p + q));
  }
  if (q >= 10.0) {
    const double corr = lgamma_correction(q) - lgamma_correction(p + q);
    return std::lgamma(p) + corr + p - p * std::log(p + q) + (q - 0.5) * std::log1p(-p / (p + q));
  }
  return std::lgamma(p) + std::lgamma(q) - std::lgamma(p + q);
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw ParameterError("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw ParameterError("incomplete beta needs x in [0, 1]");
  return incomplete_beta(a, b, x, 1.0 - x);
}

double p_value_t(double t_stat, double dof) {
  if (!(dof >= 1.0)) throw ParameterError("p_value_t: dof must be >= 1");
  if (std::isnan(t_stat)) throw ParameterError("p_value_t: t is NaN");
  if (std::isinf(t_stat)) return 0.0;
  if (t_stat == 0.0) return 1.0;
  const double t2 = t_stat * t_stat;
  const double denom = dof + t2;
  const double x = dof / denom;
  const double y = t2 / denom;
  return std::clamp(incomplete_beta(0.5 * dof, 0.5, x, y), 0.0, 1.0);
}

double p_value_normal(double z) {
  if (std::isnan(z)) throw ParameterError("p_value_normal: z is NaN");
  return std::erfc(std::abs(z) / std::numbers::sqrt2);
}

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace hydroprice

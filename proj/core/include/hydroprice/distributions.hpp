#pragma once

namespace hydroprice {

// log B(a, b), accurate for large arguments (uses the Stirling remainder
// instead of differencing two large lgamma values).
double log_beta(double a, double b);

// I_x(a, b) by continued fraction (modified Lentz).
double regularized_incomplete_beta(double a, double b, double x);

// P(|T| >= |t|) for Student-t with `dof` degrees of freedom. dof may be
// fractional; throws ParameterError for dof < 1.
double p_value_t(double t_stat, double dof);

// P(|Z| >= |z|) for a standard normal.
double p_value_normal(double z);

double normal_pdf(double x);

}  // namespace hydroprice

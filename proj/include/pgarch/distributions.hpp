#pragma once

namespace pgarch::dist {

double normal_cdf(double x);
double normal_pdf(double x);
/// Inverse standard normal CDF; rational first guess refined by one Halley
/// step, absolute error below 1e-12 on (1e-300, 1 - 1e-16).
double normal_quantile(double p);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

/// Regularized incomplete beta I_x(a, b).
double beta_inc(double a, double b, double x);
/// Solves I_x(a, b) = y for x in [0, 1].
double beta_inc_inv(double a, double b, double y);

double student_t_cdf(double t, double nu);
double student_t_pdf(double t, double nu);
double student_t_quantile(double p, double nu);

double chi2_cdf(double x, double dof);
/// Upper tail 1 - F(x): the p-value of a chi-square statistic.
double chi2_sf(double x, double dof);

}  // namespace pgarch::dist

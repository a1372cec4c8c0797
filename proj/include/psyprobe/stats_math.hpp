#pragma once

namespace psyprobe::stats {

double sigmoid(double x);
double log_sigmoid(double x);  // log(sigmoid(x)), stable for large |x|

double normal_pdf(double x);
double normal_cdf(double x);
double log_normal_cdf(double x);  // stable in the far left tail
double normal_quantile(double p);

// regularized incomplete gamma P(a,x) and Q(a,x) = 1 - P(a,x)
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

// regularized incomplete beta I_x(a,b)
double regularized_beta(double x, double a, double b);

// survival function of the chi-square distribution with dof degrees of freedom
double chi_square_sf(double x, int dof);

// two-sided p-value of a Student-t statistic with dof degrees of freedom
double student_t_two_sided_p(double t, double dof);

}  // namespace psyprobe::stats

#pragma once

namespace pricepanel {

// Regularized incomplete beta I_x(a, b) via continued fraction (Lentz).
double ibeta_reg(double a, double b, double x);

// P(T <= t) for Student-t with dof degrees of freedom.
double student_t_cdf(double t, double dof);

// Two-sided tail probability P(|T| >= |t|).
double student_t_two_sided(double t, double dof);

// Quantile: smallest x with CDF(x) >= p, by bisection on the CDF.
double student_t_quantile(double p, double dof);

struct TPValue {
  double t = 0.0;
  double p = 1.0;
  bool degenerate = false;  // se was zero
};

// t = estimate/se, p two-sided under Student-t(dof). se == 0 yields the
// degenerate result {t=0, p=0}. Requires dof >= 1.
TPValue t_pvalue(double estimate, double se, double dof);

}  // namespace pricepanel

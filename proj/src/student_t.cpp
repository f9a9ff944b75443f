#include "pricepanel/student_t.hpp"

#include <cmath>
#include <stdexcept>

namespace pricepanel {

namespace {

// Continued fraction for the incomplete beta, modified Lentz.
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("incomplete beta continued fraction did not converge");
}

}  // namespace

double ibeta_reg(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::invalid_argument("ibeta_reg requires a > 0 and b > 0");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x) / a;
  }
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided(double t, double dof) {
  if (!(dof > 0.0)) throw std::invalid_argument("dof must be positive");
  if (t == 0.0) return 1.0;
  const double x = dof / (dof + t * t);
  return ibeta_reg(dof / 2.0, 0.5, x);
}

double student_t_cdf(double t, double dof) {
  const double tail = 0.5 * student_t_two_sided(std::fabs(t), dof);
  return t >= 0.0 ? 1.0 - tail : tail;
}

double student_t_quantile(double p, double dof) {
  if (!(dof > 0.0)) throw std::invalid_argument("dof must be positive");
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("quantile probability must be in (0, 1)");
  }
  if (p == 0.5) return 0.0;
  const bool upper = p > 0.5;
  const double target = upper ? p : 1.0 - p;
  double lo = 0.0;
  double hi = 1.0;
  while (student_t_cdf(hi, dof) < target && hi < 1e12) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_cdf(mid, dof) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double q = 0.5 * (lo + hi);
  return upper ? q : -q;
}

TPValue t_pvalue(double estimate, double se, double dof) {
  if (se < 0.0) throw std::invalid_argument("se must be non-negative");
  if (se == 0.0) return TPValue{0.0, 0.0, true};
  if (!(dof >= 1.0)) throw std::invalid_argument("dof must be >= 1");
  const double t = estimate / se;
  return TPValue{t, student_t_two_sided(t, dof), false};
}

}  // namespace pricepanel

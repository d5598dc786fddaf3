#pragma once

// Independent two-sided t-test p-value via adaptive Simpson quadrature
// over the t density. Shares no code with the library's incomplete-beta
// path, so agreement between the two is meaningful.

#include <cmath>
#include <cstddef>

namespace oracle {

inline double log_gamma(double x) { return std::lgamma(x); }

// Student-t density with nu degrees of freedom.
inline double t_pdf(double t, double nu) {
  double log_c = log_gamma((nu + 1.0) / 2.0) - log_gamma(nu / 2.0) -
                 0.5 * std::log(nu * std::acos(-1.0));
  return std::exp(log_c - ((nu + 1.0) / 2.0) * std::log1p(t * t / nu));
}

inline double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive(double a, double b, double fa, double fm, double fb, double whole,
                       double eps, double nu, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m);
  double rm = 0.5 * (m + b);
  double flm = t_pdf(lm, nu);
  double frm = t_pdf(rm, nu);
  double left = simpson(a, m, fa, flm, fm);
  double right = simpson(m, b, fm, frm, fb);
  if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * eps)
    return left + right + (left + right - whole) / 15.0;
  return adaptive(a, m, fa, flm, fm, left, eps / 2.0, nu, depth - 1) +
         adaptive(m, b, fm, frm, fb, right, eps / 2.0, nu, depth - 1);
}

inline double integrate_t_pdf(double a, double b, double nu, double eps) {
  double fa = t_pdf(a, nu);
  double fb = t_pdf(b, nu);
  double fm = t_pdf(0.5 * (a + b), nu);
  return adaptive(a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), eps, nu, 60);
}

// Two-sided p-value for observed correlation r with n pairs:
// p = 2 * P(T_{n-2} > |t|), integrated from |t| to a far tail cut.
inline double pearson_pvalue(double r, std::size_t n) {
  double nu = static_cast<double>(n - 2);
  double t = std::fabs(r) * std::sqrt(nu / (1.0 - r * r));
  // integrate the upper tail; beyond t + 400 the mass is negligible
  // for every (r, n) pair this oracle is consulted for
  double upper = t + 400.0;
  double tail = integrate_t_pdf(t, upper, nu, 1e-12);
  return 2.0 * tail;
}

}  // namespace oracle

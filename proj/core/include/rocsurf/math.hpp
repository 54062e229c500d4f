#ifndef ROCSURF_MATH_HPP
#define ROCSURF_MATH_HPP

#include <functional>

namespace rocsurf {

// Standard normal CDF.
double normal_cdf(double x);

// Standard normal density.
double normal_pdf(double x);

// Inverse standard normal CDF, |error| < 1e-12. p must lie in (0,1).
double normal_quantile(double p);

// Logistic function 1/(1+exp(-x)).
double expit(double x);

// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);

// Chi-square CDF with df degrees of freedom.
double chi_square_cdf(double x, int df);

// Chi-square quantile; level in (0,1), df >= 1.
double chi_square_quantile(double level, int df);

// Adaptive Simpson integration of f over [lo, hi] to absolute
// tolerance tol.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double tol);

}  // namespace rocsurf

#endif

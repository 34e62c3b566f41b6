#pragma once

namespace detlsh {

// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double regularized_gamma_p(double a, double x);

// Pr[Y <= x] for Y ~ chi^2(k).
double chi2_cdf(double x, int k);

// Density of chi^2(k).
double chi2_pdf(double x, int k);

// Upper-tail quantile: the x >= 0 with Pr[Y > x] = alpha for Y ~ chi^2(k).
// alpha must lie in (0, 1]; alpha = 1 maps to 0.
double chi2_quantile(double alpha, int k);

}  // namespace detlsh

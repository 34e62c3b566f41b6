#include "detlsh/chi2.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace detlsh {

namespace {

// Series expansion, converges fast for x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 1000; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz continued fraction for Q(a, x), stable for x >= a + 1.
double gamma_q_cont_frac(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 1000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double regularized_gamma_p(double a, double x) {
    if (a <= 0.0) throw std::invalid_argument("regularized_gamma_p: a must be positive");
    if (x < 0.0) throw std::invalid_argument("regularized_gamma_p: x must be non-negative");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cont_frac(a, x);
}

double chi2_cdf(double x, int k) {
    if (k < 1) throw std::invalid_argument("chi2_cdf: k must be positive");
    if (x <= 0.0) return 0.0;
    return regularized_gamma_p(0.5 * k, 0.5 * x);
}

double chi2_pdf(double x, int k) {
    if (k < 1) throw std::invalid_argument("chi2_pdf: k must be positive");
    if (x <= 0.0) return 0.0;
    const double half_k = 0.5 * k;
    const double ln2 = 0.6931471805599453;
    return std::exp((half_k - 1.0) * std::log(x) - 0.5 * x - half_k * ln2 - std::lgamma(half_k));
}

double chi2_quantile(double alpha, int k) {
    if (k < 1) throw std::invalid_argument("chi2_quantile: k must be positive");
    if (!(alpha > 0.0) || alpha > 1.0)
        throw std::invalid_argument("chi2_quantile: alpha must lie in (0, 1]");
    if (alpha == 1.0) return 0.0;

    const double target = 1.0 - alpha;  // lower-tail mass at the quantile

    // Bracket the root.
    double lo = 0.0;
    double hi = static_cast<double>(k) + 10.0 * std::sqrt(2.0 * k) + 10.0;
    for (int i = 0; i < 200 && chi2_cdf(hi, k) < target; ++i) hi *= 2.0;

    // Bisection to a tight interval.
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (chi2_cdf(mid, k) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // Newton polish on the CDF residual.
    double x = 0.5 * (lo + hi);
    for (int i = 0; i < 32; ++i) {
        const double f = chi2_cdf(x, k) - target;
        if (std::fabs(f) < 1e-12) break;
        const double df = chi2_pdf(x, k);
        if (df <= 0.0) break;
        double next = x - f / df;
        if (next <= lo || next >= hi) break;
        x = next;
    }
    return x;
}

}  // namespace detlsh

#include "flumn/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace flumn {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

double normal_logpdf(double x, double mean, double var) {
  if (!(var > 0.0)) throw ValidationError("normal_logpdf: variance must be positive");
  const double r = x - mean;
  return -0.5 * (kLog2Pi + std::log(var) + r * r / var);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z * 0.70710678118654752440); }

double normal_quantile(double p) {
  // Acklam's rational approximation, polished with one Halley step.
  p = std::clamp(p, 1e-300, 1.0 - 1e-16);
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double plow = 0.02425;
  double q, x;
  if (p < plow) {
    q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley refinement.
  constexpr double kSqrt2Pi = 2.5066282746310005024;
  const double e = normal_cdf(x) - p;
  const double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

double inv_chi2_logpdf(double x, double dof, double scale2) {
  if (!(dof > 0.0) || !(scale2 > 0.0))
    throw ValidationError("inv_chi2_logpdf: dof and scale must be positive");
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  const double h = 0.5 * dof;
  return h * std::log(h * scale2) - std::lgamma(h) - (h + 1.0) * std::log(x) -
         h * scale2 / x;
}

double inv_chi2_sample(Rng& rng, double dof, double scale2) {
  if (!(dof > 0.0) || !(scale2 > 0.0))
    throw ValidationError("inv_chi2_sample: dof and scale must be positive");
  // If X2 ~ chi^2(dof) then dof*scale2 / X2 has the target law.
  std::gamma_distribution<double> gamma(0.5 * dof, 2.0);
  double chi2 = 0.0;
  do {
    chi2 = gamma(rng);
  } while (!(chi2 > 0.0));
  return dof * scale2 / chi2;
}

double inv_chi2_mean(double dof, double scale2) {
  if (!(dof > 2.0)) throw ValidationError("inv_chi2_mean: needs dof > 2");
  return dof * scale2 / (dof - 2.0);
}

double inv_chi2_var(double dof, double scale2) {
  if (!(dof > 4.0)) throw ValidationError("inv_chi2_var: needs dof > 4");
  const double m = inv_chi2_mean(dof, scale2);
  return 2.0 * m * m / (dof - 4.0);
}

double trunc_normal_sample(Rng& rng, double mean, double sd, double lo, double hi) {
  if (!(sd > 0.0)) throw ValidationError("trunc_normal_sample: sd must be positive");
  if (!(lo < hi)) throw ValidationError("trunc_normal_sample: empty support");
  double a = (lo - mean) / sd;
  double b = (hi - mean) / sd;
  // Work in the left tail for accuracy: reflect when both bounds are positive.
  bool flipped = false;
  if (a > 0.0 && b > 0.0) {
    std::swap(a, b);
    a = -a;
    b = -b;
    flipped = true;
  }
  const double fa = normal_cdf(a);
  const double fb = normal_cdf(b);
  double z;
  if (fb - fa < 1e-14) {
    // Essentially no mass inside: return the closest boundary.
    z = (std::abs(a) < std::abs(b)) ? a : b;
  } else {
    const double u = uniform01(rng);
    z = normal_quantile(fa + u * (fb - fa));
  }
  z = std::clamp(z, a, b);
  if (flipped) z = -z;
  double x = mean + sd * z;
  // Keep strictly inside the requested interval.
  if (x <= lo) x = std::nextafter(lo, hi);
  if (x >= hi) x = std::nextafter(hi, lo);
  return x;
}

double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

double log_sum_exp(std::span<const double> x) {
  if (x.empty()) throw ValidationError("log_sum_exp: empty input");
  double m = x[0];
  for (double v : x) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace flumn

#pragma once

#include <span>

#include "flumn/common.hpp"

namespace flumn {

// log N(x | mean, var); var must be > 0.
double normal_logpdf(double x, double mean, double var);

// Standard normal CDF / quantile.  normal_quantile clamps p into
// (0, 1) open interval limits and is accurate to ~1e-14 over (1e-300, 1-1e-16).
double normal_cdf(double z);
double normal_quantile(double p);

// Scaled inverse chi-squared with dof nu > 0 and scale s2 > 0:
// density proportional to x^{-(nu/2+1)} exp(-nu s2 / (2x)) on x > 0.
double inv_chi2_logpdf(double x, double dof, double scale2);
double inv_chi2_sample(Rng& rng, double dof, double scale2);
double inv_chi2_mean(double dof, double scale2);  // requires dof > 2
double inv_chi2_var(double dof, double scale2);   // requires dof > 4

// Normal(mean, sd^2) conditioned on (lo, hi).  Inverse-CDF method; the
// result is clamped strictly inside the interval.
double trunc_normal_sample(Rng& rng, double mean, double sd, double lo, double hi);

// Uniform draw in [0, 1).
double uniform01(Rng& rng);

// log(sum(exp(x))) computed stably.
double log_sum_exp(std::span<const double> x);

}  // namespace flumn

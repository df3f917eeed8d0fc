#pragma once

namespace gpe {

/// Standard normal CDF.
double norm_cdf(double x);

/// Standard normal quantile (Wichura's AS241 rational approximation).
/// Requires p in (0, 1).
double norm_quantile(double p);

/// Quantile of the chi-squared distribution with one degree of freedom,
/// F^{-1}(p) = norm_quantile((1+p)/2)^2. Requires p in [0, 1).
double chi1_quantile(double p);

/// Two-sided normal p-value for a t statistic, 2(1 - Phi(|t|)).
double two_sided_p(double t);

}  // namespace gpe

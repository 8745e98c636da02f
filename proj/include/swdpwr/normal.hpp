#pragma once

namespace swdpwr {

/// Standard normal CDF via erfc.
double normal_cdf(double x);

/// Standard normal quantile, 0 < p < 1.
double normal_quantile(double p);

/// Two-sided Wald power. Throws E-RANGE for var <= 0 or alpha outside (0, 1).
double wald_power(double beta_alternative, double var_beta, double type_i_error);

}  // namespace swdpwr

#include "swdpwr/normal.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "swdpwr/error.hpp"

namespace swdpwr {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw Error(codes::kRange, "Quantile level must lie in (0, 1).");
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double wald_power(double beta_alternative, double var_beta, double type_i_error) {
    if (!(var_beta > 0.0) || !std::isfinite(var_beta))
        throw Error(codes::kRange, "Var(beta_hat) must be positive.");
    if (!(type_i_error > 0.0 && type_i_error < 1.0))
        throw Error(codes::kAlpha, "Type I error must lie in (0, 1).");
    // z_{1 - alpha/2} = sqrt(2) erfc^{-1}(alpha)
    const double z = std::numbers::sqrt2 * boost::math::erfc_inv(type_i_error);
    const double shift = std::abs(beta_alternative) / std::sqrt(var_beta);
    // At the null the two tails sum to alpha; return it exactly rather than
    // through erfc(erfc_inv(alpha)) round-off.
    if (shift == 0.0) return type_i_error;
    return normal_cdf(shift - z) + normal_cdf(-shift - z);
}

}  // namespace swdpwr

#pragma once

#include <vector>

namespace swdpwr {

/// n-point Gauss–Hermite rule for the weight exp(-x^2).
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// 1 <= n <= 200, otherwise E-RANGE.
QuadratureRule gauss_hermite_rule(int n);

/// n-point Gauss–Legendre rule on [-1, 1].
QuadratureRule gauss_legendre_rule(int n);

/// Discrete approximation of a standard normal variable u, possibly truncated
/// to (lower, upper). Weights sum to one. The random effect is b = tau * u.
/// `truncated` is set only when the nodes were built for the truncated density;
/// the bounds always record the support.
struct RandomEffectRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    double lower = -1.0 / 0.0;
    double upper = 1.0 / 0.0;
    bool truncated = false;

    std::size_t size() const noexcept { return nodes.size(); }
};

/// Gauss–Hermite mapped to N(0, 1).
RandomEffectRule normal_rule(int n);

/// Standard normal restricted to (lower, upper). When every node of the
/// n-point Gauss–Hermite rule falls inside the interval that rule is used
/// unchanged; otherwise a composite Gauss–Legendre rule with n nodes per
/// unit-width panel over (lower, upper) clipped to [-10, 10], weighted by the
/// normal density and renormalised.
RandomEffectRule truncated_normal_rule(int n, double lower, double upper);

}  // namespace swdpwr

#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "swdpwr/quadrature.hpp"

namespace swdpwr {

enum class LinkKind { kIdentity, kLog, kLogit };

/// g, g^{-1} and d g^{-1} / d eta for the supported links.
struct LinkFunction {
    LinkKind kind = LinkKind::kIdentity;

    double link(double p) const;
    double inverse(double eta) const;
    double inverse_derivative(double eta) const;
};

/// Regression parameters on the link scale. tau is the random-effect standard
/// deviation of the conditional model and 0 for marginal models.
struct IdentifiedParams {
    double mu = 0.0;
    double gammaJ = 0.0;
    double beta = 0.0;
    double tau = 0.0;
};

/// Anticipated response rates. Exactly one of end1 / beta is expected.
struct ResponseRates {
    double start = 0.0;
    double end0 = 0.0;
    std::optional<double> end1;
    std::optional<double> beta;
};

/// gamma_j = (j - 1) * gammaJ / (J - 1), j = 1..J.
std::vector<double> time_effect_vector(double gammaJ, int J);

IdentifiedParams identify_marginal_params(const ResponseRates& rates, LinkKind link);

struct ConditionalMoments {
    double mean = 0.0;
    double icc = 0.0;
};

/// Marginal mean E_b[g^{-1}(mu_c + b)] and intracluster correlation implied by
/// b ~ N(0, tau^2). The identity link uses tau^2 / (tau^2 + mu(1 - mu)).
ConditionalMoments conditional_moments(double mu_c, double tau, LinkKind link,
                                       const RandomEffectRule& rule);

/// Solves (mu, tau) jointly for (start, rho), then gammaJ and beta from the
/// remaining rates, all on the conditional (random-effect) scale.
IdentifiedParams identify_conditional_params(const ResponseRates& rates, double rho,
                                             LinkKind link, const RandomEffectRule& rule);

/// Root of a monotone scalar function f on a growing bracket around `guess`.
/// Bisection safeguarded secant; absolute tolerance `tol`, at most 200 steps.
template <typename F>
double solve_monotone(F&& f, double guess, double step, double tol = 1e-12);

}  // namespace swdpwr

#include "swdpwr/detail/root.hpp"

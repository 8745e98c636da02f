#include "swdpwr/links.hpp"

#include <cmath>

#include "swdpwr/error.hpp"

namespace swdpwr {

double LinkFunction::link(double p) const {
    switch (kind) {
        case LinkKind::kIdentity: return p;
        case LinkKind::kLog: return std::log(p);
        case LinkKind::kLogit: return std::log(p / (1.0 - p));
    }
    return p;
}

double LinkFunction::inverse(double eta) const {
    switch (kind) {
        case LinkKind::kIdentity: return eta;
        case LinkKind::kLog: return std::exp(eta);
        case LinkKind::kLogit:
            return eta >= 0.0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
    }
    return eta;
}

double LinkFunction::inverse_derivative(double eta) const {
    switch (kind) {
        case LinkKind::kIdentity: return 1.0;
        case LinkKind::kLog: return std::exp(eta);
        case LinkKind::kLogit: {
            const double h = inverse(eta);
            return h * (1.0 - h);
        }
    }
    return 1.0;
}

std::vector<double> time_effect_vector(double gammaJ, int J) {
    std::vector<double> g(J, 0.0);
    for (int j = 1; j < J; ++j) g[j] = j * gammaJ / (J - 1);
    return g;
}

namespace {

double checked_link(const LinkFunction& g, double p) {
    const double v = g.link(p);
    if (!std::isfinite(v))
        throw Error(codes::kProb, "Response rate " + std::to_string(p) +
                                      " is outside the domain of the link function.");
    return v;
}

}  // namespace

IdentifiedParams identify_marginal_params(const ResponseRates& rates, LinkKind link) {
    if (rates.end1 && rates.beta)
        throw Error(codes::kContradict,
                    "meanresponse_end1 and effectsize_beta cannot be supplied at the same time.");
    if (!rates.end1 && !rates.beta)
        throw Error(codes::kMissing, "Either meanresponse_end1 or effectsize_beta is required.");
    const LinkFunction g{link};
    IdentifiedParams p;
    p.mu = checked_link(g, rates.start);
    p.gammaJ = checked_link(g, rates.end0) - p.mu;
    p.beta = rates.beta ? *rates.beta : checked_link(g, *rates.end1) - checked_link(g, rates.end0);
    return p;
}

ConditionalMoments conditional_moments(double mu_c, double tau, LinkKind link,
                                       const RandomEffectRule& rule) {
    if (tau < 0.0) throw Error(codes::kRange, "Random-effect standard deviation must be >= 0.");
    const LinkFunction g{link};
    if (tau == 0.0) return {g.inverse(mu_c), 0.0};
    if (link == LinkKind::kIdentity) {
        const double t2 = tau * tau;
        return {mu_c, t2 / (t2 + mu_c * (1.0 - mu_c))};
    }
    double m1 = 0.0;
    double m2 = 0.0;
    for (std::size_t m = 0; m < rule.size(); ++m) {
        const double h = g.inverse(mu_c + tau * rule.nodes[m]);
        m1 += rule.weights[m] * h;
        m2 += rule.weights[m] * h * h;
    }
    return {m1, (m2 - m1 * m1) / (m1 * (1.0 - m1))};
}

IdentifiedParams identify_conditional_params(const ResponseRates& rates, double rho,
                                             LinkKind link, const RandomEffectRule& rule) {
    if (!(rho >= 0.0 && rho < 1.0))
        throw Error(codes::kRange, "The intracluster correlation must lie in [0, 1).");
    if (rho == 0.0) return identify_marginal_params(rates, link);
    if (rates.end1 && rates.beta)
        throw Error(codes::kContradict,
                    "meanresponse_end1 and effectsize_beta cannot be supplied at the same time.");
    if (!rates.end1 && !rates.beta)
        throw Error(codes::kMissing, "Either meanresponse_end1 or effectsize_beta is required.");

    const LinkFunction g{link};
    IdentifiedParams p;
    if (link == LinkKind::kIdentity) {
        p.mu = rates.start;
        p.gammaJ = rates.end0 - rates.start;
        p.beta = rates.beta ? *rates.beta : *rates.end1 - rates.end0;
        p.tau = std::sqrt(rho * p.mu * (1.0 - p.mu) / (1.0 - rho));
        return p;
    }

    auto mean_at = [&](double eta, double tau) { return conditional_moments(eta, tau, link, rule).mean; };
    auto solve_offset = [&](double target, double base, double tau) {
        const double guess = checked_link(g, target) - base;
        return solve_monotone([&](double x) { return mean_at(base + x, tau) - target; }, guess, 0.25);
    };
    auto mu_for = [&](double tau) { return solve_offset(rates.start, 0.0, tau); };

    const double log_tau = solve_monotone(
        [&](double s) {
            const double tau = std::exp(s);
            return conditional_moments(mu_for(tau), tau, link, rule).icc - rho;
        },
        std::log(0.5), 1.0);
    p.tau = std::exp(log_tau);
    p.mu = mu_for(p.tau);
    p.gammaJ = solve_offset(rates.end0, p.mu, p.tau);
    p.beta = rates.beta ? *rates.beta : solve_offset(*rates.end1, p.mu + p.gammaJ, p.tau);
    return p;
}

}  // namespace swdpwr

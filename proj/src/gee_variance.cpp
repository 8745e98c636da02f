#include "swdpwr/gee_variance.hpp"

#include <cmath>

#include "swdpwr/linalg.hpp"

namespace swdpwr {

double var_beta_continuous(const DesignSummary& s, int K, double sigma2,
                           const ResolvedCorrelation& alpha, bool time_effects) {
    const auto eig = block_eigenvalues(alpha, s.J, K);
    const double l3 = eig.lambda[2];
    const double l4 = eig.lambda[3];
    const double U = static_cast<double>(s.U);
    const double W = static_cast<double>(s.W);
    const double V = static_cast<double>(s.V);
    const double I = s.I;
    const double J = s.J;
    const double denom = time_effects
                             ? (U * U + I * J * U - J * W - I * V) * l4 - (U * U - I * V) * l3
                             : (I * J * U - I * V) * l4 - (U * U - I * V) * l3;
    if (!(denom > 0.0))
        throw Error(codes::kSingular,
                    "The design does not identify the treatment effect (degenerate allocation).");
    return (sigma2 / K) * I * J * l3 * l4 / denom;
}

std::vector<double> regression_row(int period, int treated, int J, bool time_effects) {
    std::vector<double> z(time_effects ? J + 1 : 2, 0.0);
    z.front() = 1.0;
    if (time_effects && period > 0) z[period] = 1.0;
    z.back() = treated;
    return z;
}

std::vector<SequenceMeans> marginal_cell_means(const Design& design, LinkKind link,
                                               const IdentifiedParams& params, bool time_effects) {
    const LinkFunction g{link};
    const int J = design.periods();
    const auto gamma = time_effect_vector(time_effects ? params.gammaJ : 0.0, J);
    std::vector<SequenceMeans> out;
    for (const auto& row : design.distinct_sequences()) {
        SequenceMeans s;
        for (int j = 0; j < J; ++j) {
            const double p = g.inverse(params.mu + gamma[j] + row.allocation[j] * params.beta);
            if (!(p > 0.0 && p < 1.0))
                throw Error(codes::kProb,
                            p >= 1.0 ? "Violation of valid probability, given input parameters: "
                                       "max(meanresponse_start, meanresponse_end0, "
                                       "meanresponse_end1)>1. Please check whether any of these "
                                       "values are out of range and revise one or more of them."
                                     : "Violation of valid probability, given input parameters: "
                                       "min(meanresponse_start, meanresponse_end0, "
                                       "meanresponse_end1)<0. Please check whether any of these "
                                       "values are out of range and revise one or more of them.");
            s.mean.push_back(p);
        }
        out.push_back(std::move(s));
    }
    return out;
}

Eigen::MatrixXd gee_information(const GeeScenario& sc) {
    const int J = sc.design.periods();
    const LinkFunction g{sc.link};
    const auto gamma = time_effect_vector(sc.time_effects ? sc.params.gammaJ : 0.0, J);
    const BlockInverse rinv(block_eigenvalues(sc.alpha, J, sc.K), J, sc.K);
    const int P = sc.time_effects ? J + 1 : 2;

    // Validates every cell mean before any algebra.
    marginal_cell_means(sc.design, sc.link, sc.params, sc.time_effects);

    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(P, P);
    std::vector<std::vector<double>> columns(P, std::vector<double>(J, 0.0));
    for (const auto& row : sc.design.distinct_sequences()) {
        // Column a of A^{-1/2} D restricted to one member of each period.
        for (int j = 0; j < J; ++j) {
            const double eta = sc.params.mu + gamma[j] + row.allocation[j] * sc.params.beta;
            const double p = g.inverse(eta);
            const double scale = g.inverse_derivative(eta) / std::sqrt(p * (1.0 - p));
            const auto z = regression_row(j, row.allocation[j], J, sc.time_effects);
            for (int a = 0; a < P; ++a) columns[a][j] = scale * z[a];
        }
        for (int a = 0; a < P; ++a)
            for (int b = a; b < P; ++b) {
                const double v = row.count * rinv.period_form(columns[a], columns[b]);
                info(a, b) += v;
                if (b != a) info(b, a) += v;
            }
    }
    return info;
}

double var_beta_binary_marginal(const GeeScenario& scenario) {
    const auto info = gee_information(scenario);
    return inverse_diagonal_entry(info, info.rows() - 1);
}

}  // namespace swdpwr

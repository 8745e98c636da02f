#pragma once

#include <vector>

#include <Eigen/Dense>

#include "swdpwr/correlation.hpp"
#include "swdpwr/design.hpp"
#include "swdpwr/links.hpp"

namespace swdpwr {

/// Marginal (GEE) scenario for binary outcomes. True time effects follow the
/// linear rule of time_effect_vector while the fitted model keeps J - 1 free
/// time-effect coordinates.
struct GeeScenario {
    Design design;
    int K = 1;
    LinkKind link = LinkKind::kIdentity;
    IdentifiedParams params;
    ResolvedCorrelation alpha;
    bool time_effects = true;
};

/// Closed-form Var(beta_hat) for continuous outcomes with block exchangeable
/// correlation. Throws E-PD or E-SINGULAR.
double var_beta_continuous(const DesignSummary& summary, int K, double sigma2,
                           const ResolvedCorrelation& alpha, bool time_effects);

/// Regression row z_ij for period j (0-based) with treatment flag x.
std::vector<double> regression_row(int period, int treated, int J, bool time_effects);

/// Marginal mean per period for each distinct sequence. Throws E-PROB when a
/// mean leaves (0, 1).
std::vector<SequenceMeans> marginal_cell_means(const Design& design, LinkKind link,
                                               const IdentifiedParams& params, bool time_effects);

/// Model-based information sum_i D_i' V_i^{-1} D_i.
Eigen::MatrixXd gee_information(const GeeScenario& scenario);

/// Last diagonal element of the inverse information.
double var_beta_binary_marginal(const GeeScenario& scenario);

}  // namespace swdpwr

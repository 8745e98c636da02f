#pragma once

// Independent checks for the analytic engines: dense linear algebra and
// seeded Monte Carlo. Nothing in the engines depends on this header.

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "swdpwr/engine.hpp"
#include "swdpwr/gee_variance.hpp"
#include "swdpwr/glmm_variance.hpp"

namespace swdpwr::oracle {

struct ContinuousScenario {
    Design design;
    int K = 1;
    double sigma2 = 1.0;
    ResolvedCorrelation alpha;
    bool time_effects = true;
};

/// Requires a validated gaussian scenario.
ContinuousScenario continuous_scenario(const NormalizedScenario& scenario);

/// Dense block-exchangeable correlation matrix, period-major (index j*K + k).
Eigen::MatrixXd dense_correlation(const ResolvedCorrelation& alpha, int J, int K);

/// Var(beta_hat) from explicit Z_i and V_i = sigma2 R_i. Needs J*K <= 2000.
double dense_continuous_variance(const ContinuousScenario& scenario);

/// Cluster-means (random intercept) formula; defined only when
/// alpha0 == alpha1 == alpha2.
std::optional<double> hussey_hughes_variance(const ContinuousScenario& scenario);

struct DenseCrosscheck {
    double closed_form = 0.0;
    double dense = 0.0;
    std::optional<double> hussey_hughes;
};

DenseCrosscheck dense_variance_crosscheck(const ContinuousScenario& scenario);

/// Model-based GEE variance with V_i = A^{1/2} R A^{1/2} built and inverted densely.
double dense_gee_variance(const GeeScenario& scenario);

/// Random generator used by every Monte Carlo oracle: mt19937_64 per chunk of
/// replicates, each chunk seeded through SplitMix64 from (seed, chunk index).
inline constexpr long kReplicatesPerChunk = 1000;
std::uint64_t splitmix64(std::uint64_t x);

struct McInformation {
    Eigen::MatrixXd mean;            // estimate of E[s s'] summed over clusters
    Eigen::MatrixXd standard_error;  // elementwise
    long replicates = 0;
};

/// Simulates the random effect (inverse-CDF, restricted to the model's
/// support) and per-period binomial counts for every cluster, then averages
/// S S' where S is the total score.
McInformation mc_score_information(const GlmmScenario& scenario, long replicates,
                                   std::uint64_t seed, int threads = 0);

struct VarianceComponents {
    double cluster = 0.0;     // sigma_b^2
    double period = 0.0;      // sigma_c^2
    double individual = 0.0;  // sigma_pi^2
    double residual = 0.0;    // sigma_e^2
};

/// Throws E-RANGE when any component is negative.
VarianceComponents variance_components(const ResolvedCorrelation& alpha, double sigma2);

struct ContinuousMc {
    double analytic_variance = 0.0;
    double analytic_power = 0.0;
    double empirical_variance = 0.0;
    double mean_beta = 0.0;
    double rejection_rate = 0.0;
    long replicates = 0;
};

/// Simulates the linear mixed model, fits beta by GLS with the true V and
/// tests it with the Wald statistic at the analytic variance.
ContinuousMc mc_empirical_power_continuous(const ContinuousScenario& scenario, double beta,
                                           double type_i_error, long replicates,
                                           std::uint64_t seed, int threads = 0);

}  // namespace swdpwr::oracle

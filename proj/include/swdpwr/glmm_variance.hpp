#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "swdpwr/design.hpp"
#include "swdpwr/links.hpp"
#include "swdpwr/quadrature.hpp"

namespace swdpwr {

inline constexpr double kDefaultEnumerationBudget = 5e8;
inline constexpr int kDefaultQuadratureNodes = 30;
inline constexpr int kMaxConditionalK = 150;

/// Conditional (GLMM) scenario for binary cross-sectional designs.
struct GlmmScenario {
    Design design;
    int K = 1;
    LinkKind link = LinkKind::kIdentity;
    IdentifiedParams params;
    bool time_effects = true;
    int quadrature_nodes = kDefaultQuadratureNodes;
    /// Upper bound on sum over sequences of (configurations x quadrature nodes).
    double enumeration_budget = kDefaultEnumerationBudget;
    /// Merge periods sharing a treatment flag when there are no time effects.
    bool collapse = true;
    /// Worker threads for the enumeration; 0 picks hardware concurrency.
    int threads = 0;
    std::optional<std::chrono::steady_clock::time_point> deadline;
};

/// theta = (mu, gamma_2..gamma_J, beta, tau) with time effects, else
/// (mu, beta, tau). True gamma_j follow the linear rule.
std::vector<double> glmm_theta(const IdentifiedParams& params, int J, bool time_effects);

/// Standard-normal rule for u = b / tau restricted to the region where every
/// cell probability of the design stays inside (0, 1). Single node at 0 when
/// tau == 0.
RandomEffectRule glmm_random_effect_rule(const GlmmScenario& scenario);

/// Outcome model of one cluster: counts per cell (period, or treatment arm
/// when collapsed) are conditionally binomial given the random effect.
class ClusterModel {
public:
    ClusterModel(std::span<const int> allocation, std::span<const double> theta, int K,
                 LinkKind link, const RandomEffectRule& rule, bool time_effects, bool collapse);

    int cells() const noexcept { return static_cast<int>(sizes_.size()); }
    const std::vector<int>& cell_sizes() const noexcept { return sizes_; }
    /// Per-period cell index, so per-period counts can be folded into cells.
    const std::vector<int>& period_cell() const noexcept { return period_cell_; }
    int parameters() const noexcept { return static_cast<int>(theta_size_); }
    double configurations() const;
    std::size_t nodes() const noexcept { return rule_.size(); }

    /// Conditional success probability of cell c at random effect b = tau * u.
    double cell_probability(int cell, double u) const;

    double log_probability(std::span<const int> counts) const;
    /// Returns log P(y); writes d log P / d theta into `score`.
    double log_probability_and_score(std::span<const int> counts, std::span<double> score) const;

    /// Visits every configuration with its probability and score.
    void for_each_outcome(
        const std::function<void(std::span<const int>, double, std::span<const double>)>& visit)
        const;

    struct Moments {
        Eigen::MatrixXd information;
        Eigen::VectorXd mean_score;
        double total_probability = 0.0;
    };

    /// sum_y P(y) s(y) s(y)', with partial sums over the first cell's count
    /// combined in a fixed order.
    Moments expected_moments(int threads = 0,
                             std::optional<std::chrono::steady_clock::time_point> deadline = {}) const;

private:
    void build_tables();

    std::vector<int> sizes_;
    std::vector<std::vector<double>> dEta_;  // per cell, derivative of eta w.r.t. theta (no tau)
    std::vector<double> eta_;
    std::vector<int> period_cell_;
    std::size_t theta_size_ = 0;
    double tau_ = 0.0;
    LinkFunction link_;
    RandomEffectRule rule_;
    std::vector<double> log_weight_;
    // [cell][node * (N + 1) + y]
    std::vector<std::vector<double>> log_pmf_;
    std::vector<std::vector<double>> residual_;
};

/// Expected information summed over clusters (multiplicity-weighted).
struct GlmmInformation {
    Eigen::MatrixXd information;
    double max_normalisation_error = 0.0;
    double max_mean_score = 0.0;
};

GlmmInformation expected_information(const GlmmScenario& scenario);

/// [I(theta)^{-1}] at beta. Throws E-K150, E-BUDGET or E-SINGULAR.
double var_beta_conditional(const GlmmScenario& scenario);

/// Enumeration cost used for the budget check.
double enumeration_cost(const GlmmScenario& scenario);

}  // namespace swdpwr

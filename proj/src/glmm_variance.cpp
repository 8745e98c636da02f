#include "swdpwr/glmm_variance.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "swdpwr/error.hpp"
#include "swdpwr/gee_variance.hpp"
#include "swdpwr/linalg.hpp"

namespace swdpwr {
namespace {

constexpr double kProbabilityFloor = 1e-15;

const char* const kK150Message =
    "K should be at least smaller than 150 for this scenario as the running time is too long with "
    "this K for the power calculation of binary outcomes under conditional model with time "
    "effects. Please reduce K or use the model without time effects or use marginal models.";

std::vector<double> log_choose_row(int n) {
    std::vector<double> row(n + 1);
    const double top = std::lgamma(n + 1.0);
    for (int y = 0; y <= n; ++y) row[y] = top - std::lgamma(y + 1.0) - std::lgamma(n - y + 1.0);
    return row;
}

void check_deadline(const std::optional<std::chrono::steady_clock::time_point>& deadline) {
    if (deadline && std::chrono::steady_clock::now() > *deadline)
        throw Error(codes::kBudget,
                    "The computation exceeded its time budget. Please reduce K or use the model "
                    "without time effects or use marginal models.");
}

}  // namespace

std::vector<double> glmm_theta(const IdentifiedParams& params, int J, bool time_effects) {
    std::vector<double> theta;
    theta.push_back(params.mu);
    if (time_effects) {
        const auto gamma = time_effect_vector(params.gammaJ, J);
        theta.insert(theta.end(), gamma.begin() + 1, gamma.end());
    }
    theta.push_back(params.beta);
    theta.push_back(params.tau);
    return theta;
}

ClusterModel::ClusterModel(std::span<const int> allocation, std::span<const double> theta, int K,
                           LinkKind link, const RandomEffectRule& rule, bool time_effects,
                           bool collapse)
    : link_{link}, rule_(rule) {
    const int J = static_cast<int>(allocation.size());
    const std::size_t fixed = time_effects ? J + 1 : 2;
    if (theta.size() != fixed + 1)
        throw Error(codes::kRange, "Parameter vector has the wrong length for this model.");
    theta_size_ = theta.size();
    tau_ = theta.back();
    if (tau_ < 0.0) throw Error(codes::kRange, "tau must be non-negative.");

    const bool merge = collapse && !time_effects;
    period_cell_.assign(J, -1);
    std::vector<int> cell_flag;
    for (int j = 0; j < J; ++j) {
        const auto z = regression_row(j, allocation[j], J, time_effects);
        if (merge) {
            auto it = std::find(cell_flag.begin(), cell_flag.end(), allocation[j]);
            if (it != cell_flag.end()) {
                const auto c = static_cast<std::size_t>(it - cell_flag.begin());
                sizes_[c] += K;
                period_cell_[j] = static_cast<int>(c);
                continue;
            }
            cell_flag.push_back(allocation[j]);
        }
        double eta = 0.0;
        for (std::size_t a = 0; a < fixed; ++a) eta += z[a] * theta[a];
        period_cell_[j] = static_cast<int>(sizes_.size());
        sizes_.push_back(K);
        dEta_.push_back(z);
        eta_.push_back(eta);
    }
    build_tables();
}

void ClusterModel::build_tables() {
    const std::size_t nodes = rule_.size();
    log_weight_.resize(nodes);
    for (std::size_t m = 0; m < nodes; ++m) log_weight_[m] = std::log(rule_.weights[m]);
    log_pmf_.assign(sizes_.size(), {});
    residual_.assign(sizes_.size(), {});
    for (std::size_t c = 0; c < sizes_.size(); ++c) {
        const int N = sizes_[c];
        const auto choose = log_choose_row(N);
        auto& L = log_pmf_[c];
        auto& R = residual_[c];
        L.resize(nodes * (N + 1));
        R.resize(nodes * (N + 1));
        for (std::size_t m = 0; m < nodes; ++m) {
            const double lin = eta_[c] + tau_ * rule_.nodes[m];
            const double h = std::clamp(link_.inverse(lin), kProbabilityFloor, 1.0 - kProbabilityFloor);
            const double dh = link_.inverse_derivative(lin);
            const double lh = std::log(h);
            const double l1h = std::log1p(-h);
            const double scale = dh / (h * (1.0 - h));
            for (int y = 0; y <= N; ++y) {
                L[m * (N + 1) + y] = choose[y] + y * lh + (N - y) * l1h;
                R[m * (N + 1) + y] = (y - N * h) * scale;
            }
        }
    }
}

double ClusterModel::configurations() const {
    double n = 1.0;
    for (int s : sizes_) n *= s + 1.0;
    return n;
}

double ClusterModel::cell_probability(int cell, double u) const {
    return link_.inverse(eta_[cell] + tau_ * u);
}

double ClusterModel::log_probability(std::span<const int> counts) const {
    std::vector<double> score(theta_size_);
    return log_probability_and_score(counts, score);
}

double ClusterModel::log_probability_and_score(std::span<const int> counts,
                                               std::span<double> score) const {
    const std::size_t nodes = rule_.size();
    const std::size_t C = sizes_.size();
    std::vector<double> t(nodes);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < nodes; ++m) {
        double v = log_weight_[m];
        for (std::size_t c = 0; c < C; ++c) v += log_pmf_[c][m * (sizes_[c] + 1) + counts[c]];
        t[m] = v;
        mx = std::max(mx, v);
    }
    std::vector<double> A(C, 0.0);
    double B = 0.0;
    double total = 0.0;
    for (std::size_t m = 0; m < nodes; ++m) {
        const double f = std::exp(t[m] - mx);
        total += f;
        double rsum = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
            const double r = residual_[c][m * (sizes_[c] + 1) + counts[c]];
            A[c] += f * r;
            rsum += r;
        }
        B += f * rule_.nodes[m] * rsum;
    }
    std::fill(score.begin(), score.end(), 0.0);
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t k = 0; k + 1 < theta_size_; ++k) score[k] += dEta_[c][k] * A[c] / total;
    score[theta_size_ - 1] = B / total;
    return mx + std::log(total);
}

void ClusterModel::for_each_outcome(
    const std::function<void(std::span<const int>, double, std::span<const double>)>& visit) const {
    const std::size_t C = sizes_.size();
    std::vector<int> y(C, 0);
    std::vector<double> score(theta_size_);
    while (true) {
        const double lp = log_probability_and_score(y, score);
        visit(y, std::exp(lp), score);
        std::size_t c = C;
        while (c > 0) {
            --c;
            if (++y[c] <= sizes_[c]) break;
            y[c] = 0;
            if (c == 0) return;
        }
    }
}

ClusterModel::Moments ClusterModel::expected_moments(
    int threads, std::optional<std::chrono::steady_clock::time_point> deadline) const {
    const std::size_t nodes = rule_.size();
    const std::size_t C = sizes_.size();
    const std::size_t P = theta_size_;
    const int first_size = sizes_[0];

    struct Partial {
        Eigen::MatrixXd info;
        Eigen::VectorXd score;
        double prob = 0.0;
    };
    std::vector<Partial> partials(first_size + 1);

    auto run_task = [&](int y0) {
        Partial part{Eigen::MatrixXd::Zero(P, P), Eigen::VectorXd::Zero(P), 0.0};
        std::vector<int> y(C, 0);
        y[0] = y0;
        std::vector<double> prefix(nodes), t(nodes);
        std::vector<double> A(C);
        Eigen::VectorXd s(P);
        const std::size_t last = C - 1;
        const int last_size = sizes_[last];
        while (true) {
            // Prefix sums over cells [0, last) for the current odometer state.
            for (std::size_t m = 0; m < nodes; ++m) {
                double v = log_weight_[m];
                for (std::size_t c = 0; c < last; ++c) v += log_pmf_[c][m * (sizes_[c] + 1) + y[c]];
                prefix[m] = v;
            }
            const int inner_begin = last == 0 ? y0 : 0;
            const int inner_end = last == 0 ? y0 : last_size;
            for (int yl = inner_begin; yl <= inner_end; ++yl) {
                y[last] = yl;
                double mx = -std::numeric_limits<double>::infinity();
                const double* Ll = log_pmf_[last].data() + yl;
                for (std::size_t m = 0; m < nodes; ++m) {
                    t[m] = prefix[m] + Ll[m * (last_size + 1)];
                    mx = std::max(mx, t[m]);
                }
                std::fill(A.begin(), A.end(), 0.0);
                double B = 0.0;
                double total = 0.0;
                for (std::size_t m = 0; m < nodes; ++m) {
                    const double fm = std::exp(t[m] - mx);
                    total += fm;
                    double rsum = 0.0;
                    for (std::size_t c = 0; c < C; ++c) {
                        const double r = residual_[c][m * (sizes_[c] + 1) + y[c]];
                        A[c] += fm * r;
                        rsum += r;
                    }
                    B += fm * rule_.nodes[m] * rsum;
                }
                s.setZero();
                for (std::size_t c = 0; c < C; ++c)
                    for (std::size_t k = 0; k + 1 < P; ++k) s[k] += dEta_[c][k] * A[c];
                s[P - 1] = B;
                s /= total;
                const double prob = std::exp(mx) * total;
                part.prob += prob;
                part.score += prob * s;
                part.info.selfadjointView<Eigen::Lower>().rankUpdate(s, prob);
            }
            // Advance the odometer over cells 1..last-1.
            std::size_t c = last;
            bool done = true;
            while (c > 1) {
                --c;
                if (++y[c] <= sizes_[c]) {
                    done = false;
                    break;
                }
                y[c] = 0;
            }
            if (done) break;
        }
        part.info = part.info.selfadjointView<Eigen::Lower>();
        partials[y0] = std::move(part);
    };

    unsigned workers = threads > 0 ? static_cast<unsigned>(threads) : std::thread::hardware_concurrency();
    workers = std::max(1u, std::min<unsigned>(workers, first_size + 1));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        try {
            for (int y0 = next++; y0 <= first_size; y0 = next++) {
                check_deadline(deadline);
                run_task(y0);
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = first_size + 1;
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    Moments out{Eigen::MatrixXd::Zero(P, P), Eigen::VectorXd::Zero(P), 0.0};
    for (const auto& part : partials) {
        out.information += part.info;
        out.mean_score += part.score;
        out.total_probability += part.prob;
    }
    return out;
}

RandomEffectRule glmm_random_effect_rule(const GlmmScenario& sc) {
    const double tau = sc.params.tau;
    if (tau == 0.0) {
        RandomEffectRule r;
        r.nodes = {0.0};
        r.weights = {1.0};
        return r;
    }
    if (sc.link == LinkKind::kLogit) return normal_rule(sc.quadrature_nodes);

    const int J = sc.design.periods();
    const auto gamma = time_effect_vector(sc.time_effects ? sc.params.gammaJ : 0.0, J);
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    for (const auto& row : sc.design.distinct_sequences())
        for (int j = 0; j < J; ++j) {
            const double eta = sc.params.mu + gamma[j] + row.allocation[j] * sc.params.beta;
            if (sc.link == LinkKind::kIdentity) {
                lower = std::max(lower, -eta / tau);
                upper = std::min(upper, (1.0 - eta) / tau);
            } else {
                upper = std::min(upper, -eta / tau);
            }
        }
    if (!(lower < 0.0 && upper > 0.0))
        throw Error(codes::kProb,
                    "Conditional cell probabilities leave (0, 1) at the mean random effect.");
    return truncated_normal_rule(sc.quadrature_nodes, lower, upper);
}

double enumeration_cost(const GlmmScenario& sc) {
    const auto rule = glmm_random_effect_rule(sc);
    double cost = 0.0;
    for (const auto& row : sc.design.distinct_sequences()) {
        double configs = 1.0;
        const int J = sc.design.periods();
        if (sc.time_effects || !sc.collapse) {
            configs = std::pow(sc.K + 1.0, J);
        } else {
            const int treated = static_cast<int>(std::count(row.allocation.begin(), row.allocation.end(), 1));
            const int control = J - treated;
            if (treated > 0) configs *= sc.K * treated + 1.0;
            if (control > 0) configs *= sc.K * control + 1.0;
        }
        cost += configs * static_cast<double>(rule.size());
    }
    return cost;
}

GlmmInformation expected_information(const GlmmScenario& sc) {
    if (sc.time_effects && sc.K > kMaxConditionalK) throw Error(codes::kK150, kK150Message);
    if (enumeration_cost(sc) > sc.enumeration_budget)
        throw Error(codes::kBudget,
                    "The outcome enumeration for this scenario exceeds the computation budget. "
                    "Please reduce K or use the model without time effects or use marginal models.");
    const auto rule = glmm_random_effect_rule(sc);
    const auto theta = glmm_theta(sc.params, sc.design.periods(), sc.time_effects);
    GlmmInformation out;
    out.information = Eigen::MatrixXd::Zero(theta.size(), theta.size());
    for (const auto& row : sc.design.distinct_sequences()) {
        check_deadline(sc.deadline);
        const ClusterModel model(row.allocation, theta, sc.K, sc.link, rule, sc.time_effects,
                                 sc.collapse);
        const auto mom = model.expected_moments(sc.threads, sc.deadline);
        out.information += row.count * mom.information;
        out.max_normalisation_error =
            std::max(out.max_normalisation_error, std::abs(mom.total_probability - 1.0));
        out.max_mean_score = std::max(out.max_mean_score, mom.mean_score.cwiseAbs().maxCoeff());
    }
    return out;
}

double var_beta_conditional(const GlmmScenario& sc) {
    const auto info = expected_information(sc).information;
    const Eigen::Index beta_index = info.rows() - 2;
    if (sc.params.tau == 0.0) {
        // No random effect: the tau coordinate carries no information.
        const Eigen::Index n = info.rows() - 1;
        return inverse_diagonal_entry(info.topLeftCorner(n, n), beta_index);
    }
    return inverse_diagonal_entry(info, beta_index);
}

}  // namespace swdpwr

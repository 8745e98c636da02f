#include "swdpwr/oracle.hpp"

#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "swdpwr/normal.hpp"

namespace swdpwr::oracle {

namespace {

/// Runs f(c) for c in [0, chunks) on a small pool; results stay in chunk order.
template <class Result, class F>
std::vector<Result> run_chunks(long chunks, int threads, F f) {
    std::vector<Result> out(static_cast<std::size_t>(chunks));
    if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = static_cast<int>(std::min<long>(threads, chunks));
    std::atomic<long> next{0};
    auto worker = [&] {
        for (long c; (c = next.fetch_add(1)) < chunks;) out[c] = f(c);
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return out;
}

std::mt19937_64 chunk_engine(std::uint64_t seed, long chunk) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(chunk))));
}

/// Uniform on the open interval (0, 1).
double uniform(std::mt19937_64& g) { return ((g() >> 11) + 0.5) * 0x1.0p-53; }

double standard_normal(std::mt19937_64& g) { return normal_quantile(uniform(g)); }

double truncated_standard_normal(std::mt19937_64& g, double lower, double upper) {
    const double a = std::isfinite(lower) ? normal_cdf(lower) : 0.0;
    const double b = std::isfinite(upper) ? normal_cdf(upper) : 1.0;
    const double u = normal_quantile(a + uniform(g) * (b - a));
    return std::clamp(u, lower, upper);
}

int binomial(std::mt19937_64& g, int n, double p) {
    if (p > 0.5) return n - binomial(g, n, 1.0 - p);
    const double u = uniform(g);
    const double ratio = p / (1.0 - p);
    double pmf = std::pow(1.0 - p, n);
    double cdf = pmf;
    int k = 0;
    while (cdf < u && k < n) {
        pmf *= ratio * (n - k) / (k + 1);
        ++k;
        cdf += pmf;
    }
    return k;
}

int parameter_count(int J, bool time_effects) { return time_effects ? J + 1 : 2; }

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

ContinuousScenario continuous_scenario(const NormalizedScenario& sc) {
    if (sc.family != Family::kGaussian)
        throw Error(codes::kRange, "The continuous oracle needs a gaussian scenario.");
    return {sc.design, sc.K, sc.sigma2, sc.alpha, sc.time_effects};
}

Eigen::MatrixXd dense_correlation(const ResolvedCorrelation& a, int J, int K) {
    const int n = J * K;
    Eigen::MatrixXd R(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const bool same_period = r / K == c / K;
            const bool same_person = r % K == c % K;
            if (r == c) R(r, c) = 1.0;
            else if (same_period) R(r, c) = a.alpha0;
            else if (same_person) R(r, c) = a.alpha2;
            else R(r, c) = a.alpha1;
        }
    return R;
}

double dense_continuous_variance(const ContinuousScenario& sc) {
    const int J = sc.design.periods();
    const int K = sc.K;
    if (static_cast<long>(J) * K > 2000)
        throw Error(codes::kRange, "Dense check limited to J*K <= 2000.");
    const int P = parameter_count(J, sc.time_effects);
    const Eigen::MatrixXd V = sc.sigma2 * dense_correlation(sc.alpha, J, K);
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(V);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
        throw Error(codes::kSingular, "Dense covariance is not positive definite.");

    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(P, P);
    for (const auto& row : sc.design.distinct_sequences()) {
        Eigen::MatrixXd Z(J * K, P);
        for (int j = 0; j < J; ++j) {
            const auto z = regression_row(j, row.allocation[j], J, sc.time_effects);
            for (int k = 0; k < K; ++k)
                for (int a = 0; a < P; ++a) Z(j * K + k, a) = z[a];
        }
        info += row.count * (Z.transpose() * ldlt.solve(Z));
    }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
    if (!lu.isInvertible()) throw Error(codes::kSingular, "Dense information is singular.");
    return lu.inverse()(P - 1, P - 1);
}

std::optional<double> hussey_hughes_variance(const ContinuousScenario& sc) {
    const auto& a = sc.alpha;
    if (a.alpha0 != a.alpha1 || a.alpha1 != a.alpha2) return std::nullopt;
    const auto s = design_summaries(sc.design);
    const double I = s.I, J = s.J, U = s.U, W = s.W, V = s.V;
    const double s2 = (1.0 - a.alpha0) * sc.sigma2 / sc.K;  // variance of a cell mean
    const double t2 = a.alpha0 * sc.sigma2;                 // between-cluster variance
    if (sc.time_effects)
        return I * s2 * (s2 + J * t2) /
               ((I * U - W) * s2 + (U * U + I * J * U - J * W - I * V) * t2);
    return I * J * (s2 + J * t2) * s2 / ((I * J * U - U * U) * s2 + I * J * (J * U - V) * t2);
}

DenseCrosscheck dense_variance_crosscheck(const ContinuousScenario& sc) {
    DenseCrosscheck out;
    out.closed_form =
        var_beta_continuous(design_summaries(sc.design), sc.K, sc.sigma2, sc.alpha, sc.time_effects);
    out.dense = dense_continuous_variance(sc);
    out.hussey_hughes = hussey_hughes_variance(sc);
    return out;
}

double dense_gee_variance(const GeeScenario& sc) {
    const int J = sc.design.periods();
    const int K = sc.K;
    if (static_cast<long>(J) * K > 2000)
        throw Error(codes::kRange, "Dense check limited to J*K <= 2000.");
    const int P = parameter_count(J, sc.time_effects);
    const LinkFunction g{sc.link};
    const auto gamma = time_effect_vector(sc.time_effects ? sc.params.gammaJ : 0.0, J);
    const Eigen::MatrixXd R = dense_correlation(sc.alpha, J, K);

    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(P, P);
    for (const auto& row : sc.design.distinct_sequences()) {
        Eigen::MatrixXd D(J * K, P);
        Eigen::VectorXd sd(J * K);
        for (int j = 0; j < J; ++j) {
            const double eta = sc.params.mu + gamma[j] + row.allocation[j] * sc.params.beta;
            const double p = g.inverse(eta);
            const auto z = regression_row(j, row.allocation[j], J, sc.time_effects);
            for (int k = 0; k < K; ++k) {
                sd(j * K + k) = std::sqrt(p * (1.0 - p));
                for (int a = 0; a < P; ++a) D(j * K + k, a) = g.inverse_derivative(eta) * z[a];
            }
        }
        const Eigen::MatrixXd V = sd.asDiagonal() * R * sd.asDiagonal();
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(V);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
            throw Error(codes::kSingular, "Dense working covariance is not positive definite.");
        info += row.count * (D.transpose() * ldlt.solve(D));
    }
    return Eigen::FullPivLU<Eigen::MatrixXd>(info).inverse()(P - 1, P - 1);
}

McInformation mc_score_information(const GlmmScenario& sc, long replicates, std::uint64_t seed,
                                   int threads) {
    if (replicates < 1) throw Error(codes::kRange, "At least one replicate is required.");
    const int J = sc.design.periods();
    const auto theta = glmm_theta(sc.params, J, sc.time_effects);
    const auto rule = glmm_random_effect_rule(sc);
    const auto sequences = sc.design.distinct_sequences();
    std::vector<ClusterModel> models;
    for (const auto& row : sequences)
        models.emplace_back(row.allocation, theta, sc.K, sc.link, rule, sc.time_effects, false);
    const int P = models.front().parameters();

    struct Sums {
        Eigen::MatrixXd s1, s2;
    };
    const long chunks = (replicates + kReplicatesPerChunk - 1) / kReplicatesPerChunk;
    auto parts = run_chunks<Sums>(chunks, threads, [&](long c) {
        auto gen = chunk_engine(seed, c);
        Sums acc{Eigen::MatrixXd::Zero(P, P), Eigen::MatrixXd::Zero(P, P)};
        const long n = std::min(kReplicatesPerChunk, replicates - c * kReplicatesPerChunk);
        std::vector<int> counts(J);
        std::vector<double> score(P);
        Eigen::VectorXd total(P);
        for (long r = 0; r < n; ++r) {
            total.setZero();
            for (std::size_t s = 0; s < sequences.size(); ++s)
                for (int member = 0; member < sequences[s].count; ++member) {
                    const double u = sc.params.tau == 0.0
                                         ? 0.0
                                         : truncated_standard_normal(gen, rule.lower, rule.upper);
                    for (int j = 0; j < J; ++j)
                        counts[j] = binomial(gen, sc.K, models[s].cell_probability(j, u));
                    models[s].log_probability_and_score(counts, score);
                    for (int a = 0; a < P; ++a) total(a) += score[a];
                }
            const Eigen::MatrixXd outer = total * total.transpose();
            acc.s1 += outer;
            acc.s2 += outer.cwiseProduct(outer);
        }
        return acc;
    });

    Eigen::MatrixXd s1 = Eigen::MatrixXd::Zero(P, P), s2 = Eigen::MatrixXd::Zero(P, P);
    for (const auto& p : parts) {
        s1 += p.s1;
        s2 += p.s2;
    }
    McInformation out;
    out.replicates = replicates;
    const double n = static_cast<double>(replicates);
    out.mean = s1 / n;
    const Eigen::MatrixXd var = (s2 / n - out.mean.cwiseProduct(out.mean)) * (n / std::max(1.0, n - 1.0));
    out.standard_error = (var.cwiseMax(0.0) / n).cwiseSqrt();
    return out;
}

VarianceComponents variance_components(const ResolvedCorrelation& a, double sigma2) {
    VarianceComponents v;
    v.cluster = a.alpha1 * sigma2;
    v.period = (a.alpha0 - a.alpha1) * sigma2;
    v.individual = (a.alpha2 - a.alpha1) * sigma2;
    v.residual = (1.0 - a.alpha0 - a.alpha2 + a.alpha1) * sigma2;
    if (v.cluster < 0 || v.period < 0 || v.individual < 0 || v.residual < 0)
        throw Error(codes::kRange,
                    "Correlations do not decompose into non-negative variance components.");
    return v;
}

ContinuousMc mc_empirical_power_continuous(const ContinuousScenario& sc, double beta,
                                           double type_i_error, long replicates,
                                           std::uint64_t seed, int threads) {
    if (replicates < 2) throw Error(codes::kRange, "At least two replicates are required.");
    const auto comp = variance_components(sc.alpha, sc.sigma2);
    const int J = sc.design.periods();
    const int K = sc.K;
    const int P = parameter_count(J, sc.time_effects);
    const BlockInverse rinv(block_eigenvalues(sc.alpha, J, K), J, K);
    const auto sequences = sc.design.distinct_sequences();

    // Period-level regression columns per sequence and the GLS information.
    std::vector<std::vector<std::vector<double>>> cols;
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(P, P);
    for (const auto& row : sequences) {
        std::vector<std::vector<double>> c(P, std::vector<double>(J));
        for (int j = 0; j < J; ++j) {
            const auto z = regression_row(j, row.allocation[j], J, sc.time_effects);
            for (int a = 0; a < P; ++a) c[a][j] = z[a];
        }
        for (int a = 0; a < P; ++a)
            for (int b = 0; b < P; ++b) info(a, b) += row.count * rinv.period_form(c[a], c[b]) / sc.sigma2;
        cols.push_back(std::move(c));
    }
    const Eigen::MatrixXd cov = Eigen::FullPivLU<Eigen::MatrixXd>(info).inverse();
    const Eigen::VectorXd gls_row = cov.row(P - 1).transpose();

    ContinuousMc out;
    out.replicates = replicates;
    out.analytic_variance = cov(P - 1, P - 1);
    out.analytic_power = wald_power(beta, out.analytic_variance, type_i_error);
    const double crit = normal_quantile(1.0 - type_i_error / 2.0) * std::sqrt(out.analytic_variance);

    struct Sums {
        double sum = 0, sum2 = 0;
        long reject = 0;
    };
    const long chunks = (replicates + kReplicatesPerChunk - 1) / kReplicatesPerChunk;
    auto parts = run_chunks<Sums>(chunks, threads, [&](long c) {
        auto gen = chunk_engine(seed, c);
        Sums acc;
        const long n = std::min(kReplicatesPerChunk, replicates - c * kReplicatesPerChunk);
        std::vector<double> y(static_cast<std::size_t>(J) * K), w(y.size()), period_sum(J);
        std::vector<double> pi(K);
        Eigen::VectorXd rhs(P);
        const double sb = std::sqrt(comp.cluster), sc_ = std::sqrt(comp.period),
                     sp = std::sqrt(comp.individual), se = std::sqrt(comp.residual);
        for (long r = 0; r < n; ++r) {
            rhs.setZero();
            for (std::size_t s = 0; s < sequences.size(); ++s)
                for (int member = 0; member < sequences[s].count; ++member) {
                    const double b = sb * standard_normal(gen);
                    for (int k = 0; k < K; ++k) pi[k] = sp * standard_normal(gen);
                    for (int j = 0; j < J; ++j) {
                        const double cj = sc_ * standard_normal(gen);
                        const double mean = beta * sequences[s].allocation[j];
                        for (int k = 0; k < K; ++k)
                            y[j * K + k] = mean + b + cj + pi[k] + se * standard_normal(gen);
                    }
                    rinv.apply(y, w);
                    for (int j = 0; j < J; ++j) {
                        double t = 0;
                        for (int k = 0; k < K; ++k) t += w[j * K + k];
                        period_sum[j] = t;
                    }
                    for (int a = 0; a < P; ++a) {
                        double t = 0;
                        for (int j = 0; j < J; ++j) t += cols[s][a][j] * period_sum[j];
                        rhs(a) += t / sc.sigma2;
                    }
                }
            const double est = gls_row.dot(rhs);
            acc.sum += est;
            acc.sum2 += est * est;
            acc.reject += std::abs(est) > crit;
        }
        return acc;
    });

    Sums total;
    for (const auto& p : parts) {
        total.sum += p.sum;
        total.sum2 += p.sum2;
        total.reject += p.reject;
    }
    const double n = static_cast<double>(replicates);
    out.mean_beta = total.sum / n;
    out.empirical_variance = (total.sum2 - n * out.mean_beta * out.mean_beta) / (n - 1.0);
    out.rejection_rate = total.reject / n;
    return out;
}

}  // namespace swdpwr::oracle

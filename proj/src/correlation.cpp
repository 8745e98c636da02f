#include "swdpwr/correlation.hpp"

#include <algorithm>
#include <cmath>

namespace swdpwr {
namespace {

constexpr double kPdTolerance = 1e-12;

const char* const kPdMessage =
    "Correlation matrix R is not positive definite. Please check whether the between-period "
    "correlation is unrealistically larger than the within-period correlation or the "
    "within-individual correlation.";

const char* const kQaqishMessage =
    "Correlation parameters do not satisfy the restrictions of Qaqish (2003). Please check "
    "whether it is possible to reduce the effect size, or make adjustments to the intraclass "
    "correlations.";

}  // namespace

double BlockEigen::trace() const {
    double t = 0.0;
    for (int i = 0; i < 4; ++i) t += static_cast<double>(multiplicity[i]) * lambda[i];
    return t;
}

double BlockEigen::log_determinant() const {
    double d = 0.0;
    for (int i = 0; i < 4; ++i)
        if (multiplicity[i] > 0) d += static_cast<double>(multiplicity[i]) * std::log(lambda[i]);
    return d;
}

bool BlockEigen::positive_definite() const {
    for (int i = 0; i < 4; ++i)
        if (multiplicity[i] > 0 && !(lambda[i] > kPdTolerance)) return false;
    return true;
}

ResolvedCorrelation resolve_correlations(const CorrelationParams& params, StudyType type,
                                         ModelKind model, Family family, Warnings& warnings) {
    ResolvedCorrelation r{params.alpha0, params.alpha1, params.alpha2.value_or(params.alpha1)};
    if (model == ModelKind::kConditional && family == Family::kBinomial && r.alpha1 != r.alpha0) {
        warnings.push_back({codes::kWarnA0A1,
                            "alpha0 = alpha1 is required for the conditional model with binary "
                            "outcomes; the value of alpha1 is set to the value of alpha0."});
        r.alpha1 = r.alpha0;
    }
    if (type == StudyType::kCrossSectional) {
        if (params.alpha2)
            warnings.push_back({codes::kWarnAlpha2,
                                "alpha2 is undefined for cross-sectional designs and should not be "
                                "an input; the supplied value is ignored."});
        r.alpha2 = r.alpha1;
    }
    return r;
}

BlockEigen block_spectrum(const ResolvedCorrelation& a, int J, int K) {
    BlockEigen e;
    const double Jm1 = J - 1.0;
    const double Km1 = K - 1.0;
    e.lambda[0] = 1.0 - a.alpha0 + a.alpha1 - a.alpha2;
    e.lambda[1] = 1.0 - a.alpha0 - Jm1 * a.alpha1 + Jm1 * a.alpha2;
    e.lambda[2] = 1.0 + Km1 * (a.alpha0 - a.alpha1) - a.alpha2;
    e.lambda[3] = 1.0 + Km1 * a.alpha0 + Jm1 * Km1 * a.alpha1 + Jm1 * a.alpha2;
    e.multiplicity = {static_cast<long long>(J - 1) * (K - 1), K - 1LL, J - 1LL, 1};
    return e;
}

BlockEigen block_eigenvalues(const ResolvedCorrelation& alpha, int J, int K) {
    if (J < 2 || K < 1) throw Error(codes::kRange, "Block correlation needs J >= 2 and K >= 1.");
    auto e = block_spectrum(alpha, J, K);
    if (!e.positive_definite()) throw Error(codes::kPositiveDefinite, kPdMessage);
    return e;
}

BlockInverse::BlockInverse(const BlockEigen& eig, int J, int K) : J_(J), K_(K) {
    if (!eig.positive_definite()) throw Error(codes::kPositiveDefinite, kPdMessage);
    for (int i = 0; i < 4; ++i) coef_[i] = 1.0 / eig.lambda[i];
}

void BlockInverse::apply(std::span<const double> x, std::span<double> y) const {
    const int J = J_;
    const int K = K_;
    std::vector<double> period_mean(J, 0.0);
    std::vector<double> indiv_mean(K, 0.0);
    double grand = 0.0;
    for (int j = 0; j < J; ++j)
        for (int k = 0; k < K; ++k) {
            const double v = x[j * K + k];
            period_mean[j] += v;
            indiv_mean[k] += v;
            grand += v;
        }
    for (auto& v : period_mean) v /= K;
    for (auto& v : indiv_mean) v /= J;
    grand /= static_cast<double>(J) * K;

    // x = r + (pm - g) + (im - g) + g with r the doubly centred residual.
    const auto& c = coef_;
    for (int j = 0; j < J; ++j)
        for (int k = 0; k < K; ++k) {
            const double pm = period_mean[j] - grand;
            const double im = indiv_mean[k] - grand;
            const double resid = x[j * K + k] - pm - im - grand;
            y[j * K + k] = c[0] * resid + c[1] * im + c[2] * pm + c[3] * grand;
        }
}

double BlockInverse::period_form(std::span<const double> u, std::span<const double> w) const {
    double uw = 0.0;
    double su = 0.0;
    double sw = 0.0;
    for (int j = 0; j < J_; ++j) {
        uw += u[j] * w[j];
        su += u[j];
        sw += w[j];
    }
    const double grand = su * sw / J_;
    return K_ * (coef_[2] * (uw - grand) + coef_[3] * grand);
}

void qaqish_bounds_check(const ResolvedCorrelation& alpha, std::span<const SequenceMeans> sequences,
                         StudyType type) {
    auto within = [](double mi, double mj, double rho) {
        const double second = mi * mj + rho * std::sqrt(mi * (1.0 - mi) * mj * (1.0 - mj));
        const double lower = std::max(0.0, mi + mj - 1.0);
        const double upper = std::min(mi, mj);
        constexpr double slack = 1e-12;
        return second >= lower - slack && second <= upper + slack;
    };
    for (const auto& seq : sequences) {
        const auto& m = seq.mean;
        for (std::size_t j = 0; j < m.size(); ++j) {
            if (!within(m[j], m[j], alpha.alpha0))
                throw Error(codes::kQaqish, kQaqishMessage);
            for (std::size_t l = j + 1; l < m.size(); ++l) {
                if (!within(m[j], m[l], alpha.alpha1)) throw Error(codes::kQaqish, kQaqishMessage);
                if (type == StudyType::kCohort && !within(m[j], m[l], alpha.alpha2))
                    throw Error(codes::kQaqish, kQaqishMessage);
            }
        }
    }
}

}  // namespace swdpwr

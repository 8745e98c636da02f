#pragma once

#include <array>
#include <span>
#include <optional>
#include <vector>

#include "swdpwr/design.hpp"
#include "swdpwr/error.hpp"

namespace swdpwr {

enum class Family { kBinomial, kGaussian };
enum class ModelKind { kConditional, kMarginal };

/// Within-period (alpha0), between-period (alpha1) and within-individual
/// (alpha2) intraclass correlations. alpha2 is unset for cross-sectional input.
struct CorrelationParams {
    double alpha0 = 0.0;
    double alpha1 = 0.0;
    std::optional<double> alpha2;
};

struct ResolvedCorrelation {
    double alpha0 = 0.0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;

    bool operator==(const ResolvedCorrelation&) const = default;
};

/// Spectrum of the JK x JK block exchangeable correlation matrix. Eigenspaces,
/// in order: residual, individual-mean, period-mean, grand-mean.
struct BlockEigen {
    std::array<double, 4> lambda{};
    std::array<long long, 4> multiplicity{};

    double trace() const;
    double log_determinant() const;
    bool positive_definite() const;
};

ResolvedCorrelation resolve_correlations(const CorrelationParams& params, StudyType type,
                                         ModelKind model, Family family, Warnings& warnings);

/// Throws E-PD when any eigenvalue is <= 1e-12.
BlockEigen block_eigenvalues(const ResolvedCorrelation& alpha, int J, int K);

/// Same as block_eigenvalues but never throws.
BlockEigen block_spectrum(const ResolvedCorrelation& alpha, int J, int K);

/// R^{-1} = sum_i (1/lambda_i) P_i over the four eigenprojectors.
class BlockInverse {
public:
    BlockInverse(const BlockEigen& eig, int J, int K);

    int periods() const noexcept { return J_; }
    int cluster_period_size() const noexcept { return K_; }

    /// Projector coefficients 1/lambda_i, same order as BlockEigen.
    const std::array<double, 4>& coefficients() const noexcept { return coef_; }

    /// y = R^{-1} x for a period-major vector (index j*K + k), O(JK).
    void apply(std::span<const double> x, std::span<double> y) const;

    /// (u kron 1_K)' R^{-1} (w kron 1_K) for period-level vectors u, w.
    double period_form(std::span<const double> u, std::span<const double> w) const;

private:
    int J_;
    int K_;
    std::array<double, 4> coef_{};
};

/// Per-period marginal means of one treatment sequence.
struct SequenceMeans {
    std::vector<double> mean;
};

/// Fréchet-type restrictions on pairwise second moments of binary outcomes.
/// Throws E-QAQISH on violation.
void qaqish_bounds_check(const ResolvedCorrelation& alpha, std::span<const SequenceMeans> sequences,
                         StudyType type);

}  // namespace swdpwr

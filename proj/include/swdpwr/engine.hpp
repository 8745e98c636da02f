#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "swdpwr/correlation.hpp"
#include "swdpwr/design.hpp"
#include "swdpwr/error.hpp"
#include "swdpwr/glmm_variance.hpp"
#include "swdpwr/links.hpp"

namespace swdpwr {

/// User-facing argument surface. Enumerations stay as strings so unknown
/// values are reported by validation rather than at parse time.
struct ScenarioSpec {
    int K = 0;
    Design design;
    std::string family = "binomial";
    std::string model = "conditional";
    std::string link = "identity";
    std::string type = "cross-sectional";
    std::optional<double> meanresponse_start;
    std::optional<double> meanresponse_end0;
    std::optional<double> meanresponse_end1;
    std::optional<double> effectsize_beta;
    std::optional<double> sigma2;
    std::optional<double> typeIerror;
    std::optional<double> alpha0;
    std::optional<double> alpha1;
    std::optional<double> alpha2;
};

struct ComputeOptions {
    int quadrature_nodes = kDefaultQuadratureNodes;
    double enumeration_budget = kDefaultEnumerationBudget;
    int threads = 0;
    std::optional<std::chrono::steady_clock::time_point> deadline;
};

/// Fully resolved scenario, ready for a variance engine.
struct NormalizedScenario {
    int K = 0;
    Design design;
    Family family = Family::kBinomial;
    ModelKind model = ModelKind::kConditional;
    LinkKind link = LinkKind::kIdentity;
    StudyType type = StudyType::kCrossSectional;
    bool time_effects = false;
    IdentifiedParams params;
    bool has_baseline = false;  // false for continuous input given by effect size alone
    double sigma2 = 0.0;
    double type_i_error = 0.05;
    ResolvedCorrelation alpha;
    Warnings warnings;
};

struct PowerReport {
    int I = 0;
    int J = 0;
    int K = 0;
    long long total_sample_size = 0;
    Family family = Family::kBinomial;
    ModelKind model = ModelKind::kConditional;
    LinkKind link = LinkKind::kIdentity;
    StudyType type = StudyType::kCrossSectional;
    bool time_effects = false;
    std::optional<double> mu;
    double beta = 0.0;
    std::optional<double> gammaJ;
    double tau = 0.0;
    ResolvedCorrelation alpha;
    double type_i_error = 0.05;
    double var_beta = 0.0;
    double power = 0.0;
    Warnings warnings;

    bool operator==(const PowerReport&) const = default;
};

const char* to_string(Family f);
const char* to_string(ModelKind m);
const char* to_string(LinkKind l);
const char* to_string(StudyType t);

/// Applies defaults, the warning rules and every range / feasibility check.
NormalizedScenario validate_scenario(const ScenarioSpec& spec, const ComputeOptions& options = {});

/// Var(beta_hat) for a validated scenario.
double variance_of_beta(const NormalizedScenario& scenario, const ComputeOptions& options = {});

PowerReport compute_power(const ScenarioSpec& spec, const ComputeOptions& options = {});

enum class SweepParameter { kRiskDifference, kEffectSizeBeta, kK, kTypeIError, kAlpha0, kAlpha1, kAlpha2 };

/// Accepts "risk-difference" (alias "effectsize"), "effectsize-beta", "K",
/// "typeIerror", "alpha0", "alpha1", "alpha2". Throws E-ENUM otherwise.
SweepParameter parse_sweep_parameter(const std::string& name);
const char* to_string(SweepParameter p);

/// `spec` with one parameter replaced by `value`.
ScenarioSpec apply_sweep_value(const ScenarioSpec& spec, SweepParameter param, double value);

struct SweepPoint {
    double value = 0.0;
    std::optional<PowerReport> report;
    std::optional<Error> error;
};

/// One entry per grid value; per-point errors are captured, not thrown.
std::vector<SweepPoint> sweep_power(const ScenarioSpec& spec, SweepParameter param,
                                    const std::vector<double>& grid,
                                    const ComputeOptions& options = {});

}  // namespace swdpwr

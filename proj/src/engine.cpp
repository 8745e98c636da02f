#include "swdpwr/engine.hpp"

#include <algorithm>
#include <cmath>

#include "swdpwr/gee_variance.hpp"
#include "swdpwr/normal.hpp"

namespace swdpwr {

const char* to_string(Family f) { return f == Family::kBinomial ? "binomial" : "gaussian"; }
const char* to_string(ModelKind m) {
    return m == ModelKind::kConditional ? "conditional" : "marginal";
}
const char* to_string(LinkKind l) {
    switch (l) {
        case LinkKind::kIdentity: return "identity";
        case LinkKind::kLog: return "log";
        case LinkKind::kLogit: return "logit";
    }
    return "identity";
}
const char* to_string(StudyType t) {
    return t == StudyType::kCrossSectional ? "cross-sectional" : "cohort";
}

namespace {

Error enum_error(const std::string& what, const std::string& value, const std::string& allowed) {
    return Error(codes::kEnum, "Unknown " + what + " \"" + value + "\"; expected " + allowed + ".");
}

Family parse_family(const std::string& s) {
    if (s == "binomial") return Family::kBinomial;
    if (s == "gaussian") return Family::kGaussian;
    throw enum_error("family", s, "\"binomial\" or \"gaussian\"");
}

ModelKind parse_model(const std::string& s) {
    if (s == "conditional") return ModelKind::kConditional;
    if (s == "marginal") return ModelKind::kMarginal;
    throw enum_error("model", s, "\"conditional\" or \"marginal\"");
}

LinkKind parse_link(const std::string& s) {
    if (s == "identity") return LinkKind::kIdentity;
    if (s == "log") return LinkKind::kLog;
    if (s == "logit") return LinkKind::kLogit;
    throw enum_error("link", s, "\"identity\", \"log\" or \"logit\"");
}

StudyType parse_type(const std::string& s) {
    if (s == "cross-sectional") return StudyType::kCrossSectional;
    if (s == "cohort") return StudyType::kCohort;
    throw enum_error("type", s, "\"cross-sectional\" or \"cohort\"");
}

const char* const kProbHigh =
    "Violation of valid probability, given input parameters: max(meanresponse_start, "
    "meanresponse_end0, meanresponse_end1)>1. Please check whether any of these values are out "
    "of range and revise one or more of them.";
const char* const kProbLow =
    "Violation of valid probability, given input parameters: min(meanresponse_start, "
    "meanresponse_end0, meanresponse_end1)<0. Please check whether any of these values are out "
    "of range and revise one or more of them.";

void check_rate(double p) {
    if (p >= 1.0) throw Error(codes::kProb, kProbHigh);
    if (p <= 0.0) throw Error(codes::kProb, kProbLow);
}

/// Marginal means of the conditional model, per period of each distinct sequence.
std::vector<SequenceMeans> conditional_cell_means(const NormalizedScenario& sc,
                                                  const RandomEffectRule& rule) {
    const int J = sc.design.periods();
    const auto gamma = time_effect_vector(sc.time_effects ? sc.params.gammaJ : 0.0, J);
    std::vector<SequenceMeans> out;
    for (const auto& row : sc.design.distinct_sequences()) {
        SequenceMeans s;
        for (int j = 0; j < J; ++j) {
            const double eta = sc.params.mu + gamma[j] + row.allocation[j] * sc.params.beta;
            if (sc.link == LinkKind::kIdentity) check_rate(eta);
            if (sc.link == LinkKind::kLog && eta >= 0.0) throw Error(codes::kProb, kProbHigh);
            const double p = conditional_moments(eta, sc.params.tau, sc.link, rule).mean;
            check_rate(p);
            s.mean.push_back(p);
        }
        out.push_back(std::move(s));
    }
    return out;
}

GlmmScenario glmm_scenario(const NormalizedScenario& sc, const ComputeOptions& options) {
    GlmmScenario g;
    g.design = sc.design;
    g.K = sc.K;
    g.link = sc.link;
    g.params = sc.params;
    g.time_effects = sc.time_effects;
    g.quadrature_nodes = options.quadrature_nodes;
    g.enumeration_budget = options.enumeration_budget;
    g.threads = options.threads;
    g.deadline = options.deadline;
    return g;
}

}  // namespace

NormalizedScenario validate_scenario(const ScenarioSpec& spec, const ComputeOptions& options) {
    NormalizedScenario sc;
    sc.family = parse_family(spec.family);
    sc.model = parse_model(spec.model);
    sc.link = parse_link(spec.link);
    sc.type = parse_type(spec.type);
    auto& warnings = sc.warnings;

    if (spec.K < 1) throw Error(codes::kMissing, "K (individuals per cluster-period) must be a positive integer.");
    sc.K = spec.K;
    if (spec.design.rows().empty()) throw Error(codes::kMissing, "A study design is required.");
    sc.design = spec.design;
    if (sc.design.all_control() || sc.design.all_treated())
        throw Error(codes::kDesign,
                    "The design must contain both control and intervention cluster-periods.");
    if (!sc.design.is_stepped())
        warnings.push_back({codes::kWarnShape,
                            "Some clusters switch from intervention back to control; the design is "
                            "not a stepped wedge, power is computed for the allocation as given."});

    if (sc.family == Family::kBinomial && sc.model == ModelKind::kConditional &&
        sc.type == StudyType::kCohort) {
        warnings.push_back({codes::kWarnCohort,
                            "The conditional model with binary outcomes only allows cross-sectional "
                            "designs; type=\"cross-sectional\" will be forced."});
        sc.type = StudyType::kCrossSectional;
    }

    const double type_i = spec.typeIerror.value_or(0.05);
    if (type_i >= 1.0)
        throw Error(codes::kAlpha,
                    "Type I error provided is larger than 1, it must be between 0 and 1, and is "
                    "usually 0.05.");
    if (type_i <= 0.0)
        throw Error(codes::kAlpha,
                    "Type I error provided is not positive, it must be between 0 and 1, and is "
                    "usually 0.05.");
    sc.type_i_error = type_i;

    CorrelationParams cp;
    cp.alpha0 = spec.alpha0.value_or(0.1);
    cp.alpha1 = spec.alpha1.value_or(cp.alpha0 / 2.0);
    cp.alpha2 = spec.alpha2;
    const double amax = std::max({cp.alpha0, cp.alpha1, cp.alpha2.value_or(0.0)});
    const double amin = std::min({cp.alpha0, cp.alpha1, cp.alpha2.value_or(0.0)});
    if (amax > 1.0)
        throw Error(codes::kIccRange,
                    "Violate range of intraclass correlations: max(alpha0,alpha1,alpha2)>1. Please "
                    "correct the values of correlation parameters, they must be between 0 and 1.");
    if (amin < 0.0)
        throw Error(codes::kIccRange,
                    "Violate range of intraclass correlations: min(alpha0,alpha1,alpha2)<0. Please "
                    "correct the values of correlation parameters, they must be between 0 and 1.");
    if (sc.type == StudyType::kCohort && !cp.alpha2)
        throw Error(codes::kMissing, "alpha2 (within-individual correlation) is required for cohort designs.");

    sc.alpha = resolve_correlations(cp, sc.type, sc.model, sc.family, warnings);

    if (sc.family == Family::kBinomial && spec.sigma2 && *spec.sigma2 != 0.0)
        warnings.push_back({codes::kWarnSigma2,
                            "The marginal variance sigma2 should not be specified for binary "
                            "outcomes; the supplied value is ignored."});
    if (sc.family == Family::kGaussian && sc.link != LinkKind::kIdentity) {
        warnings.push_back({codes::kWarnLink,
                            "Continuous outcomes are analysed with the identity link; the link "
                            "function is forced to be identity."});
        sc.link = LinkKind::kIdentity;
    }

    if (spec.meanresponse_end1 && spec.effectsize_beta)
        throw Error(codes::kContradict,
                    "meanresponse_start, meanresponse_end0, meanresponse_end1 and effectsize_beta "
                    "cannot be supplied at the same time. Please supply either meanresponse_end1 "
                    "or effectsize_beta.");

    if (sc.family == Family::kGaussian) {
        if (!spec.sigma2 || !(*spec.sigma2 > 0.0))
            throw Error(codes::kMissing,
                        "sigma2 (marginal variance of the outcome) must be positive for continuous "
                        "outcomes.");
        sc.sigma2 = *spec.sigma2;
        const auto start = spec.meanresponse_start;
        const auto end0 = spec.meanresponse_end0 ? spec.meanresponse_end0 : start;
        if (spec.meanresponse_end0 && !start)
            throw Error(codes::kMissing,
                        "meanresponse_start is required when meanresponse_end0 is supplied.");
        if (spec.effectsize_beta) {
            sc.params.beta = *spec.effectsize_beta;
        } else if (spec.meanresponse_end1 && start) {
            sc.params.beta = *spec.meanresponse_end1 - *end0;
        } else {
            throw Error(codes::kMissing,
                        "Insufficient parameters: supply effectsize_beta, or meanresponse_start "
                        "and meanresponse_end1.");
        }
        sc.time_effects = start && end0 && *start != *end0;
        if (start) {
            sc.has_baseline = true;
            sc.params.mu = *start;
            sc.params.gammaJ = *end0 - *start;
        }
        block_eigenvalues(sc.alpha, sc.design.periods(), sc.K);
        return sc;
    }

    if (!spec.meanresponse_start)
        throw Error(codes::kMissing, "meanresponse_start is required for binary outcomes.");
    if (!spec.meanresponse_end1 && !spec.effectsize_beta)
        throw Error(codes::kMissing,
                    "Insufficient parameters: supply meanresponse_end1 or effectsize_beta.");
    ResponseRates rates;
    rates.start = *spec.meanresponse_start;
    rates.end0 = spec.meanresponse_end0.value_or(rates.start);
    rates.end1 = spec.meanresponse_end1;
    rates.beta = spec.effectsize_beta;
    for (double p : {rates.start, rates.end0, rates.end1.value_or(0.5)}) check_rate(p);
    sc.time_effects = rates.start != rates.end0;
    sc.has_baseline = true;

    block_eigenvalues(sc.alpha, sc.design.periods(), sc.K);

    if (sc.model == ModelKind::kMarginal) {
        sc.params = identify_marginal_params(rates, sc.link);
        const auto means = marginal_cell_means(sc.design, sc.link, sc.params, sc.time_effects);
        qaqish_bounds_check(sc.alpha, means, sc.type);
        return sc;
    }

    const auto rule = normal_rule(options.quadrature_nodes);
    sc.params = identify_conditional_params(rates, sc.alpha.alpha0, sc.link, rule);
    const auto means = conditional_cell_means(sc, rule);
    qaqish_bounds_check(sc.alpha, means, sc.type);
    if (sc.time_effects && sc.K > kMaxConditionalK)
        throw Error(codes::kK150,
                    "K should be at least smaller than 150 for this scenario as the running time is "
                    "too long with this K for the power calculation of binary outcomes under "
                    "conditional model with time effects. Please reduce K or use the model without "
                    "time effects or use marginal models.");
    if (enumeration_cost(glmm_scenario(sc, options)) > options.enumeration_budget)
        throw Error(codes::kBudget,
                    "The outcome enumeration for this scenario exceeds the computation budget. "
                    "Please reduce K or use the model without time effects or use marginal models.");
    return sc;
}

double variance_of_beta(const NormalizedScenario& sc, const ComputeOptions& options) {
    if (sc.family == Family::kGaussian)
        return var_beta_continuous(design_summaries(sc.design), sc.K, sc.sigma2, sc.alpha,
                                   sc.time_effects);
    if (sc.model == ModelKind::kMarginal) {
        GeeScenario g{sc.design, sc.K, sc.link, sc.params, sc.alpha, sc.time_effects};
        return var_beta_binary_marginal(g);
    }
    return var_beta_conditional(glmm_scenario(sc, options));
}

PowerReport compute_power(const ScenarioSpec& spec, const ComputeOptions& options) {
    const auto sc = validate_scenario(spec, options);
    PowerReport r;
    r.var_beta = variance_of_beta(sc, options);
    r.power = wald_power(sc.params.beta, r.var_beta, sc.type_i_error);
    r.I = sc.design.clusters();
    r.J = sc.design.periods();
    r.K = sc.K;
    r.total_sample_size = total_sample_size(sc.design, sc.K, sc.type);
    r.family = sc.family;
    r.model = sc.model;
    r.link = sc.link;
    r.type = sc.type;
    r.time_effects = sc.time_effects;
    if (sc.has_baseline) {
        r.mu = sc.params.mu;
        r.gammaJ = sc.time_effects ? sc.params.gammaJ : 0.0;
    }
    r.beta = sc.params.beta;
    r.tau = sc.params.tau;
    r.alpha = sc.alpha;
    r.type_i_error = sc.type_i_error;
    r.warnings = sc.warnings;
    return r;
}

SweepParameter parse_sweep_parameter(const std::string& name) {
    if (name == "risk-difference" || name == "effectsize") return SweepParameter::kRiskDifference;
    if (name == "effectsize-beta" || name == "effectsize_beta") return SweepParameter::kEffectSizeBeta;
    if (name == "K" || name == "k") return SweepParameter::kK;
    if (name == "typeIerror" || name == "type-i-error") return SweepParameter::kTypeIError;
    if (name == "alpha0") return SweepParameter::kAlpha0;
    if (name == "alpha1") return SweepParameter::kAlpha1;
    if (name == "alpha2") return SweepParameter::kAlpha2;
    throw Error(codes::kEnum, "Unknown sweep parameter \"" + name +
                                  "\"; expected risk-difference, effectsize-beta, K, typeIerror, "
                                  "alpha0, alpha1 or alpha2.");
}

const char* to_string(SweepParameter p) {
    switch (p) {
        case SweepParameter::kRiskDifference: return "risk-difference";
        case SweepParameter::kEffectSizeBeta: return "effectsize-beta";
        case SweepParameter::kK: return "K";
        case SweepParameter::kTypeIError: return "typeIerror";
        case SweepParameter::kAlpha0: return "alpha0";
        case SweepParameter::kAlpha1: return "alpha1";
        case SweepParameter::kAlpha2: return "alpha2";
    }
    return "";
}

ScenarioSpec apply_sweep_value(const ScenarioSpec& spec, SweepParameter param, double value) {
    ScenarioSpec s = spec;
    switch (param) {
        case SweepParameter::kRiskDifference:
            if (s.family == "gaussian" || !s.meanresponse_start) {
                s.effectsize_beta = value;
                s.meanresponse_end1.reset();
            } else {
                s.meanresponse_end1 = s.meanresponse_end0.value_or(*s.meanresponse_start) + value;
                s.effectsize_beta.reset();
            }
            break;
        case SweepParameter::kEffectSizeBeta:
            s.effectsize_beta = value;
            s.meanresponse_end1.reset();
            break;
        case SweepParameter::kK: s.K = static_cast<int>(std::lround(value)); break;
        case SweepParameter::kTypeIError: s.typeIerror = value; break;
        case SweepParameter::kAlpha0: s.alpha0 = value; break;
        case SweepParameter::kAlpha1: s.alpha1 = value; break;
        case SweepParameter::kAlpha2: s.alpha2 = value; break;
    }
    return s;
}

std::vector<SweepPoint> sweep_power(const ScenarioSpec& spec, SweepParameter param,
                                    const std::vector<double>& grid, const ComputeOptions& options) {
    std::vector<SweepPoint> out;
    out.reserve(grid.size());
    for (double v : grid) {
        SweepPoint point;
        point.value = v;
        try {
            point.report = compute_power(apply_sweep_value(spec, param, v), options);
        } catch (const Error& e) {
            if (e.code() == codes::kBudget && options.deadline &&
                std::chrono::steady_clock::now() > *options.deadline)
                throw;
            point.error = e;
        }
        out.push_back(std::move(point));
    }
    return out;
}

}  // namespace swdpwr

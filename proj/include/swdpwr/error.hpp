#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace swdpwr {

/// Stable machine-readable error codes. Human text lives in the exception.
namespace codes {
inline constexpr const char* kDesign = "E-DESIGN";
inline constexpr const char* kContradict = "E-CONTRADICT";
inline constexpr const char* kMissing = "E-MISSING";
inline constexpr const char* kIccRange = "E-ICC-RANGE";
inline constexpr const char* kAlpha = "E-ALPHA";
inline constexpr const char* kProb = "E-PROB";
inline constexpr const char* kPositiveDefinite = "E-PD";
inline constexpr const char* kQaqish = "E-QAQISH";
inline constexpr const char* kK150 = "E-K150";
inline constexpr const char* kBudget = "E-BUDGET";
inline constexpr const char* kSingular = "E-SINGULAR";
inline constexpr const char* kEnum = "E-ENUM";
inline constexpr const char* kRange = "E-RANGE";
inline constexpr const char* kRoot = "E-ROOT";
inline constexpr const char* kInput = "E-INPUT";

inline constexpr const char* kWarnShape = "W-SHAPE";
inline constexpr const char* kWarnCohort = "W-COHORT";
inline constexpr const char* kWarnA0A1 = "W-A0A1";
inline constexpr const char* kWarnAlpha2 = "W-ALPHA2";
inline constexpr const char* kWarnSigma2 = "W-SIGMA2";
inline constexpr const char* kWarnLink = "W-LINK";
}  // namespace codes

class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

struct Warning {
    std::string code;
    std::string message;

    bool operator==(const Warning&) const = default;
};

using Warnings = std::vector<Warning>;

}  // namespace swdpwr

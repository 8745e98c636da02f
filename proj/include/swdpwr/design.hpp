#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "swdpwr/error.hpp"

namespace swdpwr {

/// One treatment sequence shared by `count` clusters. Each flag is 0 (control)
/// or 1 (intervention) for one period.
struct DesignRow {
    int count = 1;
    std::vector<int> allocation;

    bool operator==(const DesignRow&) const = default;
};

enum class DesignFormat { kAuto, kTabular, kPlain };

enum class StudyType { kCrossSectional, kCohort };

/// Stepped-wedge allocation matrix, stored as rows with multiplicities.
class Design {
public:
    Design() = default;

    /// Validates the hard invariants (binary cells, equal row lengths, J >= 2,
    /// I >= 2, positive counts) and throws E-DESIGN otherwise.
    explicit Design(std::vector<DesignRow> rows);

    const std::vector<DesignRow>& rows() const noexcept { return rows_; }
    int clusters() const noexcept { return clusters_; }
    int periods() const noexcept { return periods_; }

    /// Rows with identical allocations merged, in order of first appearance.
    std::vector<DesignRow> distinct_sequences() const;

    /// Full I x J matrix, each row repeated `count` times.
    std::vector<std::vector<int>> expanded() const;

    /// True when every row is non-decreasing left to right.
    bool is_stepped() const;

    bool all_control() const;
    bool all_treated() const;

    bool operator==(const Design&) const = default;

private:
    std::vector<DesignRow> rows_;
    int clusters_ = 0;
    int periods_ = 0;
};

struct DesignSummary {
    std::int64_t U = 0;
    std::int64_t W = 0;
    std::int64_t V = 0;
    int I = 0;
    int J = 0;

    bool operator==(const DesignSummary&) const = default;
};

Design parse_design(std::string_view text, DesignFormat format = DesignFormat::kAuto);

/// Inverse of parse_design. Tabular output carries a `numofclusters time1 ...`
/// header; plain output expands multiplicities.
std::string render_design(const Design& design, DesignFormat format);

DesignSummary design_summaries(const Design& design);

std::int64_t total_sample_size(const Design& design, int K, StudyType type);

}  // namespace swdpwr

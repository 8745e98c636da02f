#include "swdpwr/design.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace swdpwr {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == ',')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != ',') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

bool parse_int(std::string_view s, long long& out) {
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

struct RawLine {
    int line_no;
    std::vector<std::string_view> fields;
};

}  // namespace

Design::Design(std::vector<DesignRow> rows) : rows_(std::move(rows)) {
    if (rows_.empty()) throw Error(codes::kDesign, "Design has no rows.");
    periods_ = static_cast<int>(rows_.front().allocation.size());
    if (periods_ < 2) throw Error(codes::kDesign, "Design needs at least 2 time periods.");
    long long total = 0;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        const auto& row = rows_[r];
        if (row.count <= 0)
            throw Error(codes::kDesign,
                        "Row " + std::to_string(r + 1) + " has a non-positive cluster count.");
        if (static_cast<int>(row.allocation.size()) != periods_)
            throw Error(codes::kDesign, "Row " + std::to_string(r + 1) +
                                            " has a different number of periods (ragged design).");
        for (int x : row.allocation)
            if (x != 0 && x != 1)
                throw Error(codes::kDesign, "Row " + std::to_string(r + 1) +
                                                " has a non-binary allocation cell.");
        total += row.count;
    }
    if (total < 2) throw Error(codes::kDesign, "Design needs at least 2 clusters.");
    clusters_ = static_cast<int>(total);
}

std::vector<DesignRow> Design::distinct_sequences() const {
    std::vector<DesignRow> out;
    for (const auto& row : rows_) {
        auto it = std::find_if(out.begin(), out.end(),
                               [&](const DesignRow& d) { return d.allocation == row.allocation; });
        if (it == out.end())
            out.push_back(row);
        else
            it->count += row.count;
    }
    return out;
}

std::vector<std::vector<int>> Design::expanded() const {
    std::vector<std::vector<int>> out;
    out.reserve(clusters_);
    for (const auto& row : rows_)
        for (int c = 0; c < row.count; ++c) out.push_back(row.allocation);
    return out;
}

bool Design::is_stepped() const {
    return std::all_of(rows_.begin(), rows_.end(), [](const DesignRow& r) {
        return std::is_sorted(r.allocation.begin(), r.allocation.end());
    });
}

bool Design::all_control() const {
    return std::all_of(rows_.begin(), rows_.end(), [](const DesignRow& r) {
        return std::all_of(r.allocation.begin(), r.allocation.end(), [](int x) { return x == 0; });
    });
}

bool Design::all_treated() const {
    return std::all_of(rows_.begin(), rows_.end(), [](const DesignRow& r) {
        return std::all_of(r.allocation.begin(), r.allocation.end(), [](int x) { return x == 1; });
    });
}

Design parse_design(std::string_view text, DesignFormat format) {
    std::vector<RawLine> lines;
    bool header = false;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        auto fields = split_fields(line);
        if (fields.empty()) continue;
        long long probe = 0;
        if (lines.empty() && !header && !parse_int(fields.front(), probe)) {
            header = true;  // e.g. "numofclusters time1 time2 time3"
            continue;
        }
        lines.push_back({line_no, std::move(fields)});
    }
    if (lines.empty()) throw Error(codes::kDesign, "Design input is empty.");

    if (format == DesignFormat::kAuto) {
        format = header ? DesignFormat::kTabular : DesignFormat::kPlain;
        for (const auto& l : lines) {
            long long first = 0;
            if (parse_int(l.fields.front(), first) && first > 1) format = DesignFormat::kTabular;
        }
    }

    std::vector<DesignRow> rows;
    for (const auto& l : lines) {
        std::vector<long long> values;
        for (auto f : l.fields) {
            long long v = 0;
            if (!parse_int(f, v))
                throw Error(codes::kDesign, "Line " + std::to_string(l.line_no) +
                                                ": '" + std::string(f) + "' is not an integer.");
            values.push_back(v);
        }
        DesignRow row;
        std::size_t first_cell = 0;
        if (format == DesignFormat::kTabular) {
            if (values.size() < 2)
                throw Error(codes::kDesign,
                            "Line " + std::to_string(l.line_no) + ": expected a count and cells.");
            if (values.front() <= 0)
                throw Error(codes::kDesign, "Line " + std::to_string(l.line_no) +
                                                ": cluster count must be positive.");
            row.count = static_cast<int>(values.front());
            first_cell = 1;
        }
        for (std::size_t i = first_cell; i < values.size(); ++i) {
            if (values[i] != 0 && values[i] != 1)
                throw Error(codes::kDesign, "Line " + std::to_string(l.line_no) +
                                                ": allocation cells must be 0 or 1.");
            row.allocation.push_back(static_cast<int>(values[i]));
        }
        if (!rows.empty() && rows.front().allocation.size() != row.allocation.size())
            throw Error(codes::kDesign,
                        "Line " + std::to_string(l.line_no) + ": ragged row length.");
        rows.push_back(std::move(row));
    }
    return Design(std::move(rows));
}

std::string render_design(const Design& design, DesignFormat format) {
    std::ostringstream out;
    if (format == DesignFormat::kPlain) {
        for (const auto& row : design.expanded()) {
            for (std::size_t j = 0; j < row.size(); ++j) out << (j ? " " : "") << row[j];
            out << '\n';
        }
        return out.str();
    }
    out << "numofclusters";
    for (int j = 1; j <= design.periods(); ++j) out << " time" << j;
    out << '\n';
    for (const auto& row : design.rows()) {
        out << row.count;
        for (int x : row.allocation) out << ' ' << x;
        out << '\n';
    }
    return out.str();
}

DesignSummary design_summaries(const Design& design) {
    DesignSummary s;
    s.I = design.clusters();
    s.J = design.periods();
    std::vector<std::int64_t> column(s.J, 0);
    for (const auto& row : design.rows()) {
        std::int64_t treated = 0;
        for (int j = 0; j < s.J; ++j) {
            treated += row.allocation[j];
            column[j] += static_cast<std::int64_t>(row.count) * row.allocation[j];
        }
        s.U += row.count * treated;
        s.V += row.count * treated * treated;
    }
    for (auto c : column) s.W += c * c;
    return s;
}

std::int64_t total_sample_size(const Design& design, int K, StudyType type) {
    const std::int64_t per_cluster =
        type == StudyType::kCrossSectional ? static_cast<std::int64_t>(design.periods()) * K : K;
    return per_cluster * design.clusters();
}

}  // namespace swdpwr

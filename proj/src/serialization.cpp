#include "swdpwr/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace swdpwr {

namespace {

[[noreturn]] void input_error(const std::string& msg) { throw Error(codes::kInput, msg); }

std::optional<double> opt_number(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_number()) input_error(std::string("\"") + key + "\" must be a number or null.");
    return it->get<double>();
}

std::string string_field(const json& j, const char* key, const std::string& fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    if (!it->is_string()) input_error(std::string("\"") + key + "\" must be a string.");
    return it->get<std::string>();
}

json opt_to_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

}  // namespace

Design design_from_json(const json& j) {
    if (!j.is_array()) input_error("\"design\" must be an array of {count, allocation} rows.");
    std::vector<DesignRow> rows;
    for (const auto& r : j) {
        if (!r.is_object() || !r.contains("count") || !r.contains("allocation"))
            input_error("Each design row needs \"count\" and \"allocation\".");
        const auto& c = r.at("count");
        const auto& a = r.at("allocation");
        if (!c.is_number_integer() || !a.is_array())
            input_error("Design row \"count\" must be an integer and \"allocation\" an array.");
        DesignRow row;
        row.count = c.get<int>();
        for (const auto& x : a) {
            if (!x.is_number_integer()) input_error("Allocation entries must be 0 or 1.");
            row.allocation.push_back(x.get<int>());
        }
        rows.push_back(std::move(row));
    }
    return Design(std::move(rows));
}

json design_to_json(const Design& design) {
    json out = json::array();
    for (const auto& r : design.rows()) out.push_back({{"count", r.count}, {"allocation", r.allocation}});
    return out;
}

ScenarioSpec spec_from_json(const json& j) {
    static const std::set<std::string> known = {
        "K", "design", "family", "model", "link", "type", "meanresponse_start",
        "meanresponse_end0", "meanresponse_end1", "effectsize_beta", "sigma2", "typeIerror",
        "alpha0", "alpha1", "alpha2"};
    if (!j.is_object()) input_error("The scenario must be a JSON object.");
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) input_error("Unknown argument \"" + key + "\".");

    ScenarioSpec s;
    auto k = j.find("K");
    if (k == j.end() || k->is_null()) input_error("\"K\" is required.");
    if (!k->is_number_integer()) input_error("\"K\" must be an integer.");
    s.K = k->get<int>();
    auto d = j.find("design");
    if (d == j.end() || d->is_null()) input_error("\"design\" is required.");
    s.design = design_from_json(*d);
    s.family = string_field(j, "family", s.family);
    s.model = string_field(j, "model", s.model);
    s.link = string_field(j, "link", s.link);
    s.type = string_field(j, "type", s.type);
    s.meanresponse_start = opt_number(j, "meanresponse_start");
    s.meanresponse_end0 = opt_number(j, "meanresponse_end0");
    s.meanresponse_end1 = opt_number(j, "meanresponse_end1");
    s.effectsize_beta = opt_number(j, "effectsize_beta");
    s.sigma2 = opt_number(j, "sigma2");
    s.typeIerror = opt_number(j, "typeIerror");
    s.alpha0 = opt_number(j, "alpha0");
    s.alpha1 = opt_number(j, "alpha1");
    s.alpha2 = opt_number(j, "alpha2");
    return s;
}

json spec_to_json(const ScenarioSpec& s) {
    return {{"K", s.K},
            {"design", design_to_json(s.design)},
            {"family", s.family},
            {"model", s.model},
            {"link", s.link},
            {"type", s.type},
            {"meanresponse_start", opt_to_json(s.meanresponse_start)},
            {"meanresponse_end0", opt_to_json(s.meanresponse_end0)},
            {"meanresponse_end1", opt_to_json(s.meanresponse_end1)},
            {"effectsize_beta", opt_to_json(s.effectsize_beta)},
            {"sigma2", opt_to_json(s.sigma2)},
            {"typeIerror", opt_to_json(s.typeIerror)},
            {"alpha0", opt_to_json(s.alpha0)},
            {"alpha1", opt_to_json(s.alpha1)},
            {"alpha2", opt_to_json(s.alpha2)}};
}

json warnings_to_json(const Warnings& warnings) {
    json out = json::array();
    for (const auto& w : warnings) out.push_back({{"code", w.code}, {"message", w.message}});
    return out;
}

json error_to_json(const Error& e) { return {{"code", e.code()}, {"message", e.what()}}; }

json report_to_json(const PowerReport& r) {
    return {{"I", r.I},
            {"J", r.J},
            {"K", r.K},
            {"total_sample_size", r.total_sample_size},
            {"family", to_string(r.family)},
            {"model", to_string(r.model)},
            {"link", to_string(r.link)},
            {"type", to_string(r.type)},
            {"time_effects", r.time_effects},
            {"mu", opt_to_json(r.mu)},
            {"beta", r.beta},
            {"gammaJ", opt_to_json(r.gammaJ)},
            {"tau", r.tau},
            {"alpha0", r.alpha.alpha0},
            {"alpha1", r.alpha.alpha1},
            {"alpha2", r.alpha.alpha2},
            {"typeIerror", r.type_i_error},
            {"var_beta", r.var_beta},
            {"power", r.power},
            {"warnings", warnings_to_json(r.warnings)}};
}

json sweep_to_json(SweepParameter param, const std::vector<SweepPoint>& points) {
    json out = json::array();
    for (const auto& p : points) {
        json e = {{"param", to_string(param)}, {"value", p.value}};
        if (p.report) e["report"] = report_to_json(*p.report);
        if (p.error) e["error"] = error_to_json(*p.error);
        out.push_back(std::move(e));
    }
    return out;
}

std::string sweep_to_csv(SweepParameter param, const std::vector<SweepPoint>& points) {
    std::ostringstream os;
    os.precision(17);
    os << to_string(param) << ",beta,var_beta,power,error\n";
    for (const auto& p : points) {
        os << p.value << ',';
        if (p.report)
            os << p.report->beta << ',' << p.report->var_beta << ',' << p.report->power << ',';
        else
            os << ",,," << p.error->code();
        os << '\n';
    }
    return os.str();
}

std::string format_fixed3(double x) {
    char buf[64];
    double r = round3(x);
    if (r == 0.0) r = 0.0;  // no "-0.000"
    std::snprintf(buf, sizeof buf, "%.3f", r);
    return buf;
}

std::string format_short(double x) {
    std::string s = format_fixed3(x);
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
    return s;
}

std::string render_text_report(const PowerReport& r) {
    std::ostringstream os;
    os << "This " << to_string(r.type) << " study has total sample size of " << r.total_sample_size
       << "\n";
    os << "Power for this scenario is " << format_short(r.power)
       << " for the alternative hypothesis treatment effect beta = " << format_short(r.beta)
       << " ( Type I error = " << format_short(r.type_i_error) << " )\n";
    os << "\n";
    os << "I = " << r.I << "\n";
    os << "J = " << r.J << "\n";
    os << "K = " << r.K << "\n";
    os << "Total sample size = " << r.total_sample_size << "\n";
    os << "Family = " << to_string(r.family) << "\n";
    os << "Model = " << to_string(r.model) << "\n";
    os << "Link = " << to_string(r.link) << "\n";
    os << "Type = " << to_string(r.type) << "\n";
    os << "Baseline (mu): " << (r.mu ? format_fixed3(*r.mu) : "NA") << "\n";
    os << "Treatment effect (beta): " << format_fixed3(r.beta) << "\n";
    os << "Time effect (gamma J): " << (r.gammaJ ? format_fixed3(*r.gammaJ) : "NA") << "\n";
    os << "alpha0: " << format_fixed3(r.alpha.alpha0) << "\n";
    os << "alpha1: " << format_fixed3(r.alpha.alpha1) << "\n";
    os << "alpha2: " << format_fixed3(r.alpha.alpha2) << "\n";
    os << "Type I error = " << format_fixed3(r.type_i_error) << "\n";
    os << "Power = " << format_fixed3(r.power) << "\n";
    return os.str();
}

}  // namespace swdpwr

#include "swdpwr/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "swdpwr/oracle.hpp"
#include "swdpwr/serialization.hpp"

namespace swdpwr {

namespace {

struct ScenarioFlags {
    std::string design_path;
    std::string design_format = "auto";
    int K = 0;
    std::string family = "binomial";
    std::string model = "conditional";
    std::string link = "identity";
    std::string type = "cross-sectional";
    std::optional<double> start, end0, end1, beta, sigma2, type_i, alpha0, alpha1, alpha2;
    std::optional<int> quad_nodes;
};

void add_scenario_flags(CLI::App& cmd, ScenarioFlags& f) {
    cmd.add_option("--design", f.design_path, "Design file (rows of 0/1, optional count column)")
        ->required();
    cmd.add_option("--design-format", f.design_format, "auto, tabular or plain")
        ->check(CLI::IsMember({"auto", "tabular", "plain"}));
    cmd.add_option("--k", f.K, "Individuals per cluster-period")->required();
    cmd.add_option("--family", f.family, "binomial or gaussian");
    cmd.add_option("--model", f.model, "conditional or marginal");
    cmd.add_option("--link", f.link, "identity, log or logit");
    cmd.add_option("--type", f.type, "cross-sectional or cohort");
    cmd.add_option("--meanresponse-start", f.start);
    cmd.add_option("--meanresponse-end0", f.end0);
    cmd.add_option("--meanresponse-end1", f.end1);
    cmd.add_option("--effectsize-beta", f.beta);
    cmd.add_option("--sigma2", f.sigma2);
    cmd.add_option("--type-i-error", f.type_i);
    cmd.add_option("--alpha0", f.alpha0);
    cmd.add_option("--alpha1", f.alpha1);
    cmd.add_option("--alpha2", f.alpha2);
    cmd.add_option("--quad-nodes", f.quad_nodes, "Quadrature nodes (default 30)");
}

DesignFormat design_format(const std::string& s) {
    if (s == "tabular") return DesignFormat::kTabular;
    if (s == "plain") return DesignFormat::kPlain;
    return DesignFormat::kAuto;
}

ScenarioSpec build_spec(const ScenarioFlags& f) {
    std::ifstream in(f.design_path);
    if (!in) throw Error(codes::kInput, "Cannot open design file \"" + f.design_path + "\".");
    std::stringstream buf;
    buf << in.rdbuf();
    ScenarioSpec s;
    s.design = parse_design(buf.str(), design_format(f.design_format));
    s.K = f.K;
    s.family = f.family;
    s.model = f.model;
    s.link = f.link;
    s.type = f.type;
    s.meanresponse_start = f.start;
    s.meanresponse_end0 = f.end0;
    s.meanresponse_end1 = f.end1;
    s.effectsize_beta = f.beta;
    s.sigma2 = f.sigma2;
    s.typeIerror = f.type_i;
    s.alpha0 = f.alpha0;
    s.alpha1 = f.alpha1;
    s.alpha2 = f.alpha2;
    return s;
}

ComputeOptions build_options(const ScenarioFlags& f) {
    ComputeOptions o;
    if (f.quad_nodes) {
        o.quadrature_nodes = *f.quad_nodes;
    } else if (const char* env = std::getenv("SWDPWR_QUAD_NODES")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end == env || *end != '\0')
            throw Error(codes::kInput, "SWDPWR_QUAD_NODES must be an integer.");
        o.quadrature_nodes = static_cast<int>(n);
    }
    if (o.quadrature_nodes < 1 || o.quadrature_nodes > 200)
        throw Error(codes::kRange, "The number of quadrature nodes must be between 1 and 200.");
    return o;
}

void print_warnings(const Warnings& warnings, std::ostream& err) {
    for (const auto& w : warnings) err << "Warning [" << w.code << "]: " << w.message << "\n";
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (item.empty()) continue;
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size()) throw Error(codes::kInput, "Bad grid value \"" + item + "\".");
        grid.push_back(v);
    }
    return grid;
}

struct OracleRow {
    std::string check;
    double engine;
    double oracle;
    double tolerance;
    bool relative;
};

std::string oracle_csv(const std::vector<OracleRow>& rows) {
    std::ostringstream os;
    os << std::setprecision(12);
    os << "check,engine,oracle,difference,tolerance,pass\n";
    for (const auto& r : rows) {
        const double diff = r.relative ? std::abs(r.engine - r.oracle) / std::abs(r.oracle)
                                       : std::abs(r.engine - r.oracle);
        const bool pass = diff <= r.tolerance;
        os << r.check << ',' << r.engine << ',' << r.oracle << ',' << diff << ',' << r.tolerance
           << ',' << (pass ? "yes" : "no") << "\n";
    }
    return os.str();
}

std::vector<OracleRow> oracle_rows(const NormalizedScenario& sc, const ComputeOptions& options,
                                   long replicates, std::uint64_t seed) {
    std::vector<OracleRow> rows;
    if (sc.family == Family::kGaussian) {
        const auto cs = oracle::continuous_scenario(sc);
        const double closed =
            var_beta_continuous(design_summaries(sc.design), sc.K, sc.sigma2, sc.alpha, sc.time_effects);
        if (static_cast<long>(sc.design.periods()) * sc.K <= 2000)
            rows.push_back({"dense_variance", closed, oracle::dense_continuous_variance(cs), 1e-10, true});
        if (auto hh = oracle::hussey_hughes_variance(cs))
            rows.push_back({"cluster_means_variance", closed, *hh, 1e-10, true});
        try {
            const auto mc = oracle::mc_empirical_power_continuous(cs, sc.params.beta, sc.type_i_error,
                                                                  replicates, seed);
            // Four standard errors of the sample variance (relative) and of a proportion.
            const double n = static_cast<double>(mc.replicates);
            const double p = mc.analytic_power;
            rows.push_back({"mc_variance", closed, mc.empirical_variance, 4.0 * std::sqrt(2.0 / (n - 1.0)), true});
            rows.push_back({"mc_power", p, mc.rejection_rate, 4.0 * std::sqrt(p * (1.0 - p) / n) + 1e-3, false});
        } catch (const Error& e) {
            if (e.code() != codes::kRange) throw;  // non-decomposable correlations: skipped
        }
        return rows;
    }
    if (sc.model == ModelKind::kMarginal) {
        GeeScenario g{sc.design, sc.K, sc.link, sc.params, sc.alpha, sc.time_effects};
        if (static_cast<long>(sc.design.periods()) * sc.K <= 2000)
            rows.push_back({"dense_variance", var_beta_binary_marginal(g), oracle::dense_gee_variance(g),
                            1e-10, true});
        return rows;
    }
    GlmmScenario g;
    g.design = sc.design;
    g.K = sc.K;
    g.link = sc.link;
    g.params = sc.params;
    g.time_effects = sc.time_effects;
    g.quadrature_nodes = options.quadrature_nodes;
    g.enumeration_budget = options.enumeration_budget;
    const auto info = expected_information(g).information;
    const auto mc = oracle::mc_score_information(g, replicates, seed);
    const int P = sc.params.tau == 0.0 ? static_cast<int>(info.rows()) - 1 : static_cast<int>(info.rows());
    for (int a = 0; a < P; ++a)
        for (int b = a; b < P; ++b)
            rows.push_back({"information_" + std::to_string(a) + "_" + std::to_string(b), info(a, b),
                            mc.mean(a, b), 3.0 * mc.standard_error(a, b), false});
    return rows;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Power calculation for stepped wedge cluster randomized trials", "swdpwr"};
    app.require_subcommand(1);

    ScenarioFlags power_flags, sweep_flags, validate_flags, oracle_flags;
    std::string power_output = "text";
    auto* power = app.add_subcommand("power", "Compute power for one scenario");
    add_scenario_flags(*power, power_flags);
    power->add_option("--output", power_output, "text or json")->check(CLI::IsMember({"text", "json"}));

    std::string sweep_param, sweep_grid, sweep_output = "csv";
    std::optional<double> sweep_from, sweep_to;
    std::optional<int> sweep_steps;
    auto* sweep = app.add_subcommand("sweep", "Compute power over a grid of one parameter");
    add_scenario_flags(*sweep, sweep_flags);
    sweep->add_option("--param", sweep_param,
                      "risk-difference, effectsize-beta, K, typeIerror, alpha0, alpha1 or alpha2")
        ->required();
    auto* grid_opt = sweep->add_option("--grid", sweep_grid, "Comma separated values");
    auto* from_opt = sweep->add_option("--from", sweep_from);
    auto* to_opt = sweep->add_option("--to", sweep_to);
    auto* steps_opt = sweep->add_option("--steps", sweep_steps, "Number of grid points");
    grid_opt->excludes(from_opt)->excludes(to_opt)->excludes(steps_opt);
    from_opt->needs(to_opt)->needs(steps_opt);
    sweep->add_option("--output", sweep_output, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    std::string validate_output = "text";
    auto* validate = app.add_subcommand("validate", "Check a scenario without computing power");
    add_scenario_flags(*validate, validate_flags);
    validate->add_option("--output", validate_output, "text or json")
        ->check(CLI::IsMember({"text", "json"}));

    long replicates = 0;
    std::uint64_t seed = 1;
    auto* oracle_cmd = app.add_subcommand("oracle", "Compare the engine with independent oracles (CSV)");
    add_scenario_flags(*oracle_cmd, oracle_flags);
    oracle_cmd->add_option("--replicates", replicates, "Monte Carlo replicates");
    oracle_cmd->add_option("--seed", seed, "Monte Carlo seed");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << sub->help();
        return 2;
    }

    try {
        if (power->parsed()) {
            const auto spec = build_spec(power_flags);
            const auto report = compute_power(spec, build_options(power_flags));
            print_warnings(report.warnings, err);
            if (power_output == "json") out << report_to_json(report).dump(2) << "\n";
            else out << render_text_report(report);
            return 0;
        }
        if (sweep->parsed()) {
            const auto spec = build_spec(sweep_flags);
            const auto param = parse_sweep_parameter(sweep_param);
            std::vector<double> grid;
            if (grid_opt->count()) {
                grid = parse_grid(sweep_grid);
            } else if (sweep_from) {
                if (*sweep_steps < 1) throw Error(codes::kInput, "--steps must be at least 1.");
                for (int i = 0; i < *sweep_steps; ++i)
                    grid.push_back(*sweep_steps == 1 ? *sweep_from
                                                     : *sweep_from + (*sweep_to - *sweep_from) * i /
                                                                         (*sweep_steps - 1));
            }
            if (grid.empty()) throw Error(codes::kInput, "The sweep needs --grid or --from/--to/--steps.");
            const auto points = sweep_power(spec, param, grid, build_options(sweep_flags));
            if (sweep_output == "json") out << sweep_to_json(param, points).dump(2) << "\n";
            else out << sweep_to_csv(param, points);
            for (const auto& p : points)
                if (p.error) err << "Error [" << p.error->code() << "] at " << p.value << ": " << p.error->what() << "\n";
            return 0;
        }
        if (validate->parsed()) {
            const auto sc = validate_scenario(build_spec(validate_flags), build_options(validate_flags));
            if (validate_output == "json") {
                out << json{{"ok", true}, {"warnings", warnings_to_json(sc.warnings)}}.dump(2) << "\n";
            } else {
                print_warnings(sc.warnings, err);
                out << "ok\n";
            }
            return 0;
        }
        if (oracle_cmd->parsed()) {
            const auto options = build_options(oracle_flags);
            const auto sc = validate_scenario(build_spec(oracle_flags), options);
            print_warnings(sc.warnings, err);
            const bool binary_conditional =
                sc.family == Family::kBinomial && sc.model == ModelKind::kConditional;
            if (replicates <= 0) replicates = binary_conditional ? 100000 : 5000;
            out << oracle_csv(oracle_rows(sc, options, replicates, seed));
            return 0;
        }
    } catch (const Error& e) {
        if (validate->parsed() && validate_output == "json") out << error_to_json(e).dump(2) << "\n";
        err << "Error [" << e.code() << "]: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "Internal error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace swdpwr

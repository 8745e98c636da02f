#include "doctest.h"

#include <cmath>

#include "swdpwr/engine.hpp"
#include "swdpwr/normal.hpp"
#include "swdpwr/serialization.hpp"

using namespace swdpwr;

namespace {

std::string error_code(const ScenarioSpec& spec) {
    try {
        compute_power(spec);
    } catch (const Error& e) {
        return e.code();
    }
    return "none";
}

bool has_warning(const PowerReport& r, const char* code) {
    for (const auto& w : r.warnings)
        if (w.code == code) return true;
    return false;
}

ScenarioSpec ept() {
    ScenarioSpec s;
    s.K = 162;
    s.design = Design({{6, {0, 1, 1, 1, 1}}, {6, {0, 0, 1, 1, 1}}, {6, {0, 0, 0, 1, 1}}, {6, {0, 0, 0, 0, 1}}});
    s.model = "marginal";
    s.link = "log";
    s.meanresponse_start = 0.05;
    s.meanresponse_end0 = 0.049;
    s.meanresponse_end1 = 0.035;
    s.alpha0 = 0.0047;
    s.alpha1 = 0.0047;
    return s;
}

ScenarioSpec twelve_by_four() {
    ScenarioSpec s;
    s.K = 100;
    s.design = Design({{4, {0, 1, 1, 1}}, {4, {0, 0, 1, 1}}, {4, {0, 0, 0, 1}}});
    s.model = "marginal";
    s.type = "cohort";
    s.meanresponse_start = 0.1;
    s.meanresponse_end0 = 0.2;
    return s;
}

ScenarioSpec continuous() {
    ScenarioSpec s;
    s.K = 24;
    s.design = Design({{4, {0, 1, 1}}, {4, {0, 0, 1}}});
    s.family = "gaussian";
    s.model = "marginal";
    s.type = "cohort";
    s.sigma2 = 0.095;
    s.effectsize_beta = 0.2;
    s.alpha0 = 0.03;
    s.alpha1 = 0.015;
    s.alpha2 = 0.2;
    return s;
}

ScenarioSpec small_conditional() {
    ScenarioSpec s;
    s.K = 10;
    s.design = Design({{2, {0, 1, 1}}, {2, {0, 0, 1}}});
    s.meanresponse_start = 0.2;
    s.meanresponse_end0 = 0.25;
    s.meanresponse_end1 = 0.38;
    s.alpha0 = 0.01;
    s.alpha1 = 0.01;
    return s;
}

}  // namespace

TEST_CASE("wald power") {
    CHECK(wald_power(0.0, 0.01, 0.05) == 0.05);
    CHECK(wald_power(0.0, 3.7, 0.1) == 0.1);
    CHECK(std::abs(wald_power(0.2, 0.0028187, 0.05) - 0.9646) < 5e-5);
    CHECK(std::abs(wald_power(1.0, 0.01, 0.05) - 1.0) < 1e-9);
    double last = 0.0;
    for (double b = 0.01; b < 1.0; b += 0.01) {
        const double p = wald_power(b, 0.04, 0.05);
        CHECK(p > last);
        last = p;
    }
    CHECK(wald_power(-0.3, 0.02, 0.05) == wald_power(0.3, 0.02, 0.05));
    CHECK(wald_power(0.3, 0.02, 0.05) > wald_power(0.3, 0.03, 0.05));
    CHECK_THROWS_AS(wald_power(0.3, 0.0, 0.05), Error);
}

TEST_CASE("reference scenarios through the full pipeline") {
    const auto r = compute_power(ept());
    CHECK(std::abs(r.power - 0.812) <= 0.002);
    CHECK(std::abs(*r.mu - (-2.996)) <= 0.001);
    CHECK(std::abs(r.beta - (-0.336)) <= 0.001);
    CHECK(std::abs(*r.gammaJ - (-0.020)) <= 0.001);
    CHECK(r.I == 24);
    CHECK(r.J == 5);
    CHECK(r.total_sample_size == 19440);
    CHECK(r.alpha.alpha2 == 0.0047);

    auto nt = continuous();
    const auto r0 = compute_power(nt);
    CHECK(r0.power >= 0.9995);
    CHECK_FALSE(r0.mu.has_value());
    nt.meanresponse_start = 0.0;
    nt.meanresponse_end0 = 0.1;
    CHECK(std::abs(compute_power(nt).power - 0.965) <= 0.001);

    auto fixed = twelve_by_four();
    fixed.family = "gaussian";
    fixed.meanresponse_start.reset();
    fixed.meanresponse_end0.reset();
    fixed.sigma2 = 0.095;
    fixed.effectsize_beta = 0.05;
    fixed.alpha0 = 0.015;
    fixed.alpha1 = 0.01;
    fixed.alpha2 = 0.1;
    const auto rb = compute_power(fixed);
    CHECK(std::abs(rb.power - 0.994) <= 0.001);
    CHECK(rb.total_sample_size == 1200);
}

TEST_CASE("error scenarios carry stable codes") {
    auto s = twelve_by_four();
    s.family = "gaussian";
    s.meanresponse_start.reset();
    s.meanresponse_end0.reset();
    s.sigma2 = 0.095;
    s.effectsize_beta = 0.05;
    s.alpha0 = 0.015;
    s.alpha1 = 0.2;
    s.alpha2 = 0.1;
    CHECK(error_code(s) == "E-PD");

    s = twelve_by_four();
    s.effectsize_beta = 0.7;
    s.alpha0 = 0.1;
    s.alpha1 = 0.05;
    s.alpha2 = 0.2;
    CHECK(error_code(s) == "E-QAQISH");
    s.alpha0 = 0.05;
    s.alpha2 = 0.1;
    CHECK(compute_power(s).power == doctest::Approx(1.0).epsilon(1e-9));

    s = twelve_by_four();
    s.effectsize_beta = 0.9;
    s.alpha0 = 0.05;
    s.alpha1 = 0.05;
    s.alpha2 = 0.1;
    CHECK(error_code(s) == "E-PROB");

    s = twelve_by_four();
    s.K = 160;
    s.model = "conditional";
    s.link = "logit";
    s.type = "cross-sectional";
    s.effectsize_beta = 0.6;
    s.alpha0 = 0.05;
    s.alpha1 = 0.05;
    CHECK(error_code(s) == "E-K150");

    s = twelve_by_four();
    s.effectsize_beta = 0.5;
    s.alpha0 = 1.1;
    s.alpha1 = 0.05;
    s.alpha2 = 0.1;
    CHECK(error_code(s) == "E-ICC-RANGE");
    s.alpha0 = 0.1;
    s.typeIerror = 1.05;
    CHECK(error_code(s) == "E-ALPHA");
    s.typeIerror = 0.0;
    CHECK(error_code(s) == "E-ALPHA");

    s = twelve_by_four();
    s.effectsize_beta = 0.1;
    s.alpha2 = 0.1;
    s.meanresponse_end1 = 0.3;
    CHECK(error_code(s) == "E-CONTRADICT");

    s = twelve_by_four();
    s.effectsize_beta = 0.1;
    s.family = "binomal";
    CHECK(error_code(s) == "E-ENUM");
    s.family = "binomial";
    s.link = "probit";
    CHECK(error_code(s) == "E-ENUM");

    s = twelve_by_four();
    CHECK(error_code(s) == "E-MISSING");  // neither end1 nor beta
    s.effectsize_beta = 0.1;
    s.alpha2.reset();
    CHECK(error_code(s) == "E-MISSING");  // cohort needs alpha2

    s = twelve_by_four();
    s.effectsize_beta = 0.1;
    s.alpha2 = 0.1;
    s.design = Design({{3, {0, 0, 0}}});
    CHECK(error_code(s) == "E-DESIGN");
}

TEST_CASE("error message text") {
    auto s = twelve_by_four();
    s.effectsize_beta = 0.9;
    s.alpha0 = 0.05;
    s.alpha1 = 0.05;
    s.alpha2 = 0.1;
    try {
        compute_power(s);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()) ==
              "Violation of valid probability, given input parameters: "
              "max(meanresponse_start, meanresponse_end0, meanresponse_end1)>1. Please check whether any "
              "of these values are out of range and revise one or more of them.");
    }
    s.effectsize_beta = 0.5;
    s.typeIerror = 1.05;
    try {
        compute_power(s);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()) ==
              "Type I error provided is larger than 1, it must be between 0 and 1, and is usually 0.05.");
    }
}

TEST_CASE("warning scenarios still produce a report") {
    SUBCASE("cohort forced to cross-sectional") {
        auto s = small_conditional();
        s.type = "cohort";
        s.alpha2 = 0.1;
        const auto r = compute_power(s);
        CHECK(has_warning(r, codes::kWarnCohort));
        CHECK(r.type == StudyType::kCrossSectional);
        CHECK(r.power > 0.0);
    }
    SUBCASE("alpha1 set to alpha0") {
        auto s = small_conditional();
        s.alpha1 = 0.05;
        const auto r = compute_power(s);
        CHECK(has_warning(r, codes::kWarnA0A1));
        CHECK(r.alpha.alpha1 == 0.01);
    }
    SUBCASE("alpha2 ignored for cross-sectional") {
        auto s = ept();
        s.alpha2 = 0.3;
        const auto r = compute_power(s);
        CHECK(has_warning(r, codes::kWarnAlpha2));
        CHECK(r.alpha.alpha2 == 0.0047);
        CHECK(r.power == compute_power(ept()).power);
    }
    SUBCASE("sigma2 ignored for binary") {
        auto s = ept();
        s.sigma2 = 2.0;
        const auto r = compute_power(s);
        CHECK(has_warning(r, codes::kWarnSigma2));
        CHECK(r.power == compute_power(ept()).power);
    }
    SUBCASE("gaussian link forced to identity") {
        auto s = continuous();
        s.link = "logit";
        const auto r = compute_power(s);
        CHECK(has_warning(r, codes::kWarnLink));
        CHECK(r.link == LinkKind::kIdentity);
        CHECK(r.power == compute_power(continuous()).power);
    }
    SUBCASE("non-monotone design") {
        auto s = ept();
        s.design = Design({{12, {0, 1, 0, 1, 1}}, {12, {0, 0, 1, 1, 1}}});
        const auto r = compute_power(s);
        CHECK(has_warning(r, codes::kWarnShape));
        CHECK(r.power > 0.0);
    }
}

TEST_CASE("compute_power is deterministic") {
    CHECK(compute_power(ept()) == compute_power(ept()));
    CHECK(compute_power(small_conditional()) == compute_power(small_conditional()));
}

TEST_CASE("continuous results depend only on the mean difference") {
    auto a = continuous();
    a.meanresponse_start = 0.1;
    a.meanresponse_end0 = 0.3;
    auto b = a;
    b.meanresponse_start = 5.1;
    b.meanresponse_end0 = 5.3;
    const auto ra = compute_power(a), rb = compute_power(b);
    CHECK(ra.var_beta == rb.var_beta);
    CHECK(ra.power == rb.power);
    CHECK(ra.beta == rb.beta);
}

TEST_CASE("sweeps") {
    SUBCASE("K") {
        const auto pts = sweep_power(ept(), SweepParameter::kK, {10, 20, 40, 80});
        REQUIRE(pts.size() == 4);
        double last = 1e300;
        for (const auto& p : pts) {
            REQUIRE(p.report);
            CHECK(p.report->var_beta <= last);
            last = p.report->var_beta;
        }
    }
    SUBCASE("invalid grid value is captured") {
        const auto pts = sweep_power(ept(), SweepParameter::kAlpha0, {0.001, 1.2, 0.01});
        REQUIRE(pts.size() == 3);
        CHECK(pts[0].report);
        REQUIRE(pts[1].error);
        CHECK(pts[1].error->code() == "E-ICC-RANGE");
        CHECK(pts[2].report);
    }
    SUBCASE("risk difference") {
        auto s = ept();
        s.meanresponse_end1.reset();
        const auto pts = sweep_power(s, SweepParameter::kRiskDifference, {-0.005, -0.01, -0.015});
        double last = 0.0;
        for (const auto& p : pts) {
            REQUIRE(p.report);
            CHECK(p.report->power > last);
            last = p.report->power;
        }
    }
    CHECK(parse_sweep_parameter("effectsize") == SweepParameter::kRiskDifference);
    CHECK(parse_sweep_parameter("K") == SweepParameter::kK);
    CHECK_THROWS_AS(parse_sweep_parameter("nope"), Error);
}

TEST_CASE("json round trip and rendering") {
    const auto spec = ept();
    const auto back = spec_from_json(spec_to_json(spec));
    CHECK(compute_power(back) == compute_power(spec));

    const auto r = compute_power(spec);
    const auto j = report_to_json(r);
    CHECK(j.at("power").get<double>() == r.power);
    CHECK(j.at("I").get<int>() == 24);
    CHECK(j.at("family").get<std::string>() == "binomial");
    CHECK(j.at("warnings").empty());

    auto bad = spec_to_json(spec);
    bad["colour"] = 1;
    CHECK_THROWS_AS(spec_from_json(bad), Error);

    CHECK(format_short(0.81194) == "0.812");
    CHECK(format_short(1.0) == "1");
    CHECK(format_short(0.9995) == "1");
    CHECK(format_short(0.05) == "0.05");
    CHECK(format_fixed3(0.0047) == "0.005");
    CHECK(format_fixed3(-2.99573) == "-2.996");

    const auto text = render_text_report(r);
    CHECK(text.find("This cross-sectional study has total sample size of 19440") != std::string::npos);
    CHECK(text.find("Baseline (mu): -2.996") != std::string::npos);
    CHECK(text.find("Time effect (gamma J): -0.020") != std::string::npos);
    CHECK(text.find("Power = 0.812") != std::string::npos);
}

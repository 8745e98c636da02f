#include "doctest.h"

#include <cmath>

#include "swdpwr/oracle.hpp"

using namespace swdpwr;
using namespace swdpwr::oracle;

TEST_CASE("independent correlation with one subject per cell") {
    // Two clusters, two periods, one switching. Without correlation the period
    // effect is fixed by the control cluster alone, so beta_hat = y12 - y22
    // and Var = 2 sigma^2.
    const ContinuousScenario sc{Design({{1, {0, 1}}, {1, {0, 0}}}), 1, 0.7, {0.0, 0.0, 0.0}, true};
    CHECK(dense_continuous_variance(sc) == doctest::Approx(2 * 0.7).epsilon(1e-12));
    const auto x = dense_variance_crosscheck(sc);
    CHECK(x.closed_form == doctest::Approx(2 * 0.7).epsilon(1e-12));
    REQUIRE(x.hussey_hughes);
    CHECK(*x.hussey_hughes == doctest::Approx(2 * 0.7).epsilon(1e-12));
}

TEST_CASE("dense correlation layout") {
    const auto R = dense_correlation({0.3, 0.1, 0.5}, 2, 2);
    CHECK(R(0, 0) == 1.0);
    CHECK(R(0, 1) == 0.3);  // same period, different subject
    CHECK(R(0, 2) == 0.5);  // same subject, different period
    CHECK(R(0, 3) == 0.1);  // different subject and period
    CHECK((R - R.transpose()).norm() == 0.0);
}

TEST_CASE("unequal correlations have no cluster-means formula") {
    const ContinuousScenario sc{Design({{2, {0, 1}}, {2, {0, 0}}}), 3, 1.0, {0.1, 0.05, 0.05}, true};
    CHECK_FALSE(hussey_hughes_variance(sc).has_value());
}

TEST_CASE("variance components") {
    const auto v = variance_components({0.03, 0.015, 0.2}, 2.0);
    CHECK(v.cluster + v.period + v.individual + v.residual == doctest::Approx(2.0));
    CHECK(v.cluster == doctest::Approx(0.03));
    CHECK_THROWS_AS(variance_components({0.015, 0.2, 0.1}, 1.0), Error);
}

TEST_CASE("bernoulli information without a random effect") {
    GlmmScenario sc;
    sc.design = Design({{2, {0, 1}}});
    sc.K = 1;
    sc.link = LinkKind::kIdentity;
    sc.params = {0.3, 0.0, 0.1, 0.0};
    sc.time_effects = false;
    sc.collapse = false;
    const double expected = 2.0 * (1.0 / (0.3 * 0.7) + 1.0 / (0.4 * 0.6));
    CHECK(expected_information(sc).information(0, 0) == doctest::Approx(expected).epsilon(1e-12));
    const auto mc = mc_score_information(sc, 20000, 3);
    CHECK(std::abs(mc.mean(0, 0) - expected) <= 3.0 * mc.standard_error(0, 0));
    CHECK(mc.replicates == 20000);
}

TEST_CASE("simulation is reproducible for a fixed seed") {
    GlmmScenario sc;
    sc.design = Design({{2, {0, 1, 1}}, {2, {0, 0, 1}}});
    sc.K = 4;
    sc.link = LinkKind::kLogit;
    sc.params = {-1.0, 0.2, 0.5, 0.4};
    const auto a = mc_score_information(sc, 5000, 42, 1);
    const auto b = mc_score_information(sc, 5000, 42, 4);
    CHECK(a.mean == b.mean);
    CHECK(a.standard_error == b.standard_error);
    const auto c = mc_score_information(sc, 5000, 43, 4);
    CHECK(a.mean != c.mean);
    CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
}

TEST_CASE("continuous simulation: size and power") {
    const ContinuousScenario sc{Design({{4, {0, 1, 1}}, {4, {0, 0, 1}}}), 24, 0.095, {0.03, 0.015, 0.2}, true};
    const auto null = mc_empirical_power_continuous(sc, 0.0, 0.05, 20000, 7);
    CHECK(std::abs(null.rejection_rate - 0.05) <= 0.01);
    CHECK(std::abs(null.mean_beta) <= 4.0 * std::sqrt(null.analytic_variance / 20000));
    const auto alt = mc_empirical_power_continuous(sc, 0.2, 0.05, 20000, 8);
    CHECK(std::abs(alt.rejection_rate - alt.analytic_power) <= 0.02);
    CHECK(std::abs(alt.empirical_variance / alt.analytic_variance - 1.0) <= 0.05);
}

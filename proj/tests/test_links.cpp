#include "doctest.h"

#include <cmath>
#include <numbers>

#include "swdpwr/links.hpp"
#include "swdpwr/quadrature.hpp"
#include "swdpwr/detail/root.hpp"

using namespace swdpwr;

namespace {

const double kSqrtPi = std::sqrt(std::numbers::pi);

double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// E[f(b)], b ~ N(0, tau^2), by a 100-point rule built independently of
// normal_rule (same Gauss-Hermite nodes, mapping written out here).
template <class F>
double normal_expectation(double tau, F f) {
    const auto gh = gauss_hermite_rule(100);
    double s = 0;
    for (std::size_t m = 0; m < gh.nodes.size(); ++m)
        s += gh.weights[m] * f(std::numbers::sqrt2 * tau * gh.nodes[m]);
    return s / kSqrtPi;
}

}  // namespace

TEST_CASE("Gauss-Hermite rules") {
    SUBCASE("one node") {
        const auto r = gauss_hermite_rule(1);
        REQUIRE(r.nodes.size() == 1);
        CHECK(r.nodes[0] == doctest::Approx(0.0));
        CHECK(r.weights[0] == doctest::Approx(kSqrtPi).epsilon(1e-14));
    }
    SUBCASE("two nodes") {
        const auto r = gauss_hermite_rule(2);
        CHECK(r.nodes[0] == doctest::Approx(-1 / std::numbers::sqrt2).epsilon(1e-14));
        CHECK(r.nodes[1] == doctest::Approx(1 / std::numbers::sqrt2).epsilon(1e-14));
        CHECK(r.weights[0] == doctest::Approx(kSqrtPi / 2).epsilon(1e-14));
        CHECK(r.weights[1] == doctest::Approx(kSqrtPi / 2).epsilon(1e-14));
    }
    SUBCASE("thirty nodes integrate low-degree polynomials") {
        const auto r = gauss_hermite_rule(30);
        double w = 0, m2 = 0, m4 = 0, odd = 0;
        for (std::size_t i = 0; i < r.nodes.size(); ++i) {
            const double x = r.nodes[i];
            w += r.weights[i];
            m2 += r.weights[i] * x * x;
            m4 += r.weights[i] * x * x * x * x;
            odd += r.weights[i] * x * x * x;
            CHECK(r.nodes[i] == doctest::Approx(-r.nodes[r.nodes.size() - 1 - i]).epsilon(1e-14));
        }
        CHECK(std::abs(w - kSqrtPi) < 1e-12);
        CHECK(std::abs(m2 - kSqrtPi / 2) < 1e-12);
        CHECK(std::abs(m4 - 3 * kSqrtPi / 4) < 1e-12);
        CHECK(std::abs(odd) < 1e-12);
    }
    SUBCASE("range") {
        CHECK_THROWS_AS(gauss_hermite_rule(0), Error);
        CHECK_THROWS_AS(gauss_hermite_rule(201), Error);
        CHECK_NOTHROW(gauss_hermite_rule(200));
    }
}

TEST_CASE("truncated normal rule") {
    const double a = -1.3, b = 2.1;
    const auto r = truncated_normal_rule(30, a, b);
    CHECK(r.truncated);
    double w = 0, mean = 0, second = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        CHECK(r.nodes[i] > a);
        CHECK(r.nodes[i] < b);
        w += r.weights[i];
        mean += r.weights[i] * r.nodes[i];
        second += r.weights[i] * r.nodes[i] * r.nodes[i];
    }
    const auto phi = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * std::numbers::pi); };
    const auto Phi = [](double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); };
    const double Z = Phi(b) - Phi(a);
    CHECK(w == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(mean == doctest::Approx((phi(a) - phi(b)) / Z).epsilon(1e-12));
    CHECK(second == doctest::Approx(1 + (a * phi(a) - b * phi(b)) / Z).epsilon(1e-12));

    const auto wide = truncated_normal_rule(30, -50, 50);
    CHECK_FALSE(wide.truncated);
    CHECK(wide.nodes == normal_rule(30).nodes);
}

TEST_CASE("time effects are linear between the end points") {
    const auto g = time_effect_vector(-0.020, 5);
    const double expected[] = {0, -0.005, -0.010, -0.015, -0.020};
    for (int j = 0; j < 5; ++j) CHECK(g[j] == doctest::Approx(expected[j]).epsilon(1e-15));
    for (double v : time_effect_vector(0.0, 4)) CHECK(v == 0.0);
    const auto h = time_effect_vector(0.3, 3);
    CHECK(h[0] == 0.0);
    CHECK(h[1] == doctest::Approx(0.15));
    CHECK(h[2] == doctest::Approx(0.3));
}

TEST_CASE("links invert") {
    for (auto kind : {LinkKind::kIdentity, LinkKind::kLog, LinkKind::kLogit}) {
        const LinkFunction g{kind};
        for (double p = 0.001; p < 0.999; p += 0.00713) {
            CHECK(std::abs(g.inverse(g.link(p)) - p) < 1e-14);
            const double eta = g.link(p), h = 1e-6;
            const double fd = (g.inverse(eta + h) - g.inverse(eta - h)) / (2 * h);
            CHECK(g.inverse_derivative(eta) == doctest::Approx(fd).epsilon(1e-7));
        }
    }
}

TEST_CASE("marginal identification") {
    SUBCASE("identity") {
        const auto p = identify_marginal_params({0.15, 0.15, 0.20, std::nullopt}, LinkKind::kIdentity);
        CHECK(p.mu == 0.15);
        CHECK(p.gammaJ == 0.0);
        CHECK(p.beta == doctest::Approx(0.05).epsilon(1e-14));
        CHECK(p.tau == 0.0);
    }
    SUBCASE("log") {
        const auto p = identify_marginal_params({0.05, 0.049, 0.035, std::nullopt}, LinkKind::kLog);
        CHECK(p.mu == doctest::Approx(std::log(0.05)));
        CHECK(std::abs(p.mu - -2.996) < 0.001);
        CHECK(std::abs(p.beta - -0.336) < 0.001);
        CHECK(std::abs(p.gammaJ - -0.020) < 0.001);
    }
    SUBCASE("beta supplied directly") {
        const auto p = identify_marginal_params({0.1349, 0.1499, std::nullopt, 0.75}, LinkKind::kLogit);
        CHECK(p.beta == 0.75);
        CHECK(p.gammaJ == doctest::Approx(std::log(0.1499 / 0.8501) - std::log(0.1349 / 0.8651)));
    }
    SUBCASE("no change") {
        for (auto kind : {LinkKind::kIdentity, LinkKind::kLog, LinkKind::kLogit}) {
            const auto p = identify_marginal_params({0.3, 0.3, 0.3, std::nullopt}, kind);
            CHECK(p.beta == 0.0);
            CHECK(p.gammaJ == 0.0);
        }
    }
    SUBCASE("contradicting and missing effect") {
        CHECK_THROWS_AS(identify_marginal_params({0.3, 0.3, 0.4, 0.1}, LinkKind::kLog), Error);
        CHECK_THROWS_AS(identify_marginal_params({0.3, 0.3, std::nullopt, std::nullopt}, LinkKind::kLog),
                        Error);
    }
}

TEST_CASE("conditional moments") {
    const auto rule = normal_rule(30);
    SUBCASE("no random effect") {
        const auto m = conditional_moments(0.0, 0.0, LinkKind::kLogit, rule);
        CHECK(m.mean == 0.5);
        CHECK(m.icc == 0.0);
        for (auto kind : {LinkKind::kIdentity, LinkKind::kLog, LinkKind::kLogit}) {
            const LinkFunction g{kind};
            const double mu = g.link(0.23);
            const auto z = conditional_moments(mu, 0.0, kind, rule);
            CHECK(z.mean == g.inverse(mu));
            CHECK(z.icc == 0.0);
        }
    }
    SUBCASE("monotone in the intercept and in tau") {
        for (auto kind : {LinkKind::kLog, LinkKind::kLogit}) {
            double last = 0;
            for (double mu = -4; mu < -0.5; mu += 0.1) {
                const double p = conditional_moments(mu, 0.4, kind, rule).mean;
                CHECK(p > last);
                last = p;
            }
        }
        // rho increasing in tau at a fixed marginal mean.
        double last = 0;
        for (double tau = 0.05; tau < 1.5; tau += 0.05) {
            const double mu = solve_monotone(
                [&](double m) { return conditional_moments(m, tau, LinkKind::kLogit, rule).mean - 0.2; },
                std::log(0.25), 0.5);
            const double rho = conditional_moments(mu, tau, LinkKind::kLogit, rule).icc;
            CHECK(rho > last);
            last = rho;
        }
    }
    SUBCASE("node doubling") {
        for (auto kind : {LinkKind::kLog, LinkKind::kLogit}) {
            const auto a = conditional_moments(-1.5, 0.3, kind, normal_rule(30));
            const auto b = conditional_moments(-1.5, 0.3, kind, normal_rule(60));
            CHECK(std::abs(a.mean - b.mean) < 1e-10);
            CHECK(std::abs(a.icc - b.icc) < 1e-10);
        }
    }
}

TEST_CASE("conditional identification") {
    const auto rule = normal_rule(30);
    const ResponseRates rates{0.2, 0.25, 0.38, std::nullopt};
    SUBCASE("identity link is exact") {
        const auto p = identify_conditional_params(rates, 0.01, LinkKind::kIdentity, rule);
        CHECK(p.mu == doctest::Approx(0.2).epsilon(1e-14));
        CHECK(p.gammaJ == doctest::Approx(0.05).epsilon(1e-12));
        CHECK(p.beta == doctest::Approx(0.13).epsilon(1e-12));
        // alpha0 = tau^2 / (tau^2 + mu(1 - mu)) inverted.
        CHECK(p.tau * p.tau == doctest::Approx(0.01 * 0.2 * 0.8 / 0.99).epsilon(1e-12));
        CHECK(std::abs(p.tau * p.tau - 0.0016162) < 1e-7);
    }
    SUBCASE("logit integrates the random effect out") {
        const auto p = identify_conditional_params(rates, 0.01, LinkKind::kLogit, rule);
        CHECK(std::abs(p.beta - 0.616) <= 0.002);
        CHECK(std::abs(p.beta - (std::log(0.38 / 0.62) - std::log(0.25 / 0.75))) > 0.005);
        // Re-evaluate the targets with an independent 100-point rule.
        const double p0 = normal_expectation(p.tau, [&](double b) { return expit(p.mu + b); });
        const double e2 = normal_expectation(p.tau, [&](double b) { return std::pow(expit(p.mu + b), 2); });
        const double p1 = normal_expectation(p.tau, [&](double b) { return expit(p.mu + p.gammaJ + b); });
        const double p2 =
            normal_expectation(p.tau, [&](double b) { return expit(p.mu + p.gammaJ + p.beta + b); });
        CHECK(std::abs(p0 - 0.2) < 1e-8);
        CHECK(std::abs((e2 - p0 * p0) / (p0 * (1 - p0)) - 0.01) < 1e-8);
        CHECK(std::abs(p1 - 0.25) < 1e-8);
        CHECK(std::abs(p2 - 0.38) < 1e-8);
    }
    SUBCASE("log link round trip") {
        const ResponseRates r{0.1, 0.12, 0.08, std::nullopt};
        const auto p = identify_conditional_params(r, 0.05, LinkKind::kLog, rule);
        const auto m = conditional_moments(p.mu, p.tau, LinkKind::kLog, rule);
        CHECK(std::abs(m.mean - 0.1) < 1e-8);
        CHECK(std::abs(m.icc - 0.05) < 1e-8);
        CHECK(std::abs(conditional_moments(p.mu + p.gammaJ + p.beta, p.tau, LinkKind::kLog, rule).mean -
                       0.08) < 1e-8);
    }
    SUBCASE("zero correlation reduces to the marginal parameters") {
        for (auto kind : {LinkKind::kIdentity, LinkKind::kLog, LinkKind::kLogit}) {
            const auto c = identify_conditional_params(rates, 0.0, kind, rule);
            const auto m = identify_marginal_params(rates, kind);
            CHECK(c.tau == 0.0);
            CHECK(c.mu == doctest::Approx(m.mu).epsilon(1e-12));
            CHECK(c.gammaJ == doctest::Approx(m.gammaJ).epsilon(1e-10));
            CHECK(c.beta == doctest::Approx(m.beta).epsilon(1e-10));
        }
    }
}

TEST_CASE("monotone root finder") {
    const double r = solve_monotone([](double x) { return x * x * x - 2.0; }, 0.0, 0.1);
    CHECK(r == doctest::Approx(std::cbrt(2.0)).epsilon(1e-12));
    const double s = solve_monotone([](double x) { return -std::exp(x) + 5.0; }, 10.0, 1.0);
    CHECK(s == doctest::Approx(std::log(5.0)).epsilon(1e-12));
    CHECK_THROWS_AS(solve_monotone([](double) { return 1.0; }, 0.0, 1.0), Error);
}

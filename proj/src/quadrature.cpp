#include "swdpwr/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "swdpwr/error.hpp"

namespace swdpwr {
namespace {

constexpr double kSupportLimit = 10.0;

}  // namespace

QuadratureRule gauss_hermite_rule(int n) {
    if (n < 1 || n > 200)
        throw Error(codes::kRange, "Gauss-Hermite node count must be between 1 and 200.");
    QuadratureRule rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    const double pim4 = std::pow(std::numbers::pi, -0.25);
    const int half = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < half; ++i) {
        // Initial guesses from the asymptotic root locations, then Newton on
        // the orthonormal Hermite recurrence.
        if (i == 0)
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
        else if (i == 1)
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * rule.nodes[0];
        else if (i == 3)
            z = 1.91 * z - 0.91 * rule.nodes[1];
        else
            z = 2.0 * z - rule.nodes[i - 2];
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = pim4;
            double p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
        }
        rule.nodes[i] = z;
        rule.nodes[n - 1 - i] = -z;
        rule.weights[i] = 2.0 / (pp * pp);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    std::reverse(rule.nodes.begin(), rule.nodes.end());
    std::reverse(rule.weights.begin(), rule.weights.end());
    return rule;
}

QuadratureRule gauss_legendre_rule(int n) {
    if (n < 1 || n > 1000)
        throw Error(codes::kRange, "Gauss-Legendre node count must be between 1 and 1000.");
    QuadratureRule rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0;
            double p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-16) break;
        }
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        rule.weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

RandomEffectRule normal_rule(int n) {
    const auto gh = gauss_hermite_rule(n);
    RandomEffectRule r;
    r.nodes.resize(gh.nodes.size());
    r.weights.resize(gh.nodes.size());
    const double scale = 1.0 / std::sqrt(std::numbers::pi);
    for (std::size_t m = 0; m < gh.nodes.size(); ++m) {
        r.nodes[m] = std::numbers::sqrt2 * gh.nodes[m];
        r.weights[m] = gh.weights[m] * scale;
    }
    return r;
}

RandomEffectRule truncated_normal_rule(int n, double lower, double upper) {
    if (!(lower < upper)) throw Error(codes::kRange, "Empty random-effect support.");
    auto rule = normal_rule(n);
    if (rule.nodes.front() > lower && rule.nodes.back() < upper) {
        rule.lower = lower;
        rule.upper = upper;
        return rule;
    }

    const double a = std::max(lower, -kSupportLimit);
    const double b = std::min(upper, kSupportLimit);
    if (!(a < b)) throw Error(codes::kRange, "Random-effect support has negligible mass.");
    const int panels = std::max(1, static_cast<int>(std::ceil(b - a)));
    const auto gl = gauss_legendre_rule(n);
    RandomEffectRule out;
    out.lower = lower;
    out.upper = upper;
    out.truncated = true;
    out.nodes.reserve(static_cast<std::size_t>(panels) * n);
    out.weights.reserve(out.nodes.capacity());
    const double width = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double centre = a + (p + 0.5) * width;
        const double half = 0.5 * width;
        for (int m = 0; m < n; ++m) {
            const double u = centre + half * gl.nodes[m];
            const double w = half * gl.weights[m] * std::exp(-0.5 * u * u);
            out.nodes.push_back(u);
            out.weights.push_back(w);
            total += w;
        }
    }
    for (auto& w : out.weights) w /= total;
    return out;
}

}  // namespace swdpwr

#pragma once

#include <cmath>
#include <string>

#include "swdpwr/error.hpp"

namespace swdpwr {

template <typename F>
double solve_monotone(F&& f, double guess, double step, double tol) {
    double lo = guess;
    double hi = guess;
    double flo = f(lo);
    if (flo == 0.0) return lo;
    double fhi = flo;
    // Grow the bracket geometrically on both sides until the sign changes.
    for (int i = 0; i < 200 && (flo > 0.0) == (fhi > 0.0); ++i) {
        lo = guess - step;
        hi = guess + step;
        flo = f(lo);
        fhi = f(hi);
        step *= 2.0;
        if (!std::isfinite(flo) || !std::isfinite(fhi)) break;
    }
    if ((flo > 0.0) == (fhi > 0.0) || !std::isfinite(flo) || !std::isfinite(fhi))
        throw Error(codes::kRoot, "Unable to bracket root near " + std::to_string(guess));

    double x = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        // Secant through the bracket ends; fall back to bisection when the
        // step leaves the interior.
        double candidate = hi - fhi * (hi - lo) / (fhi - flo);
        if (!(candidate > lo && candidate < hi)) candidate = 0.5 * (lo + hi);
        const double fc = f(candidate);
        if (fc == 0.0) return candidate;
        if ((fc > 0.0) == (flo > 0.0)) {
            lo = candidate;
            flo = fc;
        } else {
            hi = candidate;
            fhi = fc;
        }
        const double width = hi - lo;
        x = candidate;
        if (width <= tol) return 0.5 * (lo + hi);
        // Keep the bracket shrinking geometrically even when one end is stuck.
        if (iter % 3 == 2) {
            const double mid = 0.5 * (lo + hi);
            const double fm = f(mid);
            if (fm == 0.0) return mid;
            if ((fm > 0.0) == (flo > 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
                fhi = fm;
            }
            if (hi - lo <= tol) return 0.5 * (lo + hi);
        }
    }
    return x;
}

}  // namespace swdpwr

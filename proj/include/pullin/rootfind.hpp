#pragma once

#include <cmath>
#include <utility>

#include "pullin/errors.hpp"

namespace pullin {

struct RootOptions {
    // Bisection stops at width width_rel * max(1, |lo|, |hi|).
    double width_rel = 1e-13;
    // Newton polish steps after bisection; steps leaving the bracket are
    // rejected.
    int newton_polish = 5;
};

// Bracketed scalar root solve. fn(x) returns {value, derivative}; the bracket
// [lo, hi] must show a sign change. Bisection first for correctness, then a
// short Newton polish for the last digits.
template <class Fn>
double bisect_newton(Fn&& fn, double lo, double hi, RootOptions opts = {}) {
    double flo = fn(lo).first;
    if (flo == 0.0) return lo;
    double fhi = fn(hi).first;
    if (fhi == 0.0) return hi;
    if (std::signbit(flo) == std::signbit(fhi))
        throw BracketError("bisect_newton: no sign change over bracket");

    const double width =
        opts.width_rel * std::max({1.0, std::fabs(lo), std::fabs(hi)});
    double fmid = flo;
    double mid = lo;
    while (hi - lo > width) {
        mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // bracket at machine resolution
        fmid = fn(mid).first;
        if (fmid == 0.0) return mid;
        if (std::signbit(fmid) == std::signbit(flo)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
            fhi = fmid;
        }
    }

    double x = 0.5 * (lo + hi);
    auto [fx, dfx] = fn(x);
    double best = x, best_abs = std::fabs(fx);
    for (int i = 0; i < opts.newton_polish; ++i) {
        if (fx == 0.0 || dfx == 0.0 || !std::isfinite(dfx)) break;
        const double step = fx / dfx;
        const double xn = x - step;
        if (!(xn > lo && xn < hi)) break;
        x = xn;
        std::tie(fx, dfx) = fn(x);
        if (!std::isfinite(fx)) break;
        if (std::fabs(fx) < best_abs) {
            best = x;
            best_abs = std::fabs(fx);
        }
        if (std::fabs(step) <= width) break;
    }
    return best;
}

// Plain bisection to absolute width xtol. fn(x) returns the value only.
template <class Fn>
double bisect(Fn&& fn, double lo, double hi, double xtol) {
    double flo = fn(lo);
    if (flo == 0.0) return lo;
    double fhi = fn(hi);
    if (fhi == 0.0) return hi;
    if (std::signbit(flo) == std::signbit(fhi))
        throw BracketError("bisect: no sign change over bracket");
    while (hi - lo > xtol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fmid = fn(mid);
        if (fmid == 0.0) return mid;
        if (std::signbit(fmid) == std::signbit(flo)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace pullin

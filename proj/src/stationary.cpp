#include "pullin/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "pullin/errors.hpp"
#include "pullin/format.hpp"
#include "pullin/parallel.hpp"
#include "pullin/rootfind.hpp"

namespace pullin {

namespace {

// Clamp just inside the singular endpoint; H -> -inf there so the sign is
// known and overflow would only destroy the bracket.
double clamp_below_b(const GModel& g, double u) {
    if (!g.singular()) return u;
    const double cap = g.b() * (1.0 - 1e-14);
    return std::min(u, cap);
}

// H with overflow mapped to a huge negative value (only -lambda g can
// overflow while probing u -> b^-).
HPair h_eval_clamped(const GModel& g, double lambda, double u) {
    try {
        return h_eval(g, lambda, clamp_below_b(g, u));
    } catch (const NonFiniteError&) {
        return {-1e300, -1e300};
    }
}

}  // namespace

HPair h_eval(const GModel& g, double lambda, double u) {
    const GBundle b = g.eval(u);
    return {g.beta() * u - lambda * b.g, g.beta() - lambda * b.g1};
}

double find_p(const GModel& g) {
    // G_fn(u) = g(u) - u g'(u): equals 1 at 0 and is strictly decreasing for
    // u > 0, so the first sign change brackets the root.
    auto g_fn = [&g](double u) -> std::pair<double, double> {
        const GBundle b = g.eval(u);
        return {b.g - u * b.g1, -u * b.g2};
    };

    double lo = 0.0;
    double hi = 0.0;
    bool bracketed = false;
    if (g.singular()) {
        const double b = g.b();
        for (int j = 1; j <= 48 && !bracketed; ++j) {
            const double u = b * (1.0 - std::ldexp(1.0, -j));
            double val;
            try {
                val = g_fn(u).first;
            } catch (const NonFiniteError&) {
                val = -1e300;  // g' outgrows g toward the singularity
            }
            if (val < 0.0) {
                hi = u;
                bracketed = true;
            } else {
                lo = u;
            }
        }
    } else {
        const double seed = 1e-3;
        for (int j = 0; j <= 60 && !bracketed; ++j) {
            const double u = seed * std::ldexp(1.0, j);
            double val;
            try {
                val = g_fn(u).first;
            } catch (const NonFiniteError&) {
                val = -1e300;
            }
            if (val < 0.0) {
                hi = u;
                bracketed = true;
            } else {
                lo = u;
            }
        }
    }
    if (!bracketed)
        throw BracketError("find_p: g - u g' never changes sign before the scan cap");
    return bisect_newton(g_fn, lo, hi);
}

double lambda_star(const GModel& g) {
    const double p = find_p(g);
    return g.beta() * p / g.eval(p).g;
}

BranchPoint solve_branches(const GModel& g, double lambda) {
    if (!(lambda > 0.0)) throw RangeError("solve_branches: lambda must be positive");
    const double p = find_p(g);
    const double ls = g.beta() * p / g.eval(p).g;
    if (lambda > ls * (1.0 + 1e-14))
        throw RangeError("no stationary solutions: lambda exceeds lambda_star");
    if (lambda >= ls * (1.0 - 1e-14)) {
        // Fold point: H has a double root at p and bisection would stall.
        return {lambda, p, p, p};
    }

    auto h_fn = [&](double u) -> std::pair<double, double> {
        const HPair hp = h_eval_clamped(g, lambda, u);
        return {hp.h, hp.h1};
    };

    // phi1: H(0) = -lambda < 0 < H(p).
    const double phi1 = bisect_newton(h_fn, 0.0, p);

    // phi2: expand right of p until H turns negative.
    double lo = p, hi = 0.0;
    bool bracketed = false;
    if (g.singular()) {
        const double b = g.b();
        for (int j = 1; j <= 48 && !bracketed; ++j) {
            const double u = clamp_below_b(g, b - (b - p) * std::ldexp(1.0, -j));
            if (h_fn(u).first < 0.0) {
                hi = u;
                bracketed = true;
            }
        }
        // The geometric scan above approaches b from p; if every probe is
        // still positive the model violates (g5).
        if (!bracketed) {
            const double u = clamp_below_b(g, b);
            if (h_fn(u).first < 0.0) {
                hi = u;
                bracketed = true;
            }
        }
    } else {
        for (int j = 1; j <= 200 && !bracketed; ++j) {
            const double u = p * std::ldexp(1.0, j);
            if (h_fn(u).first < 0.0) {
                hi = u;
                bracketed = true;
            } else {
                lo = u;
            }
        }
    }
    if (!bracketed)
        throw BracketError("solve_branches: H never turns negative past p");
    const double phi2 = bisect_newton(h_fn, lo, hi);

    // q: H' decreases through zero on (phi1, phi2).
    auto h1_fn = [&](double u) -> std::pair<double, double> {
        const GBundle b = g.eval(clamp_below_b(g, u));
        return {g.beta() - lambda * b.g1, -lambda * b.g2};
    };
    const double q = bisect_newton(h1_fn, phi1, phi2);

    return {lambda, phi1, phi2, q};
}

LambdaBar find_lambda_bar(const GModel& g) {
    const double p = find_p(g);

    // I(u) = 2 int_0^u g - u g(u); I(p) > 0, I' = g - u g', strictly concave
    // past p, negative before b by (g5).
    auto i_fn = [&](double u) -> std::pair<double, double> {
        try {
            const GBundle b = g.eval(clamp_below_b(g, u));
            const double val = 2.0 * b.G - u * b.g;
            if (!std::isfinite(val)) return {-1e300, 0.0};
            return {val, b.g - u * b.g1};
        } catch (const NonFiniteError&) {
            return {-1e300, 0.0};
        }
    };

    double lo = p, hi = 0.0;
    bool bracketed = false;
    if (g.singular()) {
        const double b = g.b();
        for (int j = 1; j <= 48 && !bracketed; ++j) {
            const double u = clamp_below_b(g, b - (b - p) * std::ldexp(1.0, -j));
            if (i_fn(u).first < 0.0) {
                hi = u;
                bracketed = true;
            }
        }
    } else {
        for (int j = 1; j <= 200 && !bracketed; ++j) {
            const double u = p * std::ldexp(1.0, j);
            if (i_fn(u).first < 0.0) {
                hi = u;
                bracketed = true;
            } else {
                lo = u;
            }
        }
    }
    if (!bracketed)
        throw BracketError(
            "find_lambda_bar: 2 int g - u g never turns negative (violates (g5))");
    const double phi2_bar = bisect_newton(i_fn, lo, hi);

    const GBundle bb = g.eval(phi2_bar);
    const double via_g = g.beta() * phi2_bar / bb.g;
    const double via_energy = g.beta() * phi2_bar * phi2_bar / (2.0 * bb.G);
    if (std::fabs(via_g - via_energy) > 1e-10 * std::fabs(via_g))
        throw NumericalError("find_lambda_bar: defining identities disagree");
    return {via_g, phi2_bar};
}

StationaryProfile stationary_profile(const GModel& g) {
    const double p = find_p(g);
    const double ls = g.beta() * p / g.eval(p).g;
    const LambdaBar lb = find_lambda_bar(g);
    return {p, ls, lb.lambda_bar, lb.phi2_bar, g.beta()};
}

std::vector<BranchPoint> bifurcation_sweep(const GModel& g,
                                           std::span<const double> lambdas) {
    const double ls = lambda_star(g);
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!(lambdas[i] > 0.0) || !(lambdas[i] < ls))
            throw RangeError("bifurcation_sweep: grid must lie inside (0, lambda_star)");
        if (i > 0 && !(lambdas[i] > lambdas[i - 1]))
            throw PreconditionError("bifurcation_sweep: grid must be strictly increasing");
    }
    std::vector<BranchPoint> rows(lambdas.size());
    parallel_for_indexed(lambdas.size(), [&](std::size_t i) {
        rows[i] = solve_branches(g, lambdas[i]);
    });
    return rows;
}

void write_bifurcation_csv(std::ostream& os, const std::vector<BranchPoint>& rows) {
    os << "lambda,phi1,phi2,q\n";
    for (const auto& r : rows) {
        os << num17(r.lambda) << ',' << num17(r.phi1) << ',' << num17(r.phi2)
           << ',' << num17(r.q) << '\n';
    }
}

}  // namespace pullin

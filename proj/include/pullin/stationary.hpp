#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "pullin/models.hpp"

namespace pullin {

// H_lambda(u) = beta u - lambda g(u) and its derivative. Zeros of H are the
// stationary solutions of beta phi = lambda g(phi).
struct HPair {
    double h;
    double h1;
};

HPair h_eval(const GModel& g, double lambda, double u);

// Fold abscissa: the unique positive root of g(u) - u g'(u).
double find_p(const GModel& g);

// Stationary threshold beta p / g(p).
double lambda_star(const GModel& g);

// Both stationary branches and the interior critical point of H at one lambda.
// phi1 <= p <= phi2 and H'(q) = 0 with p < q < phi2.
struct BranchPoint {
    double lambda;
    double phi1;
    double phi2;
    double q;
};

// Throws RangeError for lambda > lambda_star (no stationary solutions); at the
// fold itself returns phi1 = phi2 = q = p.
BranchPoint solve_branches(const GModel& g, double lambda);

// Energy-critical parameter: phi2_bar is the root of 2 int_0^u g - u g(u) in
// (p, b) and lambda_bar = beta phi2_bar / g(phi2_bar). The returned pair also
// satisfies lambda_bar = beta phi2_bar^2 / (2 int_0^phi2_bar g) to 1e-10
// relative; the two routes are cross-checked internally.
struct LambdaBar {
    double lambda_bar;
    double phi2_bar;
};

LambdaBar find_lambda_bar(const GModel& g);

// Fold data plus the energy-critical pair, computed once.
struct StationaryProfile {
    double p;
    double lambda_star;
    double lambda_bar;
    double phi2_bar;
    double beta;
};

StationaryProfile stationary_profile(const GModel& g);

// Branch table over a strictly increasing lambda grid inside (0, lambda_star).
// Rows may be computed in parallel (PULLIN_THREADS); output order follows the
// grid.
std::vector<BranchPoint> bifurcation_sweep(const GModel& g,
                                           std::span<const double> lambdas);

// CSV with header lambda,phi1,phi2,q at 17 significant digits.
void write_bifurcation_csv(std::ostream& os,
                           const std::vector<BranchPoint>& rows);

}  // namespace pullin

#include "pullin/energy.hpp"

#include <cmath>

#include "pullin/errors.hpp"
#include "pullin/rootfind.hpp"

namespace pullin {

double potential_j(const GModel& g, double lambda, double u) {
    const GBundle b = g.eval(u);
    return 0.5 * g.beta() * u * u - lambda * b.G;
}

double energy_e(const GModel& g, double lambda, double u, double v) {
    return potential_j(g, lambda, u) + 0.5 * v * v;
}

double find_l(const GModel& g, double lambda, const BranchPoint& branch) {
    const double target = potential_j(g, lambda, branch.phi2);
    auto fn = [&](double u) -> std::pair<double, double> {
        return {potential_j(g, lambda, u) - target,
                h_eval(g, lambda, u).h};
    };

    // J grows like (beta/2) u^2 to the left, so doubling the distance from
    // min(0, phi1) - 1 must eventually exceed the target.
    const double base = std::min(0.0, branch.phi1);
    double left = base - 1.0;
    double dist = 1.0;
    for (int j = 0; j < 64 && fn(left).first <= 0.0; ++j) {
        dist *= 2.0;
        left = base - dist;
    }
    if (fn(left).first <= 0.0)
        throw BracketError("find_l: could not bracket the left barrier");
    return bisect_newton(fn, left, branch.phi1);
}

EnergyContext::EnergyContext(GModel g, double lambda)
    : g_(std::move(g)), lambda_(lambda) {
    if (!(lambda > 0.0))
        throw RangeError("EnergyContext: lambda must be positive");
    const double ls = lambda_star(g_);
    if (!(lambda < ls * (1.0 - 1e-14)))
        throw RangeError("EnergyContext: requires lambda < lambda_star");
    branch_ = solve_branches(g_, lambda);
    j_phi1_ = potential(branch_.phi1);
    j_phi2_ = potential(branch_.phi2);
    l_ = find_l(g_, lambda_, branch_);
}

bool EnergyContext::in_d0(double u0, double v0, bool sharp) const {
    if (!(u0 > l_ && u0 < branch_.phi2)) return false;
    const double gap = j_phi2_ - potential(u0);
    return sharp ? 0.5 * v0 * v0 < gap : v0 * v0 < gap;
}

double EnergyContext::j_inverse(double y) const {
    const double slack = 1e-12 * (1.0 + std::fabs(j_phi2_ - j_phi1_));
    if (y < j_phi1_ - slack || y > j_phi2_ + slack)
        throw RangeError("j_inverse: y outside [J(phi1), J(phi2)]");
    if (y <= j_phi1_) return branch_.phi1;
    if (y >= j_phi2_) return branch_.phi2;
    return bisect([&](double u) { return potential(u) - y; }, branch_.phi1,
                  branch_.phi2, 1e-13);
}

}  // namespace pullin

#pragma once

#include "pullin/models.hpp"
#include "pullin/stationary.hpp"

namespace pullin {

// J_lambda(u) = (beta/2) u^2 - lambda int_0^u g, using the closed-form
// antiderivative. Defined for any lambda > 0 and u < b.
double potential_j(const GModel& g, double lambda, double u);

// E_lambda(u, v) = J_lambda(u) + v^2 / 2: the Lyapunov function of the flow.
double energy_e(const GModel& g, double lambda, double u, double v);

// Potential-well geometry at one lambda < lambda_star: the branch points, the
// potential values at them, and the left barrier abscissa l with
// J(l) = J(phi2), l < phi1. Immutable after construction; all queries pure.
class EnergyContext {
public:
    EnergyContext(GModel g, double lambda);

    const GModel& model() const { return g_; }
    double lambda() const { return lambda_; }
    const BranchPoint& branch() const { return branch_; }
    double j_phi1() const { return j_phi1_; }
    double j_phi2() const { return j_phi2_; }
    double barrier_left() const { return l_; }

    double potential(double u) const { return potential_j(g_, lambda_, u); }
    double energy(double u, double v) const {
        return energy_e(g_, lambda_, u, v);
    }

    // Admissible initial set D0. The default follows the literal condition
    //   l < u0 < phi2  and  v0^2 < J(phi2) - J(u0);
    // sharp = true uses the invariant-well condition E(u0, v0) < J(phi2)
    // (i.e. v0^2/2 on the left), which is what orbit classification traps on.
    bool in_d0(double u0, double v0, bool sharp = false) const;

    // Inverse of J on [phi1, phi2] where it is increasing; pure bisection to
    // 1e-13. Throws RangeError for y outside [J(phi1), J(phi2)].
    double j_inverse(double y) const;

private:
    GModel g_;
    double lambda_;
    BranchPoint branch_;
    double j_phi1_;
    double j_phi2_;
    double l_;
};

// Root of J_lambda(u) = J_lambda(phi2) left of phi1 (leftward bracket
// expansion + bisection; J is strictly decreasing there).
double find_l(const GModel& g, double lambda, const BranchPoint& branch);

}  // namespace pullin

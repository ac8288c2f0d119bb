#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "pullin/dynamics.hpp"
#include "pullin/models.hpp"
#include "pullin/stationary.hpp"

namespace pullin {

// Linearization at the stationary points and reversed-time shooting along the
// saddle's invariant manifold. Shooting and the thresholds derived from it
// assume linear damping f(v) = v.

enum class Equilibrium { Phi1, Phi2 };
enum class EquilibriumKind { StableFocus, StableNode, Centre, Saddle };

const char* to_string(EquilibriumKind k);

struct EigenData {
    Equilibrium equilibrium;
    std::complex<double> mu_minus;
    std::complex<double> mu_plus;
    EquilibriumKind kind;
};

// Eigenvalues mu = (-alpha f'(0) +- sqrt((alpha f'(0))^2 - 4 H'(phi_i))) / 2
// of the linearized flow, with the phase-portrait classification: phi1 is a
// centre / stable focus / stable node depending on alpha f'(0), phi2 a saddle.
EigenData equilibrium_eigenvalues(const GModel& g, const FModel& f,
                                  double lambda, double alpha,
                                  Equilibrium which);

enum class ShootOutcome { HitAxis, EscapedCap, Inconclusive };

struct ShootResult {
    double lambda = 0.0;
    double alpha = 0.0;
    std::optional<double> p_alpha;  // U-axis intersection of the Phi graph
    std::optional<double> x_alpha;  // phi2 - p_alpha
    double eta_plus = 0.0;          // unstable eigenvalue of the reversed flow
    ShootOutcome outcome = ShootOutcome::Inconclusive;
    std::vector<PhasePoint> graph;  // (U, V) samples when requested
};

struct ShootOptions {
    double seed_offset_rel = 1e-8;  // delta = rel * max(1, phi2)
    double rtol = 1e-12;
    double atol = 1e-14;
    double s_max = 1e4;
    bool record_graph = false;
};

// Integrates the reversed system (U, V)' = (V, alpha V + H(phi2 - U)) from a
// seed delta (1, eta_plus) on the unstable eigenvector until the graph
// returns to the U-axis (HitAxis, P_alpha there) or leaves the probe window
// (EscapedCap, read as x_alpha < 0). Requires lambda_bar < lambda <
// lambda_star.
ShootResult shoot_stable_manifold(const GModel& g, double lambda, double alpha,
                                  const ShootOptions& opts = {});

// Root of alpha -> x_alpha (strictly decreasing): the damping level at which
// the separatrix passes exactly through the origin. Bracket doubles from
// alpha = 1, then bisection to width tol.
double alpha_star(const GModel& g, double lambda, double tol = 1e-8,
                  const ShootOptions& opts = {});

// Dynamical threshold lambda(0,0)(alpha): lambda_bar exactly at alpha = 0,
// otherwise a bisection in lambda on the sign of x_alpha, clamped to
// [lambda_bar + 1e-12, lambda_star - 1e-12].
double lambda_threshold(const GModel& g, double alpha, double tol = 1e-8,
                        const ShootOptions& opts = {});

// Parameter-space classification through the manifold threshold: the only
// source of Gamma2Boundary (|alpha - alpha_star| <= tol), which raw
// integration cannot certify.
Gamma gamma_region(const GModel& g, double lambda, double alpha,
                   double tol = 1e-8);

struct HeteroclinicResult {
    bool connected = false;
    double slope_m = 0.0;  // lower-edge slope of the trapping triangle
    Trajectory trajectory;
};

// Follows the saddle's unstable branch into {u < phi2, v < 0} with linear
// damping and verifies it stays in the triangle with vertices (phi1, 0),
// (phi2, 0), (phi2, m (phi2 - phi1)) and converges to the sink. Requires
// alpha > 2 sqrt(H'(phi1)).
HeteroclinicResult heteroclinic_check(const GModel& g, double lambda,
                                      double alpha, double t_max = 400.0,
                                      const IntegrationOptions& opts = {});

}  // namespace pullin

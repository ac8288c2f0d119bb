#include "pullin/manifold.hpp"

#include <algorithm>
#include <cmath>

#include "pullin/dopri5.hpp"
#include "pullin/energy.hpp"
#include "pullin/errors.hpp"

namespace pullin {

const char* to_string(EquilibriumKind k) {
    switch (k) {
        case EquilibriumKind::StableFocus: return "StableFocus";
        case EquilibriumKind::StableNode: return "StableNode";
        case EquilibriumKind::Centre: return "Centre";
        case EquilibriumKind::Saddle: return "Saddle";
    }
    return "?";
}

EigenData equilibrium_eigenvalues(const GModel& g, const FModel& f,
                                  double lambda, double alpha,
                                  Equilibrium which) {
    if (!(alpha >= 0.0))
        throw PreconditionError("equilibrium_eigenvalues: alpha must be >= 0");
    const double ls = lambda_star(g);
    if (!(lambda > 0.0 && lambda < ls * (1.0 - 1e-14)))
        throw RangeError("equilibrium_eigenvalues: requires lambda < lambda_star");

    const BranchPoint br = solve_branches(g, lambda);
    const double phi = which == Equilibrium::Phi1 ? br.phi1 : br.phi2;
    const double hp = h_eval(g, lambda, phi).h1;
    const double a = alpha * f.f_prime0();

    const std::complex<double> disc =
        std::sqrt(std::complex<double>(a * a - 4.0 * hp, 0.0));
    EigenData out;
    out.equilibrium = which;
    out.mu_plus = 0.5 * (-a + disc);
    out.mu_minus = 0.5 * (-a - disc);
    if (which == Equilibrium::Phi2) {
        out.kind = EquilibriumKind::Saddle;  // H'(phi2) < 0 for all alpha
    } else if (a == 0.0) {
        out.kind = EquilibriumKind::Centre;
    } else if (a < 2.0 * std::sqrt(hp)) {
        out.kind = EquilibriumKind::StableFocus;
    } else {
        out.kind = EquilibriumKind::StableNode;
    }
    return out;
}

namespace {

struct ReversedRhs {
    const GModel& g;
    double lambda;
    double alpha;
    double phi2;

    void operator()(double, const ArrayState<2>& y, ArrayState<2>& dy) const {
        double hu;
        try {
            const double u = phi2 - y[0];
            hu = g.beta() * u - lambda * g.eval(u).g;
        } catch (const NonFiniteError&) {
            hu = -1e300;
        }
        dy[0] = y[1];
        dy[1] = alpha * y[1] + hu;
    }
};

// Sign of x_alpha for the bisections: EscapedCap counts as negative.
double x_sign_value(const ShootResult& r) {
    if (r.outcome == ShootOutcome::HitAxis) return *r.x_alpha;
    return -1.0;
}

// Retries an inconclusive shot with halved seed offsets before giving up.
ShootResult shoot_robust(const GModel& g, double lambda, double alpha,
                         ShootOptions opts) {
    for (int attempt = 0; attempt < 4; ++attempt) {
        const ShootResult r = shoot_stable_manifold(g, lambda, alpha, opts);
        if (r.outcome != ShootOutcome::Inconclusive) return r;
        opts.seed_offset_rel *= 0.5;
    }
    throw NumericalError("manifold shooting failed after seed-offset retries");
}

}  // namespace

ShootResult shoot_stable_manifold(const GModel& g, double lambda, double alpha,
                                  const ShootOptions& opts) {
    if (!(alpha >= 0.0))
        throw PreconditionError("shoot_stable_manifold: alpha must be >= 0");
    const StationaryProfile prof = stationary_profile(g);
    if (!(lambda > prof.lambda_bar && lambda < prof.lambda_star))
        throw PreconditionError(
            "shoot_stable_manifold: requires lambda_bar < lambda < lambda_star");

    const BranchPoint br = solve_branches(g, lambda);
    const double hp2 = h_eval(g, lambda, br.phi2).h1;  // < 0

    ShootResult out;
    out.lambda = lambda;
    out.alpha = alpha;
    out.eta_plus = 0.5 * (alpha + std::sqrt(alpha * alpha - 4.0 * hp2));

    // Probe window: past the cap the graph demonstrably misses the positive
    // U-axis, which the threshold bisections read as x_alpha < 0.
    double u_cap;
    if (g.singular()) {
        const double l = find_l(g, lambda, br);
        u_cap = br.phi2 - (l - 1.0);
    } else {
        u_cap = 10.0 * br.phi2;
    }

    const double delta = opts.seed_offset_rel * std::max(1.0, br.phi2);
    ReversedRhs rhs{g, lambda, alpha, br.phi2};
    StepControl ctl;
    ctl.rtol = opts.rtol;
    ctl.atol = opts.atol;
    Dopri5<2, ReversedRhs&> stepper(rhs, 0.0, {delta, delta * out.eta_plus}, ctl);

    if (opts.record_graph) out.graph.push_back({delta, delta * out.eta_plus});

    const double t_tol = 1e-13;
    while (stepper.t() < opts.s_max) {
        if (stepper.step(opts.s_max) == Dopri5<2, ReversedRhs&>::Status::Underflow) {
            out.outcome = ShootOutcome::Inconclusive;
            return out;
        }
        const double t0 = stepper.t_prev(), t1 = stepper.t();
        const auto& y0 = stepper.y_prev();
        const auto& y1 = stepper.y();

        if (opts.record_graph) {
            // A few interior samples keep the graph interpolable.
            for (int j = 1; j <= 3; ++j) {
                const double ts = t0 + (t1 - t0) * j / 4.0;
                const auto ys = stepper.dense(ts);
                out.graph.push_back({ys[0], ys[1]});
            }
            out.graph.push_back({y1[0], y1[1]});
        }

        // V = 0: the graph returned to the axis.
        if (y1[1] <= 0.0) {
            double lo = t0, hi = t1;
            while (hi - lo > t_tol * std::max(1.0, hi)) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                if (stepper.dense(mid)[1] > 0.0)
                    lo = mid;
                else
                    hi = mid;
            }
            const double ph = stepper.dense(0.5 * (lo + hi))[0];
            out.outcome = ShootOutcome::HitAxis;
            out.p_alpha = ph;
            out.x_alpha = br.phi2 - ph;
            return out;
        }
        // U beyond the probe window.
        if (y1[0] >= u_cap) {
            out.outcome = ShootOutcome::EscapedCap;
            return out;
        }
    }
    out.outcome = ShootOutcome::Inconclusive;
    return out;
}

double alpha_star(const GModel& g, double lambda, double tol,
                  const ShootOptions& opts) {
    if (!(tol > 0.0)) throw PreconditionError("alpha_star: tol must be positive");
    const double x0 = x_sign_value(shoot_robust(g, lambda, 0.0, opts));
    if (x0 <= 0.0)
        throw BracketError(
            "alpha_star: x_0 <= 0; lambda is not above lambda_bar");

    double lo = 0.0;
    double hi = 1.0;
    int expansions = 0;
    while (x_sign_value(shoot_robust(g, lambda, hi, opts)) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++expansions > 40)
            throw BracketError("alpha_star: no sign change up to the alpha cap");
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (x_sign_value(shoot_robust(g, lambda, mid, opts)) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double lambda_threshold(const GModel& g, double alpha, double tol,
                        const ShootOptions& opts) {
    if (!(alpha >= 0.0))
        throw PreconditionError("lambda_threshold: alpha must be >= 0");
    if (!(tol > 0.0))
        throw PreconditionError("lambda_threshold: tol must be positive");
    const StationaryProfile prof = stationary_profile(g);
    if (alpha == 0.0) return prof.lambda_bar;

    // x_alpha(lambda) < 0 below the threshold (orbit trapped), > 0 above.
    double lo = prof.lambda_bar + 1e-12;
    double hi = prof.lambda_star - 1e-12;
    if (x_sign_value(shoot_robust(g, lo, alpha, opts)) > 0.0) return lo;
    if (x_sign_value(shoot_robust(g, hi, alpha, opts)) <= 0.0) return hi;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (x_sign_value(shoot_robust(g, mid, alpha, opts)) > 0.0)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

Gamma gamma_region(const GModel& g, double lambda, double alpha, double tol) {
    const StationaryProfile prof = stationary_profile(g);
    if (!(lambda > prof.lambda_bar && lambda < prof.lambda_star && alpha > 0.0))
        throw PreconditionError(
            "gamma_region: requires (lambda, alpha) in (lambda_bar, lambda_star) x (0, inf)");
    const double as = alpha_star(g, lambda, tol);
    if (std::fabs(alpha - as) <= tol) return Gamma::Gamma2Boundary;
    return alpha > as ? Gamma::Gamma1 : Gamma::Gamma3;
}

HeteroclinicResult heteroclinic_check(const GModel& g, double lambda,
                                      double alpha, double t_max,
                                      const IntegrationOptions& opts) {
    const double ls = lambda_star(g);
    if (!(lambda > 0.0 && lambda < ls * (1.0 - 1e-14)))
        throw RangeError("heteroclinic_check: requires lambda < lambda_star");
    const BranchPoint br = solve_branches(g, lambda);
    const double hp1 = h_eval(g, lambda, br.phi1).h1;  // > 0
    if (!(alpha > 2.0 * std::sqrt(hp1)))
        throw PreconditionError(
            "heteroclinic_check: requires alpha > 2 sqrt(H'(phi1))");

    const double hp2 = h_eval(g, lambda, br.phi2).h1;  // < 0
    // Forward-time unstable direction at the saddle, branch into
    // {u < phi2, v < 0}.
    const double mu2p = 0.5 * (-alpha + std::sqrt(alpha * alpha - 4.0 * hp2));
    const double span = br.phi2 - br.phi1;
    const double delta = 1e-8 * span;

    Problem prob{g, FModel::linear(), alpha, lambda, br.phi2 - delta,
                 -mu2p * delta};
    HeteroclinicResult result;
    result.slope_m = -0.5 * alpha;  // midpoint of (mu1_minus, mu1_plus)
    result.trajectory = integrate(prob, t_max, opts);

    const double tol = 1e-8 * span;
    bool inside = true;
    for (const auto& s : result.trajectory.states) {
        const bool ok = s.u >= br.phi1 - tol && s.u <= br.phi2 + tol &&
                        s.v <= tol &&
                        s.v >= result.slope_m * (s.u - br.phi1) - tol;
        if (!ok) {
            inside = false;
            break;
        }
    }
    result.connected =
        inside &&
        result.trajectory.termination == Termination::ConvergedToSink;
    return result;
}

}  // namespace pullin

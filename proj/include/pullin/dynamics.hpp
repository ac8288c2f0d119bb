#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pullin/models.hpp"
#include "pullin/stationary.hpp"

namespace pullin {

// One simulation instance of u'' + alpha f(u') + beta u = lambda g(u).
struct Problem {
    GModel g;
    FModel f;
    double alpha = 0.0;
    double lambda = 0.0;
    double u0 = 0.0;
    double v0 = 0.0;
};

enum class Termination {
    TimeLimit,
    ConvergedToSink,
    TrappedPeriodic,
    BlowUp,
    Quench,
    Undetermined,
};

enum class EventKind {
    AxisCrossing,   // v = 0, transversal
    WellEscape,     // u crossed phi2 + margin with v >= 0
    QuenchGuard,    // b - u fell below eps_q
    BlowupGuard,    // u or |v| exceeded its cap
    TrapEntry,      // entered the invariant well {E < J(phi2), u < phi2}
    SinkDwell,      // dwelt within r_sink of (phi1, 0)
    PeriodClosure,  // matching axis crossing closed a loop
    Grazing,        // axis contact with H ~ 0: equilibrium contact
};

const char* to_string(Termination t);
const char* to_string(EventKind k);

struct PhasePoint {
    double u;
    double v;
};

struct Event {
    double t;
    EventKind kind;
    double u;
    double v;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<PhasePoint> states;
    Termination termination = Termination::Undetermined;
    double t_end = 0.0;
    std::vector<Event> events;
};

struct IntegrationOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double max_step = 0.0;        // 0: unlimited
    double sample_dt = 0.0;       // 0: record accepted steps; else a uniform grid
    double event_time_tol = 1e-12;
    double v_cap = 1e8;
    double u_cap = 0.0;           // 0: max(1e6, 1e3 max(1, phi2)) for b = inf
    double quench_eps_rel = 1e-9;   // eps_q = rel * b
    double escape_margin_rel = 1e-6;  // margin = rel * max(1, phi2)
    double sink_radius_rel = 1e-3;    // r_sink = rel * (phi2 - phi1)
    int sink_dwell_steps = 3;
    double period_match_tol = 1e-6;
    double periodic_j_tol = 1e-6;
};

// Integrates the first-order system (u, v)' = (v, -alpha f(v) - H_lambda(u))
// with adaptive Dormand-Prince 5(4), dense-output event location, and the
// termination guards described by the options. Throws DomainError if u0 >= b.
Trajectory integrate(const Problem& prob, double t_max,
                     const IntegrationOptions& opts = {});

enum class Gamma { Gamma1, Gamma2Boundary, Gamma3, Periodic, OutOfScope };

const char* to_string(Gamma g);

struct ClassificationResult {
    Gamma gamma = Gamma::OutOfScope;
    std::string certificate;  // which sufficient condition fired
    Trajectory trajectory;
};

// Certificate-based orbit classification. Raw integration never yields
// Gamma2Boundary (a measure-zero separatrix case; see the manifold module).
// OutOfScope with an "undetermined" certificate is a valid outcome at t_max.
ClassificationResult classify_orbit(const Problem& prob, double t_max,
                                    const IntegrationOptions& opts = {});

// Max over samples of |E(u_i, v_i) + alpha Q_i - E(u0, v0)| with Q the
// trapezoid-accumulated integral of f(v) v over the sample times.
double check_energy_identity(const Problem& prob, const Trajectory& traj);

// Quadratic lower bound u >= u0 + v0 t + (xi/2) t^2 with xi = lambda -
// lambda_star, valid for alpha = 0, lambda > lambda_star, u0, v0 >= 0.
bool blowup_bound_check(const Problem& prob, const Trajectory& traj);

// CSV with header t,u,v at 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
// One JSON object per line: {"t": ..., "kind": ..., "u": ..., "v": ...}.
void write_events_jsonl(std::ostream& os, const Trajectory& traj);

}  // namespace pullin

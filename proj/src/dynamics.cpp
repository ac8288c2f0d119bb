#include "pullin/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>

#include "pullin/dopri5.hpp"
#include "pullin/energy.hpp"
#include "pullin/errors.hpp"
#include "pullin/format.hpp"

namespace pullin {

const char* to_string(Termination t) {
    switch (t) {
        case Termination::TimeLimit: return "TimeLimit";
        case Termination::ConvergedToSink: return "ConvergedToSink";
        case Termination::TrappedPeriodic: return "TrappedPeriodic";
        case Termination::BlowUp: return "BlowUp";
        case Termination::Quench: return "Quench";
        case Termination::Undetermined: return "Undetermined";
    }
    return "?";
}

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::AxisCrossing: return "axis_crossing";
        case EventKind::WellEscape: return "well_escape";
        case EventKind::QuenchGuard: return "quench_guard";
        case EventKind::BlowupGuard: return "blowup_guard";
        case EventKind::TrapEntry: return "trap_entry";
        case EventKind::SinkDwell: return "sink_dwell";
        case EventKind::PeriodClosure: return "period_closure";
        case EventKind::Grazing: return "grazing";
    }
    return "?";
}

const char* to_string(Gamma g) {
    switch (g) {
        case Gamma::Gamma1: return "Gamma1";
        case Gamma::Gamma2Boundary: return "Gamma2Boundary";
        case Gamma::Gamma3: return "Gamma3";
        case Gamma::Periodic: return "Periodic";
        case Gamma::OutOfScope: return "OutOfScope";
    }
    return "?";
}

namespace {

constexpr double kHuge = 1e300;

double finite_or(double x, double fallback) {
    return std::isfinite(x) ? x : std::copysign(fallback, x);
}

// Right-hand side of the phase-plane system. Trial stages may overshoot the
// singular endpoint; values are clamped to huge finite numbers so the error
// control rejects the step instead of propagating NaNs.
struct PhaseRhs {
    const GModel& g;
    const FModel& f;
    double alpha;
    double lambda;
    double b;
    bool finite_b;

    void operator()(double, const ArrayState<2>& y, ArrayState<2>& dy) const {
        double u = y[0];
        if (finite_b && u > b * (1.0 - 1e-15)) u = b * (1.0 - 1e-15);
        double hu;
        try {
            hu = g.beta() * u - lambda * g.eval(u).g;
        } catch (const NonFiniteError&) {
            hu = -kHuge;
        }
        const double fv = finite_or(f.eval(y[1]).f, kHuge);
        dy[0] = y[1];
        dy[1] = finite_or(-alpha * fv - hu, kHuge);
    }
};

struct LocatedEvent {
    double t;
    int what;  // 0 axis, 1 escape, 2 quench, 3 blowup
};

}  // namespace

Trajectory integrate(const Problem& prob, double t_max,
                     const IntegrationOptions& opts) {
    const GModel& g = prob.g;
    const double b = g.b();
    const bool finite_b = g.singular();
    if (!(prob.u0 < b)) throw DomainError("integrate: u0 >= b");
    if (!(prob.alpha >= 0.0)) throw DomainError("integrate: alpha must be >= 0");
    if (!(prob.lambda > 0.0)) throw DomainError("integrate: lambda must be > 0");
    if (!(t_max > 0.0)) throw DomainError("integrate: t_max must be > 0");

    // Potential-well quantities exist only below the fold.
    const double ls = lambda_star(g);
    const bool have_branch = prob.lambda < ls * (1.0 - 1e-12);
    BranchPoint br{};
    double j_phi2 = 0.0, barrier_l = 0.0, r_sink = 0.0, u_escape = 0.0;
    if (have_branch) {
        br = solve_branches(g, prob.lambda);
        j_phi2 = potential_j(g, prob.lambda, br.phi2);
        barrier_l = find_l(g, prob.lambda, br);
        r_sink = opts.sink_radius_rel * (br.phi2 - br.phi1);
        u_escape = br.phi2 + opts.escape_margin_rel * std::max(1.0, br.phi2);
    }

    const double eps_q = finite_b ? opts.quench_eps_rel * b : 0.0;
    const double u_cap =
        opts.u_cap > 0.0
            ? opts.u_cap
            : (finite_b ? b
                        : std::max(1e6, 1e3 * std::max(1.0, have_branch ? br.phi2
                                                                        : 1.0)));
    const double v_cap = opts.v_cap;
    const double e0 = energy_e(g, prob.lambda, prob.u0, prob.v0);

    PhaseRhs rhs{g, prob.f, prob.alpha, prob.lambda, b, finite_b};
    StepControl ctl;
    ctl.rtol = opts.rtol;
    ctl.atol = opts.atol;
    if (opts.max_step > 0.0) ctl.h_max = opts.max_step;
    Dopri5<2, PhaseRhs&> stepper(rhs, 0.0, {prob.u0, prob.v0}, ctl);

    Trajectory traj;
    traj.times.push_back(0.0);
    traj.states.push_back({prob.u0, prob.v0});

    auto record = [&traj](double t, double u, double v) {
        if (!traj.times.empty() && !(t > traj.times.back())) return;
        traj.times.push_back(t);
        traj.states.push_back({u, v});
    };
    auto log_event = [&traj](double t, EventKind kind, double u, double v) {
        traj.events.push_back({t, kind, u, v});
    };

    auto h_of = [&](double u) {
        try {
            return g.beta() * u - prob.lambda * g.eval(std::min(u, finite_b ? b * (1.0 - 1e-15) : u)).g;
        } catch (const NonFiniteError&) {
            return -kHuge;
        }
    };
    auto graze_tol = [&](double u) {
        return 1e-9 * (1.0 + std::fabs(g.beta() * u) + prob.lambda);
    };

    // Same-direction axis-crossing memory for period detection (alpha = 0).
    struct Crossing {
        double t;
        double u;
    };
    std::optional<Crossing> last_up, last_down;
    if (prob.alpha == 0.0 && prob.v0 == 0.0) {
        const double vdot0 = -h_of(prob.u0);
        if (std::fabs(vdot0) > graze_tol(prob.u0)) {
            // The start is itself a turning point; one full loop closes here.
            if (vdot0 > 0.0)
                last_up = Crossing{0.0, prob.u0};
            else
                last_down = Crossing{0.0, prob.u0};
        }
    }

    bool trapped = false;
    int dwell = 0;
    bool escape_logged = false;
    if (have_branch && prob.alpha > 0.0 && e0 < j_phi2 && prob.u0 < br.phi2 &&
        prob.u0 > barrier_l) {
        trapped = true;
        log_event(0.0, EventKind::TrapEntry, prob.u0, prob.v0);
    }

    const double t_tol = opts.event_time_tol;

    // Locates the first sign change of fn along the dense interpolant.
    auto locate = [&](double t0, double t1, auto&& fn,
                      double f_at_t0) -> std::optional<double> {
        constexpr int kProbes = 24;
        double ta = t0, fa = f_at_t0;
        for (int j = 1; j <= kProbes; ++j) {
            const double tb = t0 + (t1 - t0) * j / kProbes;
            const auto yb = stepper.dense(tb);
            const double fb = fn(tb, yb);
            if (fa == 0.0) {
                ta = tb;
                fa = fb;
                continue;
            }
            if (fb == 0.0 || std::signbit(fa) != std::signbit(fb)) {
                double lo = ta, hi = tb, flo = fa;
                while (hi - lo > t_tol * std::max(1.0, std::fabs(hi))) {
                    const double mid = 0.5 * (lo + hi);
                    if (mid <= lo || mid >= hi) break;
                    const double fmid = fn(mid, stepper.dense(mid));
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
            ta = tb;
            fa = fb;
        }
        return std::nullopt;
    };

    double sample_next = opts.sample_dt > 0.0 ? opts.sample_dt : 0.0;
    const double t_limit_slack = 1e-12 * std::max(1.0, t_max);

    auto emit_samples_until = [&](double t_stop) {
        if (opts.sample_dt <= 0.0) return;
        while (sample_next <= t_stop + 1e-15 * std::max(1.0, t_stop)) {
            const auto ys = stepper.dense(sample_next);
            record(sample_next, ys[0], ys[1]);
            sample_next += opts.sample_dt;
        }
    };

    for (;;) {
        const double u_cur = stepper.y()[0];
        const double v_cur = stepper.y()[1];
        double h_ceiling = std::numeric_limits<double>::infinity();
        if (finite_b && b - u_cur < 1e3 * eps_q) {
            // Resolve the singularity approach before the guard fires.
            h_ceiling = std::max(0.25 * (b - u_cur) / std::max(1.0, std::fabs(v_cur)),
                                 1e-17);
        }

        const auto status = stepper.step(t_max, h_ceiling);
        if (status == Dopri5<2, PhaseRhs&>::Status::Underflow) {
            const double u = stepper.y()[0];
            traj.termination =
                (finite_b && b - u < 1e-6 * b) ? Termination::Quench
                                               : Termination::Undetermined;
            traj.t_end = stepper.t();
            record(stepper.t(), stepper.y()[0], stepper.y()[1]);
            return traj;
        }

        const double t0 = stepper.t_prev();
        const double t1 = stepper.t();
        const auto& y0 = stepper.y_prev();
        const auto& y1 = stepper.y();

        // Gather candidate events inside this step, earliest first.
        std::vector<LocatedEvent> found;
        {
            auto v_fn = [](double, const ArrayState<2>& y) { return y[1]; };
            double va = y0[1];
            if (va == 0.0) va = y1[1];  // step off an exact axis start
            double t_from = t0;
            double f_from = va;
            for (int guard = 0; guard < 4; ++guard) {
                const auto hit = locate(t_from, t1, v_fn, f_from);
                if (!hit) break;
                found.push_back({*hit, 0});
                t_from = *hit + std::max(t_tol, 1e-14 * std::max(1.0, t1));
                if (t_from >= t1) break;
                f_from = stepper.dense(t_from)[1];
            }
        }
        if (have_branch && !escape_logged && y0[0] < u_escape) {
            auto esc_fn = [&](double, const ArrayState<2>& y) {
                return y[0] - u_escape;
            };
            if (const auto hit = locate(t0, t1, esc_fn, y0[0] - u_escape))
                found.push_back({*hit, 1});
        }
        if (finite_b && y1[0] >= b - eps_q) {
            auto q_fn = [&](double, const ArrayState<2>& y) {
                return (b - eps_q) - y[0];
            };
            if (const auto hit = locate(t0, t1, q_fn, (b - eps_q) - y0[0]))
                found.push_back({*hit, 2});
            else
                found.push_back({t1, 2});
        }
        if (!finite_b && y1[0] >= u_cap) {
            auto c_fn = [&](double, const ArrayState<2>& y) { return u_cap - y[0]; };
            if (const auto hit = locate(t0, t1, c_fn, u_cap - y0[0]))
                found.push_back({*hit, 3});
            else
                found.push_back({t1, 3});
        }
        if (std::fabs(y1[1]) >= v_cap) {
            auto c_fn = [&](double, const ArrayState<2>& y) {
                return v_cap - std::fabs(y[1]);
            };
            if (const auto hit = locate(t0, t1, c_fn, v_cap - std::fabs(y0[1])))
                found.push_back({*hit, 3});
            else
                found.push_back({t1, 3});
        }
        std::sort(found.begin(), found.end(),
                  [](const LocatedEvent& a, const LocatedEvent& b2) {
                      return a.t < b2.t;
                  });

        for (const auto& ev : found) {
            const auto ys = stepper.dense(ev.t);
            const double ue = ys[0], ve = ys[1];
            switch (ev.what) {
                case 0: {  // axis crossing
                    const double hu = h_of(ue);
                    if (std::fabs(hu) <= graze_tol(ue)) {
                        emit_samples_until(ev.t);
                        log_event(ev.t, EventKind::Grazing, ue, 0.0);
                        traj.termination = Termination::Undetermined;
                        traj.t_end = ev.t;
                        record(ev.t, ue, 0.0);
                        return traj;
                    }
                    log_event(ev.t, EventKind::AxisCrossing, ue, 0.0);
                    if (prob.alpha == 0.0) {
                        const int dir = -hu > 0.0 ? +1 : -1;
                        auto& slot = dir > 0 ? last_up : last_down;
                        if (slot && std::fabs(ue - slot->u) <=
                                        opts.period_match_tol *
                                            std::max(1.0, std::fabs(ue)) &&
                            ev.t - slot->t > 100.0 * t_tol) {
                            emit_samples_until(ev.t);
                            log_event(ev.t, EventKind::PeriodClosure, ue, 0.0);
                            traj.termination = Termination::TrappedPeriodic;
                            traj.t_end = ev.t;
                            record(ev.t, ue, 0.0);
                            return traj;
                        }
                        slot = Crossing{ev.t, ue};
                    }
                    break;
                }
                case 1: {  // well escape (informational)
                    if (ve >= 0.0 && !escape_logged) {
                        log_event(ev.t, EventKind::WellEscape, ue, ve);
                        escape_logged = true;
                    }
                    break;
                }
                case 2: {  // quench guard
                    emit_samples_until(ev.t);
                    log_event(ev.t, EventKind::QuenchGuard, ue, ve);
                    traj.termination = Termination::Quench;
                    traj.t_end = ev.t;
                    record(ev.t, ue, ve);
                    return traj;
                }
                case 3: {  // blow-up guard
                    emit_samples_until(ev.t);
                    log_event(ev.t, EventKind::BlowupGuard, ue, ve);
                    traj.termination = Termination::BlowUp;
                    traj.t_end = ev.t;
                    record(ev.t, ue, ve);
                    return traj;
                }
            }
        }

        // Entrapment bookkeeping on accepted endpoints.
        if (have_branch && prob.alpha > 0.0) {
            if (!trapped) {
                const double e1 = energy_e(g, prob.lambda, y1[0], y1[1]);
                if (e1 < j_phi2 && y1[0] < br.phi2 && y1[0] > barrier_l) {
                    trapped = true;
                    log_event(t1, EventKind::TrapEntry, y1[0], y1[1]);
                }
            }
            if (trapped) {
                const double du = y1[0] - br.phi1;
                if (std::sqrt(du * du + y1[1] * y1[1]) <= r_sink) {
                    if (++dwell >= opts.sink_dwell_steps) {
                        emit_samples_until(t1);
                        log_event(t1, EventKind::SinkDwell, y1[0], y1[1]);
                        traj.termination = Termination::ConvergedToSink;
                        traj.t_end = t1;
                        record(t1, y1[0], y1[1]);
                        return traj;
                    }
                } else {
                    dwell = 0;
                }
            }
        }

        if (opts.sample_dt > 0.0)
            emit_samples_until(t1);
        else
            record(t1, y1[0], y1[1]);

        if (t1 >= t_max - t_limit_slack) {
            traj.termination = Termination::TimeLimit;
            traj.t_end = t1;
            record(t1, y1[0], y1[1]);
            return traj;
        }
    }
}

ClassificationResult classify_orbit(const Problem& prob, double t_max,
                                    const IntegrationOptions& opts) {
    ClassificationResult result;
    result.trajectory = integrate(prob, t_max, opts);
    const Trajectory& traj = result.trajectory;

    switch (traj.termination) {
        case Termination::Quench:
            result.gamma = Gamma::Gamma3;
            result.certificate =
                "quench guard: u reached the singular endpoint in finite time";
            return result;
        case Termination::BlowUp:
            result.gamma = Gamma::Gamma3;
            result.certificate = "blow-up guard: state exceeded the caps";
            return result;
        case Termination::ConvergedToSink:
            result.gamma = Gamma::Gamma1;
            result.certificate =
                "entered the invariant well {E < J(phi2), u < phi2} and settled "
                "within r_sink of (phi1, 0)";
            return result;
        case Termination::TrappedPeriodic: {
            // Validate the closing crossing against the conserved level.
            const double e0 = energy_e(prob.g, prob.lambda, prob.u0, prob.v0);
            double u1 = 0.0;
            bool found = false;
            for (const auto& ev : traj.events) {
                if (ev.kind == EventKind::PeriodClosure) {
                    u1 = ev.u;
                    found = true;
                }
            }
            BranchPoint br{};
            const double ls = lambda_star(prob.g);
            if (prob.lambda < ls * (1.0 - 1e-12)) {
                br = solve_branches(prob.g, prob.lambda);
            } else {
                found = false;
            }
            const double jres =
                found ? std::fabs(potential_j(prob.g, prob.lambda, u1) - e0)
                      : 0.0;
            if (found && prob.alpha == 0.0 && u1 > br.phi1 && u1 < br.phi2 &&
                jres <= opts.periodic_j_tol * (1.0 + std::fabs(e0))) {
                result.gamma = Gamma::Periodic;
                result.certificate =
                    "closed loop: u-axis crossing at u1 in (phi1, phi2) with "
                    "J(u1) matching the conserved energy";
            } else {
                result.gamma = Gamma::OutOfScope;
                result.certificate =
                    "undetermined: loop closed outside the periodic certificate";
            }
            return result;
        }
        case Termination::TimeLimit:
        case Termination::Undetermined: {
            for (const auto& ev : traj.events) {
                if (ev.kind == EventKind::WellEscape && ev.v >= 0.0) {
                    result.gamma = Gamma::Gamma3;
                    result.certificate =
                        "escaped the well: u > phi2 + margin with v >= 0";
                    return result;
                }
                if (ev.kind == EventKind::Grazing) {
                    result.gamma = Gamma::OutOfScope;
                    result.certificate =
                        "undetermined: equilibrium contact (grazing axis touch)";
                    return result;
                }
            }
            result.gamma = Gamma::OutOfScope;
            result.certificate = "undetermined: no certificate before t_max";
            return result;
        }
    }
    return result;
}

double check_energy_identity(const Problem& prob, const Trajectory& traj) {
    if (traj.times.empty()) return 0.0;
    const double e0 = energy_e(prob.g, prob.lambda, prob.u0, prob.v0);
    double q_acc = 0.0;
    double max_res = 0.0;
    double phi_prev =
        prob.f.eval(traj.states.front().v).f * traj.states.front().v;
    for (std::size_t i = 1; i < traj.times.size(); ++i) {
        const auto& s = traj.states[i];
        const double phi = prob.f.eval(s.v).f * s.v;
        q_acc += 0.5 * (phi + phi_prev) * (traj.times[i] - traj.times[i - 1]);
        phi_prev = phi;
        const double e = energy_e(prob.g, prob.lambda, s.u, s.v);
        max_res = std::max(max_res, std::fabs(e + prob.alpha * q_acc - e0));
    }
    return max_res;
}

bool blowup_bound_check(const Problem& prob, const Trajectory& traj) {
    if (prob.alpha != 0.0)
        throw PreconditionError("blowup_bound_check: requires alpha = 0");
    const double ls = lambda_star(prob.g);
    if (!(prob.lambda > ls))
        throw PreconditionError("blowup_bound_check: requires lambda > lambda_star");
    if (prob.u0 < 0.0 || prob.v0 < 0.0)
        throw PreconditionError("blowup_bound_check: requires u0, v0 >= 0");
    const double xi = prob.lambda - ls;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double t = traj.times[i];
        const double bound = prob.u0 + prob.v0 * t + 0.5 * xi * t * t;
        if (traj.states[i].u < bound - 1e-9) return false;
    }
    return true;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,u,v\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        os << num17(traj.times[i]) << ',' << num17(traj.states[i].u) << ','
           << num17(traj.states[i].v) << '\n';
    }
}

void write_events_jsonl(std::ostream& os, const Trajectory& traj) {
    for (const auto& ev : traj.events) {
        os << "{\"t\":" << num17(ev.t) << ",\"kind\":\"" << to_string(ev.kind)
           << "\",\"u\":" << num17(ev.u) << ",\"v\":" << num17(ev.v) << "}\n";
    }
}

}  // namespace pullin

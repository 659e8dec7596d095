#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "directions.hpp"
#include "errors.hpp"
#include "fbe.hpp"
#include "problem.hpp"
#include "prox.hpp"
#include "vec.hpp"

namespace panoc {

// Snapshot of an accepted iteration. Within one iteration only index-k
// variables mutate; gamma is non-increasing across the run and every
// reduction halves it exactly.
struct IterateState {
    std::size_t k = 0;
    Vector x;
    Vector x_bar;
    double gamma = 0.0;
    double tau = 0.0; // weight of the accepted trial; 0 means a pure pg step
    double phi = 0.0; // merit Phi_k
    double fbe = 0.0; // envelope value of the accepted trial
    double delta_k = 0.0;
    double residual_norm = 0.0;
    std::size_t tgamma_evals = 0; // cumulative count at acceptance
    std::size_t gamma_backtracks = 0;
    std::size_t tau_backtracks = 0;
};

// One row per pg_step call, in call order; feeds the per-evaluation CSVs.
struct TraceRecord {
    std::size_t tgamma_eval_index = 0; // 1-based
    std::size_t k = 0;
    Vector x;
    Vector x_bar;
    double gamma = 0.0;
    double tau = 0.0;
    double phi = 0.0; // envelope value of this evaluation
    double residual_norm = 0.0;
    double cost_phi = 0.0; // f + g at the base point; +inf outside dom g
};

struct SolveReport {
    SolveStatus status = SolveStatus::Converged;
    Vector final_point; // candidate x_bar at exit
    Vector final_base;
    double final_residual = 0.0;
    double phi_final = 0.0;
    std::size_t tgamma_evals = 0;
    std::vector<IterateState> iterates;
    std::vector<TraceRecord> trace;
    ProxResult final_prox;
};

enum class TerminationPhase { Residual, Strengthened };
enum class TerminationDecision { Continue, EnterStrengthened, Stop };

// Two-phase rule: stop on a zero residual at any time; otherwise, once the
// residual first reaches eps/2, either stop (plain mode) or switch the
// stepsize linesearch to its strengthened form and stop the next time the
// residual bound holds under it.
inline TerminationDecision check_termination(const IterateState& state,
                                             const CompositeProblem& /*pb*/,
                                             const SolverConfig& cfg, TerminationPhase phase) {
    if (state.residual_norm == 0.0) return TerminationDecision::Stop;
    if (state.residual_norm <= cfg.epsilon / 2.0) {
        if (phase == TerminationPhase::Residual && cfg.strengthened_termination)
            return TerminationDecision::EnterStrengthened;
        return TerminationDecision::Stop;
    }
    return TerminationDecision::Continue;
}

// Averaged merit recursion; p_k = 1 recovers the monotone algorithm.
inline double apply_nonmonotone(double phi_prev, double fbe_new, double p_k) {
    return (1.0 - p_k) * phi_prev + p_k * fbe_new;
}

namespace detail {

struct BudgetSignal {};
struct StepsizeFloorSignal {};

constexpr double kTauFloor = 0x1p-60;

// (1 - tau) xbar + tau (x + d), rearranged so that the nominal direction
// d = xbar - x cancels exactly: tau*(x - xbar) and tau*d are then equal in
// magnitude and opposite in sign, their sum rounds to +0 for every tau, and
// the update is bitwise the pg step. This is what makes the accelerated
// solver with nominal directions coincide with plain pg to the last bit.
inline Vector damped_update(const Vector& xbar_prev, const Vector& x_prev, const Vector& d,
                            double tau) {
    Vector x(xbar_prev.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = xbar_prev[i] + (tau * (x_prev[i] - xbar_prev[i]) + tau * d[i]);
    return x;
}

struct Driver {
    const CompositeProblem& pb;
    const SolverConfig& cfg;
    const InexactProxWrapper* inexact;
    DirectionProvider* provider = nullptr;

    SolveReport report;
    TerminationPhase phase = TerminationPhase::Residual;
    double gamma_floor;
    std::size_t evals = 0;

    PgStep cur;                  // most recent pg step
    double f_at_candidate = 0.0; // f(cur.candidate), from the stepsize check
    double merit = 0.0;          // Phi_k of the last accepted iteration
    double merit0 = 0.0;

    Driver(const CompositeProblem& pb_, const SolverConfig& cfg_, const InexactProxWrapper* w)
        : pb(pb_), cfg(cfg_), inexact(w), gamma_floor(1e-18 * cfg_.gamma0) {
        if (pb.dimension == 0 || !pb.smooth || !pb.nonsmooth)
            throw DomainError("problem incomplete");
        if (cfg.x0.size() != pb.dimension) throw DomainError("x0 dimension mismatch");
        if (!all_finite(cfg.x0)) throw OracleFailure("x0 not finite");
        if (!(cfg.gamma0 > 0.0) || !std::isfinite(cfg.gamma0))
            throw DomainError("gamma0 must be positive and finite");
        if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw DomainError("alpha must be in (0,1)");
        if (!(cfg.beta > 0.0 && cfg.beta < 1.0)) throw DomainError("beta must be in (0,1)");
        if (!(cfg.direction_cap >= 0.0)) throw DomainError("direction cap must be nonnegative");
        if (!(cfg.epsilon >= 0.0)) throw DomainError("epsilon must be nonnegative");
        if (cfg.max_tgamma_evals == 0) throw DomainError("evaluation budget must be positive");
    }

    double pk(std::size_t k) const {
        if (!cfg.nonmonotone) return 1.0;
        const double p = cfg.nonmonotone(k);
        if (!(p > 0.0 && p <= 1.0)) throw DomainError("nonmonotone weight outside (0,1]");
        return p;
    }

    PgStep pg(Vector x, double f_x, Vector grad_x, double gamma, std::size_t k, double tau,
              const Vector& warm) {
        if (evals >= cfg.max_tgamma_evals) throw BudgetSignal{};
        ++evals;
        PgStep s = inexact ? pg_step(pb, std::move(x), f_x, std::move(grad_x), gamma, *inexact,
                                     warm, inexact->delta_for(k))
                           : pg_step(pb, std::move(x), f_x, std::move(grad_x), gamma);
        TraceRecord rec;
        rec.tgamma_eval_index = evals;
        rec.k = k;
        rec.x = s.base;
        rec.x_bar = s.candidate;
        rec.gamma = gamma;
        rec.tau = tau;
        rec.phi = s.fbe_value;
        rec.residual_norm = s.residual_norm;
        rec.cost_phi = s.f_at_base + pb.nonsmooth->g_eval(s.base);
        report.trace.push_back(std::move(rec));
        return s;
    }

    PgStep pg_at(Vector x, double gamma, std::size_t k, double tau, const Vector& warm) {
        const double fx = pb.smooth->eval(x);
        Vector gx = pb.smooth->grad(x);
        return pg(std::move(x), fx, std::move(gx), gamma, k, tau, warm);
    }

    double halve(double gamma) {
        const double next = gamma / 2.0;
        if (next < gamma_floor) throw StepsizeFloorSignal{};
        if (provider) provider->notify_gamma_changed(next);
        return next;
    }

    bool gamma_check_bad(const PgStep& s) {
        f_at_candidate = pb.smooth->eval(s.candidate);
        if (gamma_condition_violated(f_at_candidate, s, cfg.alpha)) return true;
        if (phase == TerminationPhase::Strengthened && grad_diff_condition_violated(pb, s))
            return true;
        return false;
    }

    // Halve gamma at a fixed base point until the stepsize check passes.
    PgStep gamma_linesearch(PgStep s, double& gamma, std::size_t k, double tau,
                            const Vector& warm, std::size_t& backtracks) {
        while (gamma_check_bad(s)) {
            gamma = halve(gamma);
            ++backtracks;
            s = pg(s.base, s.f_at_base, s.grad_at_base, gamma, k, tau, warm);
        }
        return s;
    }

    void record_iterate(std::size_t k, double tau, std::size_t gamma_bt, std::size_t tau_bt) {
        IterateState st;
        st.k = k;
        st.x = cur.base;
        st.x_bar = cur.candidate;
        st.gamma = cur.gamma;
        st.tau = tau;
        st.phi = merit;
        st.fbe = cur.fbe_value;
        st.delta_k = (1.0 - cfg.alpha) / (2.0 * cur.gamma) * cur.step_norm_sq;
        st.residual_norm = cur.residual_norm;
        st.tgamma_evals = evals;
        st.gamma_backtracks = gamma_bt;
        st.tau_backtracks = tau_bt;
        report.iterates.push_back(std::move(st));
    }

    // Guaranteed inequalities, checked after every accepted iteration k >= 1
    // of the adaptive solvers (not the classic one, which provides none).
    // skip_decrease covers the tau-floor fallback, whose acceptance bypasses
    // the linesearch test.
    void check_acceptance_invariants(double merit_prev, double delta_prev, bool skip_decrease) {
        if (!cfg.validate_invariants) return;
        const double tol = 1e-12 * (1.0 + std::abs(merit_prev) + std::abs(merit));
        const double phi_cand = f_at_candidate + cur.g_at_candidate;
        const double delta_k = (1.0 - cfg.alpha) / (2.0 * cur.gamma) * cur.step_norm_sq;
        if (phi_cand + delta_k > merit + tol)
            throw InvariantViolation("descent chain violated at the candidate");
        if (cur.fbe_value > merit + tol)
            throw InvariantViolation("envelope value exceeds the merit");
        if (!skip_decrease && merit > merit_prev - cfg.beta * delta_prev + tol)
            throw InvariantViolation("merit failed its sufficient decrease");
        if (merit > merit_prev + tol) throw InvariantViolation("merit increased");
        if (phi_cand > merit0 + 1e-12 * (1.0 + std::abs(merit0)))
            throw InvariantViolation("candidate left the initial sublevel set");
    }

    // k = 0: pg at x0, then the stepsize linesearch; the first merit is the
    // envelope value under the settled stepsize.
    void init() {
        double gamma = cfg.gamma0;
        const double f0 = pb.smooth->eval(cfg.x0);
        Vector g0 = pb.smooth->grad(cfg.x0);
        std::size_t backtracks = 0;
        cur = pg(cfg.x0, f0, std::move(g0), gamma, 0, 0.0, cfg.x0);
        cur = gamma_linesearch(std::move(cur), gamma, 0, 0.0, cfg.x0, backtracks);
        merit = merit0 = cur.fbe_value;
        record_iterate(0, 0.0, backtracks, 0);
    }

    bool decide(std::size_t /*k*/) {
        const TerminationDecision t = check_termination(report.iterates.back(), pb, cfg, phase);
        if (t == TerminationDecision::EnterStrengthened) phase = TerminationPhase::Strengthened;
        return t == TerminationDecision::Stop;
    }

    void cap(Vector& d, double step_sq_prev) const {
        const double nd = norm(d);
        const double bound = cfg.direction_cap * std::sqrt(step_sq_prev);
        if (nd > bound) {
            if (bound == 0.0)
                std::fill(d.begin(), d.end(), 0.0);
            else
                scale(d, bound / nd);
        }
    }

    Vector propose_checked(DirectionProvider& dir, const Vector& x_prev, const Vector& xbar_prev,
                           double gamma_prev, double gamma, double step_sq_prev) {
        Vector d = dir.propose(x_prev, xbar_prev, gamma_prev, gamma);
        if (d.size() != pb.dimension) throw DomainError("direction dimension mismatch");
        if (!all_finite(d)) throw OracleFailure("direction not finite");
        cap(d, step_sq_prev);
        return d;
    }

    // The entangled loop: the stepsize check runs on every trial candidate,
    // a failure halves gamma and re-selects the direction (tau resets), and
    // only then is the linesearch test evaluated.
    void run_plus(DirectionProvider& dir) {
        provider = &dir;
        init();
        if (decide(0)) return;
        for (std::size_t k = 1;; ++k) {
            const Vector x_prev = cur.base;
            const Vector xbar_prev = cur.candidate;
            const double gamma_prev = cur.gamma;
            const double step_sq_prev = cur.step_norm_sq;
            const double merit_prev = merit;
            const double delta_prev = (1.0 - cfg.alpha) / (2.0 * gamma_prev) * step_sq_prev;
            const double p = pk(k);
            double gamma = gamma_prev;
            std::size_t gamma_bt = 0;
            std::size_t tau_bt = 0;
            double tau = 1.0;
            bool fallback = false;

            for (;;) { // direction (re-)selection
                const Vector d =
                    propose_checked(dir, x_prev, xbar_prev, gamma_prev, gamma, step_sq_prev);
                tau = 1.0;
                bool gamma_changed = false;
                for (;;) { // tau trials
                    cur = pg_at(damped_update(xbar_prev, x_prev, d, tau), gamma, k, tau,
                                xbar_prev);
                    if (gamma_check_bad(cur)) {
                        gamma = halve(gamma);
                        ++gamma_bt;
                        gamma_changed = true;
                        break;
                    }
                    const double trial = apply_nonmonotone(merit_prev, cur.fbe_value, p);
                    if (!tau_condition_violated(trial, merit_prev, step_sq_prev, gamma_prev,
                                                cfg.alpha, cfg.beta)) {
                        merit = trial;
                        break;
                    }
                    tau /= 2.0;
                    ++tau_bt;
                    if (tau < kTauFloor) {
                        fallback = true;
                        break;
                    }
                }
                if (gamma_changed) continue;
                if (fallback) {
                    // tau -> 0 limit is the pg step from the previous
                    // candidate, which satisfies the linesearch test by
                    // construction; only the stepsize check still applies.
                    tau = 0.0;
                    cur = pg_at(Vector(xbar_prev), gamma, k, 0.0, xbar_prev);
                    cur = gamma_linesearch(std::move(cur), gamma, k, 0.0, xbar_prev, gamma_bt);
                    merit = apply_nonmonotone(merit_prev, cur.fbe_value, p);
                }
                break;
            }

            check_acceptance_invariants(merit_prev, delta_prev, fallback);
            record_iterate(k, tau, gamma_bt, tau_bt);
            if (decide(k)) return;
        }
    }

    // The asynchronous loop: the linesearch test runs entirely under the
    // previous stepsize, and gamma is only re-examined after acceptance.
    // That mismatch is exactly what the divergence cases exploit.
    void run_classic(DirectionProvider& dir) {
        provider = &dir;
        init();
        if (decide(0)) return;
        for (std::size_t k = 1;; ++k) {
            const Vector x_prev = cur.base;
            const Vector xbar_prev = cur.candidate;
            const double gamma_prev = cur.gamma;
            const double step_sq_prev = cur.step_norm_sq;
            const double merit_prev = merit;
            const double p = pk(k);
            std::size_t gamma_bt = 0;
            std::size_t tau_bt = 0;

            const Vector d =
                propose_checked(dir, x_prev, xbar_prev, gamma_prev, gamma_prev, step_sq_prev);
            double tau = 1.0;
            for (;;) {
                cur = pg_at(damped_update(xbar_prev, x_prev, d, tau), gamma_prev, k, tau,
                            xbar_prev);
                const double trial = apply_nonmonotone(merit_prev, cur.fbe_value, p);
                if (!tau_condition_violated(trial, merit_prev, step_sq_prev, gamma_prev,
                                            cfg.alpha, cfg.beta))
                    break;
                tau /= 2.0;
                ++tau_bt;
                if (tau < kTauFloor) {
                    tau = 0.0;
                    cur = pg_at(Vector(xbar_prev), gamma_prev, k, 0.0, xbar_prev);
                    break;
                }
            }
            double gamma = gamma_prev;
            cur = gamma_linesearch(std::move(cur), gamma, k, tau, xbar_prev, gamma_bt);
            merit = apply_nonmonotone(merit_prev, cur.fbe_value, p);
            record_iterate(k, tau, gamma_bt, tau_bt);
            if (decide(k)) return;
        }
    }

    // Plain adaptive pg: restart every iteration from the previous candidate.
    void run_pg() {
        if (cfg.nonmonotone) throw DomainError("adaptive pg has no merit recursion");
        init();
        if (decide(0)) return;
        for (std::size_t k = 1;; ++k) {
            const double merit_prev = merit;
            const double delta_prev = (1.0 - cfg.alpha) / (2.0 * cur.gamma) * cur.step_norm_sq;
            const Vector warm = cur.candidate;
            double gamma = cur.gamma;
            std::size_t gamma_bt = 0;
            cur = pg_at(Vector(warm), gamma, k, 0.0, warm);
            cur = gamma_linesearch(std::move(cur), gamma, k, 0.0, warm, gamma_bt);
            merit = cur.fbe_value;
            check_acceptance_invariants(merit_prev, delta_prev, false);
            record_iterate(k, 0.0, gamma_bt, 0);
            if (decide(k)) return;
        }
    }

    void finalize() {
        report.tgamma_evals = evals;
        report.final_base = cur.base;
        report.final_point = cur.candidate;
        report.final_residual = cur.residual_norm;
        report.phi_final = merit;
        report.final_prox = cur.prox;
    }
};

template <typename Run>
SolveReport drive(const CompositeProblem& pb, const SolverConfig& cfg,
                  const InexactProxWrapper* inexact, Run run) {
    Driver drv(pb, cfg, inexact);
    try {
        run(drv);
        drv.report.status = SolveStatus::Converged;
    } catch (const BudgetSignal&) {
        drv.report.status = SolveStatus::BudgetExhausted;
    } catch (const StepsizeFloorSignal&) {
        drv.report.status = SolveStatus::OracleError;
    }
    drv.finalize();
    return std::move(drv.report);
}

} // namespace detail

inline SolveReport solve_panoc_plus(const CompositeProblem& pb, const SolverConfig& cfg,
                                    DirectionProvider& direction,
                                    const InexactProxWrapper* inexact_mode = nullptr) {
    return detail::drive(pb, cfg, inexact_mode,
                         [&](detail::Driver& d) { d.run_plus(direction); });
}

inline SolveReport solve_panoc_classic(const CompositeProblem& pb, const SolverConfig& cfg,
                                       DirectionProvider& direction) {
    return detail::drive(pb, cfg, nullptr, [&](detail::Driver& d) { d.run_classic(direction); });
}

inline SolveReport solve_adaptive_pg(const CompositeProblem& pb, const SolverConfig& cfg,
                                     const InexactProxWrapper* inexact_mode = nullptr) {
    return detail::drive(pb, cfg, inexact_mode, [&](detail::Driver& d) { d.run_pg(); });
}

} // namespace panoc

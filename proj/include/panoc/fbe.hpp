#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>

#include "errors.hpp"
#include "problem.hpp"
#include "prox.hpp"
#include "vec.hpp"

namespace panoc {

// One prox-gradient evaluation at a base point: the candidate
// prox(x - gamma grad f(x)) together with every quantity the solver reuses
// (envelope value, residual, inner products). This is the unit the
// evaluation budget counts.
struct PgStep {
    Vector base;
    Vector candidate;
    double gamma = 0.0;
    double f_at_base = 0.0;
    Vector grad_at_base;
    double g_at_candidate = 0.0;
    double dir_inner = 0.0;      // <grad f(x), candidate - x>
    double step_norm_sq = 0.0;   // ||candidate - x||^2
    double residual_norm = 0.0;  // ||x - candidate|| / gamma
    double fbe_value = 0.0;      // forward-backward envelope at the base
    ProxResult prox;
};

namespace detail {
inline PgStep finish_pg_step(Vector x, double f_x, Vector grad_x, double gamma, ProxResult pr) {
    if (!all_finite(pr.point)) throw OracleFailure("prox returned non-finite point");
    if (!std::isfinite(pr.g_value)) throw OracleFailure("g not finite at prox point");
    PgStep s;
    s.base = std::move(x);
    s.candidate = pr.point;
    s.gamma = gamma;
    s.f_at_base = f_x;
    s.grad_at_base = std::move(grad_x);
    s.g_at_candidate = pr.g_value;
    const Vector diff = sub(s.candidate, s.base);
    s.dir_inner = dot(s.grad_at_base, diff);
    s.step_norm_sq = norm_sq(diff);
    // scaled norm: the squared step can underflow to zero while the step
    // itself is still nonzero, and a zero residual means "stop"
    s.residual_norm = stable_norm(diff) / gamma;
    s.fbe_value = f_x + s.dir_inner + s.g_at_candidate + s.step_norm_sq / (2.0 * gamma);
    if (std::isnan(s.fbe_value)) throw OracleFailure("envelope value is NaN");
    s.prox = std::move(pr);
    return s;
}

inline void check_pg_inputs(double f_x, const Vector& grad_x, double gamma, double prox_thr) {
    if (!(gamma > 0.0)) throw DomainError("stepsize must be positive");
    if (!(gamma < prox_thr)) throw ProxBoundViolation("stepsize at or above prox-boundedness threshold");
    if (!std::isfinite(f_x)) throw OracleFailure("smooth term not finite");
    if (!all_finite(grad_x)) throw OracleFailure("gradient not finite");
}

inline Vector forward_point(const Vector& x, const Vector& grad_x, double gamma) {
    Vector p(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) p[i] = x[i] - gamma * grad_x[i];
    return p;
}
} // namespace detail

// Exact prox-gradient step with f and grad already evaluated at x.
inline PgStep pg_step(const CompositeProblem& pb, Vector x, double f_x, Vector grad_x,
                      double gamma) {
    detail::check_pg_inputs(f_x, grad_x, gamma, pb.nonsmooth->prox_bound_threshold());
    const Vector p = detail::forward_point(x, grad_x, gamma);
    ProxResult pr = pb.nonsmooth->prox(p, gamma);
    return detail::finish_pg_step(std::move(x), f_x, std::move(grad_x), gamma, std::move(pr));
}

inline PgStep pg_step(const CompositeProblem& pb, const Vector& x, double gamma) {
    return pg_step(pb, x, pb.smooth->eval(x), pb.smooth->grad(x), gamma);
}

// Delta-stationary variant: the prox subproblem is only solved to tolerance
// delta, warm-started at a caller-chosen point. Takes the problem argument
// anyway so the call shape matches the exact overload.
inline PgStep pg_step(const CompositeProblem& pb, Vector x, double f_x, Vector grad_x,
                      double gamma, const InexactProxWrapper& w, const Vector& warm,
                      double delta) {
    (void)pb;
    detail::check_pg_inputs(f_x, grad_x, gamma, w.exact->prox_bound_threshold());
    const Vector p = detail::forward_point(x, grad_x, gamma);
    ProxResult pr = inexact_prox(w, p, gamma, warm, delta);
    return detail::finish_pg_step(std::move(x), f_x, std::move(grad_x), gamma, std::move(pr));
}

// Envelope through the Moreau envelope of g, when the oracle has it in
// closed form. Agrees with PgStep::fbe_value for exact proxes; mainly a
// cross-check.
inline std::optional<double> fbe_moreau_form(const CompositeProblem& pb, const Vector& x,
                                             double gamma) {
    const double f_x = pb.smooth->eval(x);
    const Vector grad_x = pb.smooth->grad(x);
    detail::check_pg_inputs(f_x, grad_x, gamma, pb.nonsmooth->prox_bound_threshold());
    const auto env = pb.nonsmooth->moreau_envelope(detail::forward_point(x, grad_x, gamma), gamma);
    if (!env) return std::nullopt;
    return f_x - gamma / 2.0 * norm_sq(grad_x) + *env;
}

// Augmented Lagrangian of the splitting min_{x,z} f(x) + g(z) s.t. x = z.
// At z = prox(x - gamma grad f(x)), y = -grad f(x), beta_pen = 1/gamma this
// coincides with the forward-backward envelope.
inline double aug_lagrangian(const CompositeProblem& pb, const Vector& x, const Vector& z,
                             const Vector& y, double beta_pen) {
    const double f_x = pb.smooth->eval(x);
    if (!std::isfinite(f_x)) throw OracleFailure("smooth term not finite");
    const Vector d = sub(x, z);
    return f_x + pb.nonsmooth->g_eval(z) + dot(y, d) + beta_pen / 2.0 * norm_sq(d);
}

// Stepsize test: the quadratic upper bound with margin alpha must hold at
// the candidate, otherwise gamma is too large.
inline bool gamma_condition_violated(double f_at_candidate, const PgStep& s, double alpha) {
    if (!std::isfinite(f_at_candidate)) throw OracleFailure("smooth term not finite at candidate");
    return f_at_candidate >
           s.f_at_base + s.dir_inner + alpha / (2.0 * s.gamma) * s.step_norm_sq;
}

inline bool gamma_condition_violated(const CompositeProblem& pb, const PgStep& s, double alpha) {
    return gamma_condition_violated(pb.smooth->eval(s.candidate), s, alpha);
}

// Linesearch test on the candidate envelope value against the previous
// merit: violated means tau must shrink.
inline bool tau_condition_violated(double fbe_new, double merit_prev, double prev_step_norm_sq,
                                   double prev_gamma, double alpha, double beta) {
    return fbe_new > merit_prev - beta * (1.0 - alpha) / (2.0 * prev_gamma) * prev_step_norm_sq;
}

// Strengthened stepsize test used near termination: the gradient must be
// 1/gamma-Lipschitz along the actual step.
inline bool grad_diff_condition_violated(const Vector& grad_at_candidate, const PgStep& s) {
    if (!all_finite(grad_at_candidate)) throw OracleFailure("gradient not finite at candidate");
    return stable_norm(sub(s.grad_at_base, grad_at_candidate)) > s.residual_norm;
}

inline bool grad_diff_condition_violated(const CompositeProblem& pb, const PgStep& s) {
    return grad_diff_condition_violated(pb.smooth->grad(s.candidate), s);
}

} // namespace panoc

#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <memory>
#include <utility>

#include "errors.hpp"
#include "fbe.hpp"
#include "problem.hpp"
#include "vec.hpp"

namespace panoc {

// Supplies candidate update directions to the solvers. propose sees the pair
// the previous iteration settled on (base point, its prox-gradient candidate,
// the stepsize that produced it) plus the stepsize the next step will use.
// The solver, not the provider, enforces the cap ||d|| <= D ||xbar - x||.
class DirectionProvider {
  public:
    virtual ~DirectionProvider() = default;
    virtual Vector propose(const Vector& x_prev, const Vector& xbar_prev, double gamma_prev,
                           double gamma_current) = 0;
    // Called whenever a solver halves the stepsize. Providers with curvature
    // memory must drop pairs collected under the old stepsize: the residual
    // mapping they model changes with gamma.
    virtual void notify_gamma_changed(double /*new_gamma*/) {}
};

inline Vector nominal_direction(const Vector& x, const Vector& xbar) { return sub(xbar, x); }

// Falls back to the prox-gradient step itself; combined with a unit
// linesearch this makes the accelerated solvers coincide with plain PG.
class NominalDirection final : public DirectionProvider {
  public:
    Vector propose(const Vector& x_prev, const Vector& xbar_prev, double /*gamma_prev*/,
                   double /*gamma_current*/) override {
        return nominal_direction(x_prev, xbar_prev);
    }
};

struct CurvaturePair {
    Vector s;
    Vector y;
    double rho = 0.0; // 1 / <s, y>
};

// Two-loop recursion; pairs ordered oldest first. Initial scaling uses the
// newest pair. Empty memory falls back to -gamma * residual.
inline Vector lbfgs_direction(const std::deque<CurvaturePair>& pairs, const Vector& residual,
                              double gamma) {
    if (pairs.empty()) {
        Vector d = residual;
        scale(d, -gamma);
        return d;
    }
    Vector q = residual;
    std::vector<double> alpha(pairs.size());
    for (std::size_t i = pairs.size(); i-- > 0;) {
        alpha[i] = pairs[i].rho * dot(pairs[i].s, q);
        for (std::size_t j = 0; j < q.size(); ++j) q[j] -= alpha[i] * pairs[i].y[j];
    }
    const CurvaturePair& newest = pairs.back();
    scale(q, dot(newest.s, newest.y) / dot(newest.y, newest.y));
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double beta = pairs[i].rho * dot(pairs[i].y, q);
        for (std::size_t j = 0; j < q.size(); ++j) q[j] += (alpha[i] - beta) * pairs[i].s[j];
    }
    scale(q, -1.0);
    return q;
}

// Quasi-Newton directions for the fixed-point residual R(x) = (x - xbar)/gamma.
// Pairs are only formed between consecutive proposals made under the same
// stepsize, and the whole memory is flushed when the stepsize changes.
class LbfgsDirection final : public DirectionProvider {
  public:
    explicit LbfgsDirection(std::size_t memory = 10) : capacity_(memory) {}

    Vector propose(const Vector& x_prev, const Vector& xbar_prev, double gamma_prev,
                   double /*gamma_current*/) override {
        Vector r(x_prev.size());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = (x_prev[i] - xbar_prev[i]) / gamma_prev;
        if (has_prev_ && prev_gamma_ == gamma_prev) {
            Vector s = sub(x_prev, prev_x_);
            Vector y = sub(r, prev_r_);
            const double sy = dot(s, y);
            if (sy > 1e-12 * norm(s) * norm(y)) {
                pairs_.push_back({std::move(s), std::move(y), 1.0 / sy});
                if (pairs_.size() > capacity_) pairs_.pop_front();
            }
        }
        prev_x_ = x_prev;
        prev_r_ = r;
        prev_gamma_ = gamma_prev;
        has_prev_ = true;
        // Empty memory reduces to the nominal direction; computing it as
        // xbar - x keeps that reduction exact.
        if (pairs_.empty()) return nominal_direction(x_prev, xbar_prev);
        return lbfgs_direction(pairs_, r, gamma_prev);
    }

    void notify_gamma_changed(double /*new_gamma*/) override {
        pairs_.clear();
        has_prev_ = false;
    }

    std::size_t stored_pairs() const { return pairs_.size(); }

  private:
    std::size_t capacity_;
    std::deque<CurvaturePair> pairs_;
    bool has_prev_ = false;
    Vector prev_x_;
    Vector prev_r_;
    double prev_gamma_ = 0.0;
};

// Hand-crafted scalar direction d = (9 / (2 gamma x)) (x - xbar), radially
// saturated to norm <= saturation. On the cubic problem this is exactly the
// direction that makes the non-adaptive solver diverge with x_{k+1} = 4 x_k.
inline Vector divergence_direction(const Vector& x_prev, const Vector& xbar_prev,
                                   double gamma_prev, double saturation) {
    if (x_prev.size() != 1) throw DomainError("divergence direction needs a scalar problem");
    const double x = x_prev[0];
    if (x == 0.0) throw DomainError("divergence direction undefined at x = 0");
    double d = 9.0 / (2.0 * gamma_prev * x) * (x - xbar_prev[0]);
    if (std::abs(d) > saturation) d = std::copysign(saturation, d);
    return {d};
}

class DivergenceDirection final : public DirectionProvider {
  public:
    explicit DivergenceDirection(double saturation = std::numeric_limits<double>::infinity())
        : saturation_(saturation) {}

    Vector propose(const Vector& x_prev, const Vector& xbar_prev, double gamma_prev,
                   double /*gamma_current*/) override {
        return divergence_direction(x_prev, xbar_prev, gamma_prev, saturation_);
    }

  private:
    double saturation_;
};

// Regularized Newton step on the forward-backward envelope of a scalar
// problem: d = -grad / max(mu, hess). The first derivative is
// (1 - gamma f''(x)) R(x). The second derivative needs the projection
// derivative pi of the prox (1 when the forward point is kept, 0 when it is
// clamped; ties at a box face take the interior value 1) and the third
// derivative of f, which we take as a central difference of f'' so kinks in
// f'' get a valid generalized value:
//   hess = -gamma f''' R + (1 - gamma f'') (1 - pi (1 - gamma f'')) / gamma.
inline Vector newton_fbe_direction_1d(const CompositeProblem& pb, const Vector& x, double gamma,
                                      double mu) {
    if (pb.dimension != 1 || x.size() != 1)
        throw DomainError("newton fbe direction needs a scalar problem");
    const auto f2 = pb.smooth->second_derivative(x[0]);
    if (!f2) throw DomainError("newton fbe direction needs a second derivative oracle");

    const PgStep s = pg_step(pb, x, gamma);
    const double r = (x[0] - s.candidate[0]) / gamma;
    const double forward = x[0] - gamma * s.grad_at_base[0];
    const double pi = s.candidate[0] == forward ? 1.0 : 0.0;

    const double h = 1e-6 * (1.0 + std::abs(x[0]));
    const auto f2p = pb.smooth->second_derivative(x[0] + h);
    const auto f2m = pb.smooth->second_derivative(x[0] - h);
    if (!f2p || !f2m) throw DomainError("newton fbe direction needs a second derivative oracle");
    const double f3 = (*f2p - *f2m) / (2.0 * h);

    const double slope = 1.0 - gamma * *f2;
    const double grad_fbe = slope * r;
    const double hess_fbe = -gamma * f3 * r + slope * (1.0 - pi * slope) / gamma;
    return {-grad_fbe / std::max(mu, hess_fbe)};
}

class NewtonFbeDirection final : public DirectionProvider {
  public:
    NewtonFbeDirection(CompositeProblem pb, double mu = 1e-6) : pb_(std::move(pb)), mu_(mu) {}

    Vector propose(const Vector& x_prev, const Vector& /*xbar_prev*/, double /*gamma_prev*/,
                   double gamma_current) override {
        return newton_fbe_direction_1d(pb_, x_prev, gamma_current, mu_);
    }

  private:
    CompositeProblem pb_;
    double mu_;
};

} // namespace panoc

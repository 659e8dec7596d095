#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <utility>

#include "errors.hpp"
#include "vec.hpp"

namespace panoc {

// Smooth part of the objective. eval/grad must be finite wherever the solver
// asks; the solver treats NaN or +-inf from these as an oracle failure.
class SmoothOracle {
  public:
    virtual ~SmoothOracle() = default;
    virtual double eval(const Vector& x) const = 0;
    virtual Vector grad(const Vector& x) const = 0;
    // Second derivative for scalar problems, used by curvature-based
    // directions. nullopt when the oracle cannot provide it.
    virtual std::optional<double> second_derivative(double /*x*/) const { return std::nullopt; }
};

// How trustworthy a prox point is.
enum class Exactness {
    Exact,           // true minimizer of the prox subproblem
    DeltaStationary, // witness v with ||v + (z - p)/gamma|| <= delta
    UniformLocal,    // value-optimal up to eps within a ball of given radius
};

struct ExactnessInfo {
    Exactness kind = Exactness::Exact;
    double delta = 0.0;  // stationarity slack (DeltaStationary)
    double radius = 0.0; // neighborhood radius (UniformLocal)
    double eps = 0.0;    // value slack (UniformLocal)
};

struct ProxResult {
    Vector point;
    double g_value = 0.0;          // g at point, must be finite
    std::optional<Vector> witness; // subgradient of g at point, when available
    ExactnessInfo exactness;
};

// Nonsmooth part. g may be extended-real-valued (+inf outside its domain)
// but must be finite at every point a prox call returns.
class ProxOracle {
  public:
    virtual ~ProxOracle() = default;
    virtual double g_eval(const Vector& x) const = 0;
    // Minimizer of g(z) + ||z - p||^2 / (2 gamma) for gamma below the
    // prox-boundedness threshold.
    virtual ProxResult prox(const Vector& p, double gamma) const = 0;
    // Stepsizes must stay strictly below this value for the prox subproblem
    // to stay bounded. +inf when any positive stepsize is fine.
    virtual double prox_bound_threshold() const {
        return std::numeric_limits<double>::infinity();
    }
    // Closed form of min_z g(z) + ||z - p||^2 / (2 gamma), when known.
    virtual std::optional<double> moreau_envelope(const Vector& /*p*/, double /*gamma*/) const {
        return std::nullopt;
    }
};

struct CompositeProblem {
    std::shared_ptr<const SmoothOracle> smooth;
    std::shared_ptr<const ProxOracle> nonsmooth;
    std::size_t dimension = 0;
};

// Full objective f + g. f must be finite; g may be +inf.
inline double phi(const CompositeProblem& pb, const Vector& x) {
    const double f = pb.smooth->eval(x);
    if (!std::isfinite(f)) throw OracleFailure("smooth term not finite in phi");
    const double g = pb.nonsmooth->g_eval(x);
    if (std::isnan(g)) throw OracleFailure("nonsmooth term is NaN in phi");
    return f + g;
}

struct SolverConfig {
    Vector x0;
    double gamma0 = 1.0;
    double alpha = 0.5;         // margin of the quadratic upper bound, in (0,1)
    double beta = 0.5;          // sufficient-decrease margin, in (0,1)
    double direction_cap = 1.0; // D: accepted directions satisfy ||d|| <= D ||xbar - x||
    double epsilon = 1e-6;      // target on ||x - xbar|| / gamma
    std::size_t max_tgamma_evals = 10000; // budget counted in prox-gradient evaluations
    // p_k in (0,1] for the averaged merit recursion
    //   Phi_k = (1 - p_k) Phi_{k-1} + p_k fbe(x^k).
    // Null means p == 1, i.e. the plain monotone merit.
    std::function<double(std::size_t)> nonmonotone;
    // After the residual first reaches the target, additionally require the
    // gradient-difference bound in the stepsize test before stopping.
    bool strengthened_termination = false;
    // Check guaranteed inequalities at runtime (descent chain, merit bound,
    // partial-sum bound) and throw InvariantViolation when they fail.
    bool validate_invariants = true;
};

// Worst relative error of the analytic gradient against central differences.
// h <= 0 picks a scale-aware default.
inline double check_gradient(const CompositeProblem& pb, const Vector& x, double h = 0.0) {
    if (h <= 0.0) h = 1e-6 * (norm(x) + 1.0);
    const Vector g = pb.smooth->grad(x);
    Vector xp = x;
    Vector xm = x;
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xp[i] = x[i] + h;
        xm[i] = x[i] - h;
        const double fd = (pb.smooth->eval(xp) - pb.smooth->eval(xm)) / (2.0 * h);
        xp[i] = x[i];
        xm[i] = x[i];
        const double err = std::abs(fd - g[i]) / (1.0 + std::abs(g[i]));
        if (err > worst) worst = err;
    }
    return worst;
}

// Smooth oracle built from plain callables, handy in tests and benches.
class FunctionSmoothOracle final : public SmoothOracle {
  public:
    using Eval = std::function<double(const Vector&)>;
    using Grad = std::function<Vector(const Vector&)>;
    using Hess1d = std::function<double(double)>;

    FunctionSmoothOracle(Eval f, Grad df, Hess1d d2f = nullptr)
        : f_(std::move(f)), df_(std::move(df)), d2f_(std::move(d2f)) {}

    double eval(const Vector& x) const override { return f_(x); }
    Vector grad(const Vector& x) const override { return df_(x); }
    std::optional<double> second_derivative(double x) const override {
        if (!d2f_) return std::nullopt;
        return d2f_(x);
    }

  private:
    Eval f_;
    Grad df_;
    Hess1d d2f_;
};

} // namespace panoc

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <utility>

#include "errors.hpp"
#include "problem.hpp"
#include "vec.hpp"

namespace panoc {

inline Vector prox_zero(const Vector& p) { return p; }

inline Vector prox_box(const Vector& p, const Vector& lower, const Vector& upper) {
    Vector z(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) z[i] = std::clamp(p[i], lower[i], upper[i]);
    return z;
}

// Soft threshold, the prox of w ||.||_1.
inline Vector prox_l1(const Vector& p, double gamma, double w) {
    Vector z(p.size());
    const double t = gamma * w;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double a = std::abs(p[i]) - t;
        z[i] = a > 0.0 ? std::copysign(a, p[i]) : 0.0;
    }
    return z;
}

// Hard threshold, the prox of w * (number of nonzeros). Coordinates at the
// threshold are tied between 0 and p_i; we resolve ties to 0.
inline Vector prox_l0(const Vector& p, double gamma, double w) {
    Vector z(p.size());
    const double thr = std::sqrt(2.0 * gamma * w);
    for (std::size_t i = 0; i < p.size(); ++i) z[i] = std::abs(p[i]) > thr ? p[i] : 0.0;
    return z;
}

namespace detail {
// Exact proxes all certify stationarity with the optimality residual of the
// prox subproblem itself.
inline Vector prox_witness(const Vector& p, const Vector& point, double gamma) {
    Vector v(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) v[i] = (p[i] - point[i]) / gamma;
    return v;
}
} // namespace detail

class ZeroFunction final : public ProxOracle {
  public:
    double g_eval(const Vector&) const override { return 0.0; }
    ProxResult prox(const Vector& p, double gamma) const override {
        ProxResult r;
        r.point = p;
        r.g_value = 0.0;
        r.witness = detail::prox_witness(p, r.point, gamma); // all zeros
        return r;
    }
    std::optional<double> moreau_envelope(const Vector&, double) const override { return 0.0; }
};

class BoxIndicator final : public ProxOracle {
  public:
    BoxIndicator(Vector lower, Vector upper)
        : lower_(std::move(lower)), upper_(std::move(upper)) {}
    // Uniform bounds [-b, b] in every coordinate.
    BoxIndicator(std::size_t n, double b)
        : lower_(n, -b), upper_(n, b) {}

    double g_eval(const Vector& x) const override {
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] < lower_[i] || x[i] > upper_[i])
                return std::numeric_limits<double>::infinity();
        return 0.0;
    }
    ProxResult prox(const Vector& p, double gamma) const override {
        ProxResult r;
        r.point = prox_box(p, lower_, upper_);
        r.g_value = 0.0;
        r.witness = detail::prox_witness(p, r.point, gamma);
        return r;
    }
    std::optional<double> moreau_envelope(const Vector& p, double gamma) const override {
        double d2 = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double below = lower_[i] - p[i];
            const double above = p[i] - upper_[i];
            const double d = std::max({below, above, 0.0});
            d2 += d * d;
        }
        return d2 / (2.0 * gamma);
    }

    const Vector& lower() const { return lower_; }
    const Vector& upper() const { return upper_; }

  private:
    Vector lower_;
    Vector upper_;
};

class L1Norm final : public ProxOracle {
  public:
    explicit L1Norm(double w) : w_(w) {}

    double g_eval(const Vector& x) const override {
        double s = 0.0;
        for (double v : x) s += std::abs(v);
        return w_ * s;
    }
    ProxResult prox(const Vector& p, double gamma) const override {
        ProxResult r;
        r.point = prox_l1(p, gamma, w_);
        r.g_value = g_eval(r.point);
        r.witness = detail::prox_witness(p, r.point, gamma);
        return r;
    }
    // Coordinatewise Huber function.
    std::optional<double> moreau_envelope(const Vector& p, double gamma) const override {
        double s = 0.0;
        for (double v : p) {
            const double a = std::abs(v);
            s += a <= gamma * w_ ? a * a / (2.0 * gamma) : w_ * a - gamma * w_ * w_ / 2.0;
        }
        return s;
    }

  private:
    double w_;
};

class ZeroNorm final : public ProxOracle {
  public:
    explicit ZeroNorm(double w) : w_(w) {}

    double g_eval(const Vector& x) const override {
        double s = 0.0;
        for (double v : x)
            if (v != 0.0) s += w_;
        return s;
    }
    ProxResult prox(const Vector& p, double gamma) const override {
        ProxResult r;
        r.point = prox_l0(p, gamma, w_);
        r.g_value = g_eval(r.point);
        r.witness = detail::prox_witness(p, r.point, gamma);
        return r;
    }
    std::optional<double> moreau_envelope(const Vector& p, double gamma) const override {
        double s = 0.0;
        for (double v : p) s += std::min(v * v / (2.0 * gamma), w_);
        return s;
    }

  private:
    double w_;
};

// Turns an exact prox oracle into a delta-stationary one by running proximal
// gradient on the prox subproblem itself until the optimality residual drops
// below delta. Used to exercise the inexact-oracle path of the solver; it is
// deliberately not a ProxOracle because its contract (warm starts, per-call
// tolerance) is different.
struct InexactProxWrapper {
    std::shared_ptr<const ProxOracle> exact;
    double delta = 1e-6;
    // Per-outer-iteration tolerance; overrides delta when set.
    std::function<double(std::size_t)> delta_schedule;
    std::size_t max_inner_iters = 100000;

    double delta_for(std::size_t k) const { return delta_schedule ? delta_schedule(k) : delta; }
};

// Approximately minimizes g(z) + ||z - p||^2 / (2 gamma), starting from warm.
// The inner splitting treats the quadratic as the smooth part (gradient
// Lipschitz with constant 1/gamma) and runs exact prox steps on g with inner
// stepsize gamma/2, so the inner objective never increases. Each step yields
// a subgradient witness v = (u - z+)/sigma of g at z+, and with sigma =
// gamma/2 the outer stationarity residual ||v + (z+ - p)/gamma|| collapses to
// ||z+ - z|| / gamma. At least one inner step is always taken, so the result
// never sits at an infeasible warm start.
inline ProxResult inexact_prox(const InexactProxWrapper& w, const Vector& p, double gamma,
                               const Vector& warm, double delta) {
    const double sigma = gamma / 2.0;
    const double g_warm = w.exact->g_eval(warm);
    const double ell_warm = std::isfinite(g_warm)
                                ? g_warm + norm_sq(sub(warm, p)) / (2.0 * gamma)
                                : std::numeric_limits<double>::infinity();

    Vector z = warm;
    for (std::size_t it = 0; it < w.max_inner_iters; ++it) {
        Vector u(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) u[i] = z[i] - sigma * (z[i] - p[i]) / gamma;
        ProxResult inner = w.exact->prox(u, sigma);
        if (!all_finite(inner.point)) throw OracleFailure("inner prox returned non-finite point");

        Vector witness(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) witness[i] = (u[i] - inner.point[i]) / sigma;
        double cert = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double c = witness[i] + (inner.point[i] - p[i]) / gamma;
            cert += c * c;
        }
        cert = std::sqrt(cert);

        z = std::move(inner.point);
        if (cert <= delta) {
            const double ell = inner.g_value + norm_sq(sub(z, p)) / (2.0 * gamma);
            if (ell > ell_warm + 1e-12 * (1.0 + std::abs(ell_warm)))
                throw InvariantViolation("inexact prox worse than its warm start");
            ProxResult r;
            r.point = std::move(z);
            r.g_value = inner.g_value;
            r.witness = std::move(witness);
            r.exactness = {Exactness::DeltaStationary, delta, 0.0, 0.0};
            return r;
        }
    }
    throw InnerBudgetExhausted("inexact prox did not reach its tolerance");
}

} // namespace panoc

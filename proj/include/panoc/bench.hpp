#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "problem.hpp"
#include "prox.hpp"
#include "vec.hpp"

namespace panoc {

enum class BenchId {
    Cubic,          // (2/9)|x|^3, unconstrained
    CubicBox,       // same smooth term inside a box |x| <= B
    CubicBoxSmooth, // cubic inside the box, extended linearly outside
    Quadratic,      // x^2 / 2
    QuadraticBox,   // (x - 3)^2 / 2 over [-1, 1]
    L1LassoSmall,   // least squares + 0.5 ||x||_1, fixed 4x3 data
    L0Small,        // distance to (2, 0.5) + count of nonzeros
};

inline const char* bench_name(BenchId id) {
    switch (id) {
        case BenchId::Cubic: return "cubic";
        case BenchId::CubicBox: return "cubic_box";
        case BenchId::CubicBoxSmooth: return "cubic_box_smooth";
        case BenchId::Quadratic: return "quadratic";
        case BenchId::QuadraticBox: return "quadratic_box";
        case BenchId::L1LassoSmall: return "l1_lasso_small";
        case BenchId::L0Small: return "l0_small";
    }
    return "?";
}

inline BenchId parse_bench_id(std::string_view name) {
    for (BenchId id : {BenchId::Cubic, BenchId::CubicBox, BenchId::CubicBoxSmooth,
                       BenchId::Quadratic, BenchId::QuadraticBox, BenchId::L1LassoSmall,
                       BenchId::L0Small})
        if (name == bench_name(id)) return id;
    throw UnknownProblem("unknown bench problem: " + std::string(name));
}

// f(x) = (2/9)|x|^3. Unbounded third-order growth; its gradient is not
// globally Lipschitz, which is what defeats a fixed-stepsize analysis.
class CubicOracle final : public SmoothOracle {
  public:
    double eval(const Vector& x) const override {
        const double a = std::abs(x[0]);
        return 2.0 / 9.0 * a * a * a;
    }
    Vector grad(const Vector& x) const override { return {2.0 / 3.0 * x[0] * std::abs(x[0])}; }
    std::optional<double> second_derivative(double x) const override {
        return 4.0 / 3.0 * std::abs(x);
    }
};

// Cubic inside [-B, B], extended linearly outside with matching slope
// (2/3)B^2, so the gradient is globally Lipschitz with constant (4/3)B.
// At the seam |x| = B the second derivative takes the inside value.
class SmoothedCubicOracle final : public SmoothOracle {
  public:
    explicit SmoothedCubicOracle(double B) : B_(B) {}

    double eval(const Vector& x) const override {
        const double a = std::abs(x[0]);
        if (a <= B_) return 2.0 / 9.0 * a * a * a;
        return 2.0 / 3.0 * B_ * B_ * (a - 2.0 / 3.0 * B_);
    }
    Vector grad(const Vector& x) const override {
        const double a = std::abs(x[0]);
        if (a <= B_) return {2.0 / 3.0 * x[0] * a};
        return {std::copysign(2.0 / 3.0 * B_ * B_, x[0])};
    }
    std::optional<double> second_derivative(double x) const override {
        const double a = std::abs(x);
        return a <= B_ ? 4.0 / 3.0 * a : 0.0;
    }

  private:
    double B_;
};

class QuadraticOracle final : public SmoothOracle {
  public:
    explicit QuadraticOracle(Vector center) : center_(std::move(center)) {}

    double eval(const Vector& x) const override { return 0.5 * norm_sq(sub(x, center_)); }
    Vector grad(const Vector& x) const override { return sub(x, center_); }
    std::optional<double> second_derivative(double /*x*/) const override {
        if (center_.size() != 1) return std::nullopt;
        return 1.0;
    }

  private:
    Vector center_;
};

// f(x) = 0.5 ||A x - b||^2 for a fixed well-conditioned 4x3 instance.
class LassoOracle final : public SmoothOracle {
  public:
    static constexpr std::size_t kRows = 4;
    static constexpr std::size_t kCols = 3;

    double eval(const Vector& x) const override {
        double s = 0.0;
        for (std::size_t i = 0; i < kRows; ++i) {
            const double r = row_dot(i, x) - b_[i];
            s += r * r;
        }
        return 0.5 * s;
    }
    Vector grad(const Vector& x) const override {
        std::array<double, kRows> r{};
        for (std::size_t i = 0; i < kRows; ++i) r[i] = row_dot(i, x) - b_[i];
        Vector g(kCols, 0.0);
        for (std::size_t i = 0; i < kRows; ++i)
            for (std::size_t j = 0; j < kCols; ++j) g[j] += a_[i][j] * r[i];
        return g;
    }

  private:
    double row_dot(std::size_t i, const Vector& x) const {
        double s = 0.0;
        for (std::size_t j = 0; j < kCols; ++j) s += a_[i][j] * x[j];
        return s;
    }

    static constexpr std::array<std::array<double, kCols>, kRows> a_ = {{
        {1.0, 0.5, -0.25},
        {-0.5, 1.0, 0.75},
        {0.25, -0.75, 1.0},
        {0.5, 0.25, -1.0},
    }};
    static constexpr std::array<double, kRows> b_ = {1.0, -0.5, 0.25, 0.75};
};

struct BenchProblem {
    BenchId id = BenchId::Cubic;
    std::string name;
    CompositeProblem problem;
    Vector x0;
    double inf_phi = 0.0; // a certified lower bound on the objective
};

inline BenchProblem build_bench_problem(BenchId id, double B = 100.0) {
    BenchProblem bp;
    bp.id = id;
    bp.name = bench_name(id);
    switch (id) {
        case BenchId::Cubic:
            bp.problem = {std::make_shared<CubicOracle>(), std::make_shared<ZeroFunction>(), 1};
            bp.x0 = {1.0};
            bp.inf_phi = 0.0;
            break;
        case BenchId::CubicBox:
            bp.problem = {std::make_shared<CubicOracle>(),
                          std::make_shared<BoxIndicator>(1, B), 1};
            bp.x0 = {1.0};
            bp.inf_phi = 0.0;
            break;
        case BenchId::CubicBoxSmooth:
            bp.problem = {std::make_shared<SmoothedCubicOracle>(B),
                          std::make_shared<BoxIndicator>(1, B), 1};
            bp.x0 = {1.0};
            bp.inf_phi = 0.0;
            break;
        case BenchId::Quadratic:
            bp.problem = {std::make_shared<QuadraticOracle>(Vector{0.0}),
                          std::make_shared<ZeroFunction>(), 1};
            bp.x0 = {1.0};
            bp.inf_phi = 0.0;
            break;
        case BenchId::QuadraticBox:
            bp.problem = {std::make_shared<QuadraticOracle>(Vector{3.0}),
                          std::make_shared<BoxIndicator>(Vector{-1.0}, Vector{1.0}), 1};
            bp.x0 = {0.0};
            bp.inf_phi = 2.0; // attained at the clamped point x = 1
            break;
        case BenchId::L1LassoSmall:
            bp.problem = {std::make_shared<LassoOracle>(), std::make_shared<L1Norm>(0.5), 3};
            bp.x0 = {0.0, 0.0, 0.0};
            bp.inf_phi = 0.0;
            break;
        case BenchId::L0Small:
            bp.problem = {std::make_shared<QuadraticOracle>(Vector{2.0, 0.5}),
                          std::make_shared<ZeroNorm>(1.0), 2};
            bp.x0 = {3.0, 3.0};
            bp.inf_phi = 1.125; // attained at (2, 0)
            break;
    }
    return bp;
}

inline std::vector<BenchProblem> all_bench_problems(double B = 100.0) {
    std::vector<BenchProblem> v;
    for (BenchId id : {BenchId::Cubic, BenchId::CubicBox, BenchId::CubicBoxSmooth,
                       BenchId::Quadratic, BenchId::QuadraticBox, BenchId::L1LassoSmall,
                       BenchId::L0Small})
        v.push_back(build_bench_problem(id, B));
    return v;
}

} // namespace panoc

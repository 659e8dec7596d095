#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace panoc {

using Vector = std::vector<double>;

inline double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm_sq(const Vector& a) { return dot(a, a); }

inline double norm(const Vector& a) { return std::sqrt(norm_sq(a)); }

// Euclidean norm with max-magnitude scaling. Stays nonzero for tiny nonzero
// vectors whose squared entries would underflow, which matters when the norm
// decides termination.
inline double stable_norm(const Vector& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    if (m == 0.0 || !std::isfinite(m)) return m;
    double s = 0.0;
    for (double v : a) {
        const double r = v / m;
        s += r * r;
    }
    return m * std::sqrt(s);
}

inline bool all_finite(const Vector& a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

inline Vector sub(const Vector& a, const Vector& b) {
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline void scale(Vector& a, double c) {
    for (double& v : a) v *= c;
}

} // namespace panoc

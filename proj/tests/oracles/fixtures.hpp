#pragma once

#include <cstdint>
#include <random>

#include "manpqn/stiefel.hpp"

namespace fixture {

using manpqn::Matrix;
using manpqn::Vector;

inline Matrix symmetric(Eigen::Index r, std::uint64_t seed) {
    const Matrix a = manpqn::gaussian_matrix(r, r, seed);
    return 0.5 * (a + a.transpose());
}

/// Entries drawn uniformly from [lo, hi).
inline Vector positive_weights(Eigen::Index n, std::uint64_t seed, double lo = 0.5, double hi = 3.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    Vector d(n);
    for (Eigen::Index i = 0; i < n; ++i) d(i) = u(rng);
    return d;
}

/// Z - X sym(X^T Z) written out by hand, independent of project_tangent.
inline Matrix tangent_at(const Matrix& x, const Matrix& z) {
    const Matrix xtz = x.transpose() * z;
    return z - x * (0.5 * (xtz + xtz.transpose()));
}

inline double max_abs(const Matrix& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace fixture

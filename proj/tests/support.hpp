#pragma once

#include "ridgekit/subspace.hpp"

#include <random>

namespace ridgekit::testing {

inline Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    Matrix A(rows, cols);
    for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = n(rng);
    return A;
}

inline Subspace random_subspace(Eigen::Index d, Eigen::Index r, std::mt19937_64& rng) {
    return orthonormalize(gaussian(d, r, rng));
}

inline Vector unit(Eigen::Index d, Eigen::Index i) {
    Vector e = Vector::Zero(d);
    e(i) = 1.0;
    return e;
}

}  // namespace ridgekit::testing

#pragma once

#include "ridgekit/subspace.hpp"

#include <cstddef>
#include <vector>

namespace ridgekit {

/// Total-degree monomial basis in r variables, graded-lexicographic order:
/// ascending total degree, and within a degree descending powers of the first
/// variable (r = 2, p = 2 gives 1, t1, t2, t1^2, t1 t2, t2^2).
class MonomialBasis {
  public:
    MonomialBasis(int reduced_dim, int degree);

    [[nodiscard]] int reduced_dim() const noexcept { return reduced_dim_; }
    [[nodiscard]] int degree() const noexcept { return degree_; }
    [[nodiscard]] std::size_t size() const noexcept { return exponents_.size(); }
    [[nodiscard]] const std::vector<std::vector<int>>& exponents() const noexcept {
        return exponents_;
    }

    /// Rows of T are points; returns the M x size() design matrix.
    [[nodiscard]] Matrix vandermonde(const Matrix& T) const;
    /// Partial derivative of every basis function with respect to variable l.
    [[nodiscard]] Matrix derivative(const Matrix& T, int l) const;

  private:
    int reduced_dim_;
    int degree_;
    std::vector<std::vector<int>> exponents_;
};

/// Binomial coefficient C(r + p, p): number of monomials of total degree <= p.
std::size_t monomial_count(int reduced_dim, int degree);

/// Polynomial ridge profile g(u). Coefficients refer to scaled coordinates
/// t = 2 (u - lo) / (hi - lo) - 1, with per-coordinate bounds taken from the
/// training projections.
class RidgeProfile {
  public:
    RidgeProfile() = default;
    RidgeProfile(int degree, Vector coeffs, Matrix bounds);

    static RidgeProfile constant(int reduced_dim, double value);

    [[nodiscard]] int reduced_dim() const noexcept { return static_cast<int>(bounds_.rows()); }
    [[nodiscard]] int degree() const noexcept { return degree_; }
    [[nodiscard]] const Vector& coeffs() const noexcept { return coeffs_; }
    /// r x 2 matrix of [lo, hi] per reduced coordinate.
    [[nodiscard]] const Matrix& bounds() const noexcept { return bounds_; }

    [[nodiscard]] double value(const Vector& u) const;
    [[nodiscard]] Vector gradient(const Vector& u) const;

    /// Batched forms over the rows of U (M x r).
    [[nodiscard]] Vector values(const Matrix& U) const;
    [[nodiscard]] Matrix gradients(const Matrix& U) const;

    /// Coefficients of the same polynomial expressed in raw u monomials, in
    /// the graded-lex order of MonomialBasis.
    [[nodiscard]] Vector raw_coeffs() const;

    [[nodiscard]] Matrix scale(const Matrix& U) const;

  private:
    int degree_ = 0;
    Vector coeffs_;
    Matrix bounds_;
};

/// Bounds used for the affine map of projected coordinates onto [-1, 1].
Matrix coordinate_bounds(const Matrix& U);

struct NodalRidgeModel {
    Subspace directions;
    RidgeProfile profile;

    [[nodiscard]] Eigen::Index ambient_dim() const noexcept { return directions.ambient_dim(); }
};

/// Least-squares polynomial profile over coordinates U (rows are points).
RidgeProfile fit_profile_coords(const Matrix& U, const Vector& y, int degree);

/// Least-squares polynomial profile over the projections of the rows of X onto
/// S. Throws InsufficientSamples when M < C(r+p, p) and IllConditioned when the
/// scaled design matrix has condition number above 1e12.
RidgeProfile fit_profile(const Subspace& S, const Matrix& X, const Vector& y, int degree);

double evaluate(const NodalRidgeModel& model, const Vector& x);
Vector gradient(const NodalRidgeModel& model, const Vector& x);

Vector evaluate_many(const NodalRidgeModel& model, const Matrix& X);
/// Row m holds the gradient at X.row(m).
Matrix gradient_many(const NodalRidgeModel& model, const Matrix& X);

/// Sum of squared residuals of model on (X, y).
double residual_sum_squares(const NodalRidgeModel& model, const Matrix& X, const Vector& y);

}  // namespace ridgekit

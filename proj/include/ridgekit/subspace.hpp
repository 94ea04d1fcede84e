#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace ridgekit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Column space of a d x r matrix with orthonormal columns.
///
/// Instances are only produced by orthonormalize() (or from_orthonormal(),
/// which validates), so basis().transpose() * basis() is the identity to
/// within 1e-10 and 1 <= r <= d always hold.
class Subspace {
  public:
    Subspace() = default;

    /// Wrap a basis that is already orthonormal. Throws RankDeficient when it
    /// is not orthonormal to 1e-10.
    static Subspace from_orthonormal(Matrix basis);

    [[nodiscard]] const Matrix& basis() const noexcept { return basis_; }
    [[nodiscard]] Eigen::Index ambient_dim() const noexcept { return basis_.rows(); }
    [[nodiscard]] Eigen::Index dim() const noexcept { return basis_.cols(); }
    [[nodiscard]] bool empty() const noexcept { return basis_.size() == 0; }

    /// Orthogonal projector basis * basis^T.
    [[nodiscard]] Matrix projector() const { return basis_ * basis_.transpose(); }

    /// Coordinates of rows of X (M x d) in the subspace, i.e. X * basis.
    [[nodiscard]] Matrix project(const Matrix& X) const;

  private:
    friend Subspace orthonormalize(const Matrix& A);
    explicit Subspace(Matrix basis) : basis_(std::move(basis)) {}

    Matrix basis_;
};

/// Thin orthonormalization of the columns of A. Columns of the result follow
/// the sign convention "first nonzero entry positive". A basis that is already
/// orthonormal to 1e-12 is returned unchanged apart from that sign convention,
/// which makes the operation idempotent.
Subspace orthonormalize(const Matrix& A);

/// Spectral norm of the projector difference ||W1 W1^T - W2 W2^T||_2.
double subspace_distance(const Subspace& a, const Subspace& b);

/// Principal angles theta_1 <= ... <= theta_r in [0, pi/2] between two
/// equidimensional subspaces.
Vector principal_angles(const Subspace& a, const Subspace& b);

/// Principal vectors: bases Wa of a and Wb of b with Wa.col(i).dot(Wb.col(i))
/// = cos(theta_i), ordered like principal_angles().
struct PrincipalPair {
    Matrix a;
    Matrix b;
    Vector angles;
};
PrincipalPair principal_vectors(const Subspace& a, const Subspace& b);

struct SymmetricSpectrum {
    Vector eigenvalues;   // descending
    Matrix eigenvectors;  // column k pairs with eigenvalues(k)
};

/// Eigendecomposition of a symmetric matrix, eigenvalues descending with ties
/// broken by the solver's column index. Eigenvector signs follow the same
/// convention as orthonormalize().
SymmetricSpectrum symmetric_eig(const Matrix& C);

/// Subspace spanned by the leading k eigenvectors of a spectrum.
Subspace leading_subspace(const SymmetricSpectrum& spectrum, Eigen::Index k);

/// Flip columns so that the first entry with magnitude above 1e-12 is positive.
void apply_sign_convention(Matrix& basis);

}  // namespace ridgekit

#include "ridgekit/subspace.hpp"

#include "ridgekit/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace ridgekit {

namespace {

constexpr double kPassThroughTol = 1e-12;
constexpr double kOrthonormalTol = 1e-10;
constexpr double kRankTol = 1e-12;
constexpr double kSymmetryTol = 1e-8;

double orthonormality_defect(const Matrix& B) {
    const Matrix G = B.transpose() * B;
    return (G - Matrix::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
}

void require_same_ambient(const Subspace& a, const Subspace& b) {
    if (a.ambient_dim() != b.ambient_dim()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "subspaces live in R^" + std::to_string(a.ambient_dim()) + " and R^" +
                        std::to_string(b.ambient_dim()));
    }
}

}  // namespace

void apply_sign_convention(Matrix& basis) {
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
        for (Eigen::Index i = 0; i < basis.rows(); ++i) {
            const double v = basis(i, j);
            if (std::abs(v) > 1e-12) {
                if (v < 0.0) basis.col(j) *= -1.0;
                break;
            }
        }
    }
}

Subspace Subspace::from_orthonormal(Matrix basis) {
    if (basis.cols() < 1 || basis.cols() > basis.rows()) {
        throw Error(ErrorCode::InvalidArgument, "subspace dimension must satisfy 1 <= r <= d");
    }
    if (!basis.allFinite() || orthonormality_defect(basis) > kOrthonormalTol) {
        throw Error(ErrorCode::RankDeficient, "basis columns are not orthonormal");
    }
    return Subspace(std::move(basis));
}

Matrix Subspace::project(const Matrix& X) const {
    if (X.cols() != ambient_dim()) {
        throw Error(ErrorCode::DimensionMismatch, "sample matrix has " + std::to_string(X.cols()) +
                                                      " columns, subspace expects " +
                                                      std::to_string(ambient_dim()));
    }
    return X * basis_;
}

Subspace orthonormalize(const Matrix& A) {
    const auto d = A.rows();
    const auto r = A.cols();
    if (r < 1 || r > d) {
        throw Error(ErrorCode::RankDeficient, "cannot hold " + std::to_string(r) +
                                                  " independent columns in R^" + std::to_string(d));
    }
    if (!A.allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite entries");

    if (orthonormality_defect(A) <= kPassThroughTol) {
        Matrix B = A;
        apply_sign_convention(B);
        return Subspace(std::move(B));
    }

    const Eigen::JacobiSVD<Matrix> svd(A);
    const Vector& sv = svd.singularValues();
    if (sv(0) <= 0.0 || sv(r - 1) <= kRankTol * sv(0)) {
        throw Error(ErrorCode::RankDeficient, "numerical rank below " + std::to_string(r));
    }

    const Eigen::HouseholderQR<Matrix> qr(A);
    Matrix Q = qr.householderQ() * Matrix::Identity(d, r);
    apply_sign_convention(Q);
    return Subspace(std::move(Q));
}

double subspace_distance(const Subspace& a, const Subspace& b) {
    require_same_ambient(a, b);
    const auto d = a.ambient_dim();
    const auto ra = a.dim();
    const auto rb = b.dim();

    if (ra + rb >= d) {
        const Matrix diff = a.projector() - b.projector();
        const Eigen::SelfAdjointEigenSolver<Matrix> eig(diff, Eigen::EigenvaluesOnly);
        return eig.eigenvalues().cwiseAbs().maxCoeff();
    }

    // P_a - P_b = M S M^T with M = [Wa Wb], S = diag(I, -I). Its nonzero
    // spectrum equals that of G^{1/2} S G^{1/2} with G = M^T M.
    Matrix M(d, ra + rb);
    M << a.basis(), b.basis();
    const Matrix G = M.transpose() * M;
    const Eigen::SelfAdjointEigenSolver<Matrix> geig(G);
    const Vector root = geig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Matrix half = geig.eigenvectors() * root.asDiagonal() * geig.eigenvectors().transpose();
    Vector s = Vector::Ones(ra + rb);
    s.tail(rb).setConstant(-1.0);
    const Matrix core = half * s.asDiagonal() * half;
    const Eigen::SelfAdjointEigenSolver<Matrix> ceig(core, Eigen::EigenvaluesOnly);
    return std::min(1.0, ceig.eigenvalues().cwiseAbs().maxCoeff());
}

PrincipalPair principal_vectors(const Subspace& a, const Subspace& b) {
    require_same_ambient(a, b);
    if (a.dim() != b.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "principal angles need equal subspace dimensions");
    }
    const Matrix cross = a.basis().transpose() * b.basis();
    const Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector cosines = svd.singularValues().cwiseMax(0.0).cwiseMin(1.0);

    PrincipalPair out;
    out.a = a.basis() * svd.matrixU();
    out.b = b.basis() * svd.matrixV();
    // Singular values come sorted descending, so angles ascend.
    out.angles = cosines.unaryExpr([](double c) { return std::acos(c); });
    return out;
}

Vector principal_angles(const Subspace& a, const Subspace& b) {
    return principal_vectors(a, b).angles;
}

SymmetricSpectrum symmetric_eig(const Matrix& C) {
    if (C.rows() != C.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "matrix is not square");
    }
    if (!C.allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite entries");
    const double scale = std::max(1.0, C.cwiseAbs().maxCoeff());
    const double asym = (C - C.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTol * scale) {
        throw Error(ErrorCode::NotSymmetric, "asymmetry " + std::to_string(asym));
    }
    const Matrix sym = 0.5 * (C + C.transpose());
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    if (eig.info() != Eigen::Success) {
        throw Error(ErrorCode::InvalidArgument, "eigendecomposition failed");
    }

    const auto n = sym.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
        return eig.eigenvalues()(i) > eig.eigenvalues()(j);
    });

    SymmetricSpectrum out;
    out.eigenvalues.resize(n);
    out.eigenvectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out.eigenvalues(k) = eig.eigenvalues()(order[static_cast<std::size_t>(k)]);
        out.eigenvectors.col(k) = eig.eigenvectors().col(order[static_cast<std::size_t>(k)]);
    }
    apply_sign_convention(out.eigenvectors);
    return out;
}

Subspace leading_subspace(const SymmetricSpectrum& spectrum, Eigen::Index k) {
    if (k < 1 || k > spectrum.eigenvectors.cols()) {
        throw Error(ErrorCode::InvalidArgument, "requested " + std::to_string(k) +
                                                    " leading eigenvectors of a " +
                                                    std::to_string(spectrum.eigenvectors.cols()) +
                                                    "-dimensional spectrum");
    }
    return orthonormalize(spectrum.eigenvectors.leftCols(k));
}

}  // namespace ridgekit

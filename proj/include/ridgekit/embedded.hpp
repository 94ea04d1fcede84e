#pragma once

#include "ridgekit/ridge_fit.hpp"
#include "ridgekit/ridge_model.hpp"
#include "ridgekit/subspace.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace ridgekit {

/// Field snapshots: column i of F holds f(x^(m), s_i) for the inputs in the
/// rows of X; node_coords row i is the location s_i (may be empty).
struct FieldSamples {
    Matrix X;
    Matrix F;
    Matrix node_coords;

    [[nodiscard]] Eigen::Index samples() const noexcept { return X.rows(); }
    [[nodiscard]] Eigen::Index nodes() const noexcept { return F.cols(); }
    void validate() const;
};

/// Throws InvalidArgument unless omega is finite with at least one nonzero.
void validate_weights(const Vector& omega);

enum class NodeStatus { Ok, Degenerate, Failed };

struct EmbeddedRidgeModel {
    std::vector<NodalRidgeModel> nodes;
    std::vector<NodeStatus> status;
    /// Direction-fit convergence per node (false also for degenerate nodes).
    std::vector<bool> converged;
    Vector weights;
    Matrix node_coords;

    [[nodiscard]] Eigen::Index ambient_dim() const;
    [[nodiscard]] std::size_t size() const noexcept { return nodes.size(); }
    [[nodiscard]] std::size_t failed_count() const;
};

struct EmbeddedFitOptions {
    FitterSpec fitter;
    int r_per_node = 1;
    /// Degree of the nodal ridge profiles fitted after the directions.
    int profile_degree = 2;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
};

/// Fit one ridge model per field node on the shared inputs. Constant columns
/// become Degenerate nodes (constant profile, zero gradient). Nodes whose fit
/// throws are stored as constant-mean Failed nodes; the call throws
/// DidNotConverge only when more than half the nodes fail. Node i draws its
/// random numbers from seed ^ i.
EmbeddedRidgeModel fit_embedded(const FieldSamples& field, const Vector& weights,
                                const EmbeddedFitOptions& options);

/// d x N Jacobian: column i is the gradient of node i at x.
Matrix jacobian(const EmbeddedRidgeModel& model, const Vector& x);

/// Rows are the weighted gradients J(x_m) omega for the rows x_m of X.
Matrix weighted_gradients(const EmbeddedRidgeModel& model, const Matrix& X,
                          std::size_t threads = 1);

/// (1/M) sum_m J(x_m) omega omega^T J(x_m)^T, accumulated in fixed 128-row
/// blocks and combined by a pairwise tree so the result does not depend on the
/// worker count.
Matrix gradient_covariance(const EmbeddedRidgeModel& model, const Matrix& X_eval,
                           std::size_t threads = 1);

struct QoiRidgeModel {
    Subspace subspace;
    RidgeProfile profile;
    SymmetricSpectrum spectrum;
};

struct QoiSubspace {
    Subspace subspace;
    SymmetricSpectrum spectrum;
};

/// Leading k eigenvectors of the gradient covariance evaluated at X.
QoiSubspace qoi_subspace(const EmbeddedRidgeModel& model, const Matrix& X, Eigen::Index k,
                         std::size_t threads = 1);

/// Leading-k subspace of the gradient covariance at X_cov (defaults to X),
/// then a degree-p profile fitted on (U^T x^(m), y_qoi^(m)).
QoiRidgeModel extract_qoi_ridge(const EmbeddedRidgeModel& model, const Matrix& X,
                                const Vector& y_qoi, Eigen::Index k, int degree,
                                const std::optional<Matrix>& X_cov = std::nullopt,
                                std::size_t threads = 1);

/// Ratios lambda_k / lambda_{k+1} of consecutive eigenvalues (inf where the
/// next eigenvalue is zero); large entries mark a natural cut for k_qoi.
Vector eigenvalue_gaps(const SymmetricSpectrum& spectrum);

Vector predict(const QoiRidgeModel& model, const Matrix& X);

/// Nodal predictions, M x N.
Matrix predict_field(const EmbeddedRidgeModel& model, const Matrix& X);

/// Variance-normalized MSE (1/M') sum (h - h_hat)^2 / s_h^2 where s_h^2 is the
/// sample variance (denominator M' - 1) of h_true. Throws ZeroVariance.
double qoi_mse(const QoiRidgeModel& model, const Matrix& Y_eval, const Vector& h_true);

/// Same metric for an arbitrary prediction vector.
double normalized_mse(const Vector& truth, const Vector& prediction);

}  // namespace ridgekit

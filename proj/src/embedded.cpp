#include "ridgekit/embedded.hpp"

#include "ridgekit/error.hpp"
#include "ridgekit/parallel.hpp"

#include <cmath>
#include <string>

namespace ridgekit {

void FieldSamples::validate() const {
    if (X.rows() < 1 || F.cols() < 1) throw Error(ErrorCode::InvalidArgument, "empty field samples");
    if (F.rows() != X.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "X and F have different sample counts");
    }
    if (node_coords.size() > 0 && node_coords.rows() != F.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "node_coords must have one row per node");
    }
    if (!X.allFinite() || !F.allFinite() || !node_coords.allFinite()) {
        throw Error(ErrorCode::InvalidArgument, "field samples contain NaN or Inf");
    }
}

void validate_weights(const Vector& omega) {
    if (omega.size() == 0 || !omega.allFinite() || omega.cwiseAbs().maxCoeff() == 0.0) {
        throw Error(ErrorCode::InvalidArgument, "quadrature weights must be finite and not all zero");
    }
}

Eigen::Index EmbeddedRidgeModel::ambient_dim() const {
    return nodes.empty() ? 0 : nodes.front().ambient_dim();
}

std::size_t EmbeddedRidgeModel::failed_count() const {
    std::size_t n = 0;
    for (auto s : status) n += (s == NodeStatus::Failed) ? 1 : 0;
    return n;
}

namespace {

NodalRidgeModel constant_node(Eigen::Index d, int r, double value) {
    return {orthonormalize(Matrix::Identity(d, r)), RidgeProfile::constant(r, value)};
}

bool is_constant(const Vector& column) {
    const double lo = column.minCoeff();
    const double hi = column.maxCoeff();
    return hi - lo <= 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
}

}  // namespace

EmbeddedRidgeModel fit_embedded(const FieldSamples& field, const Vector& weights,
                                const EmbeddedFitOptions& options) {
    field.validate();
    validate_weights(weights);
    const auto N = field.nodes();
    if (weights.size() != N) {
        throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(N) + " weights");
    }
    const auto d = field.X.cols();
    const int r = options.r_per_node;

    EmbeddedRidgeModel model;
    model.nodes.resize(static_cast<std::size_t>(N));
    model.status.resize(static_cast<std::size_t>(N), NodeStatus::Ok);
    model.converged.resize(static_cast<std::size_t>(N), false);
    model.weights = weights;
    model.node_coords = field.node_coords;

    std::vector<char> converged(static_cast<std::size_t>(N), 0);
    parallel_for(static_cast<std::size_t>(N), resolve_thread_count(options.threads), [&](std::size_t i) {
        const Vector y = field.F.col(static_cast<Eigen::Index>(i));
        if (is_constant(y)) {
            model.nodes[i] = constant_node(d, r, y.mean());
            model.status[i] = NodeStatus::Degenerate;
            return;
        }
        try {
            const SampleSet data{field.X, y};
            const DirectionFit fit = fit_directions(data, options.fitter, r, options.seed ^ i);
            model.nodes[i] = {fit.subspace, fit_profile(fit.subspace, field.X, y, options.profile_degree)};
            converged[i] = fit.converged ? 1 : 0;
        } catch (const Error& e) {
            model.nodes[i] = constant_node(d, r, y.mean());
            model.status[i] = e.code() == ErrorCode::Degenerate ? NodeStatus::Degenerate : NodeStatus::Failed;
        }
    });
    for (std::size_t i = 0; i < converged.size(); ++i) model.converged[i] = converged[i] != 0;

    if (2 * model.failed_count() > static_cast<std::size_t>(N)) {
        throw Error(ErrorCode::DidNotConverge, std::to_string(model.failed_count()) + " of " +
                                                   std::to_string(N) + " nodal fits failed");
    }
    return model;
}

Matrix jacobian(const EmbeddedRidgeModel& model, const Vector& x) {
    const auto d = model.ambient_dim();
    if (x.size() != d) throw Error(ErrorCode::DimensionMismatch, "input has length " + std::to_string(x.size()));
    Matrix J(d, static_cast<Eigen::Index>(model.size()));
    for (std::size_t i = 0; i < model.size(); ++i) {
        J.col(static_cast<Eigen::Index>(i)) = gradient(model.nodes[i], x);
    }
    return J;
}

Matrix weighted_gradients(const EmbeddedRidgeModel& model, const Matrix& X, std::size_t threads) {
    const auto d = model.ambient_dim();
    if (X.cols() != d) throw Error(ErrorCode::DimensionMismatch, "evaluation points have the wrong width");
    constexpr Eigen::Index kBlock = 128;
    const Eigen::Index M = X.rows();
    const auto n_blocks = static_cast<std::size_t>((M + kBlock - 1) / kBlock);
    Matrix G = Matrix::Zero(M, d);
    parallel_for(n_blocks, threads, [&](std::size_t b) {
        const Eigen::Index start = static_cast<Eigen::Index>(b) * kBlock;
        const Eigen::Index rows = std::min(kBlock, M - start);
        const Matrix Xb = X.middleRows(start, rows);
        Matrix Gb = Matrix::Zero(rows, d);
        for (std::size_t i = 0; i < model.size(); ++i) {
            const double w = model.weights(static_cast<Eigen::Index>(i));
            if (w == 0.0) continue;
            Gb += w * gradient_many(model.nodes[i], Xb);
        }
        G.middleRows(start, rows) = Gb;
    });
    return G;
}

Matrix gradient_covariance(const EmbeddedRidgeModel& model, const Matrix& X_eval, std::size_t threads) {
    if (X_eval.rows() < 1) throw Error(ErrorCode::InvalidArgument, "no evaluation points");
    if (model.weights.size() != static_cast<Eigen::Index>(model.size())) {
        throw Error(ErrorCode::DimensionMismatch, "weights do not match node count");
    }
    const auto d = model.ambient_dim();
    const Matrix G = weighted_gradients(model, X_eval, threads);

    constexpr Eigen::Index kBlock = 128;
    const Eigen::Index M = G.rows();
    const auto n_blocks = static_cast<std::size_t>((M + kBlock - 1) / kBlock);
    std::vector<Matrix> partial(n_blocks);
    parallel_for(n_blocks, threads, [&](std::size_t b) {
        const Eigen::Index start = static_cast<Eigen::Index>(b) * kBlock;
        const Eigen::Index rows = std::min(kBlock, M - start);
        const auto Gb = G.middleRows(start, rows);
        partial[b] = Gb.transpose() * Gb;
    });
    for (std::size_t stride = 1; stride < n_blocks; stride *= 2) {
        for (std::size_t b = 0; b + stride < n_blocks; b += 2 * stride) partial[b] += partial[b + stride];
    }
    Matrix C = partial.empty() ? Matrix::Zero(d, d) : partial.front();
    C /= static_cast<double>(M);
    return 0.5 * (C + C.transpose());
}

QoiSubspace qoi_subspace(const EmbeddedRidgeModel& model, const Matrix& X, Eigen::Index k,
                         std::size_t threads) {
    if (k < 1 || k > model.ambient_dim()) {
        throw Error(ErrorCode::InvalidArgument, "k_qoi must lie in [1, d]");
    }
    QoiSubspace out;
    out.spectrum = symmetric_eig(gradient_covariance(model, X, threads));
    out.subspace = leading_subspace(out.spectrum, k);
    return out;
}

QoiRidgeModel extract_qoi_ridge(const EmbeddedRidgeModel& model, const Matrix& X, const Vector& y_qoi,
                                Eigen::Index k, int degree, const std::optional<Matrix>& X_cov,
                                std::size_t threads) {
    if (y_qoi.size() != X.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "qoi samples do not match the inputs");
    }
    QoiSubspace sub = qoi_subspace(model, X_cov ? *X_cov : X, k, threads);
    QoiRidgeModel out;
    out.profile = fit_profile(sub.subspace, X, y_qoi, degree);
    out.subspace = std::move(sub.subspace);
    out.spectrum = std::move(sub.spectrum);
    return out;
}

Vector eigenvalue_gaps(const SymmetricSpectrum& spectrum) {
    const auto n = spectrum.eigenvalues.size();
    Vector gaps(std::max<Eigen::Index>(n - 1, 0));
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        const double next = spectrum.eigenvalues(k + 1);
        gaps(k) = next > 0.0 ? spectrum.eigenvalues(k) / next : INFINITY;
    }
    return gaps;
}

Vector predict(const QoiRidgeModel& model, const Matrix& X) {
    return model.profile.values(model.subspace.project(X));
}

Matrix predict_field(const EmbeddedRidgeModel& model, const Matrix& X) {
    Matrix P(X.rows(), static_cast<Eigen::Index>(model.size()));
    for (std::size_t i = 0; i < model.size(); ++i) {
        P.col(static_cast<Eigen::Index>(i)) = evaluate_many(model.nodes[i], X);
    }
    return P;
}

double normalized_mse(const Vector& truth, const Vector& prediction) {
    const auto M = truth.size();
    if (prediction.size() != M) throw Error(ErrorCode::DimensionMismatch, "prediction length differs");
    if (M < 2) throw Error(ErrorCode::InsufficientSamples, "need at least two verification samples");
    const double mean = truth.mean();
    const double var = (truth.array() - mean).square().sum() / static_cast<double>(M - 1);
    if (!(var > 0.0)) throw Error(ErrorCode::ZeroVariance, "verification responses are constant");
    return (truth - prediction).squaredNorm() / (static_cast<double>(M) * var);
}

double qoi_mse(const QoiRidgeModel& model, const Matrix& Y_eval, const Vector& h_true) {
    return normalized_mse(h_true, predict(model, Y_eval));
}

}  // namespace ridgekit

#include "ridgekit/ridge_fit.hpp"

#include "ridgekit/error.hpp"
#include "ridgekit/ridge_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace ridgekit {

void SampleSet::validate() const {
    if (X.rows() != y.size()) {
        throw Error(ErrorCode::DimensionMismatch, "X has " + std::to_string(X.rows()) +
                                                      " rows but y has " + std::to_string(y.size()));
    }
    if (X.rows() < 2) throw Error(ErrorCode::InsufficientSamples, "need at least two samples");
    if (!X.allFinite() || !y.allFinite()) {
        throw Error(ErrorCode::InvalidArgument, "samples contain NaN or Inf");
    }
}

// ---------------------------------------------------------------------------
// Global linear model

Subspace fit_linear_direction(const SampleSet& data) {
    data.validate();
    const auto M = data.X.rows();
    const auto d = data.X.cols();
    if (M < d + 1) {
        throw Error(ErrorCode::InsufficientSamples,
                    "linear model needs M >= d + 1 (" + std::to_string(d + 1) + ")");
    }
    Matrix A(M, d + 1);
    A.leftCols(d) = data.X;
    A.col(d).setOnes();
    const Vector coef = A.colPivHouseholderQr().solve(data.y);
    const Vector w = coef.head(d);
    const double norm = w.norm();
    if (!(norm >= 1e-14)) throw Error(ErrorCode::Degenerate, "response is constant in the inputs");
    return orthonormalize(w / norm);
}

// ---------------------------------------------------------------------------
// Variable projection

namespace {

struct VPState {
    Matrix W;
    Matrix bounds;
    Matrix T;
    Matrix Q;  // thin, M x n
    Matrix R;  // n x n upper triangular
    Vector coeffs;
    Vector residual;
    double objective = 0.0;
    bool full_rank = true;
};

VPState vp_state(const SampleSet& data, const MonomialBasis& basis, const Matrix& W) {
    VPState s;
    s.W = W;
    const Matrix U = data.X * W;
    s.bounds = coordinate_bounds(U);
    s.T.resize(U.rows(), U.cols());
    for (Eigen::Index l = 0; l < U.cols(); ++l) {
        const double lo = s.bounds(l, 0);
        const double width = s.bounds(l, 1) - lo;
        s.T.col(l) = (2.0 / width) * (U.col(l).array() - lo) - 1.0;
    }
    const Matrix V = basis.vandermonde(s.T);
    const auto M = V.rows();
    const auto n = V.cols();
    const Eigen::HouseholderQR<Matrix> qr(V);
    s.Q = qr.householderQ() * Matrix::Identity(M, n);
    s.R = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    const Vector qty = s.Q.transpose() * data.y;
    s.residual = data.y - s.Q * qty;
    s.objective = s.residual.squaredNorm();

    const Vector diag = s.R.diagonal().cwiseAbs();
    s.full_rank = diag.minCoeff() > 1e-13 * std::max(1.0, diag.maxCoeff());
    s.coeffs = s.full_rank ? Vector(s.R.triangularView<Eigen::Upper>().solve(qty))
                           : Vector(V.completeOrthogonalDecomposition().solve(data.y));
    return s;
}

// Jacobian of the residual y - P_V(W) y with respect to vec(W) (column-major).
Matrix vp_jacobian(const SampleSet& data, const MonomialBasis& basis, const VPState& s) {
    const auto M = data.X.rows();
    const auto d = data.X.cols();
    const auto r = s.W.cols();
    Matrix J(M, d * r);
    const Matrix Xr = data.X.array().colwise() * s.residual.array();
    for (Eigen::Index l = 0; l < r; ++l) {
        const double dt_du = 2.0 / (s.bounds(l, 1) - s.bounds(l, 0));
        const Matrix D = dt_du * basis.derivative(s.T, static_cast<int>(l));
        const Vector dg = D * s.coeffs;

        // P_perp (dV c): dV c for entry (k, l) is x_k .* dg.
        Matrix A = data.X.array().colwise() * dg.array();
        A -= s.Q * (s.Q.transpose() * A);

        auto block = J.middleCols(l * d, d);
        block = -A;
        if (s.full_rank) {
            // (V^+)^T dV^T r = Q R^{-T} D^T (x_k .* r)
            Matrix Z = D.transpose() * Xr;
            s.R.triangularView<Eigen::Upper>().transpose().solveInPlace(Z);
            block -= s.Q * Z;
        }
    }
    return J;
}

Matrix geodesic(const Matrix& W, const Eigen::JacobiSVD<Matrix>& svd, double t) {
    const Vector& sigma = svd.singularValues();
    const Vector c = (sigma * t).array().cos();
    const Vector sn = (sigma * t).array().sin();
    const Matrix& Z = svd.matrixV();
    return W * Z * c.asDiagonal() * Z.transpose() + svd.matrixU() * sn.asDiagonal() * Z.transpose();
}

DirectionFit vp_descent(const SampleSet& data, const MonomialBasis& basis, const Matrix& start,
                        const VPConfig& cfg) {
    VPState state = vp_state(data, basis, orthonormalize(start).basis());
    DirectionFit fit;
    fit.converged = false;
    fit.trace.push_back(state.objective);
    const double tiny = 1e-28 * std::max(1.0, data.y.squaredNorm());

    for (int it = 1; it <= cfg.max_iters; ++it) {
        fit.iterations = it;
        if (state.objective <= tiny) {
            fit.converged = true;
            break;
        }
        const Matrix J = vp_jacobian(data, basis, state);
        const Vector step = J.completeOrthogonalDecomposition().solve(-state.residual);
        Matrix delta = Eigen::Map<const Matrix>(step.data(), state.W.rows(), state.W.cols());
        delta -= state.W * (state.W.transpose() * delta);
        if (!delta.allFinite() || delta.norm() == 0.0) {
            fit.converged = true;
            break;
        }
        const Eigen::JacobiSVD<Matrix> svd(delta, Eigen::ComputeThinU | Eigen::ComputeThinV);

        bool accepted = false;
        double t = 1.0;
        for (int halving = 0; halving <= 20; ++halving, t *= 0.5) {
            VPState trial = vp_state(data, basis, orthonormalize(geodesic(state.W, svd, t)).basis());
            if (trial.objective < state.objective) {
                const double moved = subspace_distance(Subspace::from_orthonormal(state.W),
                                                       Subspace::from_orthonormal(trial.W));
                state = std::move(trial);
                fit.trace.push_back(state.objective);
                accepted = true;
                if (moved < cfg.subspace_tol) fit.converged = true;
                break;
            }
        }
        // No descent along the Gauss-Newton direction: stationary to working precision.
        if (!accepted) fit.converged = true;
        if (fit.converged) break;
    }
    fit.subspace = Subspace::from_orthonormal(state.W);
    fit.objective = state.objective;
    return fit;
}

}  // namespace

double vp_objective(const SampleSet& data, const Matrix& W, int degree) {
    const MonomialBasis basis(static_cast<int>(W.cols()), degree);
    return vp_state(data, basis, orthonormalize(W).basis()).objective;
}

DirectionFit fit_vp(const SampleSet& data, const VPConfig& cfg) {
    data.validate();
    const auto M = data.X.rows();
    const auto d = data.X.cols();
    const int r = cfg.reduced_dim;
    if (r < 1 || r > d) throw Error(ErrorCode::InvalidArgument, "reduced dimension out of range");
    if (!(cfg.subspace_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "subspace_tol must be > 0");
    const auto needed = static_cast<Eigen::Index>(monomial_count(r, cfg.degree)) + d * r;
    if (M < needed) {
        throw Error(ErrorCode::InsufficientSamples,
                    "variable projection needs at least " + std::to_string(needed) + " samples, got " +
                        std::to_string(M));
    }
    const MonomialBasis basis(r, cfg.degree);

    std::vector<Matrix> starts;
    if (cfg.initial) {
        if (cfg.initial->rows() != d || cfg.initial->cols() != r) {
            throw Error(ErrorCode::DimensionMismatch, "initial subspace has the wrong shape");
        }
        starts.push_back(*cfg.initial);
    } else {
        if (r == 1) {
            try {
                starts.push_back(fit_linear_direction(data).basis());
            } catch (const Error& e) {
                if (e.code() != ErrorCode::Degenerate) throw;
            }
        }
        std::mt19937_64 rng(cfg.rng_seed);
        std::normal_distribution<double> normal;
        for (int k = 0; k < cfg.n_restarts; ++k) {
            Matrix G(d, r);
            for (Eigen::Index i = 0; i < G.size(); ++i) G.data()[i] = normal(rng);
            starts.push_back(G);
        }
    }
    if (starts.empty()) throw Error(ErrorCode::InvalidArgument, "no starting subspace");

    DirectionFit best;
    bool have_best = false;
    for (const auto& start : starts) {
        DirectionFit fit = vp_descent(data, basis, start, cfg);
        if (!have_best || fit.objective < best.objective) {
            best = std::move(fit);
            have_best = true;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// MAVE

namespace {

struct MAVEState {
    Matrix W;
    Matrix weights;  // (i, j): normalized kernel weight of sample i around sample j
    Vector intercepts;
    Matrix slopes;  // r x M
    double objective = 0.0;
    int regularized = 0;
};

MAVEState mave_local(const SampleSet& data, const Matrix& W, double bandwidth_rule) {
    const auto M = data.X.rows();
    const auto r = W.cols();
    MAVEState s;
    s.W = W;
    const Matrix U = data.X * W;

    Vector h(r);
    const double shrink = bandwidth_rule * std::pow(static_cast<double>(M), -1.0 / (static_cast<double>(r) + 4.0));
    for (Eigen::Index l = 0; l < r; ++l) {
        const double mean = U.col(l).mean();
        const double sd = std::sqrt((U.col(l).array() - mean).square().sum() / static_cast<double>(M - 1));
        h(l) = shrink * (sd > 0.0 ? sd : 1.0);
    }
    if (!(h.minCoeff() > 0.0)) throw Error(ErrorCode::InvalidArgument, "bandwidth must be positive");

    s.weights.resize(M, M);
    for (Eigen::Index j = 0; j < M; ++j) {
        for (Eigen::Index i = 0; i < M; ++i) {
            double q = 0.0;
            for (Eigen::Index l = 0; l < r; ++l) {
                const double z = (U(i, l) - U(j, l)) / h(l);
                q += z * z;
            }
            s.weights(i, j) = std::exp(-0.5 * q);
        }
        s.weights.col(j) /= s.weights.col(j).sum();
    }

    s.intercepts.resize(M);
    s.slopes.resize(r, M);
    s.objective = 0.0;
    Matrix A(M, r + 1);
    A.col(0).setOnes();
    for (Eigen::Index j = 0; j < M; ++j) {
        A.rightCols(r) = U.rowwise() - U.row(j);
        const auto w = s.weights.col(j);
        Matrix normal = A.transpose() * w.asDiagonal() * A;
        const Vector rhs = A.transpose() * w.asDiagonal() * data.y;
        Eigen::LDLT<Matrix> ldlt(normal);
        const Vector diag = ldlt.vectorD().cwiseAbs();
        if (ldlt.info() != Eigen::Success || diag.minCoeff() <= 1e-12 * std::max(1e-300, diag.maxCoeff())) {
            normal.diagonal().array() += 1e-10;
            ldlt.compute(normal);
            ++s.regularized;
        }
        const Vector beta = ldlt.solve(rhs);
        s.intercepts(j) = beta(0);
        s.slopes.col(j) = beta.tail(r);
        s.objective += w.dot((data.y - A * beta).array().square().matrix());
    }
    return s;
}

Matrix mave_direction_step(const SampleSet& data, const MAVEState& s) {
    const auto M = data.X.rows();
    const auto d = data.X.cols();
    const auto r = s.W.cols();
    Matrix normal = Matrix::Zero(d * r, d * r);
    Vector rhs = Vector::Zero(d * r);
    for (Eigen::Index j = 0; j < M; ++j) {
        const Matrix Xj = data.X.rowwise() - data.X.row(j);
        const auto w = s.weights.col(j);
        const Matrix S = Xj.transpose() * w.asDiagonal() * Xj;
        const Vector t = Xj.transpose() * (w.array() * (data.y.array() - s.intercepts(j))).matrix();
        const Vector b = s.slopes.col(j);
        for (Eigen::Index l = 0; l < r; ++l) {
            rhs.segment(l * d, d) += b(l) * t;
            for (Eigen::Index m = 0; m < r; ++m) normal.block(l * d, m * d, d, d) += b(l) * b(m) * S;
        }
    }
    normal.diagonal().array() += 1e-10 * std::max(1.0, normal.diagonal().maxCoeff());
    const Vector vecB = normal.ldlt().solve(rhs);
    return Eigen::Map<const Matrix>(vecB.data(), d, r);
}

DirectionFit mave_descent(const SampleSet& data, const Matrix& start, const MAVEConfig& cfg) {
    MAVEState state = mave_local(data, orthonormalize(start).basis(), cfg.bandwidth_rule);
    DirectionFit fit;
    fit.converged = false;
    fit.trace.push_back(state.objective);
    int regularized = state.regularized;

    auto try_step = [&](const MAVEState& from) -> std::optional<MAVEState> {
        const Matrix B = mave_direction_step(data, from);
        if (!B.allFinite()) return std::nullopt;
        try {
            return mave_local(data, orthonormalize(B).basis(), cfg.bandwidth_rule);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::RankDeficient) return std::nullopt;
            throw;
        }
    };

    for (int it = 1; it <= cfg.max_iters; ++it) {
        fit.iterations = it;
        auto next = try_step(state);
        if (!next) {
            fit.converged = true;
            break;
        }
        regularized += next->regularized;
        const double decrease = state.objective - next->objective;
        if (decrease > 0.0) {
            state = std::move(*next);
            fit.trace.push_back(state.objective);
        }
        if (decrease < cfg.tol * std::max(state.objective, 1e-300)) {
            fit.converged = true;
            break;
        }
    }
    // One re-weighting pass from the converged point.
    if (auto refined = try_step(state); refined && refined->objective <= state.objective) {
        regularized += refined->regularized;
        state = std::move(*refined);
        fit.trace.push_back(state.objective);
    }
    fit.subspace = Subspace::from_orthonormal(state.W);
    fit.objective = state.objective;
    fit.regularized_systems = regularized;
    return fit;
}

}  // namespace

double mave_objective(const SampleSet& data, const Matrix& W, double bandwidth_rule) {
    return mave_local(data, orthonormalize(W).basis(), bandwidth_rule).objective;
}

DirectionFit fit_mave(const SampleSet& data, const MAVEConfig& cfg) {
    data.validate();
    const auto M = data.X.rows();
    const auto d = data.X.cols();
    const int r = cfg.reduced_dim;
    if (r < 1 || r > d) throw Error(ErrorCode::InvalidArgument, "reduced dimension out of range");
    if (!(cfg.bandwidth_rule > 0.0)) throw Error(ErrorCode::InvalidArgument, "bandwidth_rule must be > 0");
    if (M < 5 * d) {
        throw Error(ErrorCode::InsufficientSamples,
                    "MAVE needs at least 5 d = " + std::to_string(5 * d) + " samples");
    }

    std::vector<Matrix> starts;
    starts.push_back(Matrix::Identity(d, r));
    try {
        const Subspace lin = fit_linear_direction(data);
        Matrix warm = Matrix::Identity(d, r);
        warm.col(0) = lin.basis().col(0);
        // Replace any identity column that collapses onto the warm direction.
        for (Eigen::Index l = 1; l < r; ++l) {
            if (std::abs(warm.col(l).dot(warm.col(0))) > 0.9) warm.col(l) = Vector::Unit(d, r);
        }
        starts.push_back(warm);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::Degenerate) throw;
    }

    DirectionFit best;
    bool have_best = false;
    for (const auto& start : starts) {
        DirectionFit fit;
        try {
            fit = mave_descent(data, start, cfg);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::RankDeficient) continue;
            throw;
        }
        if (!have_best || fit.objective < best.objective) {
            best = std::move(fit);
            have_best = true;
        }
    }
    if (!have_best) throw Error(ErrorCode::SingularWeightedSystem, "no MAVE start produced a subspace");
    return best;
}

// ---------------------------------------------------------------------------

std::string to_string(FitterKind kind) {
    switch (kind) {
        case FitterKind::Linear: return "linear";
        case FitterKind::VP: return "vp";
        case FitterKind::MAVE: return "mave";
    }
    return "unknown";
}

FitterKind fitter_from_string(const std::string& name) {
    if (name == "linear") return FitterKind::Linear;
    if (name == "vp") return FitterKind::VP;
    if (name == "mave") return FitterKind::MAVE;
    throw Error(ErrorCode::InvalidArgument, "unknown fitter '" + name + "'");
}

DirectionFit fit_directions(const SampleSet& data, const FitterSpec& spec, int r, std::uint64_t seed) {
    switch (spec.kind) {
        case FitterKind::Linear: {
            if (r != 1) throw Error(ErrorCode::UnsupportedRank, "the linear fitter yields one direction");
            DirectionFit fit;
            fit.subspace = fit_linear_direction(data);
            fit.iterations = 1;
            return fit;
        }
        case FitterKind::VP: {
            VPConfig cfg = spec.vp;
            cfg.reduced_dim = r;
            cfg.rng_seed = seed;
            return fit_vp(data, cfg);
        }
        case FitterKind::MAVE: {
            MAVEConfig cfg = spec.mave;
            cfg.reduced_dim = r;
            cfg.rng_seed = seed;
            return fit_mave(data, cfg);
        }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown fitter");
}

}  // namespace ridgekit

#include "ridgekit/ridge_model.hpp"

#include "ridgekit/error.hpp"

#include <cmath>
#include <string>

namespace ridgekit {

namespace {

constexpr double kMaxCondition = 1e12;

// Exponent tuples of total degree exactly `deg`, first variable descending.
void push_degree(int r, int deg, std::vector<int>& current, int var,
                 std::vector<std::vector<int>>& out) {
    if (var == r - 1) {
        current[static_cast<std::size_t>(var)] = deg;
        out.push_back(current);
        return;
    }
    for (int e = deg; e >= 0; --e) {
        current[static_cast<std::size_t>(var)] = e;
        push_degree(r, deg - e, current, var + 1, out);
    }
}

// powers[l](m, e) = T(m, l)^e
std::vector<Matrix> power_tables(const Matrix& T, int degree) {
    std::vector<Matrix> powers;
    powers.reserve(static_cast<std::size_t>(T.cols()));
    for (Eigen::Index l = 0; l < T.cols(); ++l) {
        Matrix P(T.rows(), degree + 1);
        P.col(0).setOnes();
        for (int e = 1; e <= degree; ++e) P.col(e) = P.col(e - 1).cwiseProduct(T.col(l));
        powers.push_back(std::move(P));
    }
    return powers;
}

double binomial(int n, int k) {
    double out = 1.0;
    for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
    return out;
}

}  // namespace

std::size_t monomial_count(int reduced_dim, int degree) {
    return static_cast<std::size_t>(std::llround(binomial(reduced_dim + degree, degree)));
}

MonomialBasis::MonomialBasis(int reduced_dim, int degree)
    : reduced_dim_(reduced_dim), degree_(degree) {
    if (reduced_dim < 1 || degree < 0) {
        throw Error(ErrorCode::InvalidArgument, "basis needs r >= 1 and p >= 0");
    }
    std::vector<int> current(static_cast<std::size_t>(reduced_dim), 0);
    for (int deg = 0; deg <= degree; ++deg) push_degree(reduced_dim, deg, current, 0, exponents_);
}

Matrix MonomialBasis::vandermonde(const Matrix& T) const {
    const auto powers = power_tables(T, degree_);
    Matrix V(T.rows(), static_cast<Eigen::Index>(size()));
    for (std::size_t j = 0; j < size(); ++j) {
        auto col = V.col(static_cast<Eigen::Index>(j));
        col.setOnes();
        for (int l = 0; l < reduced_dim_; ++l) {
            const int e = exponents_[j][static_cast<std::size_t>(l)];
            if (e > 0) col.array() *= powers[static_cast<std::size_t>(l)].col(e).array();
        }
    }
    return V;
}

Matrix MonomialBasis::derivative(const Matrix& T, int l) const {
    const auto powers = power_tables(T, degree_);
    Matrix D(T.rows(), static_cast<Eigen::Index>(size()));
    for (std::size_t j = 0; j < size(); ++j) {
        auto col = D.col(static_cast<Eigen::Index>(j));
        const int el = exponents_[j][static_cast<std::size_t>(l)];
        if (el == 0) {
            col.setZero();
            continue;
        }
        col = static_cast<double>(el) * powers[static_cast<std::size_t>(l)].col(el - 1);
        for (int k = 0; k < reduced_dim_; ++k) {
            if (k == l) continue;
            const int e = exponents_[j][static_cast<std::size_t>(k)];
            if (e > 0) col.array() *= powers[static_cast<std::size_t>(k)].col(e).array();
        }
    }
    return D;
}

Matrix coordinate_bounds(const Matrix& U) {
    Matrix bounds(U.cols(), 2);
    for (Eigen::Index l = 0; l < U.cols(); ++l) {
        double lo = U.col(l).minCoeff();
        double hi = U.col(l).maxCoeff();
        if (!(hi - lo > 1e-12 * std::max(1.0, std::abs(lo) + std::abs(hi)))) {
            const double mid = 0.5 * (lo + hi);
            lo = mid - 1.0;
            hi = mid + 1.0;
        }
        bounds(l, 0) = lo;
        bounds(l, 1) = hi;
    }
    return bounds;
}

RidgeProfile::RidgeProfile(int degree, Vector coeffs, Matrix bounds)
    : degree_(degree), coeffs_(std::move(coeffs)), bounds_(std::move(bounds)) {
    if (bounds_.cols() != 2 || bounds_.rows() < 1) {
        throw Error(ErrorCode::InvalidArgument, "profile bounds must be r x 2");
    }
    const auto expected = monomial_count(static_cast<int>(bounds_.rows()), degree_);
    if (static_cast<std::size_t>(coeffs_.size()) != expected) {
        throw Error(ErrorCode::DimensionMismatch,
                    "expected " + std::to_string(expected) + " coefficients, got " +
                        std::to_string(coeffs_.size()));
    }
    if (!coeffs_.allFinite() || !bounds_.allFinite()) {
        throw Error(ErrorCode::InvalidArgument, "non-finite profile coefficients");
    }
}

RidgeProfile RidgeProfile::constant(int reduced_dim, double value) {
    Matrix bounds(reduced_dim, 2);
    bounds.col(0).setConstant(-1.0);
    bounds.col(1).setConstant(1.0);
    Vector c(1);
    c(0) = value;
    return {0, c, bounds};
}

Matrix RidgeProfile::scale(const Matrix& U) const {
    if (U.cols() != bounds_.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "profile expects " +
                                                      std::to_string(bounds_.rows()) +
                                                      " reduced coordinates");
    }
    Matrix T(U.rows(), U.cols());
    for (Eigen::Index l = 0; l < U.cols(); ++l) {
        const double lo = bounds_(l, 0);
        const double width = bounds_(l, 1) - lo;
        T.col(l) = (2.0 / width) * (U.col(l).array() - lo) - 1.0;
    }
    return T;
}

Vector RidgeProfile::values(const Matrix& U) const {
    const MonomialBasis basis(reduced_dim(), degree_);
    return basis.vandermonde(scale(U)) * coeffs_;
}

Matrix RidgeProfile::gradients(const Matrix& U) const {
    const MonomialBasis basis(reduced_dim(), degree_);
    const Matrix T = scale(U);
    Matrix G(U.rows(), U.cols());
    for (int l = 0; l < reduced_dim(); ++l) {
        const double dt_du = 2.0 / (bounds_(l, 1) - bounds_(l, 0));
        G.col(l) = dt_du * (basis.derivative(T, l) * coeffs_);
    }
    return G;
}

double RidgeProfile::value(const Vector& u) const { return values(u.transpose())(0); }

Vector RidgeProfile::gradient(const Vector& u) const {
    return gradients(u.transpose()).row(0).transpose();
}

Vector RidgeProfile::raw_coeffs() const {
    // Expand prod_l (s_l u_l + o_l)^{a_l} for every scaled monomial t^a.
    const MonomialBasis basis(reduced_dim(), degree_);
    const auto& exps = basis.exponents();
    const int r = reduced_dim();
    auto index_of = [&](const std::vector<int>& e) {
        for (std::size_t j = 0; j < exps.size(); ++j)
            if (exps[j] == e) return j;
        throw Error(ErrorCode::InvalidArgument, "monomial outside basis");
    };

    Vector raw = Vector::Zero(coeffs_.size());
    for (std::size_t j = 0; j < exps.size(); ++j) {
        if (coeffs_(static_cast<Eigen::Index>(j)) == 0.0) continue;
        // Enumerate all k <= a componentwise.
        std::vector<int> k(static_cast<std::size_t>(r), 0);
        for (;;) {
            double term = coeffs_(static_cast<Eigen::Index>(j));
            for (int l = 0; l < r; ++l) {
                const auto ul = static_cast<std::size_t>(l);
                const double s = 2.0 / (bounds_(l, 1) - bounds_(l, 0));
                const double o = -2.0 * bounds_(l, 0) / (bounds_(l, 1) - bounds_(l, 0)) - 1.0;
                const int a = exps[j][ul];
                term *= binomial(a, k[ul]) * std::pow(s, k[ul]) * std::pow(o, a - k[ul]);
            }
            raw(static_cast<Eigen::Index>(index_of(k))) += term;
            int l = 0;
            while (l < r) {
                const auto ul = static_cast<std::size_t>(l);
                if (k[ul] < exps[j][ul]) {
                    ++k[ul];
                    break;
                }
                k[ul] = 0;
                ++l;
            }
            if (l == r) break;
        }
    }
    return raw;
}

RidgeProfile fit_profile_coords(const Matrix& U, const Vector& y, int degree) {
    if (U.rows() != y.size()) {
        throw Error(ErrorCode::DimensionMismatch, "coordinate rows and responses differ in length");
    }
    if (!U.allFinite() || !y.allFinite()) {
        throw Error(ErrorCode::InvalidArgument, "non-finite training data");
    }
    const int r = static_cast<int>(U.cols());
    const MonomialBasis basis(r, degree);
    if (static_cast<std::size_t>(U.rows()) < basis.size()) {
        throw Error(ErrorCode::InsufficientSamples,
                    std::to_string(U.rows()) + " samples for " + std::to_string(basis.size()) +
                        " polynomial coefficients");
    }
    Matrix bounds = coordinate_bounds(U);
    RidgeProfile scaled_only(degree, Vector::Zero(static_cast<Eigen::Index>(basis.size())), bounds);
    const Matrix V = basis.vandermonde(scaled_only.scale(U));

    const Eigen::JacobiSVD<Matrix> svd(V);
    const Vector& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (!(smin > 0.0) || sv(0) / smin > kMaxCondition) {
        throw Error(ErrorCode::IllConditioned,
                    "design matrix condition number " + std::to_string(smin > 0.0 ? sv(0) / smin : INFINITY));
    }
    const Vector coeffs = V.colPivHouseholderQr().solve(y);
    return {degree, coeffs, std::move(bounds)};
}

RidgeProfile fit_profile(const Subspace& S, const Matrix& X, const Vector& y, int degree) {
    return fit_profile_coords(S.project(X), y, degree);
}

Vector evaluate_many(const NodalRidgeModel& model, const Matrix& X) {
    return model.profile.values(model.directions.project(X));
}

Matrix gradient_many(const NodalRidgeModel& model, const Matrix& X) {
    const Matrix gu = model.profile.gradients(model.directions.project(X));
    return gu * model.directions.basis().transpose();
}

double evaluate(const NodalRidgeModel& model, const Vector& x) {
    if (x.size() != model.ambient_dim()) {
        throw Error(ErrorCode::DimensionMismatch, "input has length " + std::to_string(x.size()));
    }
    return evaluate_many(model, x.transpose())(0);
}

Vector gradient(const NodalRidgeModel& model, const Vector& x) {
    if (x.size() != model.ambient_dim()) {
        throw Error(ErrorCode::DimensionMismatch, "input has length " + std::to_string(x.size()));
    }
    return model.directions.basis() * model.profile.gradient(model.directions.basis().transpose() * x);
}

double residual_sum_squares(const NodalRidgeModel& model, const Matrix& X, const Vector& y) {
    return (evaluate_many(model, X) - y).squaredNorm();
}

}  // namespace ridgekit

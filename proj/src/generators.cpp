#include "ridgekit/generators.hpp"

#include "ridgekit/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace ridgekit {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Matrix uniform_inputs(Eigen::Index M, Eigen::Index d, std::uint64_t seed) {
    if (M < 0 || d < 1) throw Error(ErrorCode::InvalidArgument, "bad input dimensions");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Matrix X(M, d);
    for (Eigen::Index i = 0; i < M; ++i)
        for (Eigen::Index j = 0; j < d; ++j) X(i, j) = uni(rng);
    return X;
}

AnalyticalProblem AnalyticalProblem::create(std::uint64_t seed, Eigen::Index d) {
    if (d < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
    std::mt19937_64 rng(derive_seed(seed, 0));
    std::normal_distribution<double> normal;
    AnalyticalProblem p;
    p.directions.resize(d, 3);
    for (Eigen::Index c = 0; c < 3; ++c) {
        for (Eigen::Index j = 0; j < d; ++j) p.directions(j, c) = normal(rng);
        p.directions.col(c).normalize();
    }
    p.qoi_weights = Vector{{2.0, 3.0, 5.0}};
    return p;
}

Matrix AnalyticalProblem::field(const Matrix& X) const {
    if (X.cols() != dim()) throw Error(ErrorCode::DimensionMismatch, "input dimension mismatch");
    const Matrix U = X * directions;
    Matrix F(X.rows(), 3);
    for (Eigen::Index m = 0; m < X.rows(); ++m) {
        const double u1 = U(m, 0);
        F(m, 0) = u1 * u1 + u1 * u1 * u1;
        F(m, 1) = std::exp(U(m, 1));
        F(m, 2) = std::sin(std::numbers::pi * U(m, 2));
    }
    return F;
}

Vector AnalyticalProblem::qoi(const Matrix& X) const { return field(X) * qoi_weights; }

Vector AnalyticalProblem::qoi_gradient(const Vector& x) const {
    if (x.size() != dim()) throw Error(ErrorCode::DimensionMismatch, "input dimension mismatch");
    const Vector u = directions.transpose() * x;
    const double d1 = 2.0 * u(0) + 3.0 * u(0) * u(0);
    const double d2 = std::exp(u(1));
    const double d3 = std::numbers::pi * std::cos(std::numbers::pi * u(2));
    return qoi_weights(0) * d1 * directions.col(0) + qoi_weights(1) * d2 * directions.col(1) +
           qoi_weights(2) * d3 * directions.col(2);
}

Matrix AnalyticalProblem::qoi_gradients(const Matrix& X) const {
    Matrix G(X.rows(), dim());
    for (Eigen::Index m = 0; m < X.rows(); ++m) G.row(m) = qoi_gradient(X.row(m).transpose()).transpose();
    return G;
}

Subspace AnalyticalProblem::true_subspace() const { return orthonormalize(directions); }

Subspace AnalyticalProblem::component_direction(Eigen::Index i) const {
    if (i < 0 || i >= 3) throw Error(ErrorCode::InvalidArgument, "component index out of range");
    return orthonormalize(directions.col(i));
}

AnalyticalSamples generate_analytical(const AnalyticalProblem& problem, Eigen::Index M, std::uint64_t seed) {
    AnalyticalSamples s;
    s.field.X = uniform_inputs(M, problem.dim(), derive_seed(seed, 1));
    s.field.F = problem.field(s.field.X);
    s.field.node_coords = Matrix(3, 1);
    s.field.node_coords << 0.0, 0.5, 1.0;
    s.qoi = s.field.F * problem.qoi_weights;
    return s;
}

AnalyticalSamples generate_analytical(std::uint64_t seed, Eigen::Index M) {
    return generate_analytical(AnalyticalProblem::create(seed), M, seed);
}

std::string to_string(LinkFamily family) {
    switch (family) {
        case LinkFamily::Quadratic: return "quadratic";
        case LinkFamily::Cubic: return "cubic";
        case LinkFamily::Exp: return "exp";
        case LinkFamily::Sine: return "sine";
    }
    return "unknown";
}

LinkFamily link_from_string(const std::string& name) {
    if (name == "quadratic") return LinkFamily::Quadratic;
    if (name == "cubic") return LinkFamily::Cubic;
    if (name == "exp") return LinkFamily::Exp;
    if (name == "sine") return LinkFamily::Sine;
    throw Error(ErrorCode::InvalidArgument, "unknown link family '" + name + "'");
}

double link_value(LinkFamily family, double u) {
    switch (family) {
        case LinkFamily::Quadratic: return 0.5 * u * u + u;
        case LinkFamily::Cubic: return u * u * u + u;
        case LinkFamily::Exp: return std::exp(u);
        case LinkFamily::Sine: return std::sin(2.0 * u);
    }
    return 0.0;
}

double link_derivative(LinkFamily family, double u) {
    switch (family) {
        case LinkFamily::Quadratic: return u + 1.0;
        case LinkFamily::Cubic: return 3.0 * u * u + 1.0;
        case LinkFamily::Exp: return std::exp(u);
        case LinkFamily::Sine: return 2.0 * std::cos(2.0 * u);
    }
    return 0.0;
}

void SyntheticFieldSpec::validate() const {
    if (d < 1 || N < 1) throw Error(ErrorCode::InvalidArgument, "field needs d >= 1 and N >= 1");
    if (window_width < 1 || window_width > d) {
        throw Error(ErrorCode::InvalidArgument, "window width must lie in [1, d]");
    }
    if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) {
        throw Error(ErrorCode::InvalidArgument, "noise_sd must be finite and non-negative");
    }
    if (links && static_cast<Eigen::Index>(links->size()) != N) {
        throw Error(ErrorCode::DimensionMismatch, "one link family per node required");
    }
}

LocalizedField LocalizedField::create(const SyntheticFieldSpec& spec) {
    spec.validate();
    LocalizedField f;
    f.spec = spec;
    const auto d = spec.d;
    const auto N = spec.N;

    std::mt19937_64 rng(derive_seed(spec.rng_seed, 10));
    std::uniform_real_distribution<double> amp(0.5, 1.5);
    Vector a(d);
    for (Eigen::Index j = 0; j < d; ++j) a(j) = amp(rng);

    const double h = 0.5 * static_cast<double>(spec.window_width);
    const double lo = h - 0.5;
    const double hi = static_cast<double>(d) - 0.5 - h;
    f.directions = Matrix::Zero(d, N);
    f.node_coords.resize(N, 1);
    for (Eigen::Index i = 0; i < N; ++i) {
        const double s = N > 1 ? static_cast<double>(i) / static_cast<double>(N - 1) : 0.0;
        f.node_coords(i, 0) = s;
        const double mu = lo + (hi - lo) * s;
        if (spec.window_width == 1) {
            const auto j = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::lround(mu)), 0, d - 1);
            f.directions(j, i) = 1.0;
            continue;
        }
        for (Eigen::Index j = 0; j < d; ++j) {
            const double off = static_cast<double>(j) - mu;
            if (std::abs(off) < h) {
                f.directions(j, i) = a(j) * 0.5 * (1.0 + std::cos(std::numbers::pi * off / h));
            }
        }
        f.directions.col(i).normalize();
    }

    if (spec.links) {
        f.links = *spec.links;
    } else {
        f.links.resize(static_cast<std::size_t>(N));
        for (Eigen::Index i = 0; i < N; ++i) {
            const auto seg = std::min<Eigen::Index>(3, (4 * i) / N);
            f.links[static_cast<std::size_t>(i)] = static_cast<LinkFamily>(seg);
        }
    }
    f.weights = Vector::Constant(N, 1.0 / static_cast<double>(N));
    return f;
}

std::vector<Subspace> LocalizedField::true_directions() const {
    std::vector<Subspace> out;
    out.reserve(static_cast<std::size_t>(directions.cols()));
    for (Eigen::Index i = 0; i < directions.cols(); ++i) out.push_back(orthonormalize(directions.col(i)));
    return out;
}

Matrix LocalizedField::evaluate(const Matrix& X) const {
    if (X.cols() != directions.rows()) throw Error(ErrorCode::DimensionMismatch, "input dimension mismatch");
    const Matrix U = X * directions;
    Matrix F(U.rows(), U.cols());
    for (Eigen::Index i = 0; i < U.cols(); ++i) {
        const auto link = links[static_cast<std::size_t>(i)];
        for (Eigen::Index m = 0; m < U.rows(); ++m) F(m, i) = link_value(link, U(m, i));
    }
    return F;
}

FieldSamples LocalizedField::sample(Eigen::Index M, std::uint64_t seed) const {
    FieldSamples s;
    s.X = uniform_inputs(M, directions.rows(), derive_seed(seed, 11));
    s.F = evaluate(s.X);
    if (spec.noise_sd > 0.0) {
        std::mt19937_64 rng(derive_seed(seed, 12));
        std::normal_distribution<double> noise(0.0, spec.noise_sd);
        for (Eigen::Index i = 0; i < s.F.size(); ++i) s.F.data()[i] += noise(rng);
    }
    s.node_coords = node_coords;
    return s;
}

LocalizedSamples generate_localized_field(const SyntheticFieldSpec& spec, Eigen::Index M) {
    const LocalizedField f = LocalizedField::create(spec);
    return {f.sample(M, spec.rng_seed), f.true_directions()};
}

}  // namespace ridgekit

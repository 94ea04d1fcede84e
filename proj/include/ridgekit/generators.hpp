#pragma once

#include "ridgekit/embedded.hpp"
#include "ridgekit/subspace.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ridgekit {

/// Independent stream seed derived from a base seed (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// M x d inputs, i.i.d. uniform on [-1, 1].
Matrix uniform_inputs(Eigen::Index M, Eigen::Index d, std::uint64_t seed);

/// Three exact ridge functions in d inputs and their weighted sum
///   f1 = u1^2 + u1^3,  f2 = exp(u2),  f3 = sin(pi u3),  u_i = w_i^T x,
///   h  = 2 f1 + 3 f2 + 5 f3.
struct AnalyticalProblem {
    Matrix directions;  // d x 3, unit columns w1, w2, w3
    Vector qoi_weights;  // (2, 3, 5)

    /// Directions are normalized Gaussian vectors drawn from `seed`.
    static AnalyticalProblem create(std::uint64_t seed, Eigen::Index d = 10);

    [[nodiscard]] Eigen::Index dim() const noexcept { return directions.rows(); }
    /// M x 3 component values.
    [[nodiscard]] Matrix field(const Matrix& X) const;
    [[nodiscard]] Vector qoi(const Matrix& X) const;
    [[nodiscard]] Vector qoi_gradient(const Vector& x) const;
    /// Row m is the gradient of h at X.row(m).
    [[nodiscard]] Matrix qoi_gradients(const Matrix& X) const;
    [[nodiscard]] Subspace true_subspace() const;
    [[nodiscard]] Subspace component_direction(Eigen::Index i) const;
};

struct AnalyticalSamples {
    FieldSamples field;
    Vector qoi;
};

/// M uniform samples of the problem; the qoi is F * (2, 3, 5)^T.
AnalyticalSamples generate_analytical(const AnalyticalProblem& problem, Eigen::Index M,
                                      std::uint64_t seed);
/// Problem and samples both derived from `seed`.
AnalyticalSamples generate_analytical(std::uint64_t seed, Eigen::Index M);

enum class LinkFamily { Quadratic, Cubic, Exp, Sine };

std::string to_string(LinkFamily family);
LinkFamily link_from_string(const std::string& name);
double link_value(LinkFamily family, double u);
double link_derivative(LinkFamily family, double u);

struct SyntheticFieldSpec {
    Eigen::Index d = 30;
    Eigen::Index N = 200;
    /// Number of consecutive inputs that influence a node.
    Eigen::Index window_width = 3;
    double noise_sd = 0.0;
    std::uint64_t rng_seed = 0;
    /// Per-node links; by default four contiguous segments of quadratic,
    /// cubic, exp and sine nodes.
    std::optional<std::vector<LinkFamily>> links;

    void validate() const;
};

/// Localized field: node i responds to g_i(w_i^T x) where w_i is a raised
/// cosine bump over a window of inputs that slides along the input index as
/// i moves along a 1-D chain of nodes.
struct LocalizedField {
    SyntheticFieldSpec spec;
    Matrix directions;  // d x N, unit columns
    std::vector<LinkFamily> links;
    Matrix node_coords;  // N x 1, i / (N - 1)
    Vector weights;  // uniform quadrature weights 1 / N

    static LocalizedField create(const SyntheticFieldSpec& spec);

    [[nodiscard]] std::vector<Subspace> true_directions() const;
    /// Noise-free M x N field values.
    [[nodiscard]] Matrix evaluate(const Matrix& X) const;
    /// M samples with inputs and noise drawn from streams of `seed`.
    [[nodiscard]] FieldSamples sample(Eigen::Index M, std::uint64_t seed) const;
};

struct LocalizedSamples {
    FieldSamples field;
    std::vector<Subspace> true_directions;
};

/// M samples of the field described by `spec`, drawn from spec.rng_seed.
LocalizedSamples generate_localized_field(const SyntheticFieldSpec& spec, Eigen::Index M);

}  // namespace ridgekit

#pragma once

#include "ridgekit/embedded.hpp"
#include "ridgekit/ridge_model.hpp"
#include "ridgekit/subspace.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ridgekit {

using NodeIndex = std::size_t;

/// Nodes removed in one compression pass and, row for row, the two nodes
/// their directions are rebuilt from.
struct CompressionStage {
    std::vector<NodeIndex> missing;
    std::vector<std::array<NodeIndex, 2>> neighbors;
};

struct CompressionPlan {
    std::size_t n_nodes = 0;
    std::vector<NodeIndex> retained;  // ascending
    std::vector<CompressionStage> stages;
    std::size_t requested_k = 0;
    std::size_t achieved_k = 0;
    std::string method;
    std::uint64_t seed = 0;
    /// Upper bound on removals per stage, 0 when unconstrained.
    std::size_t stride = 0;
    /// True when the greedy passes ran out of removable nodes before reaching k.
    bool stalled = false;
    /// k-medoids: total distance of non-medoids to their medoid per iteration.
    std::vector<double> objective_trace;
    /// Nodes whose neighbor pair had to fall back to the nearest node twice.
    std::vector<NodeIndex> fallback_nodes;

    [[nodiscard]] std::vector<NodeIndex> missing() const;
};

/// Pairwise subspace distances, N x N.
Matrix distance_matrix(const std::vector<Subspace>& directions, std::size_t threads = 1);

/// Greedy single-stage compression keeping at least k nodes. Each removed node
/// is paired with its nearest available node and a second one that lies at
/// least as close to it as to the first; cheapest pairs go first, and a node
/// used as a neighbor is not removed. Requires r = 1.
CompressionPlan compress(const std::vector<Subspace>& directions, std::size_t k);

/// Repeated greedy stages, each removing at most `stride` of the survivors of
/// the previous stage, until k nodes remain or no stage can remove anything.
CompressionPlan compress_recursive(const std::vector<Subspace>& directions, std::size_t k,
                                   std::size_t stride);

/// k-medoids clustering under the subspace distance. Medoids are retained;
/// every other node is rebuilt from its two nearest medoids.
CompressionPlan kmedoids_compress(const std::vector<Subspace>& directions, std::size_t k,
                                  std::uint64_t rng_seed);

/// Uniformly random removal of N - k nodes; each is rebuilt by copying its
/// nearest retained node (stored twice in the neighbor table).
CompressionPlan random_deletion(const std::vector<Subspace>& directions, std::size_t k,
                                std::uint64_t rng_seed);

/// Rebuild all N directions from the retained ones, replaying stages from
/// the last to the first. `retained_dirs` follows plan.retained order.
std::vector<Subspace> recover(const CompressionPlan& plan, const std::vector<Subspace>& retained_dirs);

/// Rebuild one direction from two neighbors: the normalized sum or difference,
/// whichever is closer to `first`. Antipodal inputs fall back to a copy of
/// `first`, reported through `*fell_back`; identical inputs give `first`.
Subspace recover_direction(const Subspace& first, const Subspace& second, bool* fell_back = nullptr);

struct PlanValidation {
    bool ok = true;
    std::vector<std::string> problems;
};

/// Partition of nodes, neighbor availability per stage, stride and k bounds.
PlanValidation validate_plan(const CompressionPlan& plan);

struct ReconstructionError {
    double epsilon = 0.0;
    std::size_t components = 0;
    std::size_t zero_variance_skipped = 0;
};

/// Average variance-normalized MSE over `components`, predicting node i with
/// recovered direction i. Without refit the original profile is reused after
/// aligning the recovered basis to the original one; with refit a fresh
/// profile of the same degree is fitted on `train` projected to the recovered
/// direction. Scores are taken on `eval`.
ReconstructionError reconstruction_error(const std::vector<NodalRidgeModel>& original,
                                         const std::vector<Subspace>& recovered,
                                         const std::vector<NodeIndex>& components,
                                         const FieldSamples& train, const FieldSamples& eval,
                                         bool refit);

struct PerturbationCheck {
    double epsilon_est = 0.0;
    double bound = 0.0;
    /// Largest ||grad_u g|| seen over the Monte Carlo inputs.
    double max_grad_norm = 0.0;
    double largest_angle = 0.0;
};

/// Monte Carlo estimate of the first-order MSE E[(x^T (W~ - W) grad_u g)^2]
/// with W, W~ paired as principal vectors, next to the bound
/// r G^2 sigma_x^2 (2 - 2 cos theta_r). Inputs are i.i.d. uniform on
/// [-sqrt(3) sigma_x, sqrt(3) sigma_x]^d.
PerturbationCheck check_perturbation_bound(const NodalRidgeModel& model, const Subspace& perturbed,
                                           double G, double sigma_x, std::size_t n_mc,
                                           std::uint64_t rng_seed = 0);

}  // namespace ridgekit

#pragma once

#include "ridgekit/compression.hpp"
#include "ridgekit/generators.hpp"
#include "ridgekit/ridge_fit.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ridgekit {

enum class RecoveryMethod { Embedded, Direct };

std::string to_string(RecoveryMethod method);
RecoveryMethod recovery_method_from_string(const std::string& name);

struct RecoveryConfig {
    std::vector<RecoveryMethod> methods{RecoveryMethod::Embedded, RecoveryMethod::Direct};
    /// Direction fitter; its reduced dimension is set per path (1 per node,
    /// 3 for the direct fit).
    FitterSpec fitter;
    std::vector<Eigen::Index> M_grid{50, 100, 150, 200, 250, 300, 350, 400};
    int n_trials = 20;
    double threshold = 0.005;
    /// Degree of the nodal profiles in the embedded path.
    int profile_degree = 7;
    Eigen::Index d = 10;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
};

struct RecoveryTrial {
    bool fitted = false;
    double distance = 1.0;
    /// Embedded path only: distance of node i's direction to w_i.
    std::vector<double> component_distance;
};

struct RecoveryRow {
    Eigen::Index M = 0;
    RecoveryMethod method = RecoveryMethod::Embedded;
    double recovery_prob = 0.0;
    /// Embedded path only, per component.
    std::vector<double> component_prob;
    int trials = 0;
    int failed_fits = 0;
    double median_distance = 0.0;
    std::vector<RecoveryTrial> detail;
};

/// One trial of the analytical experiment with trial seed `seed`.
RecoveryTrial recovery_trial(RecoveryMethod method, const RecoveryConfig& cfg, Eigen::Index M,
                             std::uint64_t seed);

/// Fraction of trials (trial t uses seed ^ t) whose recovered qoi subspace is
/// within `threshold` of span(w1, w2, w3). Rows are ordered by M, then method.
std::vector<RecoveryRow> recovery_probability_experiment(const RecoveryConfig& cfg);

struct CompressionStudyConfig {
    SyntheticFieldSpec field;
    Eigen::Index M_train = 200;
    Eigen::Index M_eval = 500;
    std::vector<std::size_t> removal_grid{0, 40, 80, 120, 160};
    std::size_t stride = 20;
    std::vector<std::string> methods{"recursive", "kmedoids", "random"};
    FitterSpec fitter;
    int profile_degree = 2;
    std::uint64_t seed = 0;
    std::size_t threads = 0;

    CompressionStudyConfig();
};

struct CompressionRow {
    std::size_t removed = 0;
    std::string method;
    double epsilon_R = 0.0;
    std::size_t achieved_k = 0;
    bool plan_valid = true;
    bool stalled = false;
    std::size_t fallback_nodes = 0;
};

/// Fit nodal ridges on a localized field, then for each removal count and
/// method build a plan, recover every direction and score it with refitted
/// profiles on held-out samples. Removal count 0 reports the uncompressed
/// baseline for every method.
std::vector<CompressionRow> compression_study(const CompressionStudyConfig& cfg);

/// Build a plan with the named method ("greedy", "recursive", "kmedoids",
/// "random").
CompressionPlan make_plan(const std::string& method, const std::vector<Subspace>& directions,
                          std::size_t k, std::size_t stride, std::uint64_t seed);

}  // namespace ridgekit

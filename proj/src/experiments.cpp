#include "ridgekit/experiments.hpp"

#include "ridgekit/error.hpp"
#include "ridgekit/parallel.hpp"

#include <algorithm>
#include <numeric>

namespace ridgekit {

std::string to_string(RecoveryMethod method) {
    return method == RecoveryMethod::Embedded ? "embedded" : "direct";
}

RecoveryMethod recovery_method_from_string(const std::string& name) {
    if (name == "embedded") return RecoveryMethod::Embedded;
    if (name == "direct") return RecoveryMethod::Direct;
    throw Error(ErrorCode::InvalidArgument, "unknown recovery method '" + name + "'");
}

RecoveryTrial recovery_trial(RecoveryMethod method, const RecoveryConfig& cfg, Eigen::Index M,
                             std::uint64_t seed) {
    const AnalyticalProblem problem = AnalyticalProblem::create(seed, cfg.d);
    const AnalyticalSamples samples = generate_analytical(problem, M, seed);
    const Subspace truth = problem.true_subspace();
    RecoveryTrial trial;
    try {
        if (method == RecoveryMethod::Embedded) {
            EmbeddedFitOptions opt;
            opt.fitter = cfg.fitter;
            opt.r_per_node = 1;
            opt.profile_degree = cfg.profile_degree;
            opt.seed = seed;
            opt.threads = 1;
            const EmbeddedRidgeModel model = fit_embedded(samples.field, problem.qoi_weights, opt);
            for (Eigen::Index i = 0; i < 3; ++i) {
                trial.component_distance.push_back(
                    subspace_distance(model.nodes[static_cast<std::size_t>(i)].directions,
                                      problem.component_direction(i)));
            }
            const QoiSubspace qs = qoi_subspace(model, samples.field.X, 3, 1);
            trial.distance = subspace_distance(qs.subspace, truth);
        } else {
            const SampleSet data{samples.field.X, samples.qoi};
            const DirectionFit fit = fit_directions(data, cfg.fitter, 3, seed);
            trial.distance = subspace_distance(fit.subspace, truth);
        }
        trial.fitted = true;
    } catch (const Error&) {
        trial.fitted = false;
        trial.distance = 1.0;
    }
    return trial;
}

std::vector<RecoveryRow> recovery_probability_experiment(const RecoveryConfig& cfg) {
    if (cfg.n_trials < 1) throw Error(ErrorCode::InvalidArgument, "need at least one trial");
    if (cfg.methods.empty() || cfg.M_grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty experiment grid");
    const auto n_trials = static_cast<std::size_t>(cfg.n_trials);
    std::vector<RecoveryRow> rows;
    for (auto M : cfg.M_grid) {
        for (auto method : cfg.methods) {
            RecoveryRow row;
            row.M = M;
            row.method = method;
            row.trials = cfg.n_trials;
            row.detail.resize(n_trials);
            rows.push_back(std::move(row));
        }
    }
    const std::size_t jobs = rows.size() * n_trials;
    parallel_for(jobs, cfg.threads, [&](std::size_t job) {
        auto& row = rows[job / n_trials];
        const std::size_t t = job % n_trials;
        row.detail[t] = recovery_trial(row.method, cfg, row.M, cfg.seed ^ static_cast<std::uint64_t>(t));
    });

    for (auto& row : rows) {
        int ok = 0;
        std::vector<int> comp_ok(3, 0);
        std::vector<double> dists;
        for (const auto& trial : row.detail) {
            if (!trial.fitted) ++row.failed_fits;
            if (trial.fitted && trial.distance < cfg.threshold) ++ok;
            for (std::size_t i = 0; i < trial.component_distance.size(); ++i)
                if (trial.component_distance[i] < cfg.threshold) ++comp_ok[i];
            dists.push_back(trial.distance);
        }
        row.recovery_prob = static_cast<double>(ok) / cfg.n_trials;
        if (row.method == RecoveryMethod::Embedded) {
            for (int c : comp_ok) row.component_prob.push_back(static_cast<double>(c) / cfg.n_trials);
        }
        std::sort(dists.begin(), dists.end());
        const auto n = dists.size();
        row.median_distance = n % 2 ? dists[n / 2] : 0.5 * (dists[n / 2 - 1] + dists[n / 2]);
    }
    return rows;
}

CompressionStudyConfig::CompressionStudyConfig() {
    fitter.kind = FitterKind::VP;
    fitter.vp.degree = 2;
    fitter.vp.n_restarts = 1;
    profile_degree = 2;
}

CompressionPlan make_plan(const std::string& method, const std::vector<Subspace>& directions,
                          std::size_t k, std::size_t stride, std::uint64_t seed) {
    if (method == "greedy") return compress(directions, k);
    if (method == "recursive") return compress_recursive(directions, k, stride);
    if (method == "kmedoids") return kmedoids_compress(directions, k, seed);
    if (method == "random") return random_deletion(directions, k, seed);
    throw Error(ErrorCode::InvalidArgument, "unknown compression method '" + method + "'");
}

std::vector<CompressionRow> compression_study(const CompressionStudyConfig& cfg) {
    SyntheticFieldSpec spec = cfg.field;
    spec.rng_seed = cfg.seed;
    const LocalizedField field = LocalizedField::create(spec);
    const FieldSamples train = field.sample(cfg.M_train, derive_seed(cfg.seed, 100));
    const FieldSamples eval = field.sample(cfg.M_eval, derive_seed(cfg.seed, 101));

    EmbeddedFitOptions opt;
    opt.fitter = cfg.fitter;
    opt.r_per_node = 1;
    opt.profile_degree = cfg.profile_degree;
    opt.seed = cfg.seed;
    opt.threads = cfg.threads;
    const EmbeddedRidgeModel model = fit_embedded(train, field.weights, opt);

    std::vector<Subspace> dirs;
    for (const auto& node : model.nodes) dirs.push_back(node.directions);
    std::vector<NodeIndex> all(dirs.size());
    std::iota(all.begin(), all.end(), NodeIndex{0});
    const double baseline = reconstruction_error(model.nodes, dirs, all, train, eval, true).epsilon;

    struct Job {
        std::size_t removed;
        std::string method;
    };
    std::vector<Job> jobs;
    for (auto removed : cfg.removal_grid) {
        if (removed >= dirs.size()) {
            throw Error(ErrorCode::InvalidK, "cannot remove " + std::to_string(removed) + " of " +
                                                 std::to_string(dirs.size()) + " nodes");
        }
        for (const auto& method : cfg.methods) jobs.push_back({removed, method});
    }
    std::vector<CompressionRow> rows(jobs.size());
    parallel_for(jobs.size(), cfg.threads, [&](std::size_t j) {
        const auto& job = jobs[j];
        CompressionRow& row = rows[j];
        row.removed = job.removed;
        row.method = job.method;
        if (job.removed == 0) {
            row.epsilon_R = baseline;
            row.achieved_k = dirs.size();
            return;
        }
        const std::size_t k = dirs.size() - job.removed;
        const CompressionPlan plan = make_plan(job.method, dirs, k, cfg.stride, derive_seed(cfg.seed, 200 + j));
        row.plan_valid = validate_plan(plan).ok;
        row.stalled = plan.stalled;
        row.achieved_k = plan.achieved_k;
        row.fallback_nodes = plan.fallback_nodes.size();
        std::vector<Subspace> kept;
        for (auto idx : plan.retained) kept.push_back(dirs[idx]);
        const std::vector<Subspace> rebuilt = recover(plan, kept);
        const auto missing = plan.missing();
        row.epsilon_R = missing.empty()
                            ? baseline
                            : reconstruction_error(model.nodes, rebuilt, missing, train, eval, true).epsilon;
    });
    return rows;
}

}  // namespace ridgekit

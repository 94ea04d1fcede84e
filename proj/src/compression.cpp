#include "ridgekit/compression.hpp"

#include "ridgekit/error.hpp"
#include "ridgekit/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>

namespace ridgekit {

std::vector<NodeIndex> CompressionPlan::missing() const {
    std::vector<NodeIndex> out;
    for (const auto& stage : stages) out.insert(out.end(), stage.missing.begin(), stage.missing.end());
    return out;
}

namespace {

constexpr NodeIndex kNone = std::numeric_limits<NodeIndex>::max();

void require_rank_one(const std::vector<Subspace>& directions) {
    if (directions.empty()) throw Error(ErrorCode::InvalidArgument, "no directions given");
    const auto d = directions.front().ambient_dim();
    for (const auto& s : directions) {
        if (s.ambient_dim() != d) throw Error(ErrorCode::DimensionMismatch, "directions differ in ambient dimension");
        if (s.dim() != 1) throw Error(ErrorCode::UnsupportedRank, "compression handles one-dimensional ridges only");
    }
}

void require_k(std::size_t k, std::size_t n) {
    if (k < 1 || k > n) {
        throw Error(ErrorCode::InvalidK, "k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    }
}

struct Pairing {
    NodeIndex first = kNone;
    NodeIndex second = kNone;
    double total = 0.0;
};

// Nearest node among `pool`, then the nearest remaining node j that sits at
// least as close to i as to the first neighbor.
Pairing pair_neighbors(const Matrix& D, NodeIndex i, const std::vector<NodeIndex>& pool) {
    Pairing p;
    double best = std::numeric_limits<double>::infinity();
    for (NodeIndex j : pool) {
        if (j == i) continue;
        const double dij = D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (dij < best) {
            best = dij;
            p.first = j;
        }
    }
    if (p.first == kNone) return p;
    double second_best = std::numeric_limits<double>::infinity();
    for (NodeIndex j : pool) {
        if (j == i || j == p.first) continue;
        const double dij = D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        const double dj1 = D(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(p.first));
        if (dij <= dj1 && dij < second_best) {
            second_best = dij;
            p.second = j;
        }
    }
    if (p.second != kNone) p.total = best + second_best;
    return p;
}

struct StageOutcome {
    CompressionStage stage;
    bool stalled = false;
};

// One greedy compression stage over `active` (ascending), removing at most
// max_remove nodes.
StageOutcome greedy_stage(const Matrix& D, const std::vector<NodeIndex>& active, std::size_t max_remove) {
    const auto n = static_cast<std::size_t>(D.rows());
    std::vector<char> removed(n, 0);
    std::vector<char> marked(n, 0);
    StageOutcome out;
    std::vector<NodeIndex> order = active;

    while (out.stage.missing.size() < max_remove && !order.empty()) {
        std::vector<NodeIndex> candidates;
        for (NodeIndex i : order)
            if (!removed[i] && !marked[i]) candidates.push_back(i);
        std::vector<NodeIndex> available;
        for (NodeIndex i : active)
            if (!removed[i]) available.push_back(i);

        struct Candidate {
            NodeIndex node;
            Pairing pairing;
        };
        std::vector<Candidate> feasible;
        std::vector<NodeIndex> infeasible;
        for (NodeIndex i : candidates) {
            const Pairing p = pair_neighbors(D, i, available);
            if (p.second == kNone) {
                infeasible.push_back(i);
            } else {
                feasible.push_back({i, p});
            }
        }
        std::stable_sort(feasible.begin(), feasible.end(), [](const Candidate& a, const Candidate& b) {
            if (a.pairing.total != b.pairing.total) return a.pairing.total < b.pairing.total;
            return a.node < b.node;
        });

        std::size_t removed_this_pass = 0;
        for (const auto& c : feasible) {
            if (out.stage.missing.size() >= max_remove) break;
            if (removed[c.node] || marked[c.node]) continue;
            if (removed[c.pairing.first] || removed[c.pairing.second]) continue;
            removed[c.node] = 1;
            marked[c.pairing.first] = 1;
            marked[c.pairing.second] = 1;
            out.stage.missing.push_back(c.node);
            out.stage.neighbors.push_back({c.pairing.first, c.pairing.second});
            ++removed_this_pass;
        }

        order.clear();
        for (const auto& c : feasible) order.push_back(c.node);
        order.insert(order.end(), infeasible.begin(), infeasible.end());
        if (removed_this_pass == 0) {
            out.stalled = true;
            break;
        }
    }
    if (out.stage.missing.size() < max_remove) out.stalled = true;
    return out;
}

std::vector<NodeIndex> complement(std::size_t n, const std::vector<NodeIndex>& missing) {
    std::vector<char> gone(n, 0);
    for (auto i : missing) gone[i] = 1;
    std::vector<NodeIndex> keep;
    for (NodeIndex i = 0; i < n; ++i)
        if (!gone[i]) keep.push_back(i);
    return keep;
}

}  // namespace

Matrix distance_matrix(const std::vector<Subspace>& directions, std::size_t threads) {
    const auto n = directions.size();
    Matrix D = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    parallel_for(n, threads, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = subspace_distance(directions[i], directions[j]);
            D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            D(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
        }
    });
    return D;
}

CompressionPlan compress(const std::vector<Subspace>& directions, std::size_t k) {
    require_rank_one(directions);
    const auto n = directions.size();
    require_k(k, n);
    CompressionPlan plan;
    plan.n_nodes = n;
    plan.requested_k = k;
    plan.method = "greedy";
    std::vector<NodeIndex> all(n);
    std::iota(all.begin(), all.end(), NodeIndex{0});
    if (k < n) {
        StageOutcome st = greedy_stage(distance_matrix(directions), all, n - k);
        plan.stalled = st.stalled;
        if (!st.stage.missing.empty()) plan.stages.push_back(std::move(st.stage));
    }
    plan.retained = complement(n, plan.missing());
    plan.achieved_k = plan.retained.size();
    return plan;
}

CompressionPlan compress_recursive(const std::vector<Subspace>& directions, std::size_t k, std::size_t stride) {
    require_rank_one(directions);
    const auto n = directions.size();
    require_k(k, n);
    if (stride < 1) throw Error(ErrorCode::InvalidArgument, "stride must be at least 1");
    const Matrix D = distance_matrix(directions);

    CompressionPlan plan;
    plan.n_nodes = n;
    plan.requested_k = k;
    plan.method = "recursive";
    plan.stride = stride;

    std::vector<NodeIndex> active(n);
    std::iota(active.begin(), active.end(), NodeIndex{0});
    while (active.size() > k) {
        const std::size_t max_remove = std::min(stride, active.size() - k);
        StageOutcome st = greedy_stage(D, active, max_remove);
        if (st.stage.missing.empty()) {
            plan.stalled = true;
            break;
        }
        std::vector<char> gone(n, 0);
        for (auto i : st.stage.missing) gone[i] = 1;
        std::vector<NodeIndex> next;
        for (auto i : active)
            if (!gone[i]) next.push_back(i);
        active = std::move(next);
        plan.stages.push_back(std::move(st.stage));
    }
    plan.retained = active;
    plan.achieved_k = active.size();
    if (plan.achieved_k > k) plan.stalled = true;
    return plan;
}

CompressionPlan kmedoids_compress(const std::vector<Subspace>& directions, std::size_t k, std::uint64_t rng_seed) {
    require_rank_one(directions);
    const auto n = directions.size();
    if (k < 1 || k >= n) {
        throw Error(ErrorCode::InvalidK, "k-medoids needs 1 <= k < N, got k = " + std::to_string(k));
    }
    const Matrix D = distance_matrix(directions);
    auto dist = [&](NodeIndex a, NodeIndex b) {
        return D(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    };

    std::vector<NodeIndex> all(n);
    std::iota(all.begin(), all.end(), NodeIndex{0});
    std::mt19937_64 rng(rng_seed);
    std::vector<NodeIndex> medoids = all;
    std::shuffle(medoids.begin(), medoids.end(), rng);
    medoids.resize(k);
    std::sort(medoids.begin(), medoids.end());

    std::vector<NodeIndex> owner(n);
    auto assign = [&]() {
        double total = 0.0;
        std::vector<char> is_medoid(n, 0);
        for (auto m : medoids) is_medoid[m] = 1;
        for (NodeIndex i = 0; i < n; ++i) {
            if (is_medoid[i]) {
                owner[i] = i;
                continue;
            }
            NodeIndex best = medoids.front();
            for (auto m : medoids)
                if (dist(i, m) < dist(i, best)) best = m;
            owner[i] = best;
            total += dist(i, best);
        }
        return total;
    };

    CompressionPlan plan;
    plan.n_nodes = n;
    plan.requested_k = k;
    plan.method = "kmedoids";
    plan.seed = rng_seed;

    double sigma = assign();
    plan.objective_trace.push_back(sigma);
    for (int iter = 0; iter < 1000; ++iter) {
        std::vector<NodeIndex> updated;
        for (auto m : medoids) {
            std::vector<NodeIndex> cluster;
            for (NodeIndex i = 0; i < n; ++i)
                if (owner[i] == m) cluster.push_back(i);
            NodeIndex best = m;
            double best_cost = std::numeric_limits<double>::infinity();
            for (auto c : cluster) {
                double cost = 0.0;
                for (auto j : cluster) cost += dist(c, j);
                if (cost < best_cost || (cost == best_cost && c == m)) {
                    best_cost = cost;
                    best = c;
                }
            }
            updated.push_back(best);
        }
        std::sort(updated.begin(), updated.end());
        const auto previous = medoids;
        const auto previous_owner = owner;
        medoids = updated;
        const double next = assign();
        if (next > sigma) {
            medoids = previous;
            owner = previous_owner;
            break;
        }
        plan.objective_trace.push_back(next);
        if (next == sigma) break;
        sigma = next;
    }

    CompressionStage stage;
    std::vector<char> is_medoid(n, 0);
    for (auto m : medoids) is_medoid[m] = 1;
    for (NodeIndex i = 0; i < n; ++i) {
        if (is_medoid[i]) continue;
        const Pairing p = pair_neighbors(D, i, medoids);
        stage.missing.push_back(i);
        if (p.second == kNone) {
            stage.neighbors.push_back({p.first, p.first});
            plan.fallback_nodes.push_back(i);
        } else {
            stage.neighbors.push_back({p.first, p.second});
        }
    }
    plan.stages.push_back(std::move(stage));
    plan.retained = medoids;
    plan.achieved_k = medoids.size();
    return plan;
}

CompressionPlan random_deletion(const std::vector<Subspace>& directions, std::size_t k, std::uint64_t rng_seed) {
    require_rank_one(directions);
    const auto n = directions.size();
    require_k(k, n);
    std::vector<NodeIndex> order(n);
    std::iota(order.begin(), order.end(), NodeIndex{0});
    std::mt19937_64 rng(rng_seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<NodeIndex> missing(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n - k));
    std::sort(missing.begin(), missing.end());

    CompressionPlan plan;
    plan.n_nodes = n;
    plan.requested_k = k;
    plan.method = "random";
    plan.seed = rng_seed;
    plan.retained = complement(n, missing);
    plan.achieved_k = plan.retained.size();
    if (!missing.empty()) {
        CompressionStage stage;
        for (auto i : missing) {
            NodeIndex best = kNone;
            double best_d = std::numeric_limits<double>::infinity();
            for (auto j : plan.retained) {
                const double dij = subspace_distance(directions[i], directions[j]);
                if (dij < best_d) {
                    best_d = dij;
                    best = j;
                }
            }
            stage.missing.push_back(i);
            stage.neighbors.push_back({best, best});
        }
        plan.stages.push_back(std::move(stage));
    }
    return plan;
}

Subspace recover_direction(const Subspace& first, const Subspace& second, bool* fell_back) {
    if (first.dim() != 1 || second.dim() != 1) {
        throw Error(ErrorCode::UnsupportedRank, "recovery handles one-dimensional ridges only");
    }
    if (first.ambient_dim() != second.ambient_dim()) {
        throw Error(ErrorCode::DimensionMismatch, "neighbors differ in ambient dimension");
    }
    const Vector a = first.basis().col(0);
    const Vector b = second.basis().col(0);
    const Vector sum = a + b;
    const Vector diff = a - b;
    constexpr double kVanish = 1e-12;
    if (fell_back) *fell_back = false;

    if (sum.norm() < kVanish) {
        if (fell_back) *fell_back = true;
        return first;
    }
    if (diff.norm() < kVanish) return first;
    const Subspace s_sum = orthonormalize(sum / sum.norm());
    const Subspace s_diff = orthonormalize(diff / diff.norm());
    return subspace_distance(s_diff, first) < subspace_distance(s_sum, first) ? s_diff : s_sum;
}

std::vector<Subspace> recover(const CompressionPlan& plan, const std::vector<Subspace>& retained_dirs) {
    if (retained_dirs.size() != plan.retained.size()) {
        throw Error(ErrorCode::DimensionMismatch, "plan retains " + std::to_string(plan.retained.size()) +
                                                      " nodes but " + std::to_string(retained_dirs.size()) +
                                                      " directions were given");
    }
    std::vector<std::optional<Subspace>> out(plan.n_nodes);
    for (std::size_t j = 0; j < plan.retained.size(); ++j) {
        const auto idx = plan.retained[j];
        if (idx >= plan.n_nodes) throw Error(ErrorCode::InvalidArgument, "retained index out of range");
        if (retained_dirs[j].dim() != 1) {
            throw Error(ErrorCode::UnsupportedRank, "recovery handles one-dimensional ridges only");
        }
        out[idx] = retained_dirs[j];
    }
    for (auto stage = plan.stages.rbegin(); stage != plan.stages.rend(); ++stage) {
        if (stage->neighbors.size() != stage->missing.size()) {
            throw Error(ErrorCode::InvalidArgument, "neighbor table does not match missing list");
        }
        for (std::size_t j = 0; j < stage->missing.size(); ++j) {
            const auto [a, b] = stage->neighbors[j];
            if (a >= plan.n_nodes || b >= plan.n_nodes || !out[a] || !out[b]) {
                throw Error(ErrorCode::MissingNeighbor,
                            "neighbors of node " + std::to_string(stage->missing[j]) + " are not available");
            }
        }
        for (std::size_t j = 0; j < stage->missing.size(); ++j) {
            const auto [a, b] = stage->neighbors[j];
            out[stage->missing[j]] = recover_direction(*out[a], *out[b]);
        }
    }
    std::vector<Subspace> result;
    result.reserve(plan.n_nodes);
    for (std::size_t i = 0; i < plan.n_nodes; ++i) {
        if (!out[i]) throw Error(ErrorCode::MissingNeighbor, "node " + std::to_string(i) + " was never recovered");
        result.push_back(*out[i]);
    }
    return result;
}

PlanValidation validate_plan(const CompressionPlan& plan) {
    PlanValidation v;
    auto fail = [&](std::string msg) {
        v.ok = false;
        v.problems.push_back(std::move(msg));
    };
    const auto n = plan.n_nodes;
    // 0 = untouched, 1 = retained, 2 + s = missing in stage s
    std::vector<std::size_t> state(n, 0);
    for (auto i : plan.retained) {
        if (i >= n) {
            fail("retained index " + std::to_string(i) + " out of range");
            continue;
        }
        if (state[i] != 0) fail("node " + std::to_string(i) + " retained twice");
        state[i] = 1;
    }
    if (!std::is_sorted(plan.retained.begin(), plan.retained.end())) fail("retained list is not ascending");
    for (std::size_t s = 0; s < plan.stages.size(); ++s) {
        const auto& st = plan.stages[s];
        if (st.neighbors.size() != st.missing.size()) fail("stage " + std::to_string(s) + " neighbor table size");
        if (plan.stride > 0 && st.missing.size() > plan.stride) {
            fail("stage " + std::to_string(s) + " removes more than the stride");
        }
        for (auto i : st.missing) {
            if (i >= n) {
                fail("missing index " + std::to_string(i) + " out of range");
                continue;
            }
            if (state[i] != 0) fail("node " + std::to_string(i) + " is retained or removed twice");
            state[i] = 2 + s;
        }
    }
    for (NodeIndex i = 0; i < n; ++i)
        if (state[i] == 0) fail("node " + std::to_string(i) + " is neither retained nor missing");
    for (std::size_t s = 0; s < plan.stages.size(); ++s) {
        const auto& st = plan.stages[s];
        for (std::size_t j = 0; j < std::min(st.missing.size(), st.neighbors.size()); ++j) {
            for (auto nb : st.neighbors[j]) {
                if (nb >= n) {
                    fail("neighbor index " + std::to_string(nb) + " out of range");
                    continue;
                }
                if (nb == st.missing[j]) fail("node " + std::to_string(nb) + " is its own neighbor");
                // Available at stage s: retained, or removed by a later stage.
                if (state[nb] >= 2 && state[nb] - 2 <= s) {
                    fail("stage " + std::to_string(s) + ": neighbor " + std::to_string(nb) + " of node " +
                         std::to_string(st.missing[j]) + " is missing");
                }
            }
        }
    }
    if (plan.achieved_k != plan.retained.size()) fail("achieved_k does not match retained count");
    if (plan.achieved_k < plan.requested_k) fail("achieved_k below requested k");
    return v;
}

ReconstructionError reconstruction_error(const std::vector<NodalRidgeModel>& original,
                                         const std::vector<Subspace>& recovered,
                                         const std::vector<NodeIndex>& components, const FieldSamples& train,
                                         const FieldSamples& eval, bool refit) {
    if (original.size() != recovered.size()) {
        throw Error(ErrorCode::DimensionMismatch, "original and recovered node counts differ");
    }
    if (components.empty()) throw Error(ErrorCode::InvalidArgument, "no components to score");
    ReconstructionError out;
    double total = 0.0;
    for (auto i : components) {
        if (i >= original.size() || static_cast<Eigen::Index>(i) >= eval.F.cols()) {
            throw Error(ErrorCode::InvalidArgument, "component index out of range");
        }
        const auto col = static_cast<Eigen::Index>(i);
        const Vector truth = eval.F.col(col);
        Vector prediction;
        if (refit) {
            const RidgeProfile profile =
                fit_profile(recovered[i], train.X, train.F.col(col), original[i].profile.degree());
            prediction = profile.values(recovered[i].project(eval.X));
        } else {
            const Matrix cross = recovered[i].basis().transpose() * original[i].directions.basis();
            const Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
            const Matrix aligned = recovered[i].basis() * (svd.matrixU() * svd.matrixV().transpose());
            prediction = original[i].profile.values(eval.X * aligned);
        }
        try {
            total += normalized_mse(truth, prediction);
            ++out.components;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ZeroVariance) throw;
            ++out.zero_variance_skipped;
        }
    }
    out.epsilon = out.components > 0 ? total / static_cast<double>(out.components) : 0.0;
    return out;
}

PerturbationCheck check_perturbation_bound(const NodalRidgeModel& model, const Subspace& perturbed, double G,
                                           double sigma_x, std::size_t n_mc, std::uint64_t rng_seed) {
    if (n_mc < 1) throw Error(ErrorCode::InvalidArgument, "need at least one Monte Carlo sample");
    const PrincipalPair pv = principal_vectors(model.directions, perturbed);
    // Rotation from the model's coordinates to principal coordinates.
    const Matrix Y = model.directions.basis().transpose() * pv.a;
    const Matrix A = pv.b - pv.a;
    const auto d = model.ambient_dim();
    const auto r = model.directions.dim();

    std::mt19937_64 rng(rng_seed);
    const double half = std::sqrt(3.0) * sigma_x;
    std::uniform_real_distribution<double> uni(-half, half);
    constexpr std::size_t kBatch = 4096;
    double acc = 0.0;
    double max_grad = 0.0;
    for (std::size_t done = 0; done < n_mc; done += kBatch) {
        const auto rows = static_cast<Eigen::Index>(std::min(kBatch, n_mc - done));
        Matrix X(rows, d);
        for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = uni(rng);
        const Matrix grads = model.profile.gradients(model.directions.project(X));  // rows x r
        max_grad = std::max(max_grad, grads.rowwise().norm().maxCoeff());
        const Matrix rotated = grads * Y;  // principal-coordinate gradients
        const Matrix XA = X * A;
        acc += (XA.cwiseProduct(rotated)).rowwise().sum().squaredNorm();
    }
    PerturbationCheck out;
    out.epsilon_est = acc / static_cast<double>(n_mc);
    out.largest_angle = pv.angles.size() > 0 ? pv.angles(pv.angles.size() - 1) : 0.0;
    out.bound = static_cast<double>(r) * G * G * sigma_x * sigma_x * (2.0 - 2.0 * std::cos(out.largest_angle));
    out.max_grad_norm = max_grad;
    return out;
}

}  // namespace ridgekit

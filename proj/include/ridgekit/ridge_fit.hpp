#pragma once

#include "ridgekit/subspace.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ridgekit {

/// Input/output pairs: rows of X are inputs, y the matching responses.
struct SampleSet {
    Matrix X;
    Vector y;

    /// Throws DimensionMismatch when X and y disagree in length,
    /// InsufficientSamples below two samples, InvalidArgument on NaN/Inf.
    void validate() const;
};

struct VPConfig {
    int reduced_dim = 1;
    int degree = 7;
    int max_iters = 100;
    double subspace_tol = 1e-7;
    int n_restarts = 3;
    std::uint64_t rng_seed = 0;
    /// When set, the only starting point.
    std::optional<Matrix> initial;
};

struct MAVEConfig {
    int reduced_dim = 1;
    double bandwidth_rule = 1.0;
    int max_iters = 50;
    double tol = 1e-8;
    std::uint64_t rng_seed = 0;
};

/// Outcome of a direction fit. `converged` is false when the iteration budget
/// ran out; `subspace` is then the best iterate seen.
struct DirectionFit {
    Subspace subspace;
    bool converged = true;
    int iterations = 0;
    double objective = 0.0;
    /// Objective after each accepted iteration of the winning start.
    std::vector<double> trace;
    /// MAVE only: local systems that needed the 1e-10 ridge term.
    int regularized_systems = 0;
};

/// Direction of the affine least-squares fit X w + c ~ y, normalized.
/// Throws Degenerate when ||w|| < 1e-14 (constant response).
Subspace fit_linear_direction(const SampleSet& data);

/// Polynomial ridge approximation by variable projection: the profile
/// coefficients are eliminated by least squares, and the subspace is updated
/// by Gauss-Newton steps along Grassmann geodesics with step halving.
DirectionFit fit_vp(const SampleSet& data, const VPConfig& cfg);

/// Sum of squared residuals of the best degree-p polynomial over X * W.
double vp_objective(const SampleSet& data, const Matrix& W, int degree);

/// Minimum average variance estimation with Gaussian product kernels on the
/// reduced coordinates, alternating between local linear fits and the
/// direction update.
DirectionFit fit_mave(const SampleSet& data, const MAVEConfig& cfg);

/// Profiled MAVE objective at W: kernel weights from W, local intercepts and
/// slopes solved by weighted least squares.
double mave_objective(const SampleSet& data, const Matrix& W, double bandwidth_rule);

enum class FitterKind { Linear, VP, MAVE };

std::string to_string(FitterKind kind);
FitterKind fitter_from_string(const std::string& name);

/// A fitter strategy plus its configuration, as used by batch pipelines.
struct FitterSpec {
    FitterKind kind = FitterKind::VP;
    VPConfig vp;
    MAVEConfig mave;
};

/// Run the configured fitter with reduced dimension r and the given seed.
DirectionFit fit_directions(const SampleSet& data, const FitterSpec& spec, int r,
                            std::uint64_t seed);

}  // namespace ridgekit

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ridgekit/error.hpp"
#include "ridgekit/generators.hpp"
#include "ridgekit/ridge_fit.hpp"
#include "support.hpp"

#include <cmath>
#include <numbers>

using namespace ridgekit;
using namespace ridgekit::testing;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an exception");
    return ErrorCode::InvalidArgument;
}

SampleSet component(const AnalyticalProblem& p, Eigen::Index i, Eigen::Index M, std::uint64_t seed) {
    const Matrix X = uniform_inputs(M, p.dim(), seed);
    return {X, p.field(X).col(i)};
}

}  // namespace

TEST_CASE("sample set validation") {
    SampleSet s{Matrix::Zero(1, 2), Vector::Zero(1)};
    CHECK(code_of([&] { s.validate(); }) == ErrorCode::InsufficientSamples);
    s = {Matrix::Zero(3, 2), Vector::Zero(2)};
    CHECK(code_of([&] { s.validate(); }) == ErrorCode::DimensionMismatch);
    s = {Matrix::Zero(3, 2), Vector::Zero(3)};
    s.X(1, 1) = std::nan("");
    CHECK(code_of([&] { s.validate(); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("linear direction of an exact linear response") {
    const Matrix X = uniform_inputs(50, 6, 1);
    const Vector y = 2.0 * X.col(0) + 3.0 * X.col(1);
    const Subspace S = fit_linear_direction({X, y});
    Vector expected = Vector::Zero(6);
    expected(0) = 2.0 / std::sqrt(13.0);
    expected(1) = 3.0 / std::sqrt(13.0);
    CHECK((S.basis().col(0) - expected).cwiseAbs().maxCoeff() < 1e-12);

    // Positive rescaling of y leaves the direction unchanged.
    const Vector y2 = (X.col(2).array().exp() + X.col(4).array()).matrix();
    const Subspace a = fit_linear_direction({X, y2});
    const Subspace b = fit_linear_direction({X, 7.5 * y2});
    CHECK((a.basis() - b.basis()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("linear direction errors") {
    const Matrix X = uniform_inputs(20, 4, 2);
    CHECK(code_of([&] { fit_linear_direction({X, Vector::Constant(20, 3.0)}); }) == ErrorCode::Degenerate);
    const Matrix small = uniform_inputs(4, 4, 3);
    CHECK(code_of([&] { fit_linear_direction({small, Vector::Ones(4)}); }) == ErrorCode::InsufficientSamples);
}

TEST_CASE("linear direction of a monotone ridge") {
    const AnalyticalProblem p = AnalyticalProblem::create(3);
    const SampleSet data = component(p, 1, 500, 3);
    CHECK(subspace_distance(fit_linear_direction(data), p.component_direction(1)) < 0.05);
}

TEST_CASE("variable projection recovers the polynomial ridge") {
    const AnalyticalProblem p = AnalyticalProblem::create(1);
    const SampleSet data = component(p, 0, 150, 11);
    VPConfig cfg;
    cfg.degree = 7;
    cfg.n_restarts = 3;
    cfg.rng_seed = 4;
    const DirectionFit fit = fit_vp(data, cfg);
    CHECK(subspace_distance(fit.subspace, p.component_direction(0)) < 0.005);
    for (std::size_t i = 1; i < fit.trace.size(); ++i) CHECK(fit.trace[i] <= fit.trace[i - 1]);
}

TEST_CASE("variable projection started at the answer stays there") {
    const AnalyticalProblem p = AnalyticalProblem::create(2);
    const SampleSet data = component(p, 0, 150, 12);
    VPConfig cfg;
    cfg.degree = 7;
    cfg.initial = p.directions.col(0);
    const DirectionFit fit = fit_vp(data, cfg);
    CHECK(fit.converged);
    CHECK(fit.iterations <= 2);
    CHECK(subspace_distance(fit.subspace, p.component_direction(0)) < 1e-7);
}

TEST_CASE("variable projection on the sine ridge") {
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const AnalyticalProblem p = AnalyticalProblem::create(100 + seed);
        const SampleSet data = component(p, 2, 200, 200 + seed);
        VPConfig cfg;
        cfg.degree = 7;
        cfg.rng_seed = seed;
        const DirectionFit fit = fit_vp(data, cfg);
        if (subspace_distance(fit.subspace, p.component_direction(2)) < 0.005) ++ok;
        for (std::size_t i = 1; i < fit.trace.size(); ++i) CHECK(fit.trace[i] <= fit.trace[i - 1]);
    }
    MESSAGE("sine ridge success: " << ok << "/20");
    CHECK(ok >= 16);
}

TEST_CASE("variable projection in two dimensions") {
    std::mt19937_64 rng(8);
    const Subspace W = random_subspace(6, 2, rng);
    const Matrix X = uniform_inputs(200, 6, 9);
    const Matrix U = W.project(X);
    const Vector y = (U.col(0).array().square() + U.col(0).array() * U.col(1).array() + U.col(1).array()).matrix();
    VPConfig cfg;
    cfg.reduced_dim = 2;
    cfg.degree = 2;
    cfg.rng_seed = 3;
    const DirectionFit fit = fit_vp({X, y}, cfg);
    CHECK(subspace_distance(fit.subspace, W) < 1e-6);
    CHECK(std::abs(vp_objective({X, y}, fit.subspace.basis(), 2) - fit.objective) < 1e-9);
}

TEST_CASE("variable projection preconditions") {
    // C(1 + 7, 7) + 10 = 18 samples are needed.
    const Matrix X = uniform_inputs(17, 10, 1);
    VPConfig cfg;
    cfg.degree = 7;
    CHECK(code_of([&] { fit_vp({X, X.col(0)}, cfg); }) == ErrorCode::InsufficientSamples);
    const Matrix X18 = uniform_inputs(18, 10, 1);
    CHECK_NOTHROW(fit_vp({X18, X18.col(0)}, cfg));
}

TEST_CASE("MAVE on a linear response") {
    Vector w{{1.0, -2.0, 0.5, 0.0, 1.0}};
    w.normalize();
    const Matrix X = uniform_inputs(200, 5, 21);
    MAVEConfig cfg;
    const DirectionFit fit = fit_mave({X, X * w}, cfg);
    CHECK(subspace_distance(fit.subspace, orthonormalize(w)) < 1e-3);
}

TEST_CASE("MAVE on the exponential ridge") {
    const AnalyticalProblem p = AnalyticalProblem::create(3);
    const SampleSet data = component(p, 1, 400, 22);
    const DirectionFit fit = fit_mave(data, MAVEConfig{});
    CHECK(subspace_distance(fit.subspace, p.component_direction(1)) < 0.05);
    for (std::size_t i = 1; i < fit.trace.size(); ++i) CHECK(fit.trace[i] <= fit.trace[i - 1] + 1e-10);
}

TEST_CASE("MAVE and variable projection agree") {
    const AnalyticalProblem p = AnalyticalProblem::create(4);
    const SampleSet data = component(p, 0, 400, 23);
    VPConfig vp;
    vp.degree = 7;
    const DirectionFit a = fit_mave(data, MAVEConfig{});
    const DirectionFit b = fit_vp(data, vp);
    CHECK(subspace_distance(a.subspace, b.subspace) < 0.05);
}

TEST_CASE("MAVE preconditions") {
    const Matrix X = uniform_inputs(30, 10, 1);
    CHECK(code_of([&] { fit_mave({X, X.col(0)}, MAVEConfig{}); }) == ErrorCode::InsufficientSamples);
}

TEST_CASE("fitters are equivariant under input rotation") {
    const AnalyticalProblem p = AnalyticalProblem::create(6);
    const SampleSet data = component(p, 1, 400, 24);
    std::mt19937_64 rng(25);
    const Matrix Q = orthonormalize(gaussian(10, 10, rng)).basis();
    const SampleSet rotated{data.X * Q.transpose(), data.y};
    FitterSpec specs[3];
    specs[0].kind = FitterKind::Linear;
    specs[1].kind = FitterKind::VP;
    specs[1].vp.degree = 7;
    specs[2].kind = FitterKind::MAVE;
    for (const auto& spec : specs) {
        CAPTURE(to_string(spec.kind));
        const Subspace a = fit_directions(data, spec, 1, 5).subspace;
        const Subspace b = fit_directions(rotated, spec, 1, 5).subspace;
        CHECK(subspace_distance(a, orthonormalize(Q.transpose() * b.basis())) < 0.01);
    }
}

TEST_CASE("fitter names and rank checks") {
    CHECK(fitter_from_string("vp") == FitterKind::VP);
    CHECK(fitter_from_string("mave") == FitterKind::MAVE);
    CHECK(fitter_from_string("linear") == FitterKind::Linear);
    CHECK(to_string(FitterKind::MAVE) == "mave");
    CHECK_THROWS_AS(fitter_from_string("sir"), Error);
    const Matrix X = uniform_inputs(40, 4, 1);
    FitterSpec lin;
    lin.kind = FitterKind::Linear;
    CHECK(code_of([&] { fit_directions({X, X.col(0)}, lin, 2, 0); }) == ErrorCode::UnsupportedRank);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ridgekit/error.hpp"
#include "ridgekit/generators.hpp"
#include "support.hpp"

#include <cmath>
#include <numbers>

using namespace ridgekit;
using namespace ridgekit::testing;

TEST_CASE("uniform inputs") {
    const Matrix X = uniform_inputs(400, 6, 5);
    CHECK(X.minCoeff() >= -1.0);
    CHECK(X.maxCoeff() <= 1.0);
    CHECK(std::abs(X.mean()) < 0.05);
    CHECK(std::abs(X.array().square().mean() - 1.0 / 3.0) < 0.02);
    CHECK((uniform_inputs(400, 6, 5) - X).cwiseAbs().maxCoeff() == 0.0);
    CHECK((uniform_inputs(400, 6, 6) - X).cwiseAbs().maxCoeff() > 0.0);
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("analytical problem") {
    const AnalyticalSamples s = generate_analytical(11, 100);
    const AnalyticalProblem p = AnalyticalProblem::create(11);
    CHECK(s.field.F.cols() == 3);
    CHECK(s.field.X.cols() == 10);
    CHECK((s.qoi - s.field.F * Vector{{2.0, 3.0, 5.0}}).cwiseAbs().maxCoeff() == 0.0);
    CHECK((p.field(s.field.X) - s.field.F).cwiseAbs().maxCoeff() == 0.0);
    for (Eigen::Index i = 0; i < 3; ++i) CHECK(std::abs(p.directions.col(i).norm() - 1.0) <= 1e-14);
    CHECK((AnalyticalProblem::create(11).directions - p.directions).cwiseAbs().maxCoeff() == 0.0);
    CHECK((AnalyticalProblem::create(12).directions - p.directions).cwiseAbs().maxCoeff() > 0.0);

    const Vector u = s.field.X.row(4) * p.directions;
    CHECK(std::abs(s.field.F(4, 0) - (u(0) * u(0) + u(0) * u(0) * u(0))) < 1e-14);
    CHECK(std::abs(s.field.F(4, 1) - std::exp(u(1))) < 1e-14);
    CHECK(std::abs(s.field.F(4, 2) - std::sin(std::numbers::pi * u(2))) < 1e-14);
}

TEST_CASE("analytical qoi gradient") {
    const AnalyticalProblem p = AnalyticalProblem::create(3);
    const Vector g0 = p.qoi_gradient(Vector::Zero(10));
    const Vector expect = 3.0 * p.directions.col(1) + 5.0 * std::numbers::pi * p.directions.col(2);
    CHECK((g0 - expect).cwiseAbs().maxCoeff() < 1e-14);

    const Matrix X = uniform_inputs(20, 10, 4);
    const Matrix G = p.qoi_gradients(X);
    const double h = 1e-6;
    for (Eigen::Index m = 0; m < X.rows(); ++m) {
        CHECK((G.row(m).transpose() - p.qoi_gradient(X.row(m).transpose())).cwiseAbs().maxCoeff() == 0.0);
        for (Eigen::Index j = 0; j < 10; ++j) {
            Matrix Xp = X.row(m), Xm = X.row(m);
            Xp(0, j) += h;
            Xm(0, j) -= h;
            const double fd = (p.qoi(Xp)(0) - p.qoi(Xm)(0)) / (2 * h);
            CHECK(std::abs(fd - G(m, j)) < 1e-6 * std::max(1.0, std::abs(fd)));
        }
    }
    CHECK(p.true_subspace().dim() == 3);
    CHECK(subspace_distance(p.component_direction(1), orthonormalize(Vector(p.directions.col(1)))) == 0.0);
}

TEST_CASE("links") {
    for (LinkFamily f : {LinkFamily::Quadratic, LinkFamily::Cubic, LinkFamily::Exp, LinkFamily::Sine}) {
        CHECK(link_from_string(to_string(f)) == f);
        for (double u : {-1.3, -0.2, 0.0, 0.7, 1.9}) {
            const double fd = (link_value(f, u + 1e-6) - link_value(f, u - 1e-6)) / 2e-6;
            CHECK(std::abs(fd - link_derivative(f, u)) < 1e-7 * std::max(1.0, std::abs(fd)));
        }
    }
    CHECK_THROWS_AS(link_from_string("tanh"), Error);
}

TEST_CASE("localized field geometry") {
    SyntheticFieldSpec spec;
    spec.d = 30;
    spec.N = 200;
    spec.rng_seed = 8;
    const LocalizedField f = LocalizedField::create(spec);
    const auto dirs = f.true_directions();
    REQUIRE(dirs.size() == 200);
    double mean = 0.0, worst = 0.0;
    for (std::size_t i = 0; i + 1 < dirs.size(); ++i) {
        const double s = subspace_distance(dirs[i], dirs[i + 1]);
        mean += s;
        worst = std::max(worst, s);
    }
    mean /= 199.0;
    MESSAGE("adjacent distance mean " << mean << ", max " << worst);
    CHECK(worst < 2.0 * mean);
    for (Eigen::Index i = 0; i < spec.N; ++i) {
        const Vector w = f.directions.col(i);
        CHECK(std::abs(w.norm() - 1.0) <= 1e-14);
        // Support is a window of consecutive inputs.
        Eigen::Index lo = spec.d, hi = -1;
        for (Eigen::Index j = 0; j < spec.d; ++j)
            if (w(j) != 0.0) {
                lo = std::min(lo, j);
                hi = std::max(hi, j);
            }
        CHECK(hi - lo + 1 <= spec.window_width);
        for (Eigen::Index j = lo; j <= hi; ++j) CHECK(w(j) != 0.0);
    }
    CHECK(f.links.front() == LinkFamily::Quadratic);
    CHECK(f.links.back() == LinkFamily::Sine);
    CHECK(std::abs(f.weights.sum() - 1.0) < 1e-14);
    CHECK(f.node_coords(0, 0) == 0.0);
    CHECK(f.node_coords(199, 0) == 1.0);
}

TEST_CASE("localized field window extremes") {
    SyntheticFieldSpec spec;
    spec.d = 8;
    spec.N = 12;
    spec.window_width = 1;
    const LocalizedField axes = LocalizedField::create(spec);
    for (Eigen::Index i = 0; i < spec.N; ++i) {
        const Vector w = axes.directions.col(i);
        CHECK(w.cwiseAbs().maxCoeff() == 1.0);
        CHECK(w.cwiseAbs().sum() == 1.0);
    }
    spec.window_width = 8;
    const LocalizedField dense = LocalizedField::create(spec);
    const Vector mid = dense.directions.col(6);
    CHECK((mid.array() != 0.0).count() >= 7);

    spec.window_width = 9;
    CHECK_THROWS_AS(LocalizedField::create(spec), Error);
    spec.window_width = 3;
    spec.links = std::vector<LinkFamily>(3, LinkFamily::Exp);
    CHECK_THROWS_AS(LocalizedField::create(spec), Error);
}

TEST_CASE("localized field samples") {
    SyntheticFieldSpec spec;
    spec.d = 10;
    spec.N = 16;
    spec.rng_seed = 2;
    const LocalizedSamples s = generate_localized_field(spec, 50);
    const LocalizedField f = LocalizedField::create(spec);
    CHECK(s.field.F.rows() == 50);
    CHECK(s.field.F.cols() == 16);
    CHECK((f.evaluate(s.field.X) - s.field.F).cwiseAbs().maxCoeff() == 0.0);
    for (Eigen::Index i = 0; i < 16; ++i) {
        const Vector u = s.field.X * f.directions.col(i);
        for (Eigen::Index m = 0; m < 50; ++m)
            CHECK(s.field.F(m, i) == doctest::Approx(link_value(f.links[static_cast<std::size_t>(i)], u(m))).epsilon(1e-14));
    }
    spec.noise_sd = 0.1;
    const LocalizedSamples noisy = generate_localized_field(spec, 2000);
    const Matrix resid = noisy.field.F - f.evaluate(noisy.field.X);
    const double sd = std::sqrt(resid.array().square().mean());
    CHECK(std::abs(sd - 0.1) < 0.005);
}

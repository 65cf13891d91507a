#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>

#include "doctest.h"
#include "fbsde/rng.hpp"
#include "fbsde/simulation.hpp"

using namespace fbsde;

TEST_CASE("time grids") {
    const TimeGrid g = TimeGrid::uniform(1.0, 4);
    REQUIRE(g.steps() == 4);
    CHECK(g.horizon() == doctest::Approx(1.0));
    CHECK(g.dt(2) == doctest::Approx(0.25));
    CHECK(g.times.front() == 0.0);

    const TimeGrid pw = TimeGrid::piecewise_uniform({0.0, 0.3, 1.0}, 2);
    REQUIRE(pw.steps() == 4);
    CHECK(pw.times[1] == doctest::Approx(0.15));
    CHECK(pw.times[2] == doctest::Approx(0.3));
    CHECK(pw.times[3] == doctest::Approx(0.65));
    CHECK(pw.horizon() == doctest::Approx(1.0));
}

TEST_CASE("counter RNG is a pure function of its key") {
    CHECK(normal_draw(1, 2, 3, 4) == normal_draw(1, 2, 3, 4));
    CHECK(normal_draw(1, 2, 3, 4) != normal_draw(2, 2, 3, 4));
    CHECK(uniform_draw(9, 0, 0, 0, -1.0, 1.0) >= -1.0);
    CHECK(uniform_draw(9, 0, 0, 0, -1.0, 1.0) < 1.0);
}

TEST_CASE("brownian increments: moments and determinism") {
    const Dimensions dims{1, 1, 1};
    PathEnsemble a(20000, TimeGrid::uniform(1.0, 2), dims, 77);
    sample_brownian(a);
    double mean = 0, var = 0;
    for (int p = 0; p < a.nPaths; ++p) mean += a.dW_at(p, 0)[0];
    mean /= a.nPaths;
    for (int p = 0; p < a.nPaths; ++p) {
        const double d = a.dW_at(p, 0)[0] - mean;
        var += d * d;
    }
    var /= a.nPaths;
    CHECK(std::abs(mean) < 0.02);
    CHECK(var == doctest::Approx(0.5).epsilon(0.05));  // dt = 1/2

    PathEnsemble b(20000, TimeGrid::uniform(1.0, 2), dims, 77);
    sample_brownian(b);
    CHECK(a.dW == b.dW);

    PathEnsemble c(20000, TimeGrid::uniform(1.0, 2), dims, 78);
    sample_brownian(c);
    CHECK(a.dW != c.dW);
}

TEST_CASE("forward euler: driftless unit volatility accumulates increments exactly") {
    FbsdeProblem p = builtin_problem("martingale", {{"T", 1.0}, {"x0", 2.0}});
    PathEnsemble ens(50, TimeGrid::uniform(1.0, 8), p.dims, 5);
    sample_brownian(ens);
    const YSource zero = [](int, int, const Eigen::VectorXd&) {
        return Eigen::VectorXd::Zero(1);
    };
    forward_euler(p, ens, zero);
    for (int path = 0; path < ens.nPaths; ++path) {
        double acc = 2.0;
        CHECK(ens.x_at(path, 0)[0] == 2.0);
        for (int k = 0; k < 8; ++k) {
            acc += ens.dW_at(path, k)[0];
            CHECK(ens.x_at(path, k + 1)[0] == doctest::Approx(acc).epsilon(1e-14));
        }
    }
}

TEST_CASE("forward euler matches a manual recursion for coupled drift") {
    FbsdeProblem p = builtin_problem("delay_counterexample", {{"k", 1.0}, {"T", 1.0}, {"x0", 1.0}});
    const TimeGrid g = TimeGrid::uniform(1.0, 16);
    PathEnsemble ens(1, g, p.dims, 3);
    sample_brownian(ens);
    const YSource ys = [](int, int k, const Eigen::VectorXd&) {
        return Eigen::VectorXd::Constant(1, 0.1 * k);
    };
    forward_euler(p, ens, ys);
    double x = 1.0;
    for (int k = 0; k < 16; ++k) {
        x += 0.1 * k * g.dt(k);  // b = y, sigma = 0
        CHECK(ens.x_at(0, k + 1)[0] == doctest::Approx(x).epsilon(1e-14));
    }
}

TEST_CASE("forward euler respects custom initial states") {
    FbsdeProblem p = builtin_problem("martingale", {{"T", 1.0}});
    PathEnsemble ens(3, TimeGrid::uniform(1.0, 2), p.dims, 9);
    sample_brownian(ens);
    Eigen::MatrixXd init(3, 1);
    init << -1.0, 0.5, 2.0;
    const YSource zero = [](int, int, const Eigen::VectorXd&) {
        return Eigen::VectorXd::Zero(1);
    };
    forward_euler(p, ens, zero, &init);
    for (int path = 0; path < 3; ++path) CHECK(ens.x_at(path, 0)[0] == init(path, 0));
}

TEST_CASE("non-finite drift names the offending path and step") {
    FbsdeProblem p = builtin_problem("martingale", {{"T", 1.0}});
    p.b = [](double, const Eigen::VectorXd&, const Eigen::VectorXd&) {
        return Eigen::VectorXd::Constant(1, std::numeric_limits<double>::infinity());
    };
    PathEnsemble ens(2, TimeGrid::uniform(1.0, 2), p.dims, 1);
    sample_brownian(ens);
    const YSource zero = [](int, int, const Eigen::VectorXd&) {
        return Eigen::VectorXd::Zero(1);
    };
    CHECK_THROWS(forward_euler(p, ens, zero));
}

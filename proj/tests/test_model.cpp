#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "fbsde/model.hpp"

using namespace fbsde;

TEST_CASE("growth functions: values and monotonicity") {
    const GrowthFn c = GrowthFn::constant(2.5);
    CHECK(c(0.0) == 2.5);
    CHECK(c(1e6) == 2.5);

    const GrowthFn pw = GrowthFn::power(1.0, 2.0);
    CHECK(pw(0.0) == doctest::Approx(1.0));
    CHECK(pw(3.0) == doctest::Approx(10.0));

    const GrowthFn lg = GrowthFn::log(2.0);
    CHECK(lg(0.0) == doctest::Approx(2.0));
    CHECK(lg(std::exp(1.0) - 1.0) == doctest::Approx(2.0 * (1.0 + 1.0)));

    std::mt19937 gen(3);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (const GrowthFn& f : {c, pw, lg})
        for (int i = 0; i < 1000; ++i) {
            double a = u(gen), b = u(gen);
            if (a > b) std::swap(a, b);
            CHECK(f(a) >= 0.0);
            CHECK(f(a) <= f(b) + 1e-12);
        }
}

TEST_CASE("growth at_pow2 avoids overflow") {
    const GrowthFn lg = GrowthFn::log(1.0);
    CHECK(std::isfinite(lg.at_pow2(1.0, 5000)));
    CHECK(lg.at_pow2(1.0, 3) == doctest::Approx(lg(8.0)).epsilon(1e-12));
    const GrowthFn pw = GrowthFn::power(1.0, 2.0);
    CHECK(pw.at_pow2(1.0, 4) == doctest::Approx(pw(16.0)).epsilon(1e-12));
    CHECK(std::isinf(pw.at_pow2(1.0, 5000)));
}

TEST_CASE("validate_problem: zero drift with zero constants passes") {
    FbsdeProblem p = builtin_problem("martingale", {{"T", 1.0}});
    const ValidationReport r = validate_problem(p, 500, 42);
    CHECK(r.ok());
}

TEST_CASE("validate_problem: understated terminal Lipschitz is flagged") {
    FbsdeProblem p = builtin_problem("martingale", {{"T", 1.0}});
    p.h = [](const Eigen::VectorXd& x) { return Eigen::VectorXd(2.0 * x); };  // k5 still 1
    const ValidationReport r = validate_problem(p, 500, 42);
    CHECK(!r.ok());
    bool a3 = false;
    for (const auto& v : r.violations) a3 = a3 || v.assumption == "A3";
    CHECK(a3);
}

TEST_CASE("validate_problem: counterexample declarations hold") {
    FbsdeProblem p = builtin_problem("delay_counterexample", {{"k", 1.0}, {"T", 1.0}});
    const ValidationReport r = validate_problem(p, 2000, 7);
    CHECK(r.ok());
}

TEST_CASE("validate_problem is deterministic in the seed") {
    FbsdeProblem p = builtin_problem("superquadratic_power", {{"c", 1.0}, {"p", 2.0}, {"T", 0.1}});
    const ValidationReport a = validate_problem(p, 300, 99);
    const ValidationReport b = validate_problem(p, 300, 99);
    REQUIRE(a.checks.size() == b.checks.size());
    for (std::size_t i = 0; i < a.checks.size(); ++i)
        CHECK(a.checks[i].maxRatio == b.checks[i].maxRatio);
}

TEST_CASE("validate_problem reports non-finite coefficients instead of crashing") {
    FbsdeProblem p = builtin_problem("martingale", {{"T", 1.0}});
    p.g = [](double, const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::MatrixXd&) {
        return Eigen::VectorXd::Constant(1, std::numeric_limits<double>::quiet_NaN());
    };
    const ValidationReport r = validate_problem(p, 100, 1);
    CHECK(!r.ok());
}

TEST_CASE("all builtins pass validation at 10^4 samples") {
    for (const std::string& name : builtin_problem_names()) {
        const FbsdeProblem p = builtin_problem(name);
        const ValidationReport r = validate_problem(p, 10000, 2024);
        INFO(name);
        CHECK(r.ok());
    }
}

TEST_CASE("builtin coefficient definitions") {
    const FbsdeProblem d =
        builtin_problem("delay_counterexample", {{"k", 2.0}, {"T", 0.5}, {"x0", 1.0}});
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.7);
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(1, -0.3);
    const Eigen::MatrixXd z = Eigen::MatrixXd::Constant(1, 1, 5.0);
    CHECK(d.b(0.1, x, y)[0] == doctest::Approx(-0.3));
    CHECK(d.sigma(0.1)(0, 0) == 0.0);
    CHECK(d.g(0.1, x, y, z)[0] == doctest::Approx(1.4));
    CHECK(d.h(x)[0] == 0.0);

    const FbsdeProblem m = builtin_problem("martingale", {{"T", 1.0}, {"x0", 2.0}});
    CHECK(m.b(0.0, x, y)[0] == 0.0);
    CHECK(m.g(0.0, x, y, z)[0] == 0.0);
    CHECK(m.h(x)[0] == doctest::Approx(0.7));
    CHECK(m.x0[0] == 2.0);

    const FbsdeProblem s =
        builtin_problem("superquadratic_power", {{"c", 1.5}, {"p", 3.0}, {"T", 0.05}});
    CHECK(s.g(0.0, x, y, z)[0] == doctest::Approx(1.5 / 4.0 * std::pow(5.0, 4.0)));
    CHECK(s.constants.rho(2.0) == doctest::Approx(1.5 * (1.0 + 8.0)));
}

TEST_CASE("superquadratic z-Lipschitz modulus bound on samples") {
    const FbsdeProblem p =
        builtin_problem("superquadratic_power", {{"c", 1.0}, {"p", 2.0}, {"T", 0.1}});
    std::mt19937 gen(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const Eigen::VectorXd v = Eigen::VectorXd::Zero(1);
    for (int i = 0; i < 2000; ++i) {
        Eigen::MatrixXd z1(1, 1), z2(1, 1);
        z1 << u(gen);
        z2 << u(gen);
        const double lhs = std::abs(p.g(0, v, v, z1)[0] - p.g(0, v, v, z2)[0]);
        const double mod = p.constants.rho(std::max(std::abs(z1(0, 0)), std::abs(z2(0, 0))));
        CHECK(lhs <= mod * std::abs(z1(0, 0) - z2(0, 0)) + 1e-10);
    }
}

TEST_CASE("diagonal generator shape: g^i ignores other z rows") {
    // builtin 2-d problem is declared diagonal; its g is z-free, so any
    // change confined to other rows leaves each component unchanged
    const FbsdeProblem p = builtin_problem("coupled_2d_gamma");
    REQUIRE(p.gShape == GeneratorShape::Diagonal);
    const Eigen::VectorXd x = Eigen::VectorXd::Ones(2);
    const Eigen::VectorXd y = Eigen::Vector2d(0.4, -0.2);
    Eigen::MatrixXd z1 = Eigen::MatrixXd::Random(2, 2);
    Eigen::MatrixXd z2 = z1;
    z2.row(1) += Eigen::RowVector2d(3.0, -1.0);  // rows 0 equal
    CHECK(p.g(0, x, y, z1)[0] == doctest::Approx(p.g(0, x, y, z2)[0]).epsilon(1e-14));
}

TEST_CASE("unknown builtin and bad parameters are rejected") {
    CHECK_THROWS(builtin_problem("nope"));
    CHECK_THROWS(builtin_problem("delay_counterexample", {{"k", -1.0}}));
    CHECK_THROWS(builtin_problem("martingale", {{"T", 0.0}}));
}

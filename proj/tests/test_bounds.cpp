#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "fbsde/bounds.hpp"

using namespace fbsde;

namespace {

AssumptionConstants all_ones() {
    AssumptionConstants c = AssumptionConstants::zeros({1, 1, 1});
    c.k1 = c.k2 = c.k3 = c.k4 = c.k5 = 1.0;
    c.lambda1 = c.lambda2 = 1.0;
    c.rho = GrowthFn::constant(0.0);
    return c;
}

// dense-grid feasibility scan, independent of the bisection implementation
double c2_scan_oracle(const AssumptionConstants& c, const Dimensions& dims, double c1,
                      double tMax, int nGrid) {
    const double M = 4.0 * c.lambda2 * c.k5 * std::sqrt(double(dims.d) * dims.l);
    const double rhoM = c.rho(M);
    const double beta = 2.0 * rhoM * rhoM + c.k3 * c.k3 + 2.0 * c.k4;
    double best = 0.0;
    for (int i = 0; i <= nGrid; ++i) {
        const double T = tMax * i / nGrid;
        const bool ok = 2.0 * T * T * c.k1 * c.k1 <= 0.5 &&
                        8.0 * (c1 + 1.0) * std::exp(beta * T) * (c.k5 * c.k5 + T) * T * T *
                                c.k2 * c.k2 <=
                            0.5;
        if (ok) best = T;
    }
    return best;
}

}  // namespace

TEST_CASE("M formula") {
    AssumptionConstants c = all_ones();
    CHECK(z_bound_M(c, {1, 1, 1}) == doctest::Approx(4.0).epsilon(1e-14));
    c.lambda2 = 0.5;
    c.k5 = 3.0;
    CHECK(z_bound_M(c, {2, 2, 4}) ==
          doctest::Approx(4.0 * 0.5 * 3.0 * std::sqrt(8.0)).epsilon(1e-14));
    c.k5 = 0.0;
    CHECK(z_bound_M(c, {1, 1, 1}) == 0.0);
}

TEST_CASE("Q formula vs direct sum") {
    AssumptionConstants c = AssumptionConstants::zeros({1, 2, 3});
    c.A.resize(2, 3);
    c.A << 1, 0, 2, 0.5, 1, 0;
    c.qIntegrals.resize(2, 3);
    c.qIntegrals << 0.25, 0, 1, 0, 0.5, 0.75;
    double s = 0;
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 2; ++i) s += c.A(i, j) * c.A(i, j) + c.qIntegrals(i, j);
    CHECK(malliavin_bound_Q(c) == doctest::Approx(std::sqrt(2.0 * s)).epsilon(1e-14));

    AssumptionConstants bad = c;
    bad.qIntegrals.resize(1, 3);
    CHECK_THROWS(malliavin_bound_Q(bad));
}

TEST_CASE("C1: all-ones constants give log2/3") {
    const AssumptionConstants c = all_ones();
    // candidates: k5^2/k3^2 = 1, log2/k1 = log2, lambda2/(k2 M) = 1/4,
    // log2/(2 k4 + rho(M)^2 + 1) = log2/3 -- the minimum
    CHECK(local_horizon_C1(c, {1, 1, 1}) == doctest::Approx(std::log(2.0) / 3.0).epsilon(1e-14));
}

TEST_CASE("C1: zero denominators drop out") {
    AssumptionConstants c = AssumptionConstants::zeros({1, 1, 1});
    c.k5 = 1.0;
    c.lambda2 = 1.0;
    // k1 = k2 = k3 = k4 = 0, rho = 0: only log2/(0 + 0 + 1) binds
    CHECK(local_horizon_C1(c, {1, 1, 1}) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("C2 bisection matches dense-grid scan") {
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int trial = 0; trial < 12; ++trial) {
        AssumptionConstants c = AssumptionConstants::zeros({1, 1, 1});
        c.k1 = u(gen);
        c.k2 = 0.2 + u(gen);
        c.k3 = u(gen);
        c.k4 = u(gen);
        c.k5 = u(gen);
        c.lambda2 = u(gen);
        c.rho = GrowthFn::constant(u(gen));
        const double got = contraction_horizon_C2(c, {1, 1, 1}, 4.0);
        const double ref = c2_scan_oracle(c, {1, 1, 1}, 4.0, 2.0 * std::max(got, 0.05), 400000);
        CHECK(got == doctest::Approx(ref).epsilon(2e-5));
    }
}

TEST_CASE("C2 unconstrained sentinel") {
    AssumptionConstants c = AssumptionConstants::zeros({1, 1, 1});
    c.k5 = 1.0;  // k1 = k2 = 0: both constraints hold for every T
    CHECK(std::isinf(contraction_horizon_C2(c, {1, 1, 1}, 4.0)));
    CHECK_THROWS(contraction_horizon_C2(c, {1, 1, 1}, 0.0));
}

TEST_CASE("delta schedule matches a long-double partial-sum oracle") {
    const GrowthFn rho = GrowthFn::log(1.0);
    const double B = 0.5, Q = 1.0, T = 10.0;
    const DeltaSchedule s = delta_schedule(B, rho, Q, T, 1000000);
    REQUIRE(s.N.has_value());

    long double sum = 0.0L;
    int n = 0;
    for (;; ++n) {
        REQUIRE(n < (int)s.deltas.size());
        // rho(2^n Q) = 1 + sqrt(log(1 + 2^n Q)); log(1 + 2^n Q) = n log2 + log(Q + 2^-n)
        const long double arg =
            n * std::log(2.0L) + std::log((long double)Q + std::exp2(-(long double)n));
        const long double r = 1.0L + std::sqrt(arg);
        const long double dn = std::log(2.0L) / (2.0L * B + r * r + 1.0L);
        CHECK((double)dn == doctest::Approx(s.deltas[n]).epsilon(1e-10));
        sum += dn;
        if (sum >= T) break;
    }
    CHECK(*s.N == n);
}

TEST_CASE("schedule dichotomy: linear rho stalls, log rho certifies") {
    const DeltaSchedule lin = delta_schedule(0.0, GrowthFn::power(1.0, 1.0), 1.0, 1.0, 200000);
    CHECK(!lin.N.has_value());
    double sum = 0;
    for (double d : lin.deltas) sum += d;
    CHECK(sum < 1.0);

    const DeltaSchedule lg = delta_schedule(0.0, GrowthFn::log(1.0), 1.0, 10.0, 1000000);
    CHECK(lg.N.has_value());
}

TEST_CASE("K5 formula vs long-double evaluation") {
    std::mt19937 gen(11);
    std::uniform_real_distribution<double> u(0.0, 1.5);
    for (int trial = 0; trial < 10; ++trial) {
        AssumptionConstants c = AssumptionConstants::zeros({1, 1, 1});
        c.k1 = u(gen);
        c.k2 = u(gen);
        c.k3 = u(gen);
        c.k4 = u(gen);
        c.k5 = u(gen);
        const Dimensions dims{3, 2, 2};
        const double T = u(gen);
        const long double l = dims.l;
        const long double e = std::exp((long double)c.k1 * T);
        const long double rate = c.k2 * c.k3 * T * e + c.k4 + c.k2 * c.k5 * e;
        const long double ref = std::sqrt(l) * e * (c.k5 + T * c.k3) * l * std::exp(rate * l * T);
        CHECK(decoupling_lipschitz_K5(c, dims, T) == doctest::Approx((double)ref).epsilon(1e-12));
    }
    // T = 0 collapses to sqrt(l) k5 l
    AssumptionConstants c = all_ones();
    CHECK(decoupling_lipschitz_K5(c, {1, 1, 1}, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(decoupling_lipschitz_K5(c, {1, 2, 1}, 0.0) ==
          doctest::Approx(std::sqrt(2.0) * 2.0).epsilon(1e-14));
}

TEST_CASE("smooth clamp piecewise values and slope") {
    const double M = 2.0;
    CHECK(smooth_clamp(0.3, M) == 0.3);
    CHECK(smooth_clamp(-M, M) == -M);
    CHECK(smooth_clamp(M, M) == M);
    // printed quadratic on (M, M+2]
    for (double a : {2.1, 2.5, 3.0, 3.9, 4.0}) {
        const double ref = (-M * M + 2.0 * M * a - a * (a - 4.0)) / 4.0;
        CHECK(smooth_clamp(a, M) == doctest::Approx(ref).epsilon(1e-14));
        const double refNeg = (M * M + 2.0 * M * (-a) + (-a) * ((-a) + 4.0)) / 4.0;
        CHECK(smooth_clamp(-a, M) == doctest::Approx(refNeg).epsilon(1e-14));
    }
    CHECK(smooth_clamp(M + 2.0, M) == doctest::Approx(M + 1.0).epsilon(1e-14));
    CHECK(smooth_clamp(-(M + 2.0), M) == doctest::Approx(-(M + 1.0)).epsilon(1e-14));
    CHECK(smooth_clamp(100.0, M) == M + 1.0);
    CHECK(smooth_clamp(-100.0, M) == -(M + 1.0));

    // slope in [0, 1 + 1e-6] on 10^4 finite differences
    const double eps = 1e-6;
    for (int i = 0; i < 10000; ++i) {
        const double a = -6.0 + 12.0 * i / 9999.0;
        const double slope = (smooth_clamp(a + eps, M) - smooth_clamp(a, M)) / eps;
        CHECK(slope >= -1e-9);
        CHECK(slope <= 1.0 + 1e-6);
    }
}

TEST_CASE("radial clamp") {
    Eigen::MatrixXd z(2, 2);
    z << 3, 0, 0, 4;  // |z|_F = 5
    CHECK(radial_clamp(z, 10.0) == z);
    const Eigen::MatrixXd c = radial_clamp(z, 2.0);
    CHECK(c.norm() == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(c(0, 0) / c(1, 1) == doctest::Approx(3.0 / 4.0).epsilon(1e-14));
    CHECK(radial_clamp(Eigen::MatrixXd::Zero(2, 2), 1.0).norm() == 0.0);
    CHECK_THROWS(radial_clamp(z, -1.0));
}

TEST_CASE("truncation modes and clamp_active") {
    const GeneratorFn g = [](double, const Eigen::VectorXd&, const Eigen::VectorXd&,
                             const Eigen::MatrixXd& z) {
        return Eigen::VectorXd::Constant(1, z.squaredNorm());
    };
    Eigen::MatrixXd big(1, 1);
    big << 7.0;
    const Eigen::VectorXd v = Eigen::VectorXd::Zero(1);
    CHECK(truncate_generator(g, 2.0, TruncationMode::Radial)(0, v, v, big)[0] ==
          doctest::Approx(4.0));
    CHECK(truncate_generator(g, 2.0, TruncationMode::Smooth)(0, v, v, big)[0] ==
          doctest::Approx(9.0));
    CHECK(truncate_generator(g, 2.0, TruncationMode::Off)(0, v, v, big)[0] ==
          doctest::Approx(49.0));
    CHECK(clamp_active(big, 2.0, TruncationMode::Radial));
    CHECK(!clamp_active(big, 8.0, TruncationMode::Radial));
    CHECK(!clamp_active(big, 2.0, TruncationMode::Off));
}

TEST_CASE("pasting grid") {
    const auto g = pasting_grid(1.0, 0.3);
    REQUIRE(g.size() == 5);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 1.0);
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] - g[i - 1] <= 0.3 + 1e-12);

    // exact multiple: no sliver interval
    const auto e = pasting_grid(0.9, 0.3);
    REQUIRE(e.size() == 4);
    CHECK(e.back() == 0.9);

    CHECK_THROWS(pasting_grid(1.0, 0.0));
}

TEST_CASE("compute_bounds wires the pieces together") {
    FbsdeProblem p = builtin_problem("martingale", {{"T", 1.4}, {"x0", 1.0}});
    const BoundsReport r = compute_bounds(p);
    CHECK(r.M == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(r.C_loc == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(r.K5 == doctest::Approx(1.0).epsilon(1e-12));  // k1..k4 = 0
    CHECK(r.M_bar == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(r.C_bar == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    REQUIRE(r.pastingGrid.size() >= 3);
    CHECK(r.pastingGrid.back() == doctest::Approx(1.4));
    for (std::size_t i = 1; i < r.pastingGrid.size(); ++i)
        CHECK(r.pastingGrid[i] - r.pastingGrid[i - 1] <= r.C_bar + 1e-12);
}

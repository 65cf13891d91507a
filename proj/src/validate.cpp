#include <cmath>

#include "fbsde/bounds.hpp"
#include "fbsde/model.hpp"
#include "fbsde/rng.hpp"

namespace fbsde {

namespace {

struct Sampler {
    std::uint64_t seed;
    std::uint64_t counter = 0;

    double uniform(double lo, double hi) {
        return uniform_draw(seed, 0x5a11da7e, counter++, 0, lo, hi);
    }
    Eigen::VectorXd vec(int n, double lo, double hi) {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
        return v;
    }
    Eigen::MatrixXd mat(int r, int c, double lo, double hi) {
        Eigen::MatrixXd v(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) v(i, j) = uniform(lo, hi);
        return v;
    }
};

struct Worst {
    double ratio = 0;      // worst sampled ratio (or exceedance factor)
    bool nonFinite = false;

    void update(double num, double den) {
        if (!std::isfinite(num)) {
            nonFinite = true;
            return;
        }
        if (den > 1e-14) ratio = std::max(ratio, num / den);
    }
};

}  // namespace

ValidationReport validate_problem(const FbsdeProblem& p, int samples, std::uint64_t seed) {
    ValidationReport report;
    if (!p.dims.valid() || samples < 1) {
        report.violations.push_back({"precondition", "bad dimensions or samples", 0, 0});
        return report;
    }
    const int m = p.dims.m, l = p.dims.l, d = p.dims.d;
    const double M = z_bound_M(p.constants, p.dims);
    const double xScale = 1.0 + p.x0.cwiseAbs().maxCoeff();
    const double zScale = std::max(1.0, M);
    Sampler rs{seed};

    Worst wb_x, wb_y, wb_growth, wsigma, wh, wg_x, wg_y, wg_z, wmixed;

    for (int s = 0; s < samples; ++s) {
        const double t = rs.uniform(0.0, p.horizon);
        const Eigen::VectorXd x = rs.vec(m, -xScale, xScale);
        const Eigen::VectorXd x2 = rs.vec(m, -xScale, xScale);
        const Eigen::VectorXd y = rs.vec(l, -2.0, 2.0);
        const Eigen::VectorXd y2 = rs.vec(l, -2.0, 2.0);
        const Eigen::MatrixXd z = rs.mat(l, d, -zScale, zScale);
        const Eigen::MatrixXd z2 = rs.mat(l, d, -zScale, zScale);
        const Eigen::MatrixXd zM = radial_clamp(z, M);

        // (A1)
        const Eigen::VectorXd b0 = p.b(t, x, y);
        wb_x.update((p.b(t, x2, y) - b0).norm(), (x2 - x).norm());
        wb_y.update((p.b(t, x, y2) - b0).norm(), (y2 - y).norm());
        wb_growth.update(b0.norm(), 1.0 + x.norm() + y.norm());

        // (A2)
        wsigma.update(p.sigma(t).norm(), 1.0);

        // (A3)
        wh.update((p.h(x) - p.h(x2)).norm(), (x - x2).norm());

        // (A4): x-Lipschitz on the ball |z| <= M, y- and z-Lipschitz globally
        const Eigen::VectorXd gM = p.g(t, x, y, zM);
        wg_x.update((p.g(t, x2, y, zM) - gM).norm(), (x2 - x).norm());
        const Eigen::VectorXd g0 = p.g(t, x, y, z);
        wg_y.update((p.g(t, x, y2, z) - g0).norm(), (y2 - y).norm());
        const double rhoBound = p.constants.rho(std::max(z.norm(), z2.norm()));
        const double zDiff = (p.g(t, x, y, z2) - g0).norm();
        if (rhoBound > 0)
            wg_z.update(zDiff / rhoBound, (z2 - z).norm());
        else
            wg_z.update(zDiff, (z2 - z).norm());  // rho == 0: require z-independence

        // (A5)
        const double mixed =
            (p.g(t, x, y, z) - p.g(t, x2, y, z) - p.g(t, x, y2, z2) + p.g(t, x2, y2, z2)).norm();
        wmixed.update(mixed, (x - x2).norm() * ((y - y2).norm() + (z - z2).norm()));
    }

    auto add = [&report](const std::string& assumption, const std::string& detail,
                         const Worst& w, double declared) {
        report.checks.push_back({assumption, detail, w.ratio, declared});
        if (w.nonFinite)
            report.violations.push_back({assumption, detail + ": non-finite evaluation", w.ratio, declared});
        else if (w.ratio > declared * 1.01 + 1e-12)
            report.violations.push_back({assumption, detail, w.ratio, declared});
    };

    const auto& c = p.constants;
    add("A1", "x-Lipschitz of b vs k1", wb_x, c.k1);
    add("A1", "y-Lipschitz of b vs k2", wb_y, c.k2);
    add("A1", "growth of b vs lambda1", wb_growth, c.lambda1);
    add("A2", "bound of sigma vs lambda2", wsigma, c.lambda2);
    add("A3", "Lipschitz of h vs k5", wh, c.k5);
    add("A4", "x-Lipschitz of g (|z|<=M) vs k3", wg_x, c.k3);
    add("A4", "y-Lipschitz of g vs k4", wg_y, c.k4);
    add("A4", "z-Lipschitz of g vs rho", wg_z, c.rho.c > 0 ? 1.0 : 0.0);
    add("A5", "mixed difference of g vs K", wmixed, c.K);
    return report;
}

}  // namespace fbsde

#include "fbsde/global_paste.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fbsde/rng.hpp"

namespace fbsde {

GammaTransform::GammaTransform(const Eigen::MatrixXd& G) : Gamma(G) {
    if (G.rows() != G.cols()) throw std::invalid_argument("GammaTransform: Gamma not square");
    Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
    if (!lu.isInvertible()) throw std::invalid_argument("GammaTransform: Gamma not invertible");
    GammaInv = lu.inverse();
    const double err =
        (Gamma * GammaInv - Eigen::MatrixXd::Identity(G.rows(), G.cols())).norm();
    if (err > 1e-10)
        throw std::runtime_error("GammaTransform: inverse check failed, ill-conditioned Gamma");
}

FbsdeProblem gamma_conjugate(const FbsdeProblem& p, const GammaTransform& G) {
    if (G.Gamma.rows() != p.dims.l)
        throw std::invalid_argument("gamma_conjugate: Gamma dimension != l");

    const double nG = Eigen::JacobiSVD<Eigen::MatrixXd>(G.Gamma).singularValues()(0);
    const double nGi = Eigen::JacobiSVD<Eigen::MatrixXd>(G.GammaInv).singularValues()(0);
    const double kappa = nG * nGi;

    FbsdeProblem q = p;
    q.name = p.name + "_gamma";
    const Eigen::MatrixXd Gamma = G.Gamma, GammaInv = G.GammaInv;
    q.b = [b = p.b, GammaInv](double t, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        return b(t, x, GammaInv * y);
    };
    q.g = [g = p.g, Gamma, GammaInv](double t, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& y, const Eigen::MatrixXd& z) {
        return Eigen::VectorXd(Gamma * g(t, x, GammaInv * y, GammaInv * z));
    };
    q.h = [h = p.h, Gamma](const Eigen::VectorXd& x) { return Eigen::VectorXd(Gamma * h(x)); };

    // conservative rescaling by operator norms
    auto& c = q.constants;
    c.k2 *= nGi;
    c.k3 *= nG;
    c.k4 *= kappa;
    c.k5 *= nG;
    c.K *= kappa;
    c.B *= kappa;
    c.lambda1 *= std::max(1.0, nGi);
    c.lambda4 *= nG * std::max(1.0, nGi);
    c.lambda5 *= nG;
    c.rho.c *= kappa * std::max(1.0, std::pow(nGi, c.rho.p));
    c.A *= nG;
    c.qIntegrals *= nG * nG;
    return q;
}

DecouplingFit fit_decoupling(const Eigen::MatrixXd& states, const Eigen::MatrixXd& values,
                             const BasisSpec& basis, double ridge, std::uint64_t seed) {
    DecouplingFit out;
    FittedBasis fb(basis, states);
    if (states.rows() < 10 * fb.featureCount() && fb.featureCount() > 1)
        throw std::invalid_argument(
            "fit_decoupling: too few samples for the basis; increase nPaths or designSpread");
    const Eigen::MatrixXd F = fb.features(states);
    Eigen::MatrixXd beta;
    try {
        beta = fit_conditional_expectation(F, values, ridge);
    } catch (const std::runtime_error&) {
        throw std::runtime_error(
            "fit_decoupling: rank-deficient design; increase designSpread");
    }
    out.map = FittedMap{std::move(fb), std::move(beta)};
    out.lo = states.colwise().minCoeff().transpose();
    out.hi = states.colwise().maxCoeff().transpose();

    const int m = static_cast<int>(states.cols());
    std::uint64_t ctr = 0;
    for (int s = 0; s < 1000; ++s) {
        Eigen::VectorXd a(m), b(m);
        for (int j = 0; j < m; ++j) {
            a[j] = uniform_draw(seed, 0x11b5, ctr++, j, out.lo[j], out.hi[j]);
            b[j] = uniform_draw(seed, 0x11b5, ctr++, j, out.lo[j], out.hi[j]);
        }
        const double dx = (a - b).norm();
        if (dx < 1e-12) continue;
        out.lipschitzEstimate =
            std::max(out.lipschitzEstimate, (out.map.eval(a) - out.map.eval(b)).norm() / dx);
    }
    return out;
}

namespace {

// Time-shifted restriction of the problem to [t0, t0 + len].
FbsdeProblem restrict_problem(const FbsdeProblem& p, double t0, double len,
                              const Eigen::VectorXd& x0) {
    FbsdeProblem q = p;
    q.horizon = len;
    q.x0 = x0;
    q.b = [b = p.b, t0](double t, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        return b(t + t0, x, y);
    };
    q.sigma = [s = p.sigma, t0](double t) { return s(t + t0); };
    q.g = [g = p.g, t0](double t, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                        const Eigen::MatrixXd& z) { return g(t + t0, x, y, z); };
    return q;
}

}  // namespace

GlobalSolution solve_global(const FbsdeProblem& p, int perIntervalK, int nPaths,
                            std::uint64_t seed, const PicardConfig& cfg, double designSpread) {
    if (p.gShape != GeneratorShape::Diagonal)
        throw std::invalid_argument("solve_global: requires gShape = diagonal (A4')");
    if (!(p.constants.lambda3 > 0))
        throw std::invalid_argument("solve_global: requires declared lambda3 > 0");
    if (designSpread <= 0) throw std::invalid_argument("solve_global: designSpread must be positive");

    // spot-check non-degeneracy <x, sigma sigma* x> >= lambda3 |x|^2
    for (int s = 0; s < 64; ++s) {
        const double t = uniform_draw(seed, 0x515, s, 0, 0.0, p.horizon);
        Eigen::VectorXd v(p.dims.m);
        for (int j = 0; j < p.dims.m; ++j) v[j] = uniform_draw(seed, 0x516, s, j, -1.0, 1.0);
        if (v.norm() < 1e-12) continue;
        const Eigen::MatrixXd sig = p.sigma(t);
        const double quad = v.dot(sig * sig.transpose() * v);
        if (quad < p.constants.lambda3 * v.squaredNorm() * (1.0 - 1e-9))
            throw std::runtime_error("solve_global: sigma sigma* fails the lambda3 lower bound");
    }

    const BoundsReport bounds = compute_bounds(p, cfg.bounds);
    GlobalSolution out;
    out.field.times = bounds.pastingGrid;

    const int nIntervals = static_cast<int>(bounds.pastingGrid.size()) - 1;
    if (nIntervals == 1) {
        // degenerate single interval: exactly a local solve
        LocalSolution loc = solve_local(p, TimeGrid::uniform(p.horizon, perIntervalK), nPaths,
                                        seed, cfg, nullptr, nullptr, bounds.M_bar);
        out.report = loc.report;
        out.intervalReports.push_back(loc.report);
        out.ensemble = std::move(loc.ensemble);
        out.field.maps.resize(2);
        out.field.fitLo.resize(2);
        out.field.fitHi.resize(2);
        out.field.lipschitzEstimate.assign(2, 0.0);
        return out;
    }

    const auto& knots = bounds.pastingGrid;
    out.field.maps.resize(nIntervals + 1);
    out.field.fitLo.resize(nIntervals + 1);
    out.field.fitHi.resize(nIntervals + 1);
    out.field.lipschitzEstimate.assign(nIntervals + 1, 0.0);
    out.intervalReports.resize(nIntervals);

    // deterministic mean-state propagation for the design distribution
    std::vector<Eigen::VectorXd> meanState(nIntervals + 1);
    meanState[0] = p.x0;
    {
        Eigen::VectorXd x = p.x0;
        const Eigen::VectorXd y0 = Eigen::VectorXd::Zero(p.dims.l);
        for (int i = 0; i < nIntervals; ++i) {
            const double len = knots[i + 1] - knots[i];
            const int steps = perIntervalK;
            for (int k = 0; k < steps; ++k) {
                const double t = knots[i] + len * k / steps;
                x += p.b(t, x, y0) * (len / steps);
            }
            meanState[i + 1] = x;
        }
    }

    std::vector<std::vector<FittedMap>> intervalYMaps(nIntervals);
    const double ridge = cfg.backward.ridgePerPath * nPaths;

    for (int i = nIntervals; i >= 1; --i) {
        const double t0 = knots[i - 1], t1 = knots[i];
        const double len = t1 - t0;

        // design states at the interval start
        Eigen::MatrixXd init(nPaths, p.dims.m);
        for (int path = 0; path < nPaths; ++path)
            for (int j = 0; j < p.dims.m; ++j) {
                double v = meanState[i - 1][j];
                if (i > 1) v += designSpread * normal_draw(seed, 0xde5160 + i, path, j);
                init(path, j) = v;
            }

        TerminalFn terminal;
        if (i == nIntervals) {
            terminal = p.h;
        } else {
            const FittedMap& next = out.field.maps[i];
            terminal = [&next](const Eigen::VectorXd& x) { return next.eval(x); };
        }

        FbsdeProblem sub = restrict_problem(p, t0, len, meanState[i - 1]);
        const std::uint64_t subSeed = splitmix64(seed ^ (0x1a7e5 + i));
        LocalSolution loc = solve_local(sub, TimeGrid::uniform(len, perIntervalK), nPaths,
                                        subSeed, cfg, terminal, &init, bounds.M_bar);
        out.intervalReports[i - 1] = loc.report;
        if (!loc.report.converged) {
            std::ostringstream os;
            os << "interval " << i << " of " << nIntervals << " ([" << t0 << ", " << t1
               << "]) failed to converge: " << loc.report.failure;
            out.report = loc.report;
            out.report.failure = os.str();
            return out;
        }
        intervalYMaps[i - 1] = std::move(loc.yMaps);

        // fit theta at the interval start from the design cross-section
        Eigen::MatrixXd states(nPaths, p.dims.m), values(nPaths, p.dims.l);
        for (int path = 0; path < nPaths; ++path) {
            states.row(path) = loc.ensemble.x_at(path, 0).transpose();
            values.row(path) = loc.ensemble.y_at(path, 0).transpose();
        }
        DecouplingFit fit = fit_decoupling(states, values, cfg.backward.basis, ridge,
                                           splitmix64(seed ^ (0xf17 + i)));
        out.field.maps[i - 1] = std::move(fit.map);
        out.field.fitLo[i - 1] = std::move(fit.lo);
        out.field.fitHi[i - 1] = std::move(fit.hi);
        out.field.lipschitzEstimate[i - 1] = fit.lipschitzEstimate;
    }

    // final glued pass: fresh Brownian ensemble on the concatenated grid,
    // forward with the per-step fitted Y maps, then one global backward sweep
    TimeGrid glued = TimeGrid::piecewise_uniform(knots, perIntervalK);
    PathEnsemble ens(nPaths, glued, p.dims, splitmix64(seed ^ 0x91bed));
    sample_brownian(ens);
    YSource ySource = [&intervalYMaps, perIntervalK, nIntervals](int, int k,
                                                                const Eigen::VectorXd& x) {
        const int i = std::min(k / perIntervalK, nIntervals - 1);
        const int kk = k % perIntervalK;
        return intervalYMaps[i][kk].eval(x);
    };
    forward_euler(p, ens, ySource);
    BackwardDiagnostics diag =
        backward_sweep(p, ens, cfg.backward, p.h, bounds.M_bar);

    // Interface continuity: compare the glued sweep's conditional-mean map at
    // each interior knot against the interval field theta(t_i, .) over the
    // realized cross-section. Using the refit map instead of per-path Y keeps
    // the pointwise Monte Carlo noise out of the diagnostic.
    out.interfaceJumps.assign(nIntervals - 1, 0.0);
    for (int i = 1; i < nIntervals; ++i) {
        const int k = i * perIntervalK;
        double acc = 0.0;
        for (int path = 0; path < nPaths; ++path) {
            const Eigen::VectorXd x = ens.x_at(path, k);
            acc += (diag.yMaps[k].eval(x) - out.field.maps[i].eval(x)).norm();
        }
        out.interfaceJumps[i - 1] = acc / nPaths;
    }

    out.report = out.intervalReports.front();
    out.report.zMax = diag.maxAbsZ;
    out.report.truncationRate = diag.truncationRate;
    out.report.y0Mean = Eigen::VectorXd::Zero(p.dims.l);
    for (int path = 0; path < nPaths; ++path) out.report.y0Mean += ens.y_at(path, 0);
    out.report.y0Mean /= nPaths;
    out.report.converged = true;
    out.report.failure.clear();
    out.ensemble = std::move(ens);
    return out;
}

}  // namespace fbsde

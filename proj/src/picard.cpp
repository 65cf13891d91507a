#include "fbsde/picard.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fbsde {

double successive_diff(const PathEnsemble& prev, const PathEnsemble& next) {
    if (prev.Y.size() != next.Y.size() || prev.Z.size() != next.Z.size())
        throw std::invalid_argument("successive_diff: shape mismatch");
    const int K = next.grid.steps();
    const int n = next.nPaths;
    const int l = next.dims.l;

    double maxY = 0.0;
    for (int k = 0; k <= K; ++k) {
        double acc = 0.0;
        for (int p = 0; p < n; ++p)
            acc += (next.y_at(p, k) - prev.y_at(p, k)).squaredNorm();
        maxY = std::max(maxY, acc / n);
    }
    double zInt = 0.0;
    for (int k = 0; k < K; ++k) {
        double acc = 0.0;
        for (int p = 0; p < n; ++p)
            acc += (next.z_at(p, k) - prev.z_at(p, k)).squaredNorm();
        zInt += acc / n * next.grid.dt(k);
    }
    (void)l;
    return maxY + zInt;
}

LocalSolution solve_local(const FbsdeProblem& p, const TimeGrid& grid, int nPaths,
                          std::uint64_t seed, const PicardConfig& cfg,
                          const TerminalFn& terminalOverride,
                          const Eigen::MatrixXd* initialStates,
                          std::optional<double> truncationRadius) {
    if (nPaths < 1) throw std::invalid_argument("solve_local: nPaths must be >= 1");
    if (cfg.tol <= 0) throw std::invalid_argument("solve_local: tol must be positive");

    const BoundsReport bounds = compute_bounds(p, cfg.bounds);
    const double T = grid.horizon();

    std::string certificate = "theorem-covered";
    if (T > bounds.C_loc * (1.0 + 1e-12)) {
        if (cfg.horizonOverride && T <= *cfg.horizonOverride * (1.0 + 1e-12)) {
            certificate = "override";
        } else if (cfg.enforceCertificate) {
            std::ostringstream os;
            os << "solve_local: horizon " << T << " exceeds certified C_loc " << bounds.C_loc
               << "; pass horizonOverride to run anyway";
            throw std::runtime_error(os.str());
        } else {
            certificate = "override";
        }
    }

    const double radius = truncationRadius.value_or(bounds.M);
    const TerminalFn terminal = terminalOverride ? terminalOverride : p.h;

    // one frozen Brownian ensemble across all Picard iterations
    PathEnsemble ens(nPaths, grid, p.dims, seed);
    sample_brownian(ens);

    LocalSolution sol;
    SolveReport& rep = sol.report;
    rep.certificate = certificate;

    PathEnsemble prev = ens;  // Y = Z = 0 initial iterate
    int rising = 0;
    BackwardDiagnostics diag;

    for (int it = 0; it < cfg.maxIters; ++it) {
        // forward pass with the previous iterate's pathwise Y as source
        const PathEnsemble& frozen = prev;
        YSource ySource = [&frozen](int path, int k, const Eigen::VectorXd&) {
            return Eigen::VectorXd(frozen.y_at(path, k));
        };
        forward_euler(p, ens, ySource, initialStates);
        diag = backward_sweep(p, ens, cfg.backward, terminal, radius);

        const double delta = successive_diff(prev, ens);
        rep.diffs.push_back(delta);
        rep.iterates = it + 1;
        if (rep.diffs.size() >= 2) {
            const double prevDelta = rep.diffs[rep.diffs.size() - 2];
            rep.ratios.push_back(prevDelta > 0 ? delta / prevDelta
                                               : (delta > 0 ? std::numeric_limits<double>::infinity() : 0.0));
            rising = delta > prevDelta ? rising + 1 : 0;
        }
        prev = ens;
        if (delta <= cfg.tol) {
            rep.converged = true;
            break;
        }
        if (rising >= 3) {
            rep.diverged = true;
            rep.failure = "successive-difference metric increased for 3 consecutive iterations";
            break;
        }
    }
    if (!rep.converged && !rep.diverged)
        rep.failure = "iteration limit reached before tolerance";

    rep.zMax = diag.maxAbsZ;
    rep.truncationRate = diag.truncationRate;
    rep.y0Mean = Eigen::VectorXd::Zero(p.dims.l);
    for (int path = 0; path < nPaths; ++path) rep.y0Mean += ens.y_at(path, 0);
    rep.y0Mean /= nPaths;

    sol.yMaps = std::move(diag.yMaps);
    sol.ensemble = std::move(ens);
    return sol;
}

}  // namespace fbsde

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fbsde/backward.hpp"
#include "fbsde/bounds.hpp"
#include "fbsde/model.hpp"
#include "fbsde/simulation.hpp"

namespace fbsde {

struct PicardConfig {
    int maxIters = 100;
    double tol = 1e-8;
    BackwardConfig backward;
    std::optional<double> horizonOverride;  // run beyond the certified horizon
    bool enforceCertificate = true;
    BoundsOptions bounds;
};

struct SolveReport {
    int iterates = 0;
    std::vector<double> diffs;   // successive-difference metric per iteration
    std::vector<double> ratios;  // diffs[n+1] / diffs[n]
    bool converged = false;
    bool diverged = false;       // three consecutive increases of the metric
    std::string certificate;     // "theorem-covered" or "override"
    double zMax = 0;
    double truncationRate = 0;
    Eigen::VectorXd y0Mean;      // ensemble mean of Y at t = 0
    std::string failure;         // empty on success
};

/// Discrete S^2 x H^2 successive-difference metric:
/// max_k mean_p |dY_k|^2 + sum_k mean_p |dZ_k|^2 dt_k.
double successive_diff(const PathEnsemble& prev, const PathEnsemble& next);

struct LocalSolution {
    PathEnsemble ensemble;
    SolveReport report;
    std::vector<FittedMap> yMaps;  // per-step Y(X) fits of the final sweep
};

/// Picard iteration on a frozen Brownian ensemble: alternate the forward
/// Euler scheme (previous iterate's Y as source) with LSMC backward sweeps of
/// the truncated generator. Y and Z start at zero.
LocalSolution solve_local(const FbsdeProblem& p, const TimeGrid& grid, int nPaths,
                          std::uint64_t seed, const PicardConfig& cfg,
                          const TerminalFn& terminalOverride = nullptr,
                          const Eigen::MatrixXd* initialStates = nullptr,
                          std::optional<double> truncationRadius = std::nullopt);

}  // namespace fbsde

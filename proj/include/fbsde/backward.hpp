#pragma once

#include <optional>
#include <vector>

#include "fbsde/bounds.hpp"
#include "fbsde/model.hpp"
#include "fbsde/regression.hpp"
#include "fbsde/simulation.hpp"

namespace fbsde {

struct BackwardConfig {
    BasisSpec basis;
    TruncationMode truncationMode = TruncationMode::Radial;
    std::optional<double> truncationRadius;  // default: M (local) / M_bar (global)
    int innerFixedPointIters = 2;            // semi-implicit refinement in y
    double ridgePerPath = 1e-8;              // ridge = ridgePerPath * nPaths
};

struct StepDiagnostics {
    int k = 0;
    double t = 0;
    double truncationRate = 0;
    double maxAbsZ = 0;
};

struct BackwardDiagnostics {
    double truncationRate = 0;  // fraction of (path, step) samples where the clamp bit
    double maxAbsZ = 0;
    std::vector<StepDiagnostics> perStep;
    std::vector<FittedMap> yMaps;  // per-step regression of Y_k on X_k (k = 0..K-1)
};

/// One least-squares Monte Carlo backward sweep on a fixed forward ensemble:
///   Y_K = terminal(X_K)
///   Z_k = regression of Y_{k+1} dW_k^T / dt_k on basis(X_k)
///   Y_k = E^[Y_{k+1}|X_k] + g~(t_k, X_k, Y_k*, clamp(Z_k)) dt_k
/// with Y_k* the inner fixed-point refinement. Fills ens.Y, ens.Z.
BackwardDiagnostics backward_sweep(const FbsdeProblem& p, PathEnsemble& ens,
                                   const BackwardConfig& cfg, const TerminalFn& terminal,
                                   double truncationRadius);

}  // namespace fbsde

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fbsde/picard.hpp"
#include "fbsde/regression.hpp"

namespace fbsde {

/// Invertible change of coordinates on the value process.
struct GammaTransform {
    Eigen::MatrixXd Gamma;
    Eigen::MatrixXd GammaInv;

    /// Computes the inverse and checks ||Gamma GammaInv - I|| <= 1e-10.
    explicit GammaTransform(const Eigen::MatrixXd& G);
};

/// Conjugated problem: h~ = Gamma h, g~(x,y,z) = Gamma g(x, Gamma^-1 y, Gamma^-1 z),
/// b~(x,y) = b(x, Gamma^-1 y). Declared constants are rescaled conservatively
/// by operator norms.
FbsdeProblem gamma_conjugate(const FbsdeProblem& p, const GammaTransform& G);

/// Fitted representation of theta(t_i, .) at the pasting times.
struct DecouplingField {
    std::vector<double> times;               // pasting grid
    std::vector<FittedMap> maps;             // per time, empty slot 0 (not fitted)
    std::vector<Eigen::VectorXd> fitLo, fitHi;  // per-time bounding box
    std::vector<double> lipschitzEstimate;   // sampled ratio per time

    Eigen::VectorXd eval(int i, const Eigen::VectorXd& x) const { return maps[i].eval(x); }
};

struct GlobalSolution {
    PathEnsemble ensemble;   // glued grid, final forward pass + global sweep
    DecouplingField field;
    SolveReport report;
    std::vector<SolveReport> intervalReports;
    std::vector<double> interfaceJumps;  // mean |Y - theta_i(X)| at each interior t_i
};

/// Fit map + sampled Lipschitz ratio over 10^3 random pairs in the sample box.
struct DecouplingFit {
    FittedMap map;
    double lipschitzEstimate = 0;
    Eigen::VectorXd lo, hi;
};
DecouplingFit fit_decoupling(const Eigen::MatrixXd& states, const Eigen::MatrixXd& values,
                             const BasisSpec& basis, double ridge, std::uint64_t seed);

/// Pasting solver: partition [0, T] by C_bar, fit theta backward interval by
/// interval (terminal theta(t_i, .), design states spread around the
/// propagated mean), then one full-horizon forward pass and backward sweep
/// along the glued grid.
GlobalSolution solve_global(const FbsdeProblem& p, int perIntervalK, int nPaths,
                            std::uint64_t seed, const PicardConfig& cfg, double designSpread);

}  // namespace fbsde

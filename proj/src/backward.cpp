#include "fbsde/backward.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fbsde {

namespace {

Eigen::MatrixXd clamp_z(const Eigen::MatrixXd& z, double R, TruncationMode mode) {
    switch (mode) {
        case TruncationMode::Radial: return radial_clamp(z, R);
        case TruncationMode::Smooth: return smooth_clamp(z, R);
        case TruncationMode::Off: return z;
    }
    return z;
}

}  // namespace

BackwardDiagnostics backward_sweep(const FbsdeProblem& p, PathEnsemble& ens,
                                   const BackwardConfig& cfg, const TerminalFn& terminal,
                                   double truncationRadius) {
    const int K = ens.grid.steps();
    const int n = ens.nPaths;
    const int m = ens.dims.m, l = ens.dims.l, d = ens.dims.d;
    const double ridge = cfg.ridgePerPath * n;
    const double R = cfg.truncationRadius.value_or(truncationRadius);

    BackwardDiagnostics diag;
    diag.perStep.resize(K);
    diag.yMaps.resize(K);

    // terminal condition, exact per path
    for (int path = 0; path < n; ++path) {
        Eigen::VectorXd yT = terminal(ens.x_at(path, K));
        if (yT.size() != l) throw std::runtime_error("backward_sweep: terminal has wrong size");
        ens.y_at(path, K) = yT;
    }

    long truncCount = 0;
    Eigen::MatrixXd statesK(n, m), ynext(n, l), zTargets(n, l * d);

    for (int k = K - 1; k >= 0; --k) {
        const double t = ens.grid.times[k];
        const double dt = ens.grid.dt(k);
        for (int path = 0; path < n; ++path) {
            statesK.row(path) = ens.x_at(path, k).transpose();
            ynext.row(path) = ens.y_at(path, k + 1).transpose();
            const double* w = ens.dW_at(path, k);
            for (int i = 0; i < l; ++i)
                for (int j = 0; j < d; ++j)
                    zTargets(path, i * d + j) = ynext(path, i) * w[j];
        }

        FittedBasis basis(cfg.basis, statesK);
        const int nFeat = basis.featureCount();
        if (n < 10 * nFeat && nFeat > 1) {
            std::ostringstream os;
            os << "backward_sweep: basis too rich at step " << k << " (" << nFeat
               << " features for " << n << " paths; need nPaths >= 10*features)";
            throw std::runtime_error(os.str());
        }
        const Eigen::MatrixXd F = basis.features(statesK);
        const Eigen::MatrixXd betaY = fit_conditional_expectation(F, ynext, ridge);
        const Eigen::MatrixXd betaZ = fit_conditional_expectation(F, zTargets, ridge);
        const Eigen::MatrixXd Ey = F * betaY;           // n x l
        const Eigen::MatrixXd Zfit = F * betaZ / dt;    // n x (l*d)

        StepDiagnostics& sd = diag.perStep[k];
        sd.k = k;
        sd.t = t;
        int stepTrunc = 0;

        for (int path = 0; path < n; ++path) {
            Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> z(l, d);
            for (int i = 0; i < l; ++i)
                for (int j = 0; j < d; ++j) z(i, j) = Zfit(path, i * d + j);
            ens.z_at(path, k) = z;
            sd.maxAbsZ = std::max(sd.maxAbsZ, z.norm());

            const bool active = clamp_active(z, R, cfg.truncationMode);
            stepTrunc += active;
            const Eigen::MatrixXd zc = clamp_z(z, R, cfg.truncationMode);

            const Eigen::VectorXd e = Ey.row(path).transpose();
            const Eigen::VectorXd xk = ens.x_at(path, k);
            Eigen::VectorXd y = e;
            for (int it = 0; it <= cfg.innerFixedPointIters; ++it)
                y = e + p.g(t, xk, y, zc) * dt;
            if (!y.allFinite()) {
                std::ostringstream os;
                os << "backward_sweep: non-finite Y at step " << k;
                throw std::runtime_error(os.str());
            }
            ens.y_at(path, k) = y;
        }
        sd.truncationRate = static_cast<double>(stepTrunc) / n;
        truncCount += stepTrunc;
        diag.maxAbsZ = std::max(diag.maxAbsZ, sd.maxAbsZ);
        diag.yMaps[k] = FittedMap{std::move(basis), betaY};
    }

    // The stored Y maps predict Y_{k+1} from X_k; refit step-k values on X_k
    // so the maps can serve as a per-step decoupling source. Cheap second fit
    // reusing the same features is done only at k = 0..K-1 from the final Y.
    for (int k = 0; k < K; ++k) {
        for (int path = 0; path < n; ++path) {
            statesK.row(path) = ens.x_at(path, k).transpose();
            ynext.row(path) = ens.y_at(path, k).transpose();
        }
        const Eigen::MatrixXd F = diag.yMaps[k].basis.features(statesK);
        diag.yMaps[k].beta = fit_conditional_expectation(F, ynext, ridge);
    }

    diag.truncationRate = static_cast<double>(truncCount) / (static_cast<double>(n) * K);
    return diag;
}

}  // namespace fbsde

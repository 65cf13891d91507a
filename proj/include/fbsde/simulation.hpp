#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "fbsde/model.hpp"

namespace fbsde {

struct TimeGrid {
    std::vector<double> times;  // strictly increasing, times[0] == 0

    int steps() const { return static_cast<int>(times.size()) - 1; }
    double horizon() const { return times.back(); }
    double dt(int k) const { return times[k + 1] - times[k]; }

    static TimeGrid uniform(double T, int K);
    /// Concatenation of uniform sub-grids over consecutive [a_i, a_{i+1}].
    static TimeGrid piecewise_uniform(const std::vector<double>& knots, int stepsPerPiece);
};

/// Per-path Y source for the forward scheme. Implementations may ignore the
/// path index (decoupling-field evaluation) or the state (frozen iterate).
using YSource = std::function<Eigen::VectorXd(int path, int k, const Eigen::VectorXd& x)>;

/// Flat storage for a Monte Carlo ensemble on a fixed grid.
/// dW: [nPaths][K][d], X: [nPaths][K+1][m], Y: [nPaths][K+1][l], Z: [nPaths][K][l*d].
struct PathEnsemble {
    int nPaths = 0;
    TimeGrid grid;
    Dimensions dims;
    std::uint64_t seed = 0;
    std::vector<double> dW, X, Y, Z;

    PathEnsemble() = default;
    PathEnsemble(int nPaths, TimeGrid grid, Dimensions dims, std::uint64_t seed);

    double* dW_at(int p, int k) { return dW.data() + (static_cast<std::size_t>(p) * grid.steps() + k) * dims.d; }
    const double* dW_at(int p, int k) const { return dW.data() + (static_cast<std::size_t>(p) * grid.steps() + k) * dims.d; }

    Eigen::Map<Eigen::VectorXd> x_at(int p, int k) {
        return {X.data() + (static_cast<std::size_t>(p) * (grid.steps() + 1) + k) * dims.m, dims.m};
    }
    Eigen::Map<const Eigen::VectorXd> x_at(int p, int k) const {
        return {X.data() + (static_cast<std::size_t>(p) * (grid.steps() + 1) + k) * dims.m, dims.m};
    }
    Eigen::Map<Eigen::VectorXd> y_at(int p, int k) {
        return {Y.data() + (static_cast<std::size_t>(p) * (grid.steps() + 1) + k) * dims.l, dims.l};
    }
    Eigen::Map<const Eigen::VectorXd> y_at(int p, int k) const {
        return {Y.data() + (static_cast<std::size_t>(p) * (grid.steps() + 1) + k) * dims.l, dims.l};
    }
    /// Z at (p, k) as an l x d matrix view (row-major flat storage).
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> z_at(int p, int k) {
        return {Z.data() + (static_cast<std::size_t>(p) * grid.steps() + k) * dims.l * dims.d, dims.l, dims.d};
    }
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> z_at(int p, int k) const {
        return {Z.data() + (static_cast<std::size_t>(p) * grid.steps() + k) * dims.l * dims.d, dims.l, dims.d};
    }
};

/// Fill ens.dW with N(0, dt_k I) increments; draw (p, k, j) depends only on
/// (seed, p, k, j).
void sample_brownian(PathEnsemble& ens);

/// Euler scheme X_{k+1} = X_k + b(t_k, X_k, ySource(p,k,X_k)) dt_k + sigma(t_k) dW_k.
/// All paths start at p.x0 unless initialStates (nPaths x m) is provided.
void forward_euler(const FbsdeProblem& p, PathEnsemble& ens, const YSource& ySource,
                   const Eigen::MatrixXd* initialStates = nullptr);

}  // namespace fbsde

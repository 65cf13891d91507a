#include "fbsde/simulation.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fbsde/rng.hpp"

namespace fbsde {

TimeGrid TimeGrid::uniform(double T, int K) {
    if (T <= 0) throw std::invalid_argument("TimeGrid::uniform: T must be positive");
    if (K < 1) throw std::invalid_argument("TimeGrid::uniform: K must be >= 1");
    TimeGrid g;
    g.times.resize(K + 1);
    for (int k = 0; k <= K; ++k) g.times[k] = T * k / K;
    g.times.back() = T;
    return g;
}

TimeGrid TimeGrid::piecewise_uniform(const std::vector<double>& knots, int stepsPerPiece) {
    if (knots.size() < 2) throw std::invalid_argument("piecewise_uniform: need >= 2 knots");
    TimeGrid g;
    g.times.push_back(knots.front());
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double a = knots[i], b = knots[i + 1];
        if (b <= a) throw std::invalid_argument("piecewise_uniform: knots not increasing");
        for (int k = 1; k <= stepsPerPiece; ++k)
            g.times.push_back(a + (b - a) * k / stepsPerPiece);
        g.times[g.times.size() - 1] = b;
    }
    return g;
}

PathEnsemble::PathEnsemble(int nPaths_, TimeGrid grid_, Dimensions dims_, std::uint64_t seed_)
    : nPaths(nPaths_), grid(std::move(grid_)), dims(dims_), seed(seed_) {
    const std::size_t K = grid.steps();
    dW.assign(static_cast<std::size_t>(nPaths) * K * dims.d, 0.0);
    X.assign(static_cast<std::size_t>(nPaths) * (K + 1) * dims.m, 0.0);
    Y.assign(static_cast<std::size_t>(nPaths) * (K + 1) * dims.l, 0.0);
    Z.assign(static_cast<std::size_t>(nPaths) * K * dims.l * dims.d, 0.0);
}

void sample_brownian(PathEnsemble& ens) {
    const int K = ens.grid.steps();
    for (int p = 0; p < ens.nPaths; ++p) {
        for (int k = 0; k < K; ++k) {
            const double s = std::sqrt(ens.grid.dt(k));
            double* w = ens.dW_at(p, k);
            for (int j = 0; j < ens.dims.d; ++j)
                w[j] = s * normal_draw(ens.seed, p, k, j);
        }
    }
}

void forward_euler(const FbsdeProblem& p, PathEnsemble& ens, const YSource& ySource,
                   const Eigen::MatrixXd* initialStates) {
    const int K = ens.grid.steps();
    const int m = ens.dims.m, d = ens.dims.d;

    // sigma is time-only: evaluate once per step, shared across paths
    std::vector<Eigen::MatrixXd> sig(K);
    for (int k = 0; k < K; ++k) {
        sig[k] = p.sigma(ens.grid.times[k]);
        if (sig[k].rows() != m || sig[k].cols() != d)
            throw std::runtime_error("forward_euler: sigma has wrong shape");
    }

    for (int path = 0; path < ens.nPaths; ++path) {
        if (initialStates)
            ens.x_at(path, 0) = initialStates->row(path).transpose();
        else
            ens.x_at(path, 0) = p.x0;
        for (int k = 0; k < K; ++k) {
            const double t = ens.grid.times[k];
            const double dt = ens.grid.dt(k);
            const Eigen::VectorXd xk = ens.x_at(path, k);
            const Eigen::VectorXd yk = ySource(path, k, xk);
            const Eigen::VectorXd drift = p.b(t, xk, yk);
            Eigen::Map<const Eigen::VectorXd> dw(ens.dW_at(path, k), d);
            Eigen::VectorXd next = xk + drift * dt + sig[k] * dw;
            if (!next.allFinite()) {
                std::ostringstream os;
                os << "forward_euler: non-finite state at path " << path << " step " << k;
                throw std::runtime_error(os.str());
            }
            ens.x_at(path, k + 1) = next;
        }
    }
}

}  // namespace fbsde

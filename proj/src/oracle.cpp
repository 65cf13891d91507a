#include "fbsde/oracle.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <cmath>
#include <stdexcept>

namespace fbsde {

OracleSolution delay_oracle(double k, double T, double x0, double eps_terminal) {
    if (k <= 0 || T <= 0) throw std::invalid_argument("delay_oracle: k, T must be positive");
    OracleSolution s;
    s.tMin = 0;
    s.tMax = T;
    const double w = std::sqrt(k);
    const double eps = eps_terminal;
    const double denom = w * std::cos(w * T) - eps * std::sin(w * T);
    if (std::abs(denom) <= 1e-6 * (w + std::abs(eps))) {
        s.singular = true;
        return s;
    }
    const double beta = x0 * (eps * std::cos(w * T) + w * std::sin(w * T)) / denom;
    s.X = [x0, beta, w](double t) { return x0 * std::cos(w * t) + beta * std::sin(w * t); };
    s.Y = [x0, beta, w](double t) {
        return -x0 * w * std::sin(w * t) + beta * w * std::cos(w * t);
    };
    s.Z = [](double) { return 0.0; };
    return s;
}

OracleSolution linear_bsde_oracle(double alpha, double T, double x0) {
    if (T <= 0) throw std::invalid_argument("linear_bsde_oracle: T must be positive");
    OracleSolution s;
    s.tMin = 0;
    s.tMax = T;
    s.y_tx = [alpha, T](double t, double x) { return std::exp(alpha * (T - t)) * x; };
    s.Z = [alpha, T](double t) { return std::exp(alpha * (T - t)); };
    s.Y = [alpha, T, x0](double t) { return std::exp(alpha * (T - t)) * x0; };  // at X_t = x0
    return s;
}

double PdeSolution::eval(double t, double x) const {
    const auto locate = [](const std::vector<double>& g, double v, int& i, double& w) {
        const int n = static_cast<int>(g.size());
        if (v <= g.front()) { i = 0; w = 0; return; }
        if (v >= g.back()) { i = n - 2; w = 1; return; }
        int lo = 0, hi = n - 1;
        while (hi - lo > 1) {
            const int mid = (lo + hi) / 2;
            (g[mid] <= v ? lo : hi) = mid;
        }
        i = lo;
        w = (v - g[lo]) / (g[lo + 1] - g[lo]);
    };
    int it, ix;
    double wt, wx;
    locate(tGrid, t, it, wt);
    locate(xGrid, x, ix, wx);
    const double a = (1 - wx) * theta(it, ix) + wx * theta(it, ix + 1);
    const double b = (1 - wx) * theta(it + 1, ix) + wx * theta(it + 1, ix + 1);
    return (1 - wt) * a + wt * b;
}

PdeSolution pde_oracle(const FbsdeProblem& p, const PdeGrid& grid, int frozenFieldSweeps,
                       double frozenFieldTol) {
    if (p.dims.m != 1 || p.dims.l != 1)
        throw std::invalid_argument("pde_oracle: requires m = l = 1");
    if (grid.xNodes < 5 || grid.tSteps < 1 || grid.xMax <= grid.xMin)
        throw std::invalid_argument("pde_oracle: bad grid");

    const int nx = grid.xNodes;
    const int nt = grid.tSteps;
    const double T = p.horizon;
    const double dx = (grid.xMax - grid.xMin) / (nx - 1);
    const double dt = T / nt;

    PdeSolution sol;
    sol.xGrid.resize(nx);
    for (int i = 0; i < nx; ++i) sol.xGrid[i] = grid.xMin + i * dx;
    sol.tGrid.resize(nt + 1);
    for (int k = 0; k <= nt; ++k) sol.tGrid[k] = T * k / nt;
    sol.theta.resize(nt + 1, nx);

    Eigen::VectorXd terminalRow(nx);
    for (int i = 0; i < nx; ++i)
        terminalRow[i] = p.h(Eigen::VectorXd::Constant(1, sol.xGrid[i]))[0];
    const double blowupGate = 1e10 * (1.0 + terminalRow.cwiseAbs().maxCoeff());

    // frozen-field iteration over the y-argument of the drift
    Eigen::MatrixXd prevField = terminalRow.transpose().replicate(nt + 1, 1);

    for (int sweep = 0; sweep < frozenFieldSweeps; ++sweep) {
        sol.theta.row(nt) = terminalRow.transpose();

        for (int k = nt - 1; k >= 0; --k) {
            const double t = sol.tGrid[k];
            const Eigen::MatrixXd sig = p.sigma(t);  // 1 x d
            const double s2 = sig.row(0).squaredNorm();
            const Eigen::VectorXd next = sol.theta.row(k + 1).transpose();

            // explicit generator term from the (k+1)-level field
            Eigen::VectorXd rhs(nx);
            for (int i = 0; i < nx; ++i) {
                double thx;
                if (i == 0)
                    thx = (next[1] - next[0]) / dx;
                else if (i == nx - 1)
                    thx = (next[nx - 1] - next[nx - 2]) / dx;
                else
                    thx = (next[i + 1] - next[i - 1]) / (2 * dx);
                const Eigen::MatrixXd z = thx * sig;
                const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, sol.xGrid[i]);
                const Eigen::VectorXd y = Eigen::VectorXd::Constant(1, next[i]);
                rhs[i] = next[i] + dt * p.g(t, x, y, z)[0];
            }

            // implicit diffusion + advection; zero curvature at the ends
            Eigen::SparseMatrix<double> A(nx, nx);
            std::vector<Eigen::Triplet<double>> trip;
            trip.reserve(3 * nx);
            trip.emplace_back(0, 0, 1.0);
            trip.emplace_back(0, 1, -2.0);
            trip.emplace_back(0, 2, 1.0);
            trip.emplace_back(nx - 1, nx - 1, 1.0);
            trip.emplace_back(nx - 1, nx - 2, -2.0);
            trip.emplace_back(nx - 1, nx - 3, 1.0);
            for (int i = 1; i < nx - 1; ++i) {
                const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, sol.xGrid[i]);
                const Eigen::VectorXd y = Eigen::VectorXd::Constant(1, prevField(k, i));
                const double bi = p.b(t, x, y)[0];
                const double diff = 0.5 * s2 * dt / (dx * dx);
                const double adv = bi * dt / (2 * dx);
                trip.emplace_back(i, i - 1, -diff + adv);
                trip.emplace_back(i, i, 1.0 + 2.0 * diff);
                trip.emplace_back(i, i + 1, -diff - adv);
            }
            A.setFromTriplets(trip.begin(), trip.end());
            rhs[0] = 0.0;
            rhs[nx - 1] = 0.0;

            Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
            if (lu.info() != Eigen::Success)
                throw std::runtime_error("pde_oracle: singular implicit system");
            const Eigen::VectorXd cur = lu.solve(rhs);
            if (!cur.allFinite() || cur.cwiseAbs().maxCoeff() > blowupGate)
                throw std::runtime_error(
                    "pde_oracle: solution blow-up detected; refine the time grid");
            sol.theta.row(k) = cur.transpose();
        }

        const double change = (sol.theta - prevField).cwiseAbs().maxCoeff();
        prevField = sol.theta;
        if (change <= frozenFieldTol) break;
    }
    return sol;
}

}  // namespace fbsde

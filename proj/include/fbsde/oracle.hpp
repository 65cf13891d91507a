#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "fbsde/model.hpp"

namespace fbsde {

/// Closed-form reference solution. Members may be empty depending on the
/// oracle (e.g. the linear BSDE gives Y as a function of (t, x)).
struct OracleSolution {
    bool singular = false;
    double tMin = 0, tMax = 0;                    // validity domain in t
    std::function<double(double)> X;              // deterministic X(t)
    std::function<double(double)> Y;              // deterministic Y(t)
    std::function<double(double)> Z;              // deterministic Z(t)
    std::function<double(double, double)> y_tx;   // Y as function of (t, X_t)
};

/// Two-point boundary ODE X' = Y, Y' = -k X, X(0) = x0, Y(T) = eps X(T).
/// Singular when the boundary determinant vanishes (sqrt(k) T at an odd
/// multiple of pi/2 for eps = 0).
OracleSolution delay_oracle(double k, double T, double x0, double eps_terminal);

/// g = alpha y, h(x) = x, b = 0, sigma = 1: Y_t = e^{alpha (T-t)} X_t,
/// Z_t = e^{alpha (T-t)}.
OracleSolution linear_bsde_oracle(double alpha, double T, double x0);

struct PdeGrid {
    double xMin = 0, xMax = 0;
    int xNodes = 201;
    int tSteps = 200;
};

/// Tabulated decoupling field theta(t, x) on a rectangular grid.
struct PdeSolution {
    std::vector<double> tGrid;  // increasing, tGrid[0] = 0
    std::vector<double> xGrid;
    Eigen::MatrixXd theta;      // tGrid.size() x xGrid.size()

    double eval(double t, double x) const;  // bilinear interpolation
};

/// 1-d semilinear parabolic solver for decoupled Markovian problems:
///   theta_t + 1/2 |sigma|^2 theta_xx + b theta_x + g(t, x, theta, sigma theta_x) = 0,
///   theta(T, .) = h,
/// implicit in diffusion/advection, explicit in g, zero second derivative at
/// the boundary. y-dependent drift is handled by frozen-field iteration.
PdeSolution pde_oracle(const FbsdeProblem& p, const PdeGrid& grid,
                       int frozenFieldSweeps = 20, double frozenFieldTol = 1e-10);

}  // namespace fbsde

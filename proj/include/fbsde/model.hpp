#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "fbsde/growth.hpp"

namespace fbsde {

struct Dimensions {
    int m = 1;  // state dimension of X
    int l = 1;  // dimension of Y
    int d = 1;  // Brownian dimension

    bool valid() const { return m >= 1 && l >= 1 && d >= 1; }
};

/// Regularity constants declared for a problem instance. They are taken at
/// face value by the solver and spot-checked empirically by
/// validate_problem().
struct AssumptionConstants {
    double k1 = 0, k2 = 0;          // drift Lipschitz in (x, y)
    double k3 = 0, k4 = 0;          // generator Lipschitz in x (on |z|<=M) and y
    double k5 = 0;                  // terminal Lipschitz
    double lambda1 = 0;             // drift growth
    double lambda2 = 0;             // diffusion bound
    double lambda3 = 0;             // volatility non-degeneracy (global mode)
    double lambda4 = 0;             // generator growth (global mode)
    double lambda5 = 0;             // terminal bound (global mode)
    double K = 0;                   // mixed-difference constant
    GrowthFn rho;                   // z-Lipschitz modulus
    double B = 0;                   // y-Lipschitz constant, pure-BSDE mode
    Eigen::MatrixXd A;              // l x d terminal Malliavin bounds
    Eigen::MatrixXd qIntegrals;     // l x d, entry (i,j) = int_0^T q_ij^2 dt

    static AssumptionConstants zeros(const Dimensions& dims) {
        AssumptionConstants c;
        c.A = Eigen::MatrixXd::Zero(dims.l, dims.d);
        c.qIntegrals = Eigen::MatrixXd::Zero(dims.l, dims.d);
        return c;
    }
};

using DriftFn = std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& x,
                                              const Eigen::VectorXd& y)>;
using DiffusionFn = std::function<Eigen::MatrixXd(double t)>;
using GeneratorFn = std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& x,
                                                  const Eigen::VectorXd& y,
                                                  const Eigen::MatrixXd& z)>;
using TerminalFn = std::function<Eigen::VectorXd(const Eigen::VectorXd& x)>;

enum class GeneratorShape { General, Diagonal };

/// A coupled FBSDE instance
///   X_t = x0 + int b(s, X, Y) ds + int sigma(s) dW
///   Y_t = h(X_T) + int_t^T g(s, X, Y, Z) ds - int_t^T Z dW.
/// Immutable after construction; coefficient maps must be pure.
struct FbsdeProblem {
    Dimensions dims;
    double horizon = 1.0;
    Eigen::VectorXd x0;
    DriftFn b;
    DiffusionFn sigma;
    GeneratorFn g;
    TerminalFn h;
    AssumptionConstants constants;
    GeneratorShape gShape = GeneratorShape::General;
    std::string name;
};

struct ViolationRecord {
    std::string assumption;   // "A1" .. "A5", "finite"
    std::string detail;
    double maxRatio = 0;      // worst sampled ratio
    double declared = 0;      // declared constant it is compared against
};

struct ValidationReport {
    std::vector<ViolationRecord> checks;      // one per assumption, worst case
    std::vector<ViolationRecord> violations;  // subset exceeding declared by > 1%
    bool ok() const { return violations.empty(); }
};

/// Empirical spot-check of (A1)-(A5) on `samples` random points, seeded.
ValidationReport validate_problem(const FbsdeProblem& p, int samples, std::uint64_t seed);

/// Built-in test problems:
///   delay_counterexample(k, T, x0, eps_terminal)
///   linear_decoupled(alpha, T)
///   martingale(T)
///   superquadratic_power(c, p, T)
///   coupled_2d_gamma(alpha, eps, T)
///   coupled_mild(kx, ky, T)
FbsdeProblem builtin_problem(const std::string& name,
                             const std::map<std::string, double>& params = {});

std::vector<std::string> builtin_problem_names();

}  // namespace fbsde

#include <cmath>
#include <stdexcept>

#include "fbsde/model.hpp"

namespace fbsde {

namespace {

double get(const std::map<std::string, double>& params, const std::string& key, double dflt) {
    auto it = params.find(key);
    return it == params.end() ? dflt : it->second;
}

void require_positive(double v, const std::string& what) {
    if (!(v > 0)) throw std::invalid_argument("builtin_problem: " + what + " must be positive");
}

FbsdeProblem scalar_skeleton(double T) {
    FbsdeProblem p;
    p.dims = {1, 1, 1};
    p.horizon = T;
    p.x0 = Eigen::VectorXd::Zero(1);
    p.constants = AssumptionConstants::zeros(p.dims);
    p.gShape = GeneratorShape::Diagonal;
    return p;
}

Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

}  // namespace

// X' = Y, Y' = -k X, sigma = 0, h(x) = eps x. Solvable iff sqrt(k) T stays
// away from odd multiples of pi/2 (eps = 0).
static FbsdeProblem delay_counterexample(const std::map<std::string, double>& params) {
    const double k = get(params, "k", 1.0);
    const double T = get(params, "T", 1.0);
    const double x0 = get(params, "x0", 0.0);
    const double eps = get(params, "eps_terminal", 0.0);
    require_positive(k, "k");
    require_positive(T, "T");

    FbsdeProblem p = scalar_skeleton(T);
    p.name = "delay_counterexample";
    p.x0[0] = x0;
    p.b = [](double, const Eigen::VectorXd&, const Eigen::VectorXd& y) { return y; };
    p.sigma = [](double) { return Eigen::MatrixXd::Zero(1, 1); };
    p.g = [k](double, const Eigen::VectorXd& x, const Eigen::VectorXd&, const Eigen::MatrixXd&) {
        return Eigen::VectorXd(k * x);
    };
    p.h = [eps](const Eigen::VectorXd& x) { return Eigen::VectorXd(eps * x); };
    p.constants.k2 = 1.0;
    p.constants.k3 = k;
    p.constants.k5 = std::abs(eps);
    p.constants.lambda1 = 1.0;
    p.constants.lambda2 = 0.0;
    return p;
}

// b = 0, sigma = 1, g = 0, h(x) = x: Y_t = X_t exactly.
static FbsdeProblem martingale(const std::map<std::string, double>& params) {
    const double T = get(params, "T", 1.0);
    const double x0 = get(params, "x0", 0.0);
    require_positive(T, "T");

    FbsdeProblem p = scalar_skeleton(T);
    p.name = "martingale";
    p.x0[0] = x0;
    p.b = [](double, const Eigen::VectorXd&, const Eigen::VectorXd&) {
        return Eigen::VectorXd::Zero(1);
    };
    p.sigma = [](double) { return Eigen::MatrixXd::Identity(1, 1); };
    p.g = [](double, const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::MatrixXd&) {
        return Eigen::VectorXd::Zero(1);
    };
    p.h = [](const Eigen::VectorXd& x) { return x; };
    p.constants.k5 = 1.0;
    p.constants.lambda2 = 1.0;
    p.constants.lambda3 = 1.0;
    return p;
}

// b = 0, sigma = 1, g = alpha y, h(x) = x: Y_t = e^{alpha (T-t)} X_t.
static FbsdeProblem linear_decoupled(const std::map<std::string, double>& params) {
    const double alpha = get(params, "alpha", 1.0);
    const double T = get(params, "T", 1.0);
    const double x0 = get(params, "x0", 0.0);
    require_positive(T, "T");

    FbsdeProblem p = scalar_skeleton(T);
    p.name = "linear_decoupled";
    p.x0[0] = x0;
    p.b = [](double, const Eigen::VectorXd&, const Eigen::VectorXd&) {
        return Eigen::VectorXd::Zero(1);
    };
    p.sigma = [](double) { return Eigen::MatrixXd::Identity(1, 1); };
    p.g = [alpha](double, const Eigen::VectorXd&, const Eigen::VectorXd& y, const Eigen::MatrixXd&) {
        return Eigen::VectorXd(alpha * y);
    };
    p.h = [](const Eigen::VectorXd& x) { return x; };
    p.constants.k4 = std::abs(alpha);
    p.constants.k5 = 1.0;
    p.constants.lambda2 = 1.0;
    p.constants.lambda3 = 1.0;
    p.constants.B = std::abs(alpha);
    return p;
}

// b = 0, sigma = 1, g = c/(p+1) |z|^{p+1}, h(x) = tanh(x).
// z-Lipschitz modulus rho(x) = c (1 + x^p).
static FbsdeProblem superquadratic_power(const std::map<std::string, double>& params) {
    const double c = get(params, "c", 1.0);
    const double pw = get(params, "p", 2.0);
    const double T = get(params, "T", 0.1);
    const double x0 = get(params, "x0", 0.0);
    require_positive(c, "c");
    require_positive(pw, "p");
    require_positive(T, "T");

    FbsdeProblem p = scalar_skeleton(T);
    p.name = "superquadratic_power";
    p.x0[0] = x0;
    p.b = [](double, const Eigen::VectorXd&, const Eigen::VectorXd&) {
        return Eigen::VectorXd::Zero(1);
    };
    p.sigma = [](double) { return Eigen::MatrixXd::Identity(1, 1); };
    p.g = [c, pw](double, const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::MatrixXd& z) {
        const double a = std::abs(z(0, 0));
        return scalar(c / (pw + 1.0) * std::pow(a, pw + 1.0));
    };
    p.h = [](const Eigen::VectorXd& x) { return scalar(std::tanh(x[0])); };
    p.constants.k5 = 1.0;
    p.constants.lambda2 = 1.0;
    p.constants.lambda3 = 1.0;
    p.constants.lambda4 = c;
    p.constants.lambda5 = 1.0;
    p.constants.rho = GrowthFn::power(c, pw);
    return p;
}

// Coupled scalar problem with bounded terminal and generator, satisfying the
// global-solvability side conditions: b = ky y, sigma = 1, g = kx sin(x),
// h(x) = tanh(x).
static FbsdeProblem coupled_mild(const std::map<std::string, double>& params) {
    const double kx = get(params, "kx", 0.5);
    const double ky = get(params, "ky", 0.5);
    const double T = get(params, "T", 0.2);
    const double x0 = get(params, "x0", 0.0);
    require_positive(T, "T");

    FbsdeProblem p = scalar_skeleton(T);
    p.name = "coupled_mild";
    p.x0[0] = x0;
    p.b = [ky](double, const Eigen::VectorXd&, const Eigen::VectorXd& y) {
        return Eigen::VectorXd(ky * y);
    };
    p.sigma = [](double) { return Eigen::MatrixXd::Identity(1, 1); };
    p.g = [kx](double, const Eigen::VectorXd& x, const Eigen::VectorXd&, const Eigen::MatrixXd&) {
        return scalar(kx * std::sin(x[0]));
    };
    p.h = [](const Eigen::VectorXd& x) { return scalar(std::tanh(x[0])); };
    p.constants.k2 = std::abs(ky);
    p.constants.k3 = std::abs(kx);
    p.constants.k5 = 1.0;
    p.constants.lambda1 = std::abs(ky);
    p.constants.lambda2 = 1.0;
    p.constants.lambda3 = 1.0;
    p.constants.lambda4 = std::abs(kx);
    p.constants.lambda5 = 1.0;
    return p;
}

// Two-dimensional linear system with rotational coupling, used for the
// conjugation (Gamma-transform) checks: b = eps J y, g = alpha J y, h = x,
// sigma = I, J = [[0,1],[-1,0]].
static FbsdeProblem coupled_2d_gamma(const std::map<std::string, double>& params) {
    const double alpha = get(params, "alpha", 0.5);
    const double eps = get(params, "eps", 0.1);
    const double T = get(params, "T", 0.25);
    require_positive(T, "T");

    FbsdeProblem p;
    p.dims = {2, 2, 2};
    p.horizon = T;
    p.x0 = Eigen::Vector2d(get(params, "x0_1", 1.0), get(params, "x0_2", 0.0));
    p.name = "coupled_2d_gamma";
    p.gShape = GeneratorShape::Diagonal;  // g is z-free
    p.constants = AssumptionConstants::zeros(p.dims);

    Eigen::Matrix2d J;
    J << 0, 1, -1, 0;
    p.b = [eps, J](double, const Eigen::VectorXd&, const Eigen::VectorXd& y) {
        return Eigen::VectorXd(eps * J * y);
    };
    p.sigma = [](double) { return Eigen::MatrixXd::Identity(2, 2); };
    p.g = [alpha, J](double, const Eigen::VectorXd&, const Eigen::VectorXd& y,
                     const Eigen::MatrixXd&) { return Eigen::VectorXd(alpha * J * y); };
    p.h = [](const Eigen::VectorXd& x) { return x; };
    p.constants.k2 = std::abs(eps);
    p.constants.k4 = std::abs(alpha);
    p.constants.k5 = 1.0;
    p.constants.lambda1 = std::abs(eps);
    p.constants.lambda2 = std::sqrt(2.0);
    p.constants.lambda3 = 1.0;
    return p;
}

FbsdeProblem builtin_problem(const std::string& name,
                             const std::map<std::string, double>& params) {
    if (name == "delay_counterexample") return delay_counterexample(params);
    if (name == "martingale") return martingale(params);
    if (name == "linear_decoupled") return linear_decoupled(params);
    if (name == "superquadratic_power") return superquadratic_power(params);
    if (name == "coupled_mild") return coupled_mild(params);
    if (name == "coupled_2d_gamma") return coupled_2d_gamma(params);
    throw std::invalid_argument("builtin_problem: unknown problem '" + name + "'");
}

std::vector<std::string> builtin_problem_names() {
    return {"delay_counterexample", "martingale",   "linear_decoupled",
            "superquadratic_power", "coupled_mild", "coupled_2d_gamma"};
}

}  // namespace fbsde

#include "fbsde/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fbsde {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// a / b with the zero-denominator convention: no constraint
double ratio_or_inf(double a, double b) { return b == 0.0 ? kInf : a / b; }
}  // namespace

double z_bound_M(const AssumptionConstants& c, const Dimensions& dims) {
    return 4.0 * c.lambda2 * c.k5 * std::sqrt(static_cast<double>(dims.d) * dims.l);
}

double malliavin_bound_Q(const AssumptionConstants& c) {
    if (c.A.rows() != c.qIntegrals.rows() || c.A.cols() != c.qIntegrals.cols())
        throw std::invalid_argument("malliavin_bound_Q: A and qIntegrals shape mismatch");
    double s = 0.0;
    for (int j = 0; j < c.A.cols(); ++j)
        s += c.A.col(j).squaredNorm() + c.qIntegrals.col(j).sum();
    return std::sqrt(2.0 * s);
}

double local_horizon_C1(const AssumptionConstants& c, const Dimensions& dims) {
    const double M = z_bound_M(c, dims);
    const double log2 = std::log(2.0);
    const double rhoM = c.rho(M);
    double v = ratio_or_inf(c.k5 * c.k5, c.k3 * c.k3);
    v = std::min(v, ratio_or_inf(log2, c.k1));
    v = std::min(v, ratio_or_inf(c.lambda2, c.k2 * M));
    v = std::min(v, log2 / (2.0 * c.k4 + rhoM * rhoM + 1.0));
    return v;
}

double contraction_horizon_C2(const AssumptionConstants& c, const Dimensions& dims,
                              double c1, double tCap) {
    if (c1 <= 0) throw std::invalid_argument("contraction_horizon_C2: c1 must be positive");
    const double M = z_bound_M(c, dims);
    const double rhoM = c.rho(M);
    const double beta = 2.0 * rhoM * rhoM + c.k3 * c.k3 + 2.0 * c.k4;

    auto feasible = [&](double T) {
        const bool first = 2.0 * T * T * c.k1 * c.k1 <= 0.5;
        const bool second =
            8.0 * (c1 + 1.0) * std::exp(beta * T) * (c.k5 * c.k5 + T) * T * T * c.k2 * c.k2 <= 0.5;
        return first && second;
    };

    if (feasible(tCap)) return kInf;
    double lo = 0.0, hi = tCap;
    // both constraints are increasing in T: the feasible set is [0, T*]
    while (hi - lo > 1e-10 * std::max(hi, 1.0)) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? lo : hi) = mid;
    }
    return lo;
}

DeltaSchedule delta_schedule(double B, const GrowthFn& rho, double Q, double T, int nCap) {
    if (nCap < 1) throw std::invalid_argument("delta_schedule: nCap must be >= 1");
    DeltaSchedule out;
    const double log2 = std::log(2.0);
    double sum = 0.0;
    for (int n = 0; n < nCap; ++n) {
        const double r = rho.at_pow2(Q, n);
        const double dn = std::isinf(r) ? 0.0 : log2 / (2.0 * B + r * r + 1.0);
        out.deltas.push_back(dn);
        sum += dn;
        if (sum >= T) {
            out.N = n;
            break;
        }
    }
    return out;
}

double decoupling_lipschitz_K5(const AssumptionConstants& c, const Dimensions& dims, double T) {
    const double l = dims.l;
    const double ek1T = std::exp(c.k1 * T);
    const double rate = c.k2 * c.k3 * T * ek1T + c.k4 + c.k2 * c.k5 * ek1T;
    return std::sqrt(l) * ek1T * (c.k5 + T * c.k3) * l * std::exp(rate * l * T);
}

double smooth_clamp(double a, double M) {
    if (M < 0) throw std::invalid_argument("smooth_clamp: M must be >= 0");
    if (a >= -M && a <= M) return a;
    if (a > M + 2.0) return M + 1.0;
    if (a < -(M + 2.0)) return -(M + 1.0);
    if (a > 0)  // a in (M, M+2]
        return (-M * M + 2.0 * M * a - a * (a - 4.0)) / 4.0;
    return (M * M + 2.0 * M * a + a * (a + 4.0)) / 4.0;  // a in [-(M+2), -M)
}

Eigen::MatrixXd smooth_clamp(const Eigen::MatrixXd& z, double M) {
    return z.unaryExpr([M](double a) { return smooth_clamp(a, M); });
}

Eigen::MatrixXd radial_clamp(const Eigen::MatrixXd& z, double R) {
    if (R < 0) throw std::invalid_argument("radial_clamp: R must be >= 0");
    const double n = z.norm();
    if (n <= R) return z;
    if (n == 0.0) return z;
    return z * (R / n);
}

GeneratorFn truncate_generator(const GeneratorFn& g, double R, TruncationMode mode) {
    switch (mode) {
        case TruncationMode::Radial:
            return [g, R](double t, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                          const Eigen::MatrixXd& z) { return g(t, x, y, radial_clamp(z, R)); };
        case TruncationMode::Smooth:
            return [g, R](double t, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                          const Eigen::MatrixXd& z) { return g(t, x, y, smooth_clamp(z, R)); };
        case TruncationMode::Off:
            return g;
    }
    return g;
}

bool clamp_active(const Eigen::MatrixXd& z, double R, TruncationMode mode) {
    switch (mode) {
        case TruncationMode::Radial:
            return z.norm() > R;
        case TruncationMode::Smooth:
            return z.cwiseAbs().maxCoeff() > R;
        case TruncationMode::Off:
            return false;
    }
    return false;
}

std::vector<double> pasting_grid(double T, double C_bar) {
    if (C_bar <= 0) throw std::invalid_argument("pasting_grid: C_bar must be positive");
    if (T <= 0) throw std::invalid_argument("pasting_grid: T must be positive");
    std::vector<double> grid;
    const int N = static_cast<int>(std::floor(T / C_bar * (1.0 + 1e-12)));
    for (int i = 0; i <= N; ++i) grid.push_back(i * C_bar);
    if (T - grid.back() > 1e-12 * std::max(T, 1.0))
        grid.push_back(T);
    else
        grid.back() = T;
    return grid;
}

BoundsReport compute_bounds(const FbsdeProblem& p, const BoundsOptions& opts) {
    BoundsReport r;
    const auto& c = p.constants;
    r.M = z_bound_M(c, p.dims);
    r.Q = malliavin_bound_Q(c);
    r.C1 = local_horizon_C1(c, p.dims);
    r.C2 = contraction_horizon_C2(c, p.dims, opts.c1, opts.tCap);
    r.C_loc = std::min(r.C1, r.C2);
    r.K5 = decoupling_lipschitz_K5(c, p.dims, p.horizon);

    AssumptionConstants global = c;
    global.k5 = r.K5;
    r.M_bar = z_bound_M(global, p.dims);
    r.C_bar = std::min(local_horizon_C1(global, p.dims),
                       contraction_horizon_C2(global, p.dims, opts.c1, opts.tCap));

    if (std::isfinite(r.C_bar) && r.C_bar > 0 && r.C_bar < p.horizon)
        r.pastingGrid = pasting_grid(p.horizon, r.C_bar);
    else
        r.pastingGrid = {0.0, p.horizon};

    auto sched = delta_schedule(c.B, c.rho, r.Q, p.horizon, opts.nCap);
    r.deltaSchedule = std::move(sched.deltas);
    r.globalCertificateN = sched.N;
    return r;
}

}  // namespace fbsde

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "fbsde/model.hpp"

namespace fbsde {

struct BoundsOptions {
    double c1 = 4.0;     // Burkholder-Davis-Gundy constant used in the
                         // contraction horizon; the estimate is conservative
                         // for any admissible choice
    double tCap = 1e6;   // horizon search cap; infinity sentinel beyond it
    int nCap = 1000000;  // schedule length cap
};

struct BoundsReport {
    double M = 0;       // local Z-bound 4 lambda2 k5 sqrt(dl)
    double Q = 0;       // Malliavin Z-bound, pure-BSDE mode
    double C1 = 0;      // small-horizon constant (iteration well-posedness)
    double C2 = 0;      // contraction horizon (depends on c1)
    double C_loc = 0;   // min(C1, C2)
    double K5 = 0;      // decoupling-field Lipschitz constant at the problem horizon
    double M_bar = 0;   // global Z-bound 4 lambda2 K5 sqrt(dl)
    double C_bar = 0;   // pasting step: C_loc with k5 replaced by K5
    std::vector<double> pastingGrid;
    std::vector<double> deltaSchedule;
    std::optional<int> globalCertificateN;  // least N with sum Delta_n >= T
};

/// M = 4 lambda2 k5 sqrt(d l).
double z_bound_M(const AssumptionConstants& c, const Dimensions& dims);

/// Q = sqrt(2 sum_j (sum_i A_ij^2 + sum_i int q_ij^2)).
double malliavin_bound_Q(const AssumptionConstants& c);

/// min(k5^2/k3^2, log2/k1, lambda2/(k2 M), log2/(2 k4 + rho(M)^2 + 1));
/// terms with zero denominator count as +inf.
double local_horizon_C1(const AssumptionConstants& c, const Dimensions& dims);

/// Largest T with 2 T^2 k1^2 <= 1/2 and
/// 8 (c1+1) e^{beta T} (k5^2 + T) T^2 k2^2 <= 1/2,
/// beta = 2 rho(M)^2 + k3^2 + 2 k4. Infinity if unconstrained up to tCap.
double contraction_horizon_C2(const AssumptionConstants& c, const Dimensions& dims,
                              double c1, double tCap = 1e6);

struct DeltaSchedule {
    std::vector<double> deltas;
    std::optional<int> N;  // least N with partial sum >= T, if reached
};

/// Delta_n = log2 / (2B + rho(2^n Q)^2 + 1), emitted until the partial sum
/// reaches T or nCap terms were produced.
DeltaSchedule delta_schedule(double B, const GrowthFn& rho, double Q, double T, int nCap);

/// K5 = sqrt(l) e^{k1 T} (k5 + T k3) l exp((k2 k3 T e^{k1 T} + k4 + k2 k5 e^{k1 T}) l T).
double decoupling_lipschitz_K5(const AssumptionConstants& c, const Dimensions& dims, double T);

/// C^1 piecewise smooth clamp: identity on [-M, M], quadratic blends on
/// [M, M+2] and [-(M+2), -M], saturating at +-(M+1).
double smooth_clamp(double a, double M);

/// Entrywise smooth clamp of an l x d matrix.
Eigen::MatrixXd smooth_clamp(const Eigen::MatrixXd& z, double M);

/// z if |z|_F <= R, else z R / |z|_F.
Eigen::MatrixXd radial_clamp(const Eigen::MatrixXd& z, double R);

enum class TruncationMode { Radial, Smooth, Off };

/// g~(t,x,y,z) = g(t,x,y,clamp(z)).
GeneratorFn truncate_generator(const GeneratorFn& g, double R, TruncationMode mode);

/// Whether the clamp would alter z (by more than roundoff).
bool clamp_active(const Eigen::MatrixXd& z, double R, TruncationMode mode);

/// 0 = t0 < t1 < ... < t_{N+1} = T with t_i = i C_bar, N = floor(T / C_bar).
std::vector<double> pasting_grid(double T, double C_bar);

/// All constants for a problem at its declared horizon.
BoundsReport compute_bounds(const FbsdeProblem& p, const BoundsOptions& opts = {});

}  // namespace fbsde

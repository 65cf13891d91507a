#pragma once

#include <Eigen/Dense>
#include <vector>

namespace fbsde {

/// Cross-sectional regression basis for conditional expectations.
struct BasisSpec {
    enum class Kind { Polynomial, LocalPartition };
    Kind kind = Kind::Polynomial;
    int degree = 2;  // polynomial: total degree
    int bins = 8;    // local partition: bins per active dimension
};

/// A basis bound to one cross-section of states: standardization constants
/// (or bin edges) are frozen from the sample it was fitted on, so the same
/// feature map can be reapplied to fresh points.
class FittedBasis {
public:
    /// states: n x m sample the feature map is calibrated on. Dimensions with
    /// (near) zero sample spread are dropped; the intercept is always kept.
    FittedBasis(const BasisSpec& spec, const Eigen::MatrixXd& states);
    FittedBasis() = default;

    int featureCount() const { return nFeat_; }
    Eigen::MatrixXd features(const Eigen::MatrixXd& states) const;  // n x nFeat
    Eigen::RowVectorXd featuresOne(const Eigen::VectorXd& x) const;

private:
    BasisSpec spec_;
    int nFeat_ = 0;
    std::vector<int> activeDims_;
    Eigen::VectorXd mean_, scale_;               // per active dim
    std::vector<std::vector<int>> exponents_;    // polynomial multi-indices
    std::vector<Eigen::VectorXd> binEdges_;      // local partition, per active dim
};

/// Ridge least squares: minimizes |F beta - Y|^2 + ridge |beta|^2.
/// Deterministic (normal equations + LDLT). Throws on rank deficiency when
/// ridge == 0.
Eigen::MatrixXd fit_conditional_expectation(const Eigen::MatrixXd& features,
                                            const Eigen::MatrixXd& targets, double ridge);

/// A fitted conditional-expectation map: basis plus coefficients.
struct FittedMap {
    FittedBasis basis;
    Eigen::MatrixXd beta;  // nFeat x q

    Eigen::VectorXd eval(const Eigen::VectorXd& x) const {
        return (basis.featuresOne(x) * beta).transpose();
    }
    Eigen::MatrixXd evalAll(const Eigen::MatrixXd& states) const {
        return basis.features(states) * beta;
    }
};

}  // namespace fbsde

#include "fbsde/regression.hpp"

#include <cmath>
#include <stdexcept>

namespace fbsde {

namespace {

// All multi-indices over `dims` variables with total degree in [1, maxDeg].
void enumerate_exponents(int dims, int maxDeg, std::vector<int>& current,
                         std::vector<std::vector<int>>& out, int pos, int remaining) {
    if (pos == dims) {
        if (remaining < maxDeg) out.push_back(current);  // skip the all-zero index
        return;
    }
    for (int e = 0; e <= remaining; ++e) {
        current[pos] = e;
        enumerate_exponents(dims, maxDeg, current, out, pos + 1, remaining - e);
    }
}

}  // namespace

FittedBasis::FittedBasis(const BasisSpec& spec, const Eigen::MatrixXd& states) : spec_(spec) {
    const int n = static_cast<int>(states.rows());
    const int m = static_cast<int>(states.cols());
    if (n < 1) throw std::invalid_argument("FittedBasis: empty sample");

    Eigen::VectorXd mean = states.colwise().mean();
    Eigen::VectorXd sd(m);
    for (int j = 0; j < m; ++j)
        sd[j] = std::sqrt((states.col(j).array() - mean[j]).square().sum() / std::max(1, n - 1));

    for (int j = 0; j < m; ++j)
        if (sd[j] > 1e-12 * (1.0 + std::abs(mean[j]))) activeDims_.push_back(j);
    const int ma = static_cast<int>(activeDims_.size());
    mean_.resize(ma);
    scale_.resize(ma);
    for (int j = 0; j < ma; ++j) {
        mean_[j] = mean[activeDims_[j]];
        scale_[j] = sd[activeDims_[j]];
    }

    if (spec_.kind == BasisSpec::Kind::Polynomial) {
        if (spec_.degree < 0) throw std::invalid_argument("FittedBasis: negative degree");
        std::vector<int> current(ma, 0);
        if (ma > 0 && spec_.degree > 0)
            enumerate_exponents(ma, spec_.degree, current, exponents_, 0, spec_.degree);
        nFeat_ = 1 + static_cast<int>(exponents_.size());
    } else {
        if (spec_.bins < 2) throw std::invalid_argument("FittedBasis: need >= 2 bins");
        for (int j = 0; j < ma; ++j) {
            const int col = activeDims_[j];
            const double lo = states.col(col).minCoeff();
            const double hi = states.col(col).maxCoeff();
            Eigen::VectorXd edges(spec_.bins + 1);
            for (int b = 0; b <= spec_.bins; ++b)
                edges[b] = lo + (hi - lo) * b / spec_.bins;
            binEdges_.push_back(edges);
        }
        // indicator per bin of the first active dimension, plus linear term
        // inside the bin; higher dimensions are folded multiplicatively
        nFeat_ = ma == 0 ? 1 : spec_.bins * (1 + ma);
    }
}

namespace {
int bin_index(const Eigen::VectorXd& edges, double v) {
    const int nb = static_cast<int>(edges.size()) - 1;
    if (v <= edges[0]) return 0;
    if (v >= edges[nb]) return nb - 1;
    int b = static_cast<int>((v - edges[0]) / (edges[nb] - edges[0]) * nb);
    return std::min(std::max(b, 0), nb - 1);
}
}  // namespace

Eigen::RowVectorXd FittedBasis::featuresOne(const Eigen::VectorXd& x) const {
    Eigen::RowVectorXd f = Eigen::RowVectorXd::Zero(nFeat_);
    const int ma = static_cast<int>(activeDims_.size());
    Eigen::VectorXd u(ma);
    for (int j = 0; j < ma; ++j) u[j] = (x[activeDims_[j]] - mean_[j]) / scale_[j];

    if (spec_.kind == BasisSpec::Kind::Polynomial || ma == 0) {
        f[0] = 1.0;
        for (std::size_t i = 0; i < exponents_.size(); ++i) {
            double v = 1.0;
            for (int j = 0; j < ma; ++j)
                for (int e = 0; e < exponents_[i][j]; ++e) v *= u[j];
            f[1 + i] = v;
        }
    } else {
        // local partition on the first active dimension: per-bin constant and
        // per-bin linear terms in each active dimension
        const int b = bin_index(binEdges_[0], x[activeDims_[0]]);
        f[b * (1 + ma)] = 1.0;
        for (int j = 0; j < ma; ++j) f[b * (1 + ma) + 1 + j] = u[j];
    }
    return f;
}

Eigen::MatrixXd FittedBasis::features(const Eigen::MatrixXd& states) const {
    Eigen::MatrixXd F(states.rows(), nFeat_);
    for (int i = 0; i < states.rows(); ++i)
        F.row(i) = featuresOne(states.row(i).transpose());
    return F;
}

Eigen::MatrixXd fit_conditional_expectation(const Eigen::MatrixXd& features,
                                            const Eigen::MatrixXd& targets, double ridge) {
    if (features.rows() != targets.rows())
        throw std::invalid_argument("fit_conditional_expectation: row mismatch");
    if (ridge < 0) throw std::invalid_argument("fit_conditional_expectation: ridge < 0");
    const int f = static_cast<int>(features.cols());
    Eigen::MatrixXd gram = features.transpose() * features;
    gram.diagonal().array() += ridge;
    if (ridge == 0.0) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
        lu.setThreshold(1e-10);
        if (lu.rank() < f)
            throw std::runtime_error(
                "fit_conditional_expectation: singular regression; use ridge > 0 or a "
                "smaller basis");
        return lu.solve(features.transpose() * targets);
    }
    return gram.ldlt().solve(features.transpose() * targets);
}

}  // namespace fbsde

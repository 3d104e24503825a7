#pragma once

#include <Eigen/Dense>
#include <utility>

#include "gvar/covmatrix.hpp"

namespace gvar {

/// Probability measure with finite support: m points in R^d (rows of
/// `support`) and weights on the probability simplex.
///
/// Construction rejects negative weights, an all-zero weight vector,
/// non-finite data and duplicate support points, then normalizes the weights
/// to sum to one exactly.
class DiscreteMeasure {
public:
    DiscreteMeasure(Eigen::MatrixXd support, Eigen::VectorXd weights);

    [[nodiscard]] int size() const noexcept { return static_cast<int>(support_.rows()); }
    [[nodiscard]] int dim() const noexcept { return static_cast<int>(support_.cols()); }
    [[nodiscard]] const Eigen::MatrixXd& support() const noexcept { return support_; }
    [[nodiscard]] const Eigen::VectorXd& weights() const noexcept { return weights_; }

private:
    Eigen::MatrixXd support_;
    Eigen::VectorXd weights_;
};

/// Mean vector and covariance matrix of a discrete measure:
/// E = sum_i w_i x_i, V = sum_i w_i (x_i - E)(x_i - E)^T.
[[nodiscard]] std::pair<Eigen::VectorXd, CovMatrix> measure_moments(const DiscreteMeasure& mu);

} // namespace gvar

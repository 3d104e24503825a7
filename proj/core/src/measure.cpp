#include "gvar/measure.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

namespace gvar {

DiscreteMeasure::DiscreteMeasure(Eigen::MatrixXd support, Eigen::VectorXd weights)
    : support_(std::move(support)), weights_(std::move(weights)) {
    if (support_.rows() == 0 || support_.cols() == 0)
        throw DegenerateInputError("measure needs a nonempty support");
    if (weights_.size() != support_.rows())
        throw DomainError("weight count " + std::to_string(weights_.size()) +
                          " does not match support size " + std::to_string(support_.rows()));
    if (!support_.allFinite() || !weights_.allFinite())
        throw DomainError("measure has non-finite entries");
    if ((weights_.array() < 0.0).any())
        throw DomainError("measure weights must be nonnegative");
    const double total = weights_.sum();
    if (total <= 0.0) throw DomainError("measure weights sum to zero");
    weights_ /= total;

    // Duplicate support points: sort row indices lexicographically, compare neighbours.
    std::vector<int> order(static_cast<std::size_t>(support_.rows()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        for (int c = 0; c < support_.cols(); ++c) {
            if (support_(a, c) != support_(b, c)) return support_(a, c) < support_(b, c);
        }
        return false;
    });
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (support_.row(order[i - 1]) == support_.row(order[i]))
            throw DomainError("support points must be pairwise distinct (rows " +
                              std::to_string(order[i - 1]) + " and " + std::to_string(order[i]) + ")");
    }
}

std::pair<Eigen::VectorXd, CovMatrix> measure_moments(const DiscreteMeasure& mu) {
    const Eigen::VectorXd mean = mu.support().transpose() * mu.weights();
    Eigen::MatrixXd centered = mu.support().rowwise() - mean.transpose();
    Eigen::MatrixXd cov = centered.transpose() * mu.weights().asDiagonal() * centered;
    cov = (cov + cov.transpose()) / 2.0;
    return {mean, CovMatrix(std::move(cov))};
}

} // namespace gvar

#pragma once

#include <Eigen/Dense>
#include <memory>
#include <mutex>

#include "gvar/errors.hpp"

namespace gvar {

/// Symmetric nonnegative-definite matrix with a lazily computed, cached
/// eigenvalue spectrum.
///
/// Construction rejects asymmetric input (|V_ij - V_ji| > 1e-12 * max(1, |V_ij|))
/// and non-finite entries, then stores the exactly symmetrized matrix.
/// The spectrum is computed on first access, sorted nonincreasing, and shared
/// between copies. Eigenvalues in [-1e-10 * lambda_max, 0) are clamped to zero;
/// anything more negative raises DomainError.
class CovMatrix {
public:
    explicit CovMatrix(Eigen::MatrixXd entries);

    /// Identity scaled by `scale`.
    static CovMatrix identity(int dim, double scale = 1.0);
    static CovMatrix diagonal(const Eigen::VectorXd& diag);

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(entries_.rows()); }
    [[nodiscard]] const Eigen::MatrixXd& entries() const noexcept { return entries_; }
    [[nodiscard]] double trace() const { return entries_.trace(); }

    /// Eigenvalues, nonincreasing, clamped to be nonnegative.
    [[nodiscard]] const Eigen::VectorXd& spectrum() const;

    [[nodiscard]] double lambda_max() const { return spectrum()(0); }
    [[nodiscard]] double lambda_min() const { return spectrum()(dim() - 1); }

    /// Number of eigenvalues above rel_tol * lambda_max.
    [[nodiscard]] int rank(double rel_tol = 1e-12) const;
    [[nodiscard]] bool nonsingular(double rel_tol = 1e-12) const;

    /// Symmetrized inverse. Throws SingularityError when lambda_min <= 1e-12 * lambda_max.
    [[nodiscard]] Eigen::MatrixXd inverse() const;

private:
    struct SpectrumCache {
        std::once_flag once;
        Eigen::VectorXd eigs;
    };

    Eigen::MatrixXd entries_;
    std::shared_ptr<SpectrumCache> cache_;
};

} // namespace gvar

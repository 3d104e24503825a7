#include "gvar/covmatrix.hpp"

#include <cmath>
#include <string>

namespace gvar {

CovMatrix::CovMatrix(Eigen::MatrixXd entries)
    : entries_(std::move(entries)), cache_(std::make_shared<SpectrumCache>()) {
    if (entries_.rows() == 0 || entries_.rows() != entries_.cols())
        throw DomainError("covariance matrix must be square and nonempty, got " +
                          std::to_string(entries_.rows()) + "x" + std::to_string(entries_.cols()));
    if (!entries_.allFinite())
        throw DomainError("covariance matrix has non-finite entries");
    const int d = dim();
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            const double a = entries_(i, j), b = entries_(j, i);
            if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a)))
                throw DomainError("matrix is not symmetric at (" + std::to_string(i) + "," +
                                  std::to_string(j) + ")");
        }
    }
    entries_ = ((entries_ + entries_.transpose()) / 2.0).eval();
}

CovMatrix CovMatrix::identity(int dim, double scale) {
    return CovMatrix(Eigen::MatrixXd::Identity(dim, dim) * scale);
}

CovMatrix CovMatrix::diagonal(const Eigen::VectorXd& diag) {
    return CovMatrix(Eigen::MatrixXd(diag.asDiagonal()));
}

const Eigen::VectorXd& CovMatrix::spectrum() const {
    std::call_once(cache_->once, [&] {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(entries_, Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success)
            throw DomainError("eigenvalue computation failed");
        Eigen::VectorXd eigs = solver.eigenvalues().reverse();
        const double lmax = std::max(eigs(0), 0.0);
        const double tol = 1e-10 * lmax;
        for (Eigen::Index i = 0; i < eigs.size(); ++i) {
            if (eigs(i) < -tol)
                throw DomainError("matrix is not nonnegative definite: eigenvalue " +
                                  std::to_string(eigs(i)) + " below -1e-10 * lambda_max");
            if (eigs(i) < 0.0) eigs(i) = 0.0;
        }
        cache_->eigs = std::move(eigs);
    });
    return cache_->eigs;
}

int CovMatrix::rank(double rel_tol) const {
    const Eigen::VectorXd& eigs = spectrum();
    const double cut = rel_tol * eigs(0);
    int r = 0;
    while (r < dim() && eigs(r) > cut) ++r;
    return r;
}

bool CovMatrix::nonsingular(double rel_tol) const {
    return lambda_min() > rel_tol * lambda_max();
}

Eigen::MatrixXd CovMatrix::inverse() const {
    if (!nonsingular())
        throw SingularityError("matrix is singular (lambda_min <= 1e-12 * lambda_max)");
    Eigen::MatrixXd inv = entries_.ldlt().solve(Eigen::MatrixXd::Identity(dim(), dim()));
    return (inv + inv.transpose()) / 2.0;
}

} // namespace gvar

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

#include "gvar/covmatrix.hpp"

namespace gvar {

/// Finite design space: m candidate regressor vectors f(t_j) (rows of
/// `regressors`) with scalar labels t_j. `regressor_at` evaluates f at an
/// arbitrary label and enables off-grid polishing; it is empty for spaces
/// loaded from regressor files, whose labels default to the row index.
struct DesignSpace {
    Eigen::MatrixXd regressors;
    std::vector<double> labels;
    std::function<Eigen::VectorXd(double)> regressor_at;
    double label_lo = 0.0;
    double label_hi = 0.0;

    [[nodiscard]] Eigen::Index size() const noexcept { return regressors.rows(); }
    [[nodiscard]] int dim() const noexcept { return static_cast<int>(regressors.cols()); }
};

/// f(t) = (1, t, ..., t^degree) on the uniform grid over [a, b] with the given
/// step; both endpoints are always included.
[[nodiscard]] DesignSpace polynomial_design_space(int degree, double a, double b,
                                                  double grid_step);

/// Space built from a file of regressor rows (no label geometry).
[[nodiscard]] DesignSpace regressor_design_space(Eigen::MatrixXd regressors);

/// Weighting of the design-space points (probability simplex).
struct DesignMeasure {
    std::shared_ptr<const DesignSpace> space;
    Eigen::VectorXd weights;
};

/// Information matrix M(xi) = sum_j w_j f(t_j) f(t_j)^T.
[[nodiscard]] CovMatrix info_matrix(const DesignMeasure& xi);

/// Criterion psi~_k(M) = Psi_k^{-1/k}(M^{-1})
///                     = [(k+1)/k!]^{-1/k} det^{1/k}(M) / E_{d-k}^{1/k}(M),
/// interpolating A-optimality (k=1) to D-optimality (k=d). Returns 0 for a
/// singular M.
[[nodiscard]] double design_criterion_matrix(const CovMatrix& M, int k);
[[nodiscard]] double design_criterion(const DesignMeasure& xi, int k);

/// Equivalent log form log det M - log Psi_{d-k}(M); -inf for singular M.
[[nodiscard]] double design_criterion_log_matrix(const CovMatrix& M, int k);
[[nodiscard]] double design_criterion_log(const DesignMeasure& xi, int k);

/// Variance (sensitivity) function
///   f^T(t) M^{-1} gradPsi_k[M^{-1}]/Psi_k(M^{-1}) M^{-1} f(t):
/// bounded by k exactly at psi~_k-optimal designs, with equality on the
/// support; its xi-weighted average is always k.
[[nodiscard]] double variance_function(const DesignMeasure& xi, Eigen::Index index, int k);
[[nodiscard]] Eigen::VectorXd variance_function_all(const DesignMeasure& xi, int k);

/// Complement form f^T M^{-1} f - f^T gradPsi_{d-k}[M]/Psi_{d-k}(M) f, checked
/// against the same bound k; yields the same optimality verdict as the primary
/// form.
[[nodiscard]] double variance_function_complement(const DesignMeasure& xi, Eigen::Index index,
                                                  int k);
[[nodiscard]] Eigen::VectorXd variance_function_complement_all(const DesignMeasure& xi, int k);

struct PolishedPoint {
    double location;
    double weight;
};

struct DesignReport {
    int k = 0;
    double criterion = 0.0;
    double gap = 0.0;                      // max variance function - k
    std::vector<Eigen::Index> support;     // grid indices with weight > threshold
    std::vector<PolishedPoint> polished;   // refined support (empty when not polished)
    bool feasible = true;                  // false when M(xi) is singular
};

enum class Symmetrize { automatic, on, off };

struct DesignOptions {
    double tol = 1e-9;          // on the equivalence gap
    long max_iter = 1000000;
    bool polish = true;
    Symmetrize symmetrize = Symmetrize::automatic;
    double support_threshold = 1e-8;
};

struct DesignResult {
    DesignMeasure measure;      // on a reduced polished space when polishing ran
    DesignReport report;
    bool converged = false;
    long iterations = 0;
};

/// Maximises psi~_k over the space by multiplicative reweighting interleaved
/// with vertex-exchange steps; when `polish` is set and the space supports
/// off-grid evaluation, support points are refined by golden-section
/// maximization of the variance function and the weights re-optimized.
/// Deterministic for fixed inputs and options.
[[nodiscard]] DesignResult solve_design(std::shared_ptr<const DesignSpace> space, int k,
                                        const DesignOptions& opts = {});
[[nodiscard]] DesignResult solve_design(DesignSpace space, int k, const DesignOptions& opts = {});

/// Eff_k(xi) = psi~_k(xi) / psi~_k(xi_star); 0 when M(xi) is singular.
[[nodiscard]] double efficiency(const DesignMeasure& xi, const DesignMeasure& xi_star, int k);

} // namespace gvar

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "gvar/covmatrix.hpp"
#include "gvar/measure.hpp"

namespace gvar {

/// Dual (ellipsoid) optimality certificate: the ellipsoid
/// {x : (x - center)^T M (x - center) <= 1} with M = grad Psi_k / (k Psi_k).
/// At an optimum it contains every candidate and satisfies tr(V M) = 1.
struct DualCertificate {
    Eigen::MatrixXd ellipsoid_matrix;
    Eigen::VectorXd center;
    double trace_residual;    // |tr(V M) - 1|
    double containment_slack; // max over candidates of (x-c)^T M (x-c) - 1
};

/// First-order optimality certificate for a candidate maximizer of psi_k.
struct CertificateReport {
    int k = 0;
    double gap = 0.0;                       // max directional score over candidates, minus k
    Eigen::Index worst_point = -1;          // candidate attaining the max (lowest index on ties)
    double support_equality_residual = 0.0; // max over support of |score - k|
    std::optional<DualCertificate> dual;
};

/// Directional score (x - E_mu)^T grad Psi_k[V_mu] (x - E_mu) / Psi_k(V_mu).
/// The measure is optimal over a candidate set iff the score is <= k
/// everywhere on it; the mu-weighted average of the score is always k.
/// Throws DegenerateMeasureError when psi_k(mu) = 0.
[[nodiscard]] double directional_score(const DiscreteMeasure& mu, const Eigen::VectorXd& x, int k);

/// Scores every candidate (rows) and summarizes the certificate.
[[nodiscard]] CertificateReport optimality_gap(const DiscreteMeasure& mu,
                                               const Eigen::MatrixXd& candidates, int k);

/// Potential of mu at x: psi_k with one argument frozen at x. Equals
/// psi_k(mu) * (1 + (score(x) - k)/(k+1)), minimized at x = E_mu, and bounded
/// by psi_k(mu) over the candidate set exactly when mu is optimal.
[[nodiscard]] double potential(const DiscreteMeasure& mu, const Eigen::VectorXd& x, int k);

struct MaxDivOptions {
    double tol = 1e-7;        // on the certificate gap
    long max_iter = 100000;
    double prune_weight = 1e-10;
};

struct MaxDivResult {
    DiscreteMeasure measure;
    CertificateReport certificate;
    bool converged = false;
    long iterations = 0;
    std::vector<double> objective_trace; // psi_k^{1/k} after every iteration
};

/// Maximises psi_k over probability measures on the candidate rows by
/// vertex-direction Frank-Wolfe with golden-section line search on the concave
/// psi_k^{1/k} slice, plus a multiplicative reweighting sweep every 20
/// iterations. Deterministic for fixed inputs and options.
[[nodiscard]] MaxDivResult solve_max_div(const Eigen::MatrixXd& candidates, int k,
                                         const MaxDivOptions& opts = {});

/// Ellipsoid certificate at mu (Theorem-4 style dual report).
[[nodiscard]] DualCertificate dual_certificate(const DiscreteMeasure& mu,
                                               const Eigen::MatrixXd& candidates, int k);

/// Optimality check through the complement identity: evaluates
///   (x-E)^T [V^{-1} - V^{-1} gradPsi_{d-k}[V^{-1}]/Psi_{d-k}(V^{-1}) V^{-1}] (x-E)
/// against the bound k. Needs nonsingular V_mu; same verdict as
/// optimality_gap but avoids forming grad Psi_k when d-k is small.
[[nodiscard]] CertificateReport complement_condition(const DiscreteMeasure& mu,
                                                     const Eigen::MatrixXd& candidates, int k);

/// Polar (dual information) function phi_k^inf(M). Closed forms for k = 1,
/// k = 2 (when I >= (d-1)M/tr(M)) and k = d; any other k is evaluated at the
/// stationary covariance that generated M, which must be supplied.
[[nodiscard]] double polar_value(const Eigen::MatrixXd& M, int k,
                                 const std::optional<CovMatrix>& stationary_cov = std::nullopt);

} // namespace gvar

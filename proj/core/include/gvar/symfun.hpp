#pragma once

#include <Eigen/Dense>

#include "gvar/covmatrix.hpp"

namespace gvar {

/// Value of Psi_k(V) = (k+1)/k! * E_k(spectrum of V), the expected squared
/// volume of a k-simplex built from k+1 independent draws of a distribution
/// with covariance V. `log_value` accompanies `value` because Psi_k underflows
/// for small-scale V at large k; it is -infinity exactly when the value is
/// mathematically zero (rank(V) < k).
struct PsiValue {
    int k = 0;
    double value = 0.0;
    double log_value = 0.0;
};

/// Elementary symmetric function E_k of the given values, computed by the
/// O(d*k) coefficient-convolution recurrence (not subset enumeration).
/// E_0 = 1. Throws DomainError unless 0 <= k <= size.
[[nodiscard]] double elementary_symmetric(const Eigen::VectorXd& values, int k);

/// All of E_0..E_d in one pass of the same recurrence.
[[nodiscard]] Eigen::VectorXd elementary_symmetric_all(const Eigen::VectorXd& values);

/// E_k from the power sums p_i = tr(V^i), i = 1..k, via the Newton identities.
/// The alternating sums lose precision on ill-conditioned input; this route is
/// meant as a cross-check of the spectral one.
[[nodiscard]] double elementary_symmetric_newton(const Eigen::VectorXd& power_sums, int k);

/// Psi_k(V) for k in 1..d.
[[nodiscard]] PsiValue psi(const CovMatrix& V, int k);

/// Psi_k(V) as (k+1)/(k!)^2 times the k x k determinant in the traces
/// tr(V), ..., tr(V^k) (the characteristic-polynomial coefficient formula).
/// Cross-check route for the spectral value.
[[nodiscard]] double psi_determinant_form(const CovMatrix& V, int k);

/// Gradient matrix of Psi_k at V:
///   (k+1)/k! * sum_{i=0}^{k-1} (-1)^i E_{k-1-i}(V) V^i,
/// accumulated Horner-style so high powers of V are never formed explicitly.
/// Satisfies tr(V * grad_psi(V, k)) = k * Psi_k(V).
[[nodiscard]] Eigen::MatrixXd grad_psi(const CovMatrix& V, int k);

/// grad Psi_k[V] / Psi_k(V), evaluated on the normalized spectrum so the ratio
/// stays finite when Psi_k itself would under- or overflow. Throws DomainError
/// when Psi_k(V) = 0 (rank(V) < k). The ratio is scale-covariant:
/// ratio(s*V) = ratio(V)/s.
[[nodiscard]] Eigen::MatrixXd psi_gradient_ratio(const CovMatrix& V, int k);

/// Psi_k(V) through the complement identity E_k(V) = det(V) * E_{d-k}(V^{-1}),
/// for k in 1..d-1. Requires nonsingular V (SingularityError otherwise).
[[nodiscard]] double psi_via_complement(const CovMatrix& V, int k);

/// Kiefer's Phi_p of the spectrum of V:
///   lambda_max for p = +inf, (tr(V^p)/d)^{1/p} for p != 0, +-inf,
///   det(V)^{1/d} for p = 0, lambda_min for p = -inf,
/// with the continuous extension Phi_p(V) = 0 for p < 0 when V is singular.
[[nodiscard]] double phi_p(const CovMatrix& V, double p);

} // namespace gvar

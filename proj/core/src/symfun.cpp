#include "gvar/symfun.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace gvar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log((k+1)/k!)
double log_psi_coefficient(int k) {
    return std::log(static_cast<double>(k) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0);
}

void check_k_range(int k, int lo, Eigen::Index hi, const char* what) {
    if (k < lo || k > hi)
        throw DomainError(std::string(what) + ": k = " + std::to_string(k) +
                          " outside " + std::to_string(lo) + ".." + std::to_string(hi));
}

} // namespace

double elementary_symmetric(const Eigen::VectorXd& values, int k) {
    check_k_range(k, 0, values.size(), "elementary_symmetric");
    if (!values.allFinite()) throw DomainError("elementary_symmetric: non-finite input");
    if (k == 0) return 1.0;
    Eigen::VectorXd e = Eigen::VectorXd::Zero(k + 1);
    e(0) = 1.0;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        const int top = std::min<Eigen::Index>(k, i + 1);
        for (int j = top; j >= 1; --j) e(j) += values(i) * e(j - 1);
    }
    return e(k);
}

Eigen::VectorXd elementary_symmetric_all(const Eigen::VectorXd& values) {
    if (!values.allFinite()) throw DomainError("elementary_symmetric_all: non-finite input");
    const Eigen::Index d = values.size();
    Eigen::VectorXd e = Eigen::VectorXd::Zero(d + 1);
    e(0) = 1.0;
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = i + 1; j >= 1; --j) e(j) += values(i) * e(j - 1);
    return e;
}

double elementary_symmetric_newton(const Eigen::VectorXd& power_sums, int k) {
    check_k_range(k, 0, power_sums.size(), "elementary_symmetric_newton");
    Eigen::VectorXd e = Eigen::VectorXd::Zero(k + 1);
    e(0) = 1.0;
    for (int j = 1; j <= k; ++j) {
        // Neumaier-compensated alternating sum; the cancellation here is the
        // reason this route is a cross-check and not the primary one.
        double acc = 0.0, comp = 0.0;
        for (int i = 1; i <= j; ++i) {
            double term = e(j - i) * power_sums(i - 1);
            if (i % 2 == 0) term = -term;
            const double t = acc + term;
            comp += (std::abs(acc) >= std::abs(term)) ? (acc - t) + term : (term - t) + acc;
            acc = t;
        }
        e(j) = (acc + comp) / j;
    }
    return e(k);
}

PsiValue psi(const CovMatrix& V, int k) {
    check_k_range(k, 1, V.dim(), "psi");
    const Eigen::VectorXd& eigs = V.spectrum();
    const double lmax = eigs(0);
    PsiValue out{k, 0.0, -kInf};
    if (lmax <= 0.0) return out;
    // E_k is homogeneous of degree k: evaluate on spectrum/lambda_max and
    // restore the scale in log space. Eigenvalues at or below the rank
    // threshold count as zero, so rank(V) < k gives an exact zero.
    Eigen::VectorXd normalized = eigs / lmax;
    for (Eigen::Index i = 0; i < normalized.size(); ++i)
        if (normalized(i) <= 1e-12) normalized(i) = 0.0;
    const double ek = elementary_symmetric(normalized, k);
    if (ek <= 0.0) return out;
    out.log_value = std::log(ek) + k * std::log(lmax) + log_psi_coefficient(k);
    out.value = std::exp(out.log_value);
    return out;
}

double psi_determinant_form(const CovMatrix& V, int k) {
    check_k_range(k, 1, V.dim(), "psi_determinant_form");
    Eigen::VectorXd power_sums(k);
    Eigen::MatrixXd power = V.entries();
    power_sums(0) = power.trace();
    for (int i = 2; i <= k; ++i) {
        power = (power * V.entries()).eval();
        power_sums(i - 1) = power.trace();
    }
    Eigen::MatrixXd traces = Eigen::MatrixXd::Zero(k, k);
    for (int r = 0; r < k; ++r) {
        for (int c = 0; c <= r; ++c) traces(r, c) = power_sums(r - c);
        if (r + 1 < k) traces(r, r + 1) = static_cast<double>(k - 1 - r);
    }
    const double det = traces.determinant();
    const double coef = std::exp(std::log(static_cast<double>(k) + 1.0) -
                                 2.0 * std::lgamma(static_cast<double>(k) + 1.0));
    return coef * det;
}

namespace {

// sum_{i=0}^{k-1} (-1)^i E_{k-1-i} V^i by Horner on the matrix polynomial.
Eigen::MatrixXd grad_ek_polynomial(const Eigen::MatrixXd& V, const Eigen::VectorXd& esf, int k) {
    const Eigen::Index d = V.rows();
    const auto coeff = [&](int i) {  // coefficient of V^i
        const double e = esf(k - 1 - i);
        return (i % 2 == 0) ? e : -e;
    };
    Eigen::MatrixXd G = coeff(k - 1) * Eigen::MatrixXd::Identity(d, d);
    for (int i = k - 2; i >= 0; --i)
        G = (G * V + coeff(i) * Eigen::MatrixXd::Identity(d, d)).eval();
    return (G + G.transpose()) / 2.0;
}

} // namespace

Eigen::MatrixXd grad_psi(const CovMatrix& V, int k) {
    check_k_range(k, 1, V.dim(), "grad_psi");
    const Eigen::VectorXd esf = elementary_symmetric_all(V.spectrum());
    const double coef = std::exp(log_psi_coefficient(k));
    return coef * grad_ek_polynomial(V.entries(), esf, k);
}

Eigen::MatrixXd psi_gradient_ratio(const CovMatrix& V, int k) {
    check_k_range(k, 1, V.dim(), "psi_gradient_ratio");
    const Eigen::VectorXd& eigs = V.spectrum();
    const double lmax = eigs(0);
    if (lmax <= 0.0 || V.rank() < k)
        throw DomainError("psi_gradient_ratio: Psi_k(V) = 0, ratio undefined");
    // (k+1)/k! cancels in the ratio; work on V/lambda_max for scale safety.
    const Eigen::VectorXd esf = elementary_symmetric_all(eigs / lmax);
    Eigen::MatrixXd grad = grad_ek_polynomial(V.entries() / lmax, esf, k);
    return grad / (lmax * esf(k));
}

double psi_via_complement(const CovMatrix& V, int k) {
    const int d = V.dim();
    check_k_range(k, 1, d - 1, "psi_via_complement");
    if (!V.nonsingular())
        throw SingularityError("psi_via_complement requires nonsingular V");
    const Eigen::VectorXd& eigs = V.spectrum();
    const double lmin = eigs(d - 1);
    // E_{d-k}(V^{-1}) = lmin^{-(d-k)} E_{d-k}(lmin ./ eigs); all logs to avoid
    // under/overflow of det(V).
    const double log_det = eigs.array().log().sum();
    const Eigen::VectorXd inv_norm = lmin * eigs.array().inverse();
    const double e_comp = elementary_symmetric(inv_norm, d - k);
    return std::exp(log_psi_coefficient(k) + log_det -
                    (d - k) * std::log(lmin) + std::log(e_comp));
}

double phi_p(const CovMatrix& V, double p) {
    const Eigen::VectorXd& eigs = V.spectrum();
    const double d = static_cast<double>(V.dim());
    if (p == kInf) return eigs(0);
    if (p == -kInf) return eigs(V.dim() - 1);
    const bool singular = !V.nonsingular();
    if (p == 0.0) {
        if (eigs(V.dim() - 1) <= 0.0) return 0.0;
        return std::exp(eigs.array().log().sum() / d);
    }
    if (p < 0.0 && singular) return 0.0;  // continuous extension
    const double mean_power = eigs.array().pow(p).sum() / d;
    return std::pow(mean_power, 1.0 / p);
}

} // namespace gvar

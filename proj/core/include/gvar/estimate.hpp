#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "gvar/covmatrix.hpp"
#include "gvar/measure.hpp"
#include "gvar/symfun.hpp"

namespace gvar {

/// n x d data matrix of i.i.d. observations, one row per draw.
class Sample {
public:
    explicit Sample(Eigen::MatrixXd data);

    [[nodiscard]] long n() const noexcept { return static_cast<long>(data_.rows()); }
    [[nodiscard]] int dim() const noexcept { return static_cast<int>(data_.cols()); }
    [[nodiscard]] const Eigen::MatrixXd& data() const noexcept { return data_; }

private:
    Eigen::MatrixXd data_;
};

/// Result of the unbiased estimation of psi_k from a sample:
/// psi_hat = scale_factor * Psi_k(empirical_cov).
struct EstimateReport {
    int k;
    long n;
    double psi_hat;
    double scale_factor;
    CovMatrix empirical_cov;
};

/// Squared volume of the k-simplex with the given k+1 vertices (rows),
/// (1/k!)^2 det(G^T G) with G the matrix of edge vectors from the first
/// vertex. Symmetric in the vertices, nonnegative. Throws DomainError when
/// k > d.
[[nodiscard]] double simplex_squared_volume(const Eigen::MatrixXd& vertices);

/// Empirical mean and unbiased (1/(n-1)) covariance. Requires n >= 2.
[[nodiscard]] std::pair<Eigen::VectorXd, CovMatrix> empirical_moments(const Sample& s);

/// Unbiasing factor (n-1)^k (n-k-1)! / (n-1)!; log-space above n = 30.
/// Requires n >= k+1 (at n = k+1 the factorial argument is 0!).
[[nodiscard]] double scale_factor(long n, int k);

/// Minimum-variance unbiased estimate of psi_k from the sample.
[[nodiscard]] EstimateReport estimate_psi(const Sample& s, int k);

/// Unbiased estimate of psi_{d-k} through the complement identity,
///   [(n-d+k-1)!(n-1)^{d-k}/(n-1)!] * [(d-k+1)k!/((k+1)(d-k)!)]
///      * det(V_hat) * Psi_k(V_hat^{-1}).
/// Requires nonsingular V_hat (SingularityError); agrees with
/// estimate_psi(s, d-k).
[[nodiscard]] double estimate_psi_complement(const Sample& s, int k);

/// Brute-force U-statistic: the average of simplex_squared_volume over all
/// (k+1)-subsets of the sample. Test-scale oracle; throws TooLargeError when
/// binomial(n, k+1) exceeds 5e6.
[[nodiscard]] double u_stat_oracle(const Sample& s, int k);

/// Number of coincident indices |I ∩ J| between two sorted index sets.
[[nodiscard]] int beta_coincidence(const std::vector<int>& I, const std::vector<int>& J);

/// beta_{d,k} = sum over all pairs of k-subsets of |I ∩ J|, by the closed form
/// (d-k+1)^2/d * C(d,k-1)^2 evaluated in exact integer arithmetic.
[[nodiscard]] std::int64_t beta_dk(int d, int k);

/// Monte-Carlo estimate with its standard error.
struct OmegaEstimate {
    double value;
    double standard_error;
};

/// Specification of the distribution entering the asymptotic-variance
/// constant omega = var[h(x)], h(x) = E[squared k-simplex volume | one vertex
/// fixed at x].
class OmegaSpec {
public:
    enum class Kind { normal, iid_coordinates, diagonal_normal, discrete, monte_carlo };

    static OmegaSpec normal(CovMatrix V);
    /// Coordinates i.i.d. with variance sigma2 and standardized fourth moment ez4.
    static OmegaSpec iid_coordinates(double sigma2, double ez4, int d);
    static OmegaSpec diagonal_normal(Eigen::VectorXd lambdas);
    static OmegaSpec discrete(DiscreteMeasure mu);
    /// sampler(i) must deterministically return the i-th draw; mean/cov are the
    /// exact first two moments of the sampled distribution (the conditional
    /// expectation h(x) is evaluated in closed form from them, draws only feed
    /// the outer variance).
    static OmegaSpec monte_carlo(std::function<Eigen::VectorXd(std::int64_t)> sampler,
                                 std::int64_t n_draws, Eigen::VectorXd mean, CovMatrix cov);

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] int dim() const;

    friend OmegaEstimate omega_with_error(const OmegaSpec& spec, int k);

private:
    OmegaSpec() = default;

    Kind kind_{};
    std::optional<CovMatrix> cov_;
    Eigen::VectorXd mean_;
    Eigen::VectorXd lambdas_;
    double sigma2_ = 0.0;
    double ez4_ = 0.0;
    int d_ = 0;
    std::optional<DiscreteMeasure> measure_;
    std::function<Eigen::VectorXd(std::int64_t)> sampler_;
    std::int64_t n_draws_ = 0;
};

/// omega for the given distribution and k. Closed forms for the normal,
/// diagonal-normal and i.i.d.-coordinate kinds; exact finite sum for the
/// discrete kind; sample average of the closed-form integrand for the
/// monte-carlo kind.
[[nodiscard]] double omega(const OmegaSpec& spec, int k);

/// Same as omega(), with a standard error attached (zero for exact kinds).
[[nodiscard]] OmegaEstimate omega_with_error(const OmegaSpec& spec, int k);

/// First-order variance of the estimator: (k+1)^2 * omega / n.
[[nodiscard]] double asymptotic_variance(const OmegaSpec& spec, int k, long n);

} // namespace gvar

#include "gvar/maxdiv.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gvar/symfun.hpp"
#include "golden_section.hpp"

namespace gvar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Moments {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

// Second-moment accumulation over the positive weights only.
Moments moments_of(const Eigen::MatrixXd& candidates, const Eigen::VectorXd& weights) {
    const Eigen::Index d = candidates.cols();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (Eigen::Index i = 0; i < weights.size(); ++i)
        if (weights(i) > 0.0) mean += weights(i) * candidates.row(i).transpose();
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        if (weights(i) <= 0.0) continue;
        const Eigen::VectorXd c = candidates.row(i).transpose() - mean;
        cov.noalias() += weights(i) * c * c.transpose();
    }
    return {std::move(mean), (cov + cov.transpose()) / 2.0};
}

// log psi_k^{1/k} of a symmetric PSD-up-to-rounding matrix; -inf when rank < k.
double log_psi_over_k(const Eigen::MatrixXd& V, int k) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(V, Eigen::EigenvaluesOnly);
    Eigen::VectorXd eigs = solver.eigenvalues().reverse().cwiseMax(0.0);
    const double lmax = eigs(0);
    if (lmax <= 0.0) return -kInf;
    const double ek = elementary_symmetric(eigs / lmax, k);
    if (ek <= 0.0) return -kInf;
    return (std::log(ek) + k * std::log(lmax) + std::log(static_cast<double>(k + 1)) -
            std::lgamma(static_cast<double>(k + 1))) /
           k;
}

void check_not_degenerate(const CovMatrix& V, int k) {
    if (V.rank() < k)
        throw DegenerateMeasureError("psi_" + std::to_string(k) +
                                     " is zero for this measure (rank(V) < k)");
}

Eigen::VectorXd score_all(const Eigen::MatrixXd& candidates, const Eigen::VectorXd& mean,
                          const Eigen::MatrixXd& ratio) {
    const Eigen::MatrixXd centered = candidates.rowwise() - mean.transpose();
    return ((centered * ratio).cwiseProduct(centered)).rowwise().sum();
}

Eigen::Index argmax_lowest(const Eigen::VectorXd& v) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (v(i) > v(best)) best = i;
    return best;
}

// Greedy affinely independent subset: start from the candidate farthest from
// the centroid, then repeatedly add the candidate farthest from the affine
// hull of the chosen ones (maximizing the successive simplex volume).
std::vector<Eigen::Index> greedy_affine_subset(const Eigen::MatrixXd& candidates) {
    const Eigen::Index m = candidates.rows();
    const Eigen::Index d = candidates.cols();
    const Eigen::VectorXd centroid = candidates.colwise().mean();
    Eigen::VectorXd dist(m);
    for (Eigen::Index i = 0; i < m; ++i)
        dist(i) = (candidates.row(i).transpose() - centroid).norm();
    const double scale = std::max(dist.maxCoeff(), 1e-300);

    std::vector<Eigen::Index> chosen{argmax_lowest(dist)};
    Eigen::MatrixXd basis(d, 0);
    const Eigen::VectorXd origin = candidates.row(chosen[0]).transpose();
    while (static_cast<Eigen::Index>(chosen.size()) < d + 1) {
        double best_res = 0.0;
        Eigen::Index best_i = -1;
        for (Eigen::Index i = 0; i < m; ++i) {
            Eigen::VectorXd r = candidates.row(i).transpose() - origin;
            if (basis.cols() > 0) r -= basis * (basis.transpose() * r);
            const double res = r.norm();
            if (res > best_res) {
                best_res = res;
                best_i = i;
            }
        }
        if (best_i < 0 || best_res <= 1e-9 * scale) break;
        Eigen::VectorXd r = candidates.row(best_i).transpose() - origin;
        if (basis.cols() > 0) r -= basis * (basis.transpose() * r);
        basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
        basis.col(basis.cols() - 1) = r / r.norm();
        chosen.push_back(best_i);
    }
    return chosen;
}

DiscreteMeasure measure_from_weights(const Eigen::MatrixXd& candidates,
                                     const Eigen::VectorXd& weights) {
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < weights.size(); ++i)
        if (weights(i) > 0.0) support.push_back(i);
    Eigen::MatrixXd points(support.size(), candidates.cols());
    Eigen::VectorXd w(support.size());
    for (std::size_t s = 0; s < support.size(); ++s) {
        points.row(static_cast<Eigen::Index>(s)) = candidates.row(support[s]);
        w(static_cast<Eigen::Index>(s)) = weights(support[s]);
    }
    return DiscreteMeasure(std::move(points), std::move(w));
}

} // namespace

double directional_score(const DiscreteMeasure& mu, const Eigen::VectorXd& x, int k) {
    const auto [mean, cov] = measure_moments(mu);
    check_not_degenerate(cov, k);
    const Eigen::MatrixXd ratio = psi_gradient_ratio(cov, k);
    const Eigen::VectorXd centered = x - mean;
    return centered.dot(ratio * centered);
}

CertificateReport optimality_gap(const DiscreteMeasure& mu, const Eigen::MatrixXd& candidates,
                                 int k) {
    if (candidates.cols() != mu.dim())
        throw DomainError("candidate dimension does not match the measure");
    const auto [mean, cov] = measure_moments(mu);
    check_not_degenerate(cov, k);
    const Eigen::MatrixXd ratio = psi_gradient_ratio(cov, k);

    CertificateReport report;
    report.k = k;
    const Eigen::VectorXd scores = score_all(candidates, mean, ratio);
    report.worst_point = argmax_lowest(scores);
    report.gap = scores(report.worst_point) - static_cast<double>(k);
    const Eigen::VectorXd support_scores = score_all(mu.support(), mean, ratio);
    report.support_equality_residual =
        (support_scores.array() - static_cast<double>(k)).abs().maxCoeff();
    return report;
}

double potential(const DiscreteMeasure& mu, const Eigen::VectorXd& x, int k) {
    const double score = directional_score(mu, x, k);
    const auto [mean, cov] = measure_moments(mu);
    (void)mean;
    const double value = psi(cov, k).value;
    return value * (1.0 + (score - static_cast<double>(k)) / static_cast<double>(k + 1));
}

MaxDivResult solve_max_div(const Eigen::MatrixXd& candidates, int k, const MaxDivOptions& opts) {
    const Eigen::Index m = candidates.rows();
    const Eigen::Index d = candidates.cols();
    if (m < 1 || d < 1) throw DegenerateInputError("empty candidate set");
    if (!candidates.allFinite()) throw DomainError("candidates have non-finite entries");
    if (k < 1 || k > d)
        throw DomainError("solve_max_div: k = " + std::to_string(k) + " outside 1.." +
                          std::to_string(d));

    const auto seed_points = greedy_affine_subset(candidates);
    if (static_cast<int>(seed_points.size()) < k + 1)
        throw DegenerateInputError("needs at least k+1 = " + std::to_string(k + 1) +
                                   " affinely independent candidates, found " +
                                   std::to_string(seed_points.size()));

    Eigen::VectorXd weights = Eigen::VectorXd::Zero(m);
    for (const auto i : seed_points) weights(i) = 1.0 / static_cast<double>(seed_points.size());

    MaxDivResult result{measure_from_weights(candidates, weights), {}, false, 0, {}};
    Moments mom = moments_of(candidates, weights);
    double objective = log_psi_over_k(mom.cov, k);

    for (long iter = 1; iter <= opts.max_iter; ++iter) {
        result.iterations = iter;
        const CovMatrix cov(mom.cov);
        check_not_degenerate(cov, k);
        const Eigen::MatrixXd ratio = psi_gradient_ratio(cov, k);
        const Eigen::VectorXd scores = score_all(candidates, mom.mean, ratio);
        const Eigen::Index best = argmax_lowest(scores);
        const double gap = scores(best) - static_cast<double>(k);
        if (gap <= opts.tol) {
            result.converged = true;
            result.objective_trace.push_back(objective);
            break;
        }

        if (iter % 20 == 0) {
            // Multiplicative reweighting sweep; reverted if it does not ascend.
            Eigen::VectorXd updated = weights.cwiseProduct(scores) / static_cast<double>(k);
            updated /= updated.sum();
            const Moments trial = moments_of(candidates, updated);
            const double trial_objective = log_psi_over_k(trial.cov, k);
            if (trial_objective >= objective - 1e-14 * std::max(1.0, std::abs(objective))) {
                weights = std::move(updated);
                mom = trial;
                objective = trial_objective;
            }
        } else {
            // Frank-Wolfe step toward the worst candidate with golden-section
            // line search on the concave 1-D slice:
            // V(alpha) = (1-alpha) V + alpha (1-alpha) u u^T.
            const Eigen::VectorXd u = candidates.row(best).transpose() - mom.mean;
            const Eigen::MatrixXd uu = u * u.transpose();
            const auto slice = [&](double alpha) {
                return log_psi_over_k((1.0 - alpha) * mom.cov + alpha * (1.0 - alpha) * uu, k);
            };
            const double alpha = detail::golden_section_max(slice, 0.0, 1.0, 1e-12);
            if (alpha > 0.0) {
                weights *= (1.0 - alpha);
                weights(best) += alpha;
            }
            mom = moments_of(candidates, weights);
            objective = log_psi_over_k(mom.cov, k);
        }

        // Prune negligible weights.
        bool pruned = false;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (weights(i) > 0.0 && weights(i) < opts.prune_weight) {
                weights(i) = 0.0;
                pruned = true;
            }
        }
        if (pruned) {
            weights /= weights.sum();
            mom = moments_of(candidates, weights);
            objective = log_psi_over_k(mom.cov, k);
        }
        result.objective_trace.push_back(objective);
    }

    result.measure = measure_from_weights(candidates, weights);
    result.certificate = optimality_gap(result.measure, candidates, k);
    result.certificate.dual = dual_certificate(result.measure, candidates, k);
    return result;
}

DualCertificate dual_certificate(const DiscreteMeasure& mu, const Eigen::MatrixXd& candidates,
                                 int k) {
    const auto [mean, cov] = measure_moments(mu);
    check_not_degenerate(cov, k);
    DualCertificate cert;
    cert.ellipsoid_matrix = psi_gradient_ratio(cov, k) / static_cast<double>(k);
    cert.center = mean;
    cert.trace_residual = std::abs((cov.entries() * cert.ellipsoid_matrix).trace() - 1.0);
    const Eigen::VectorXd containment = score_all(candidates, mean, cert.ellipsoid_matrix);
    cert.containment_slack = containment.maxCoeff() - 1.0;
    return cert;
}

CertificateReport complement_condition(const DiscreteMeasure& mu, const Eigen::MatrixXd& candidates,
                                       int k) {
    const int d = mu.dim();
    if (k < 1 || k > d)
        throw DomainError("complement_condition: k outside 1.." + std::to_string(d));
    const auto [mean, cov] = measure_moments(mu);
    const Eigen::MatrixXd inv = cov.inverse(); // throws SingularityError when singular
    Eigen::MatrixXd test_matrix = inv;
    if (d - k >= 1) {
        const Eigen::MatrixXd ratio = psi_gradient_ratio(CovMatrix(inv), d - k);
        test_matrix -= inv * ratio * inv;
        test_matrix = ((test_matrix + test_matrix.transpose()) / 2.0).eval();
    }

    CertificateReport report;
    report.k = k;
    const Eigen::VectorXd scores = score_all(candidates, mean, test_matrix);
    report.worst_point = argmax_lowest(scores);
    report.gap = scores(report.worst_point) - static_cast<double>(k);
    const Eigen::VectorXd support_scores = score_all(mu.support(), mean, test_matrix);
    report.support_equality_residual =
        (support_scores.array() - static_cast<double>(k)).abs().maxCoeff();
    return report;
}

double polar_value(const Eigen::MatrixXd& M, int k, const std::optional<CovMatrix>& stationary_cov) {
    const CovMatrix Mcov(M);
    const int d = Mcov.dim();
    if (k < 1 || k > d) throw DomainError("polar_value: k outside 1.." + std::to_string(d));
    if (k == 1) return Mcov.lambda_min() / 2.0;
    if (k == 2 && d >= 2) {
        const double trace = Mcov.trace();
        const double trace_sq = (M * M).trace();
        const double denom = trace * trace / (d - 1) - trace_sq;
        const bool feasible = Mcov.lambda_max() * (d - 1) <= trace * (1.0 + 1e-9);
        if (feasible && denom > 0.0) {
            Eigen::MatrixXd vstar =
                (Eigen::MatrixXd::Identity(d, d) * (trace / (d - 1)) - M) / denom;
            return std::exp(-log_psi_over_k(vstar, 2));
        }
    }
    if (k == d) {
        if (!Mcov.nonsingular()) return 0.0;
        const double mean_log = Mcov.spectrum().array().log().sum() / d;
        return std::exp(mean_log + std::log(static_cast<double>(d)) -
                        (std::log(static_cast<double>(d + 1)) -
                         std::lgamma(static_cast<double>(d + 1))) /
                            d);
    }
    if (stationary_cov) return std::exp(-psi(*stationary_cov, k).log_value / k);
    throw DomainError("polar_value: no closed form for k = " + std::to_string(k) +
                      "; supply the stationary covariance");
}

} // namespace gvar

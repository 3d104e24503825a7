#include "gvar/estimate.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "gvar/parallel.hpp"

namespace gvar {

namespace {

double factorial(long n) {
    double f = 1.0;
    for (long i = 2; i <= n; ++i) f *= static_cast<double>(i);
    return f;
}

double binomial_double(long n, long r) {
    if (r < 0 || r > n) return 0.0;
    r = std::min(r, n - r);
    double b = 1.0;
    for (long i = 0; i < r; ++i) b = b * static_cast<double>(n - i) / static_cast<double>(i + 1);
    return b;
}

std::int64_t binomial_exact(int n, int r) {
    if (r < 0 || r > n) return 0;
    r = std::min(r, n - r);
    unsigned __int128 b = 1;
    for (int i = 1; i <= r; ++i) {
        b = b * static_cast<unsigned>(n - r + i);
        b /= static_cast<unsigned>(i);
        if (b > static_cast<unsigned __int128>(std::numeric_limits<std::int64_t>::max()))
            throw TooLargeError("binomial(" + std::to_string(n) + "," + std::to_string(r) +
                                ") exceeds 64-bit range");
    }
    return static_cast<std::int64_t>(b);
}

std::vector<std::vector<int>> k_subsets(int d, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (;;) {
        out.push_back(idx);
        int pos = k - 1;
        while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == d - k + pos) --pos;
        if (pos < 0) break;
        ++idx[static_cast<std::size_t>(pos)];
        for (int q = pos + 1; q < k; ++q)
            idx[static_cast<std::size_t>(q)] = idx[static_cast<std::size_t>(q - 1)] + 1;
    }
    return out;
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& V, const std::vector<int>& rows,
                          const std::vector<int>& cols) {
    Eigen::MatrixXd out(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                V(rows[i], cols[j]);
    return out;
}

struct PrincipalBlock {
    std::vector<int> idx;
    double det;
    Eigen::MatrixXd inverse;
};

// Retains the k x k principal blocks whose determinant is meaningfully
// positive; blocks with (numerically) zero determinant contribute nothing to
// omega because the distribution puts no mass off their range.
std::vector<PrincipalBlock> prepare_blocks(const Eigen::MatrixXd& V, int k) {
    std::vector<PrincipalBlock> blocks;
    for (const auto& idx : k_subsets(static_cast<int>(V.rows()), k)) {
        Eigen::MatrixXd block = submatrix(V, idx, idx);
        double hadamard = 1.0;
        for (Eigen::Index i = 0; i < block.rows(); ++i) hadamard *= block(i, i);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(block);
        const double det = ldlt.vectorD().prod();
        if (!(det > 1e-12 * hadamard)) continue;
        Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(k, k));
        if (!inv.allFinite())
            throw SingularityError("singular principal submatrix with nonzero determinant");
        blocks.push_back({idx, det, (inv + inv.transpose()) / 2.0});
    }
    return blocks;
}

double quadratic_form(const PrincipalBlock& block, const Eigen::VectorXd& centered) {
    const int k = static_cast<int>(block.idx.size());
    Eigen::VectorXd y(k);
    for (int i = 0; i < k; ++i) y(i) = centered(block.idx[static_cast<std::size_t>(i)]);
    return y.dot(block.inverse * y);
}

} // namespace

Sample::Sample(Eigen::MatrixXd data) : data_(std::move(data)) {
    if (data_.rows() < 1 || data_.cols() < 1)
        throw DomainError("sample must have at least one row and one column");
    if (!data_.allFinite()) throw DomainError("sample has non-finite entries");
}

double simplex_squared_volume(const Eigen::MatrixXd& vertices) {
    const int k = static_cast<int>(vertices.rows()) - 1;
    const int d = static_cast<int>(vertices.cols());
    if (k < 1) throw DomainError("simplex needs at least two vertices");
    if (k > d)
        throw DomainError("simplex dimension " + std::to_string(k) + " exceeds space dimension " +
                          std::to_string(d));
    Eigen::MatrixXd edges(d, k);
    for (int i = 0; i < k; ++i)
        edges.col(i) = (vertices.row(i + 1) - vertices.row(0)).transpose();
    const double gram_det = (edges.transpose() * edges).determinant();
    const double kfact = factorial(k);
    return std::max(gram_det, 0.0) / (kfact * kfact);
}

std::pair<Eigen::VectorXd, CovMatrix> empirical_moments(const Sample& s) {
    if (s.n() < 2)
        throw InsufficientSampleError("need n >= 2 observations for the empirical covariance");
    const Eigen::VectorXd mean = s.data().colwise().mean();
    const Eigen::MatrixXd centered = s.data().rowwise() - mean.transpose();
    Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(s.n() - 1);
    cov = (cov + cov.transpose()) / 2.0;
    return {mean, CovMatrix(std::move(cov))};
}

double scale_factor(long n, int k) {
    if (k < 1) throw DomainError("scale_factor: k must be >= 1");
    if (n < k + 1)
        throw InsufficientSampleError("scale_factor needs n >= k+1, got n = " + std::to_string(n) +
                                      ", k = " + std::to_string(k));
    if (n <= 30)
        return std::pow(static_cast<double>(n - 1), k) * factorial(n - k - 1) / factorial(n - 1);
    return std::exp(k * std::log(static_cast<double>(n - 1)) +
                    std::lgamma(static_cast<double>(n - k)) -
                    std::lgamma(static_cast<double>(n)));
}

EstimateReport estimate_psi(const Sample& s, int k) {
    if (k < 1 || k > s.dim())
        throw DomainError("estimate_psi: k = " + std::to_string(k) + " outside 1.." +
                          std::to_string(s.dim()));
    const double scale = scale_factor(s.n(), k);
    auto [mean, cov] = empirical_moments(s);
    (void)mean;
    const double value = scale * psi(cov, k).value;
    return EstimateReport{k, s.n(), value, scale, std::move(cov)};
}

double estimate_psi_complement(const Sample& s, int k) {
    const int d = s.dim();
    if (k < 1 || k > d - 1)
        throw DomainError("estimate_psi_complement: k = " + std::to_string(k) + " outside 1.." +
                          std::to_string(d - 1));
    if (s.n() < d - k + 1)
        throw InsufficientSampleError("estimate_psi_complement needs n >= d-k+1");
    auto [mean, cov] = empirical_moments(s);
    (void)mean;
    if (!cov.nonsingular())
        throw SingularityError("estimate_psi_complement requires a nonsingular empirical covariance");
    const Eigen::VectorXd& eigs = cov.spectrum();
    const double lmin = eigs(d - 1);
    const double log_det = eigs.array().log().sum();
    // Psi_k(V^{-1}) = (k+1)/k! * lmin^{-k} * E_k(lmin ./ eigs)
    const double e_inv = elementary_symmetric((lmin * eigs.array().inverse()).matrix(), k);
    const double log_psi_inv = std::log(static_cast<double>(k + 1)) -
                               std::lgamma(static_cast<double>(k + 1)) -
                               k * std::log(lmin) + std::log(e_inv);
    const double log_unbias =
        std::log(static_cast<double>(d - k + 1)) + std::lgamma(static_cast<double>(k + 1)) -
        std::log(static_cast<double>(k + 1)) - std::lgamma(static_cast<double>(d - k + 1));
    return scale_factor(s.n(), d - k) * std::exp(log_unbias + log_det + log_psi_inv);
}

double u_stat_oracle(const Sample& s, int k) {
    const long n = s.n();
    const int d = s.dim();
    if (k < 1 || k > d)
        throw DomainError("u_stat_oracle: k = " + std::to_string(k) + " outside 1.." +
                          std::to_string(d));
    if (n < k + 1)
        throw InsufficientSampleError("u_stat_oracle needs n >= k+1 points");
    const double count = binomial_double(n, k + 1);
    if (count > 5e6)
        throw TooLargeError("u_stat_oracle: binomial(n, k+1) = " + std::to_string(count) +
                            " exceeds the 5e6 guard");

    // One block per choice of the smallest subset element; blocks are combined
    // pairwise in index order, so the total is thread-count-invariant.
    const std::size_t n_blocks = static_cast<std::size_t>(n - k);
    std::vector<double> parts(n_blocks, 0.0);
    for_each_chunk(n_blocks, [&](std::size_t block) {
        const int first = static_cast<int>(block);
        std::vector<int> idx(static_cast<std::size_t>(k + 1));
        idx[0] = first;
        for (int i = 1; i <= k; ++i) idx[static_cast<std::size_t>(i)] = first + i;
        Eigen::MatrixXd vertices(k + 1, d);
        double sum = 0.0, comp = 0.0;
        for (;;) {
            for (int i = 0; i <= k; ++i)
                vertices.row(i) = s.data().row(idx[static_cast<std::size_t>(i)]);
            const double v = simplex_squared_volume(vertices);
            const double t = sum + v;
            comp += (std::abs(sum) >= std::abs(v)) ? (sum - t) + v : (v - t) + sum;
            sum = t;
            int pos = k;
            while (pos >= 1 &&
                   idx[static_cast<std::size_t>(pos)] == static_cast<int>(n) - 1 - (k - pos))
                --pos;
            if (pos < 1) break;
            ++idx[static_cast<std::size_t>(pos)];
            for (int q = pos + 1; q <= k; ++q)
                idx[static_cast<std::size_t>(q)] = idx[static_cast<std::size_t>(q - 1)] + 1;
        }
        parts[block] = sum + comp;
    });
    return detail::pairwise_total(parts) / count;
}

int beta_coincidence(const std::vector<int>& I, const std::vector<int>& J) {
    int count = 0;
    std::size_t a = 0, b = 0;
    while (a < I.size() && b < J.size()) {
        if (I[a] == J[b]) {
            ++count;
            ++a;
            ++b;
        } else if (I[a] < J[b]) {
            ++a;
        } else {
            ++b;
        }
    }
    return count;
}

std::int64_t beta_dk(int d, int k) {
    if (k < 1 || k > d)
        throw DomainError("beta_dk: k = " + std::to_string(k) + " outside 1.." + std::to_string(d));
    // (d-k+1)^2/d * C(d,k-1)^2 == d * C(d-1,k-1)^2, which keeps every
    // intermediate integral.
    const std::int64_t c = binomial_exact(d - 1, k - 1);
    const unsigned __int128 total = static_cast<unsigned __int128>(d) *
                                    static_cast<unsigned __int128>(c) *
                                    static_cast<unsigned __int128>(c);
    if (total > static_cast<unsigned __int128>(std::numeric_limits<std::int64_t>::max()))
        throw TooLargeError("beta_dk overflows 64 bits for d = " + std::to_string(d));
    return static_cast<std::int64_t>(total);
}

OmegaSpec OmegaSpec::normal(CovMatrix V) {
    OmegaSpec spec;
    spec.kind_ = Kind::normal;
    spec.d_ = V.dim();
    spec.cov_ = std::move(V);
    return spec;
}

OmegaSpec OmegaSpec::iid_coordinates(double sigma2, double ez4, int d) {
    if (sigma2 <= 0.0) throw DomainError("iid_coordinates: sigma2 must be positive");
    if (ez4 < 1.0) throw DomainError("iid_coordinates: standardized fourth moment must be >= 1");
    if (d < 1) throw DomainError("iid_coordinates: dimension must be >= 1");
    OmegaSpec spec;
    spec.kind_ = Kind::iid_coordinates;
    spec.sigma2_ = sigma2;
    spec.ez4_ = ez4;
    spec.d_ = d;
    return spec;
}

OmegaSpec OmegaSpec::diagonal_normal(Eigen::VectorXd lambdas) {
    if (lambdas.size() == 0 || !(lambdas.array() >= 0.0).all())
        throw DomainError("diagonal_normal: eigenvalues must be nonnegative");
    OmegaSpec spec;
    spec.kind_ = Kind::diagonal_normal;
    spec.d_ = static_cast<int>(lambdas.size());
    spec.lambdas_ = std::move(lambdas);
    return spec;
}

OmegaSpec OmegaSpec::discrete(DiscreteMeasure mu) {
    OmegaSpec spec;
    spec.kind_ = Kind::discrete;
    spec.d_ = mu.dim();
    spec.measure_ = std::move(mu);
    return spec;
}

OmegaSpec OmegaSpec::monte_carlo(std::function<Eigen::VectorXd(std::int64_t)> sampler,
                                 std::int64_t n_draws, Eigen::VectorXd mean, CovMatrix cov) {
    if (!sampler) throw DomainError("monte_carlo: sampler must be callable");
    if (n_draws < 2) throw DomainError("monte_carlo: need at least two draws");
    if (mean.size() != cov.dim()) throw DomainError("monte_carlo: mean/cov dimension mismatch");
    OmegaSpec spec;
    spec.kind_ = Kind::monte_carlo;
    spec.d_ = cov.dim();
    spec.sampler_ = std::move(sampler);
    spec.n_draws_ = n_draws;
    spec.mean_ = std::move(mean);
    spec.cov_ = std::move(cov);
    return spec;
}

int OmegaSpec::dim() const { return d_; }

namespace {

void check_pair_budget(std::size_t n_blocks) {
    if (static_cast<double>(n_blocks) * static_cast<double>(n_blocks) > 2e7)
        throw TooLargeError("omega: " + std::to_string(n_blocks) +
                            "^2 subset pairs exceed the evaluation budget");
}

double omega_normal(const CovMatrix& V, int k) {
    const Eigen::MatrixXd& M = V.entries();
    const auto blocks = prepare_blocks(M, k);
    const std::size_t a_count = blocks.size();
    check_pair_budget(a_count);
    const double total = chunked_sum(a_count * a_count, [&](std::size_t t) {
        const auto& bi = blocks[t / a_count];
        const auto& bj = blocks[t % a_count];
        const Eigen::MatrixXd cross_ij = submatrix(M, bi.idx, bj.idx);
        const Eigen::MatrixXd x = bi.inverse * cross_ij;
        const Eigen::MatrixXd y = bj.inverse * cross_ij.transpose();
        return bi.det * bj.det * (y * x).trace();
    });
    return 2.0 * std::exp(-2.0 * std::lgamma(static_cast<double>(k + 1))) * total;
}

double omega_diagonal_normal(const Eigen::VectorXd& lambdas, int k) {
    // sum_{I,J} beta(I,J) prod_I prod_J = sum_c [lambda_c * E_{k-1}(lambda without c)]^2
    const Eigen::Index d = lambdas.size();
    double total = 0.0;
    Eigen::VectorXd reduced(d - 1);
    for (Eigen::Index c = 0; c < d; ++c) {
        if (lambdas(c) == 0.0) continue;
        Eigen::Index at = 0;
        for (Eigen::Index i = 0; i < d; ++i)
            if (i != c) reduced(at++) = lambdas(i);
        const double term = lambdas(c) * elementary_symmetric(reduced, k - 1);
        total += term * term;
    }
    return 2.0 * std::exp(-2.0 * std::lgamma(static_cast<double>(k + 1))) * total;
}

double omega_iid(double sigma2, double ez4, int d, int k) {
    return std::pow(sigma2, 2 * k) * std::exp(-2.0 * std::lgamma(static_cast<double>(k + 1))) *
           (ez4 - 1.0) * static_cast<double>(beta_dk(d, k));
}

double omega_discrete(const DiscreteMeasure& mu, int k) {
    const auto [mean, cov] = measure_moments(mu);
    const auto blocks = prepare_blocks(cov.entries(), k);
    const std::size_t a_count = blocks.size();
    check_pair_budget(a_count);
    const int m = mu.size();

    // q(a, s) = (x_s - E)_Ia^T {V}_{Ia x Ia}^{-1} (x_s - E)_Ia
    Eigen::MatrixXd q(a_count, m);
    for_each_chunk(a_count, [&](std::size_t a) {
        for (int s = 0; s < m; ++s) {
            const Eigen::VectorXd centered = mu.support().row(s).transpose() - mean;
            q(static_cast<Eigen::Index>(a), s) = quadratic_form(blocks[a], centered);
        }
    });
    const double k2 = static_cast<double>(k) * static_cast<double>(k);
    const double total = chunked_sum(a_count * a_count, [&](std::size_t t) {
        const std::size_t a = t / a_count, b = t % a_count;
        double expectation = 0.0;
        for (int s = 0; s < m; ++s)
            expectation += mu.weights()(s) * q(static_cast<Eigen::Index>(a), s) *
                           q(static_cast<Eigen::Index>(b), s);
        return blocks[a].det * blocks[b].det * (expectation - k2);
    });
    return std::exp(-2.0 * std::lgamma(static_cast<double>(k + 1))) * total;
}

OmegaEstimate omega_monte_carlo(const std::function<Eigen::VectorXd(std::int64_t)>& sampler,
                                std::int64_t n_draws, const Eigen::VectorXd& mean,
                                const CovMatrix& cov, int k) {
    const auto blocks = prepare_blocks(cov.entries(), k);
    const double inv_kfact = std::exp(-std::lgamma(static_cast<double>(k + 1)));
    // g(x) = (1/k!) sum_I det_I (q_I(x) - k); omega = var g
    std::vector<double> g(static_cast<std::size_t>(n_draws));
    const std::size_t chunk = 256;
    const std::size_t n_chunks = (g.size() + chunk - 1) / chunk;
    for_each_chunk(n_chunks, [&](std::size_t c) {
        const std::size_t lo = c * chunk;
        const std::size_t hi = std::min(g.size(), lo + chunk);
        for (std::size_t i = lo; i < hi; ++i) {
            const Eigen::VectorXd x = sampler(static_cast<std::int64_t>(i));
            if (x.size() != mean.size())
                throw DomainError("monte_carlo sampler returned a wrong-sized vector");
            const Eigen::VectorXd centered = x - mean;
            double acc = 0.0;
            for (const auto& block : blocks)
                acc += block.det * (quadratic_form(block, centered) - static_cast<double>(k));
            g[i] = inv_kfact * acc;
        }
    });
    const double m = static_cast<double>(n_draws);
    const double g_mean = chunked_sum(g.size(), [&](std::size_t i) { return g[i]; }) / m;
    const double ss2 =
        chunked_sum(g.size(), [&](std::size_t i) { return (g[i] - g_mean) * (g[i] - g_mean); });
    const double variance = ss2 / (m - 1.0);
    const double m4 = chunked_sum(g.size(), [&](std::size_t i) {
                          const double r = g[i] - g_mean;
                          return r * r * r * r;
                      }) /
                      m;
    const double var_of_var = (m4 - variance * variance * (m - 3.0) / (m - 1.0)) / m;
    return {variance, std::sqrt(std::max(var_of_var, 0.0))};
}

} // namespace

OmegaEstimate omega_with_error(const OmegaSpec& spec, int k) {
    if (k < 1 || k > spec.dim())
        throw DomainError("omega: k = " + std::to_string(k) + " outside 1.." +
                          std::to_string(spec.dim()));
    switch (spec.kind_) {
        case OmegaSpec::Kind::normal:
            return {omega_normal(*spec.cov_, k), 0.0};
        case OmegaSpec::Kind::iid_coordinates:
            return {omega_iid(spec.sigma2_, spec.ez4_, spec.d_, k), 0.0};
        case OmegaSpec::Kind::diagonal_normal:
            return {omega_diagonal_normal(spec.lambdas_, k), 0.0};
        case OmegaSpec::Kind::discrete:
            return {omega_discrete(*spec.measure_, k), 0.0};
        case OmegaSpec::Kind::monte_carlo:
            return omega_monte_carlo(spec.sampler_, spec.n_draws_, spec.mean_, *spec.cov_, k);
    }
    throw DomainError("omega: unknown kind");
}

double omega(const OmegaSpec& spec, int k) { return omega_with_error(spec, k).value; }

double asymptotic_variance(const OmegaSpec& spec, int k, long n) {
    if (n < 1) throw DomainError("asymptotic_variance: n must be >= 1");
    const double kp1 = static_cast<double>(k + 1);
    return kp1 * kp1 * omega(spec, k) / static_cast<double>(n);
}

} // namespace gvar

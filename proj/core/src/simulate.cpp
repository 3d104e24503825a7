#include "gvar/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gvar/parallel.hpp"
#include "gvar/symfun.hpp"

namespace gvar {

namespace rng {

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

} // namespace

std::uint64_t word(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return mix64(mix64(mix64(seed ^ 0x243f6a8885a308d3ULL) ^ stream) ^ counter);
}

double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return (static_cast<double>(word(seed, stream, counter) >> 11) + 0.5) * 0x1.0p-53;
}

double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    const double u1 = uniform(seed, stream, 2 * index);
    const double u2 = uniform(seed, stream, 2 * index + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace rng

GeneratorSpec GeneratorSpec::uniform_cube(int d, std::uint64_t seed) {
    if (d < 1) throw DomainError("uniform_cube: dimension must be >= 1");
    GeneratorSpec spec;
    spec.kind_ = Kind::uniform_cube;
    spec.d_ = d;
    spec.seed_ = seed;
    return spec;
}

GeneratorSpec GeneratorSpec::normal(Eigen::VectorXd mean, CovMatrix cov, std::uint64_t seed) {
    if (mean.size() != cov.dim()) throw DomainError("normal: mean/cov dimension mismatch");
    GeneratorSpec spec;
    spec.kind_ = Kind::normal;
    spec.d_ = cov.dim();
    spec.seed_ = seed;
    spec.mean_ = std::move(mean);
    spec.cov_ = std::move(cov);
    return spec;
}

GeneratorSpec GeneratorSpec::uniform_sphere(int d, double rho, std::uint64_t seed) {
    if (d < 1) throw DomainError("uniform_sphere: dimension must be >= 1");
    if (!(rho > 0.0)) throw DomainError("uniform_sphere: radius must be positive");
    GeneratorSpec spec;
    spec.kind_ = Kind::uniform_sphere;
    spec.d_ = d;
    spec.rho_ = rho;
    spec.seed_ = seed;
    return spec;
}

GeneratorSpec GeneratorSpec::discrete(DiscreteMeasure mu, std::uint64_t seed) {
    GeneratorSpec spec;
    spec.kind_ = Kind::discrete;
    spec.d_ = mu.dim();
    spec.seed_ = seed;
    spec.measure_ = std::move(mu);
    return spec;
}

Eigen::VectorXd GeneratorSpec::mean() const {
    switch (kind_) {
        case Kind::uniform_cube:
            return Eigen::VectorXd::Constant(d_, 0.5);
        case Kind::normal:
            return mean_;
        case Kind::uniform_sphere:
            return Eigen::VectorXd::Zero(d_);
        case Kind::discrete:
            return measure_moments(*measure_).first;
    }
    throw DomainError("unknown generator kind");
}

CovMatrix GeneratorSpec::covariance() const {
    switch (kind_) {
        case Kind::uniform_cube:
            return CovMatrix::identity(d_, 1.0 / 12.0);
        case Kind::normal:
            return *cov_;
        case Kind::uniform_sphere:
            return CovMatrix::identity(d_, rho_ * rho_ / d_);
        case Kind::discrete:
            return measure_moments(*measure_).second;
    }
    throw DomainError("unknown generator kind");
}

Sample draw_sample(const GeneratorSpec& spec, long n, std::uint64_t replicate) {
    if (n < 1) throw DomainError("draw_sample: n must be >= 1");
    const int d = spec.d_;
    Eigen::MatrixXd data(n, d);
    switch (spec.kind_) {
        case GeneratorSpec::Kind::uniform_cube: {
            for (long r = 0; r < n; ++r)
                for (int c = 0; c < d; ++c)
                    data(r, c) = rng::uniform(spec.seed_, replicate,
                                              static_cast<std::uint64_t>(r) * d + c);
            break;
        }
        case GeneratorSpec::Kind::normal: {
            // x = mean + V^{1/2} z with the symmetric PSD square root.
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(spec.cov_->entries());
            const Eigen::MatrixXd sqrt_cov =
                solver.eigenvectors() *
                solver.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                solver.eigenvectors().transpose();
            Eigen::VectorXd z(d);
            for (long r = 0; r < n; ++r) {
                for (int c = 0; c < d; ++c)
                    z(c) = rng::normal(spec.seed_, replicate,
                                       static_cast<std::uint64_t>(r) * d + c);
                data.row(r) = (spec.mean_ + sqrt_cov * z).transpose();
            }
            break;
        }
        case GeneratorSpec::Kind::uniform_sphere: {
            Eigen::VectorXd z(d);
            for (long r = 0; r < n; ++r) {
                double norm = 0.0;
                do {
                    for (int c = 0; c < d; ++c)
                        z(c) = rng::normal(spec.seed_, replicate,
                                           static_cast<std::uint64_t>(r) * d + c);
                    norm = z.norm();
                } while (norm == 0.0);
                data.row(r) = (spec.rho_ / norm) * z.transpose();
            }
            break;
        }
        case GeneratorSpec::Kind::discrete: {
            const Eigen::VectorXd& w = spec.measure_->weights();
            for (long r = 0; r < n; ++r) {
                double u = rng::uniform(spec.seed_, replicate, static_cast<std::uint64_t>(r));
                Eigen::Index pick = 0;
                for (; pick < w.size() - 1; ++pick) {
                    u -= w(pick);
                    if (u <= 0.0) break;
                }
                data.row(r) = spec.measure_->support().row(pick);
            }
            break;
        }
    }
    return Sample(std::move(data));
}

double theoretical_psi(const GeneratorSpec& spec, int k) {
    return psi(spec.covariance(), k).value;
}

OmegaSpec matching_omega_spec(const GeneratorSpec& spec, std::int64_t mc_draws) {
    switch (spec.kind_) {
        case GeneratorSpec::Kind::uniform_cube:
            // Standardized uniform: fourth moment of (x - 1/2)/sigma is 9/5.
            return OmegaSpec::iid_coordinates(1.0 / 12.0, 9.0 / 5.0, spec.d_);
        case GeneratorSpec::Kind::normal:
            return OmegaSpec::normal(*spec.cov_);
        case GeneratorSpec::Kind::discrete:
            return OmegaSpec::discrete(*spec.measure_);
        case GeneratorSpec::Kind::uniform_sphere: {
            // Dedicated sampler stream, decoupled from the replicate streams.
            GeneratorSpec sampler_spec = spec;
            sampler_spec.seed_ = rng::word(spec.seed_, 0x6f6d6567612d6d63ULL, 0);
            auto sampler = [sampler_spec](std::int64_t i) {
                return draw_sample(sampler_spec, 1, static_cast<std::uint64_t>(i))
                    .data()
                    .row(0)
                    .transpose()
                    .eval();
            };
            return OmegaSpec::monte_carlo(std::move(sampler), mc_draws, spec.mean(),
                                          spec.covariance());
        }
    }
    throw DomainError("unknown generator kind");
}

namespace {

// Type-7 (linear interpolation) quantile of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    const double h = (static_cast<double>(n) - 1.0) * p;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= n) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

} // namespace

std::vector<MonteCarloReport> run_monte_carlo(const GeneratorSpec& spec, long n,
                                              const std::vector<int>& k_list, long replicates) {
    if (k_list.empty()) throw DomainError("run_monte_carlo: empty k list");
    if (replicates < 2) throw DomainError("run_monte_carlo: need at least two replicates");
    int k_max = 0;
    for (int k : k_list) {
        if (k < 1 || k > spec.dim())
            throw DomainError("run_monte_carlo: k = " + std::to_string(k) + " outside 1.." +
                              std::to_string(spec.dim()));
        k_max = std::max(k_max, k);
    }
    if (n < k_max + 2)
        throw InsufficientSampleError("run_monte_carlo needs n >= max(k)+2 = " +
                                      std::to_string(k_max + 2));

    // One row per replicate, one column per k; the matrix is indexed by
    // replicate so the aggregation below does not depend on thread scheduling.
    Eigen::MatrixXd estimates(replicates, static_cast<Eigen::Index>(k_list.size()));
    std::vector<double> scales(k_list.size());
    for (std::size_t j = 0; j < k_list.size(); ++j) scales[j] = scale_factor(n, k_list[j]);

    const std::size_t chunk = 16;
    const std::size_t n_chunks = (static_cast<std::size_t>(replicates) + chunk - 1) / chunk;
    for_each_chunk(n_chunks, [&](std::size_t c) {
        const long lo = static_cast<long>(c * chunk);
        const long hi = std::min(replicates, lo + static_cast<long>(chunk));
        for (long r = lo; r < hi; ++r) {
            const Sample s = draw_sample(spec, n, static_cast<std::uint64_t>(r));
            const auto [mean, cov] = empirical_moments(s);
            (void)mean;
            for (std::size_t j = 0; j < k_list.size(); ++j)
                estimates(r, static_cast<Eigen::Index>(j)) =
                    scales[j] * psi(cov, k_list[j]).value;
        }
    });

    std::vector<MonteCarloReport> reports;
    reports.reserve(k_list.size());
    for (std::size_t j = 0; j < k_list.size(); ++j) {
        const int k = k_list[j];
        MonteCarloReport rep;
        rep.k = k;
        rep.n = n;
        rep.replicates = replicates;
        rep.theoretical = theoretical_psi(spec, k);
        rep.asymptotic_variance = asymptotic_variance(matching_omega_spec(spec), k, n);

        rep.ratios.resize(static_cast<std::size_t>(replicates));
        for (long r = 0; r < replicates; ++r)
            rep.ratios[static_cast<std::size_t>(r)] =
                estimates(r, static_cast<Eigen::Index>(j)) / rep.theoretical;

        const double m = static_cast<double>(replicates);
        const double mean =
            chunked_sum(rep.ratios.size(), [&](std::size_t i) { return rep.ratios[i]; }) / m;
        const double ss = chunked_sum(rep.ratios.size(), [&](std::size_t i) {
            const double c = rep.ratios[i] - mean;
            return c * c;
        });
        std::vector<double> sorted = rep.ratios;
        std::sort(sorted.begin(), sorted.end());
        rep.summary = SummaryStats{sorted.front(),
                                   quantile_sorted(sorted, 0.25),
                                   quantile_sorted(sorted, 0.50),
                                   quantile_sorted(sorted, 0.75),
                                   sorted.back(),
                                   mean,
                                   ss / (m - 1.0)};

        // Kolmogorov-Smirnov distance of the estimates against the asymptotic
        // normal law, computed on the sorted ratios.
        const double sd_ratio = std::sqrt(rep.asymptotic_variance) / rep.theoretical;
        double ks = 0.0;
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            const double cdf = normal_cdf((sorted[i] - 1.0) / sd_ratio);
            ks = std::max(ks, std::abs(static_cast<double>(i + 1) / m - cdf));
            ks = std::max(ks, std::abs(cdf - static_cast<double>(i) / m));
        }
        rep.ks_distance = ks;
        reports.push_back(std::move(rep));
    }
    return reports;
}

} // namespace gvar

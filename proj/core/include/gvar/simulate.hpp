#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "gvar/covmatrix.hpp"
#include "gvar/estimate.hpp"
#include "gvar/measure.hpp"

namespace gvar {

namespace rng {

/// Stateless counter-based stream: every scalar variate is a pure function of
/// (seed, stream, counter), so parallel replication is order-independent and
/// the draw sequence is reproducible across platforms and languages.
///
/// Algorithm (fixed): with mix64 the SplitMix64 finalizer
///   mix64(z): z ^= z >> 30; z *= 0xbf58476d1ce4e5b9;
///             z ^= z >> 27; z *= 0x94d049bb133111eb;
///             z ^= z >> 31; return z;
/// the raw word is  mix64(mix64(mix64(seed ^ 0x243f6a8885a308d3) ^ stream) ^ counter)
/// and a uniform double on (0,1) is ((word >> 11) + 0.5) * 2^-53.
[[nodiscard]] std::uint64_t word(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

/// Uniform on the open interval (0,1).
[[nodiscard]] double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

/// Standard normal via Box-Muller on the uniforms at counters 2i and 2i+1.
[[nodiscard]] double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

} // namespace rng

/// Seeded sample generator. Identical spec and replicate index give a
/// bit-identical sample stream.
class GeneratorSpec {
public:
    enum class Kind { uniform_cube, normal, uniform_sphere, discrete };

    /// Uniform on [0,1]^d.
    static GeneratorSpec uniform_cube(int d, std::uint64_t seed);
    static GeneratorSpec normal(Eigen::VectorXd mean, CovMatrix cov, std::uint64_t seed);
    /// Uniform on the sphere of radius rho centered at the origin.
    static GeneratorSpec uniform_sphere(int d, double rho, std::uint64_t seed);
    static GeneratorSpec discrete(DiscreteMeasure mu, std::uint64_t seed);

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] int dim() const noexcept { return d_; }
    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

    /// Exact mean of the generated distribution.
    [[nodiscard]] Eigen::VectorXd mean() const;
    /// Exact covariance of the generated distribution.
    [[nodiscard]] CovMatrix covariance() const;

    friend Sample draw_sample(const GeneratorSpec& spec, long n, std::uint64_t replicate);
    friend OmegaSpec matching_omega_spec(const GeneratorSpec& spec, std::int64_t mc_draws);

private:
    GeneratorSpec() = default;

    Kind kind_{};
    int d_ = 0;
    double rho_ = 0.0;
    std::uint64_t seed_ = 0;
    Eigen::VectorXd mean_;
    std::optional<CovMatrix> cov_;
    std::optional<DiscreteMeasure> measure_;
};

/// n i.i.d. rows; deterministic given (spec.seed, replicate).
[[nodiscard]] Sample draw_sample(const GeneratorSpec& spec, long n, std::uint64_t replicate = 0);

/// Psi_k of the generator's exact covariance.
[[nodiscard]] double theoretical_psi(const GeneratorSpec& spec, int k);

/// OmegaSpec matching the generator: the i.i.d.-coordinate closed form for the
/// cube, the normal closed form for the normal kind, the exact finite sum for
/// the discrete kind, and a seeded monte-carlo evaluation (mc_draws samples on
/// a dedicated stream) for the sphere.
[[nodiscard]] OmegaSpec matching_omega_spec(const GeneratorSpec& spec, std::int64_t mc_draws = 20000);

/// Five-number summary plus moments; quantiles are linear-interpolation
/// (type 7).
struct SummaryStats {
    double min, q25, median, q75, max, mean, variance;
};

struct MonteCarloReport {
    int k = 0;
    long n = 0;
    long replicates = 0;
    std::vector<double> ratios;  // per-replicate psi_hat / psi_k(mu)
    SummaryStats summary{};
    double theoretical = 0.0;         // psi_k(mu)
    double asymptotic_variance = 0.0; // (k+1)^2 omega / n, for psi_hat
    double ks_distance = 0.0;         // to N(psi_k(mu), asymptotic_variance)
};

/// R seeded replicates of the unbiased estimate for every k in k_list.
/// Replicates run in parallel; aggregation is deterministic for any worker
/// count.
[[nodiscard]] std::vector<MonteCarloReport> run_monte_carlo(const GeneratorSpec& spec, long n,
                                                            const std::vector<int>& k_list,
                                                            long replicates);

} // namespace gvar

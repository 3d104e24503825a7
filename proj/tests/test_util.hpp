#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "gvar/covmatrix.hpp"
#include "gvar/estimate.hpp"
#include "gvar/measure.hpp"
#include "gvar/simulate.hpp"

namespace testutil {

inline bool close_rel(double a, double b, double rel, double abs_floor = 0.0) {
    return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1e-300}) + abs_floor;
}

// --- independent oracles -----------------------------------------------

// E_k by explicit subset enumeration; O(C(d,k)) on purpose.
inline double esf_enumeration(const Eigen::VectorXd& values, int k) {
    const int d = static_cast<int>(values.size());
    if (k == 0) return 1.0;
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    double total = 0.0;
    for (;;) {
        double prod = 1.0;
        for (int i = 0; i < k; ++i) prod *= values(idx[static_cast<std::size_t>(i)]);
        total += prod;
        int pos = k - 1;
        while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == d - k + pos) --pos;
        if (pos < 0) break;
        ++idx[static_cast<std::size_t>(pos)];
        for (int q = pos + 1; q < k; ++q)
            idx[static_cast<std::size_t>(q)] = idx[static_cast<std::size_t>(q - 1)] + 1;
    }
    return total;
}

// Vertices (rows) of a regular k-simplex in R^d, centroid at the origin,
// circumradius rho. Built from the centered standard simplex in R^{k+1} and
// rotated into the first k coordinates.
inline Eigen::MatrixXd regular_simplex(int k, int d, double rho) {
    Eigen::MatrixXd verts = Eigen::MatrixXd::Identity(k + 1, k + 1);
    verts.array() -= 1.0 / (k + 1);
    // rows span the k-dim subspace orthogonal to (1,...,1)
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(verts, Eigen::ComputeThinV);
    Eigen::MatrixXd coords = verts * svd.matrixV().leftCols(k); // (k+1) x k
    const double radius = coords.row(0).norm();
    coords *= rho / radius;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(k + 1, d);
    out.leftCols(k) = coords;
    return out;
}

// Random PSD covariance with controllable rank, built from the library's
// deterministic counter RNG.
inline gvar::CovMatrix random_cov(int d, std::uint64_t seed, std::uint64_t stream,
                                  int rank = -1) {
    if (rank < 0) rank = d;
    Eigen::MatrixXd A(d, rank);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < rank; ++j)
            A(i, j) = gvar::rng::normal(seed, stream, static_cast<std::uint64_t>(i * rank + j));
    Eigen::MatrixXd V = A * A.transpose() / static_cast<double>(d);
    return gvar::CovMatrix((V + V.transpose()) / 2.0);
}

// Spectrum bounded away from zero; the Newton-identity route sheds digits on
// near-singular input, so cross-checks against it use these.
inline gvar::CovMatrix random_cov_conditioned(int d, std::uint64_t seed, std::uint64_t stream) {
    Eigen::MatrixXd V = random_cov(d, seed, stream).entries();
    V += (0.5 * V.trace() / d) * Eigen::MatrixXd::Identity(d, d);
    return gvar::CovMatrix(std::move(V));
}

inline Eigen::MatrixXd random_matrix(long rows, long cols, std::uint64_t seed,
                                     std::uint64_t stream) {
    Eigen::MatrixXd m(rows, cols);
    for (long i = 0; i < rows; ++i)
        for (long j = 0; j < cols; ++j)
            m(i, j) = gvar::rng::normal(seed, stream, static_cast<std::uint64_t>(i * cols + j));
    return m;
}

// P_{k,mu}(x) = psi_k(mu,...,mu,delta_x) by brute-force iterated sums over the
// support (k nested expectations).
inline double potential_bruteforce(const gvar::DiscreteMeasure& mu, const Eigen::VectorXd& x,
                                   int k) {
    const int m = mu.size();
    std::vector<int> idx(static_cast<std::size_t>(k), 0);
    double total = 0.0;
    for (;;) {
        Eigen::MatrixXd vertices(k + 1, mu.dim());
        double weight = 1.0;
        for (int i = 0; i < k; ++i) {
            vertices.row(i) = mu.support().row(idx[static_cast<std::size_t>(i)]);
            weight *= mu.weights()(idx[static_cast<std::size_t>(i)]);
        }
        vertices.row(k) = x.transpose();
        total += weight * gvar::simplex_squared_volume(vertices);
        int pos = k - 1;
        while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == m - 1) --pos;
        if (pos < 0) break;
        ++idx[static_cast<std::size_t>(pos)];
        for (int q = pos + 1; q < k; ++q) idx[static_cast<std::size_t>(q)] = 0;
    }
    return total;
}

// h(x) = E[squared simplex volume | one vertex = x] under the discrete mu,
// by brute force; omega = var h follows.
inline double h_bruteforce(const gvar::DiscreteMeasure& mu, const Eigen::VectorXd& x, int k) {
    return potential_bruteforce(mu, x, k);
}

inline double omega_bruteforce(const gvar::DiscreteMeasure& mu, int k) {
    double mean = 0.0, second = 0.0;
    for (int s = 0; s < mu.size(); ++s) {
        const double h = h_bruteforce(mu, mu.support().row(s).transpose(), k);
        mean += mu.weights()(s) * h;
        second += mu.weights()(s) * h * h;
    }
    return second - mean * mean;
}

// beta_{d,k} by explicit enumeration over all pairs of k-subsets.
inline long long beta_dk_enumeration(int d, int k) {
    std::vector<std::vector<int>> subsets;
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (;;) {
        subsets.push_back(idx);
        int pos = k - 1;
        while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == d - k + pos) --pos;
        if (pos < 0) break;
        ++idx[static_cast<std::size_t>(pos)];
        for (int q = pos + 1; q < k; ++q)
            idx[static_cast<std::size_t>(q)] = idx[static_cast<std::size_t>(q - 1)] + 1;
    }
    long long total = 0;
    for (const auto& I : subsets)
        for (const auto& J : subsets) total += gvar::beta_coincidence(I, J);
    return total;
}

} // namespace testutil

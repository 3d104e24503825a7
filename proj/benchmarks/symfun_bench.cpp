#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "gvar/simulate.hpp"
#include "gvar/symfun.hpp"

namespace {

gvar::CovMatrix bench_cov(int d) {
    Eigen::MatrixXd a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            a(i, j) = gvar::rng::normal(1, 0, static_cast<std::uint64_t>(i * d + j));
    Eigen::MatrixXd v = a * a.transpose() / d;
    return gvar::CovMatrix((v + v.transpose()) / 2.0);
}

// Spectral route: eigendecomposition + coefficient convolution.
void BM_PsiSpectral(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const Eigen::MatrixXd entries = bench_cov(d).entries();
    const int k = d / 2 + 1;
    for (auto _ : state) {
        gvar::CovMatrix v(entries); // include the eigensolve each iteration
        benchmark::DoNotOptimize(gvar::psi(v, k).value);
    }
}
BENCHMARK(BM_PsiSpectral)->Arg(4)->Arg(8)->Arg(16)->Arg(32)->Arg(64);

// Trace-determinant route (characteristic-polynomial coefficients).
void BM_PsiDeterminantForm(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const gvar::CovMatrix v = bench_cov(d);
    const int k = d / 2 + 1;
    for (auto _ : state) benchmark::DoNotOptimize(gvar::psi_determinant_form(v, k));
}
BENCHMARK(BM_PsiDeterminantForm)->Arg(4)->Arg(8)->Arg(16)->Arg(32)->Arg(64);

void BM_ElementarySymmetric(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const Eigen::VectorXd eigs = bench_cov(d).spectrum();
    for (auto _ : state)
        for (int k = 0; k <= d; ++k) benchmark::DoNotOptimize(gvar::elementary_symmetric(eigs, k));
}
BENCHMARK(BM_ElementarySymmetric)->Arg(8)->Arg(32)->Arg(128);

void BM_GradPsi(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const gvar::CovMatrix v = bench_cov(d);
    const int k = d / 2 + 1;
    for (auto _ : state) benchmark::DoNotOptimize(gvar::grad_psi(v, k));
}
BENCHMARK(BM_GradPsi)->Arg(4)->Arg(16)->Arg(64);

} // namespace

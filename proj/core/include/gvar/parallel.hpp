#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <thread>
#include <vector>

namespace gvar {

/// Worker-thread count for the chunked helpers. Honors GVAR_THREADS when set,
/// otherwise uses the hardware count.
inline unsigned worker_threads() {
    if (const char* env = std::getenv("GVAR_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Runs fn(chunk_index) for every chunk_index in [0, n_chunks). Chunks are
/// pulled from an atomic counter; each chunk's result must not depend on
/// execution order.
template <typename Fn>
void for_each_chunk(std::size_t n_chunks, Fn&& fn) {
    std::size_t n_threads = std::min<std::size_t>(worker_threads(), n_chunks);
    if (n_threads <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) fn(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            std::size_t c = next.fetch_add(1, std::memory_order_relaxed);
            if (c >= n_chunks) return;
            fn(c);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
}

namespace detail {

// Neumaier-compensated sum of term(i) over [begin, end).
template <typename Term>
double compensated_sum(std::size_t begin, std::size_t end, Term&& term) {
    double sum = 0.0, comp = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        const double v = term(i);
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    return sum + comp;
}

// In-place pairwise reduction in fixed index order.
inline double pairwise_total(std::vector<double>& parts) {
    std::size_t n = parts.size();
    while (n > 1) {
        const std::size_t half = (n + 1) / 2;
        for (std::size_t i = 0; i + half < n; ++i) parts[i] += parts[i + half];
        n = half;
    }
    return parts.empty() ? 0.0 : parts[0];
}

} // namespace detail

/// Sum of term(i) over [0, n). Fixed-size chunks are accumulated with
/// compensated summation and combined pairwise in index order, so the result
/// is bit-identical for every thread count.
template <typename Term>
double chunked_sum(std::size_t n, Term&& term, std::size_t chunk = 4096) {
    if (n == 0) return 0.0;
    const std::size_t n_chunks = (n + chunk - 1) / chunk;
    std::vector<double> parts(n_chunks, 0.0);
    for_each_chunk(n_chunks, [&](std::size_t c) {
        const std::size_t lo = c * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        parts[c] = detail::compensated_sum(lo, hi, term);
    });
    return detail::pairwise_total(parts);
}

} // namespace gvar

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <span>
#include <thread>
#include <vector>

namespace dephasing {

namespace detail {
inline std::atomic<unsigned>& thread_cap() {
    static std::atomic<unsigned> cap{0};
    return cap;
}
}  // namespace detail

// 0 means "use hardware concurrency".
inline void set_max_threads(unsigned n) { detail::thread_cap().store(n); }

inline unsigned max_threads() {
    const unsigned cap = detail::thread_cap().load();
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    return cap == 0 ? hw : cap;
}

using Rng = std::mt19937_64;

// Independent stream for trajectory `index`; the result does not depend on
// which thread runs the trajectory.
inline Rng make_stream(std::uint64_t master_seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x9e3779b9u};
    return Rng(seq);
}

namespace detail {

// Runs fn(i) for i in [0, n). Work is handed out in contiguous blocks; fn must
// write only to its own slot so the outcome is schedule independent.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(max_threads(), n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const std::size_t block = std::max<std::size_t>(1, n / (8 * threads));
    auto worker = [&] {
        try {
            for (;;) {
                const std::size_t lo = next.fetch_add(block);
                if (lo >= n) break;
                const std::size_t hi = std::min(n, lo + block);
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next.store(n);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads - 1);
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

template <class T>
T pairwise_sum(std::span<const T> x) {
    if (x.empty()) return T{};
    if (x.size() <= 8) {
        T s = x[0];
        for (std::size_t i = 1; i < x.size(); ++i) s += x[i];
        return s;
    }
    const std::size_t h = x.size() / 2;
    return pairwise_sum(x.first(h)) + pairwise_sum(x.subspan(h));
}

template <class T>
T pairwise_sum(const std::vector<T>& x) {
    return pairwise_sum(std::span<const T>(x));
}

struct SampleStats {
    std::complex<double> mean{};
    double std_error = 0.0;
};

// Mean and standard error of the mean (complex samples, |.|^2 spread).
inline SampleStats summarize(const std::vector<std::complex<double>>& x) {
    SampleStats s;
    const std::size_t n = x.size();
    if (n == 0) return s;
    s.mean = pairwise_sum(x) / double(n);
    if (n < 2) return s;
    std::vector<double> dev(n);
    for (std::size_t i = 0; i < n; ++i) dev[i] = std::norm(x[i] - s.mean);
    s.std_error = std::sqrt(pairwise_sum(dev) / (double(n) * double(n - 1)));
    return s;
}

inline double mean_of(const std::vector<double>& x) { return x.empty() ? 0.0 : pairwise_sum(x) / double(x.size()); }

inline double std_error_of(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    const double m = mean_of(x);
    std::vector<double> dev(n);
    for (std::size_t i = 0; i < n; ++i) dev[i] = (x[i] - m) * (x[i] - m);
    return std::sqrt(pairwise_sum(dev) / (double(n) * double(n - 1)));
}

}  // namespace detail
}  // namespace dephasing

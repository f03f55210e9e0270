#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "arith.hpp"
#include "quadfield.hpp"

namespace lowlying {

template <typename T>
struct RowResult {
    u64 delta = 0;
    std::optional<T> row;
    std::string error;
};

// Runs fn(i) for i in [0, n) on a pool of workers pulling indices from a shared
// counter; results land in their own slot, so output order never depends on
// scheduling.
template <typename T, typename F>
std::vector<T> parallel_map(std::size_t n, unsigned threads, F&& fn) {
    std::vector<T> out(n);
    if (n == 0) return out;
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) out[i] = fn(i);
    };
    if (threads == 1) {
        worker();
        return out;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return out;
}

// per-row evaluation that records failures instead of aborting the sweep
template <typename T, typename F>
std::vector<RowResult<T>> sweep_rows(const std::vector<u64>& deltas, unsigned threads, F&& eval) {
    return parallel_map<RowResult<T>>(deltas.size(), threads, [&](std::size_t i) {
        RowResult<T> r;
        r.delta = deltas[i];
        try {
            r.row = eval(deltas[i]);
        } catch (const std::exception& e) {
            r.error = e.what();
        }
        return r;
    });
}

inline double median(std::vector<double> v) {
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::vector<u64> fundamental_in(u64 lo, u64 hi) {
    std::vector<u64> out;
    for (u64 d = std::max<u64>(lo, 3); d <= hi; ++d) {
        if (is_fundamental(d)) out.push_back(d);
    }
    return out;
}

// genus theory: the 2-rank of the class group is (number of ramified primes) - 1
inline bool has_odd_class_number(u64 delta) { return prime_factors(delta).size() == 1; }

inline std::vector<u64> first_fundamental_from(u64 lo, std::size_t count, bool odd_only = false) {
    std::vector<u64> out;
    for (u64 d = std::max<u64>(lo, 3); out.size() < count; ++d) {
        if (!is_fundamental(d)) continue;
        if (odd_only && !has_odd_class_number(d)) continue;
        out.push_back(d);
    }
    return out;
}

}  // namespace lowlying

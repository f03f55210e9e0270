#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "arith.hpp"

namespace lowlying {

// Segmented sieve of Eratosthenes; memory is O(sqrt(limit) + segment).
inline std::vector<std::uint32_t> primes_up_to(u64 limit) {
    std::vector<std::uint32_t> out;
    if (limit < 2) return out;
    if (limit > 0xFFFFFFFFULL) throw std::invalid_argument("primes_up_to: limit exceeds 32 bits");
    const u64 root = isqrt(limit);
    std::vector<char> small(root + 1, 1);
    std::vector<std::uint32_t> base;
    for (u64 i = 2; i <= root; ++i) {
        if (!small[i]) continue;
        base.push_back(static_cast<std::uint32_t>(i));
        for (u64 j = i * i; j <= root; j += i) small[j] = 0;
    }
    out.reserve(static_cast<std::size_t>(1.1 * static_cast<double>(limit) / std::log(static_cast<double>(limit))) + 16);
    constexpr u64 segment = 1 << 16;
    std::vector<char> mark(segment);
    for (u64 lo = 2; lo <= limit; lo += segment) {
        const u64 hi = std::min(limit, lo + segment - 1);
        std::fill(mark.begin(), mark.end(), 1);
        for (std::uint32_t p : base) {
            const u64 pp = static_cast<u64>(p) * p;
            if (pp > hi) break;
            u64 start = std::max(pp, (lo + p - 1) / p * p);
            for (u64 j = start; j <= hi; j += p) mark[j - lo] = 0;
        }
        for (u64 n = lo; n <= hi; ++n) {
            if (mark[n - lo]) out.push_back(static_cast<std::uint32_t>(n));
        }
    }
    return out;
}

// Immutable table of primes shared read-only by sweep workers.
class PrimeTable {
public:
    explicit PrimeTable(u64 limit) : limit_(limit), primes_(primes_up_to(limit)) {}

    u64 limit() const { return limit_; }

    // all primes <= bound; bound must not exceed limit()
    std::span<const std::uint32_t> upto(u64 bound) const {
        if (bound > limit_) throw std::out_of_range("PrimeTable::upto: bound above sieve limit");
        auto it = std::upper_bound(primes_.begin(), primes_.end(), bound);
        return {primes_.data(), static_cast<std::size_t>(it - primes_.begin())};
    }

    std::span<const std::uint32_t> all() const { return primes_; }

private:
    u64 limit_;
    std::vector<std::uint32_t> primes_;
};

}  // namespace lowlying

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "arith.hpp"

namespace lowlying {

// chi(n) = (-delta / n) tabulated over one period; completely multiplicative,
// so the table is filled from the prime values by a linear sieve.
class KroneckerCharacter {
public:
    explicit KroneckerCharacter(u64 delta) : delta_(delta), table_(delta, 0) {
        if (delta < 3) throw std::invalid_argument("KroneckerCharacter: delta must be >= 3");
        const i64 D = -static_cast<i64>(delta);
        std::vector<std::uint32_t> lp(delta, 0);
        std::vector<std::uint32_t> primes;
        if (delta > 1) table_[1] = 1;
        for (u64 n = 2; n < delta; ++n) {
            if (lp[n] == 0) {
                lp[n] = static_cast<std::uint32_t>(n);
                primes.push_back(static_cast<std::uint32_t>(n));
                table_[n] = static_cast<std::int8_t>(kronecker(D, n));
            }
            for (std::uint32_t p : primes) {
                u64 m = static_cast<u64>(p) * n;
                if (p > lp[n] || m >= delta) break;
                lp[m] = p;
                table_[m] = static_cast<std::int8_t>(table_[p] * table_[n]);
            }
        }
    }

    u64 delta() const { return delta_; }
    int operator()(u64 n) const { return table_[n % delta_]; }
    const std::vector<std::int8_t>& table() const { return table_; }

private:
    u64 delta_;
    std::vector<std::int8_t> table_;
};

struct SeriesValue {
    double value = 0.0;
    double tail_bound = 0.0;
};

namespace detail {

inline constexpr std::array<double, 8> bernoulli_even = {
    1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0, -3617.0 / 510.0};

inline double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

inline double harmonic(int n) {
    double r = 0.0;
    for (int i = 1; i <= n; ++i) r += 1.0 / i;
    return r;
}

// sum_{n >= 1} chi(n) f(n) for f = 1/t (want_log = false) or f = log t / t
// (want_log = true): direct sum over N whole periods, then the remaining
// residue-class sums by Euler-Maclaurin with a certified remainder bound.
inline SeriesValue periodic_series(const KroneckerCharacter& chi, bool want_log) {
    constexpr int J = 8;
    const u64 q = chi.delta();
    const u64 periods = std::max<u64>(8, (32 + q - 1) / q);
    const u64 n_max = periods * q;
    CompensatedSum direct;
    const auto& tab = chi.table();
    for (u64 n = 1; n < n_max; ++n) {
        int c = tab[n % q];
        if (c == 0) continue;
        double t = static_cast<double>(n);
        double term = want_log ? std::log(t) / t : 1.0 / t;
        direct.add(c > 0 ? term : -term);
    }
    // Euler-Maclaurin for sum_{k >= periods} f(kq + a), regularized by dropping
    // the primitive at infinity (it cancels since sum_a chi(a) = 0)
    std::array<double, 2 * J> hm{};
    std::array<double, 2 * J> fact{};
    fact[0] = 1.0;
    for (int m = 1; m < 2 * J; ++m) {
        hm[m] = harmonic(m);
        fact[m] = fact[m - 1] * m;
    }
    std::array<double, J> coef{};
    for (int j = 1; j <= J; ++j) coef[j - 1] = bernoulli_even[j - 1] / factorial(2 * j);
    const double two_pi = 2.0 * std::numbers::pi;
    const double qd = static_cast<double>(q);
    // remainder constant 2 zeta(2J) / (2 pi)^(2J); zeta(16) = 1 to 1.6e-5
    const double rem_const = 2.0 * 1.0000152822594086 / std::pow(two_pi, 2 * J);
    CompensatedSum tail;
    double bound = 0.0;
    for (u64 a = 1; a < q; ++a) {
        int c = tab[a];
        if (c == 0) continue;
        const double t = static_cast<double>(n_max + a);
        const double lt = std::log(t);
        const double r = qd / t;
        // g^{(m)} = q^m f^{(m)}(t), with
        //   f^{(m)}(t) = (-1)^m m! / t^{m+1}                for f = 1/t
        //   f^{(m)}(t) = (-1)^m m! (log t - H_m) / t^{m+1}  for f = log t / t
        // so g^{(m)} = (-1)^m m! r^m / t (times log t - H_m)
        double s = -(want_log ? 0.5 * lt * lt : lt) / qd + 0.5 * (want_log ? lt / t : 1.0 / t);
        double rpow = r / t;  // r^m / t for m = 1
        double last = 0.0;
        for (int j = 1; j <= J; ++j) {
            const int m = 2 * j - 1;
            double g = -fact[m] * rpow;
            if (want_log) g *= lt - hm[m];
            s -= coef[j - 1] * g;
            last = g;
            rpow *= r * r;
        }
        // |R_J| <= rem_const * |g^{(2J-1)}(periods)| since g^{(2J)} keeps one sign past e^{H_{2J}}
        bound += rem_const * std::fabs(last);
        tail.add(c > 0 ? s : -s);
    }
    if (static_cast<double>(n_max) < std::exp(hm[2 * J - 1] + 1.0 / (2 * J))) throw std::logic_error("periodic_series: cutoff too small");
    return {direct.value() + tail.value(), bound};
}

}  // namespace detail

// L(1, chi) by character series
inline SeriesValue L_one_series(const KroneckerCharacter& chi) { return detail::periodic_series(chi, false); }

// L'(1, chi) = -sum chi(n) log n / n
inline SeriesValue L_prime_one_series(const KroneckerCharacter& chi) {
    SeriesValue v = detail::periodic_series(chi, true);
    return {-v.value, v.tail_bound};
}

// L(s, chi) for real s through the theta-function (incomplete gamma) expansion of
// the completed L-function; independent of the periodic-sum route above.
inline double L_smoothed(u64 delta, double s) {
    const double q = static_cast<double>(delta);
    const i64 D = -static_cast<i64>(delta);
    const double a1 = 0.5 * (s + 1.0);
    const double a2 = 0.5 * (2.0 - s);
    CompensatedSum acc;
    for (u64 n = 1;; ++n) {
        const double x = std::numbers::pi * static_cast<double>(n) * static_cast<double>(n) / q;
        if (x > 60.0 + std::log(static_cast<double>(n))) break;
        int c = kronecker(D, n);
        if (c == 0) continue;
        double g = boost::math::tgamma(a1, x) * std::pow(x, -a1) + boost::math::tgamma(a2, x) * std::pow(x, -a2);
        double term = static_cast<double>(n) * g;
        acc.add(c > 0 ? term : -term);
    }
    return acc.value() / (std::pow(q / std::numbers::pi, a1) * std::tgamma(a1));
}

}  // namespace lowlying

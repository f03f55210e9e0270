#pragma once

// Independent evaluation of the averaged one-level density for the Fejer pair:
// closed-form cosh integral, Simpson for the sinh integral, trial-division
// primes, Euler-criterion characters, and principality of P^m decided by
// searching representations by the principal form.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "forms_oracle.hpp"

namespace oracle {

template <typename F>
double simpson(F&& f, double a, double b, long n) {
    if (n % 2) ++n;
    const double h = (b - a) / static_cast<double>(n);
    double s = f(a) + f(b);
    for (long i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
    return s * h / 3.0;
}

inline bool is_prime_td(i64 n) {
    if (n < 2) return false;
    for (i64 d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

inline i64 powmod_small(i64 b, i64 e, i64 m) {
    i64 r = 1 % m;
    b %= m;
    if (b < 0) b += m;
    while (e) {
        if (e & 1) r = static_cast<i64>(static_cast<__int128>(r) * b % m);
        b = static_cast<i64>(static_cast<__int128>(b) * b % m);
        e >>= 1;
    }
    return r;
}

// (-delta / p) for prime p
inline int chi_prime(i64 delta, i64 p) {
    if (p == 2) {
        if (delta % 2 == 0) return 0;
        i64 r = ((-delta) % 8 + 8) % 8;
        return r == 1 ? 1 : -1;
    }
    if (delta % p == 0) return 0;
    return powmod_small(-delta, (p - 1) / 2, p) == 1 ? 1 : -1;
}

inline double fejer_phihat(double sigma, double y) {
    y = std::fabs(y);
    return y < sigma ? 1.0 - y / sigma : 0.0;
}

// (4/h) L \int_0^sigma (1 - u/sigma) cosh(L u / 2) du, in closed form
inline double fejer_cosh_term(double sigma, i64 h, double L) {
    const double a = 0.5 * L;
    return 4.0 / static_cast<double>(h) * L * (std::cosh(a * sigma) - 1.0) / (sigma * a * a);
}

// \int_0^\infty (1 - phihat(x)) / (2 sinh(x/2)) dx by composite Simpson
inline double fejer_sinh_integral(double sigma, long panels = 2000000) {
    auto inner = [&](double x) { return x == 0.0 ? 1.0 / sigma : (x / sigma) / (2.0 * std::sinh(0.5 * x)); };
    auto outer = [](double x) { return 1.0 / (2.0 * std::sinh(0.5 * x)); };
    const double cut = 70.0;
    return simpson(inner, 0.0, sigma, panels) + simpson(outer, sigma, cut, panels) + 2.0 * std::exp(-0.5 * cut);
}

struct DensityParts {
    i64 h = 0;
    double cosh_term = 0.0;
    double const_term = 0.0;
    double prime_sum = 0.0;  // S1 + S2
    double sinh_term = 0.0;
    double total = 0.0;
};

inline DensityParts fejer_density(i64 delta, double sigma) {
    DensityParts d;
    d.h = static_cast<i64>(reduced_forms(delta).size());
    const double L = std::log(static_cast<double>(delta));
    const double X = sigma * L;
    d.cosh_term = fejer_cosh_term(sigma, d.h, L);
    d.const_term = L - 2.0 * std::numbers::egamma - 2.0 * std::log(8.0 * std::numbers::pi);
    d.sinh_term = 2.0 * fejer_sinh_integral(sigma);
    double s = 0.0;
    const i64 top = static_cast<i64>(std::exp(X)) + 1;
    for (i64 p = 2; p <= top; ++p) {
        if (!is_prime_td(p)) continue;
        const int c = chi_prime(delta, p);
        const double lp = std::log(static_cast<double>(p));
        // (norm exponent f, number of prime ideals, primitivity prime for the search)
        const int f = c == -1 ? 2 : 1;
        const int count = c == 1 ? 2 : 1;
        const double lN = f * lp;
        for (int m = 1; m * lN < X; ++m) {
            bool principal;
            if (c == -1) {
                principal = true;
            } else {
                const i64 n = static_cast<i64>(std::llround(std::pow(static_cast<double>(p), m)));
                principal = principal_represents_primitively(delta, n, c == 1 ? p : 0);
            }
            if (!principal) continue;
            s += count * (-2.0 * lN * fejer_phihat(sigma, m * lN / L) * std::exp(-0.5 * m * lN));
        }
    }
    d.prime_sum = s;
    d.total = (d.cosh_term + d.const_term + d.prime_sum + d.sinh_term) / L;
    return d;
}

}  // namespace oracle

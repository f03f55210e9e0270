#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lowlying {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;
using u128 = unsigned __int128;

inline std::string to_string(i128 v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    u128 u = neg ? static_cast<u128>(-(v + 1)) + 1 : static_cast<u128>(v);
    std::string s;
    while (u > 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
        u /= 10;
    }
    if (neg) s.push_back('-');
    return {s.rbegin(), s.rend()};
}

template <typename T>
constexpr T abs_val(T v) { return v < 0 ? -v : v; }

// floor(a / b) for b > 0
template <typename T>
constexpr T floor_div(T a, T b) {
    T q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

// non-negative residue of a mod m, m > 0
template <typename T>
constexpr T mod_floor(T a, T m) {
    T r = a % m;
    return r < 0 ? r + m : r;
}

template <typename T>
constexpr T gcd_val(T a, T b) {
    a = abs_val(a);
    b = abs_val(b);
    while (b != 0) {
        T t = a % b;
        a = b;
        b = t;
    }
    return a;
}

struct Xgcd {
    i128 x, y, g;
};

// x*a + y*b = g = gcd(a, b) >= 0
inline Xgcd xgcd(i128 a, i128 b) {
    i128 x0 = 1, y0 = 0, x1 = 0, y1 = 1;
    while (b != 0) {
        i128 q = a / b;
        i128 r = a - q * b;
        a = b;
        b = r;
        i128 t = x0 - q * x1;
        x0 = x1;
        x1 = t;
        t = y0 - q * y1;
        y0 = y1;
        y1 = t;
    }
    if (a < 0) return {-x0, -y0, -a};
    return {x0, y0, a};
}

inline u64 isqrt(u64 n) {
    u64 r = static_cast<u64>(__builtin_sqrtl(static_cast<long double>(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

inline u64 mulmod(u64 a, u64 b, u64 m) {
    return static_cast<u64>(static_cast<u128>(a) * b % m);
}

inline u64 powmod(u64 b, u64 e, u64 m) {
    u64 r = 1 % m;
    b %= m;
    while (e) {
        if (e & 1) r = mulmod(r, b, m);
        b = mulmod(b, b, m);
        e >>= 1;
    }
    return r;
}

// deterministic Miller-Rabin for 64-bit inputs
inline bool is_prime(u64 n) {
    if (n < 2) return false;
    for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % p == 0) return n == p;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (u64 a : {2ULL, 325ULL, 9375ULL, 28178ULL, 450775ULL, 9780504ULL, 1795265022ULL}) {
        u64 x = powmod(a % n, d, n);
        if (a % n == 0 || x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int r = 1; r < s; ++r) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

// distinct prime factors by trial division (inputs here are at most ~1e12)
inline std::vector<u64> prime_factors(u64 n) {
    std::vector<u64> out;
    for (u64 p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        if (n % p == 0) {
            out.push_back(p);
            while (n % p == 0) n /= p;
        }
    }
    if (n > 1) out.push_back(n);
    return out;
}

inline bool is_squarefree(u64 n) {
    if (n == 0) return false;
    for (u64 p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        if (n % p == 0) {
            n /= p;
            if (n % p == 0) return false;
        }
    }
    return true;
}

// Jacobi symbol (a/n), n odd positive
inline int jacobi(i64 a, u64 n) {
    if (n == 0 || (n & 1) == 0) throw std::invalid_argument("jacobi: n must be odd positive");
    u64 x = static_cast<u64>(mod_floor<i128>(a, static_cast<i128>(n)));
    int t = 1;
    while (x != 0) {
        while ((x & 1) == 0) {
            x >>= 1;
            u64 r = n & 7;
            if (r == 3 || r == 5) t = -t;
        }
        std::swap(x, n);
        if ((x & 3) == 3 && (n & 3) == 3) t = -t;
        x %= n;
    }
    return n == 1 ? t : 0;
}

// Kronecker symbol (d/n) for n >= 1
inline int kronecker(i64 d, u64 n) {
    if (n == 0) throw std::invalid_argument("kronecker: n must be positive");
    int t = 1;
    while ((n & 1) == 0) {
        if ((d & 1) == 0) return 0;
        i64 r = mod_floor<i64>(d, 8);
        if (r == 3 || r == 5) t = -t;
        n >>= 1;
    }
    if (n == 1) return t;
    return t * jacobi(d, n);
}

// square root of a modulo an odd prime p (Tonelli-Shanks); a must be a residue
inline u64 sqrt_mod_prime(u64 a, u64 p) {
    a %= p;
    if (a == 0) return 0;
    if (p == 2) return a;
    if (powmod(a, (p - 1) / 2, p) != 1) throw std::invalid_argument("sqrt_mod_prime: non-residue");
    if (p % 4 == 3) return powmod(a, (p + 1) / 4, p);
    u64 q = p - 1;
    int s = 0;
    while ((q & 1) == 0) {
        q >>= 1;
        ++s;
    }
    u64 z = 2;
    while (powmod(z, (p - 1) / 2, p) != p - 1) ++z;
    u64 m = static_cast<u64>(s);
    u64 c = powmod(z, q, p);
    u64 t = powmod(a, q, p);
    u64 r = powmod(a, (q + 1) / 2, p);
    while (t != 1) {
        u64 i = 0;
        u64 tt = t;
        while (tt != 1) {
            tt = mulmod(tt, tt, p);
            ++i;
        }
        u64 b = c;
        for (u64 j = 0; j + i + 1 < m; ++j) b = mulmod(b, b, p);
        m = i;
        c = mulmod(b, b, p);
        t = mulmod(t, c, p);
        r = mulmod(r, b, p);
    }
    return r;
}

// Neumaier's compensated sum
class CompensatedSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace lowlying

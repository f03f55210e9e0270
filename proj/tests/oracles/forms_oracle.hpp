#pragma once

// Brute-force counterparts of the class-group code, written without calling
// into lowlying's reduction or composition.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace oracle {

using i64 = std::int64_t;

struct Form {
    i64 a, b, c;
    bool operator==(const Form&) const = default;
    auto operator<=>(const Form&) const = default;
};

inline i64 gcd3(i64 a, i64 b, i64 c) { return std::gcd(std::gcd(a, b), c); }

// every primitive reduced form of discriminant -delta, straight from the definition
inline std::vector<Form> reduced_forms(i64 delta) {
    std::vector<Form> out;
    for (i64 a = 1; 3 * a * a <= delta; ++a) {
        for (i64 b = -a + 1; b <= a; ++b) {
            i64 num = b * b + delta;
            if (num % (4 * a) != 0) continue;
            i64 c = num / (4 * a);
            if (c < a) continue;
            if (c == a && b < 0) continue;
            if (gcd3(a, b, c) != 1) continue;
            out.push_back({a, b, c});
        }
    }
    return out;
}

// f(px + qy, rx + sy) for ps - qr = 1
inline Form act(const Form& f, i64 p, i64 q, i64 r, i64 s) {
    return {f.a * p * p + f.b * p * r + f.c * r * r, 2 * f.a * p * q + f.b * (p * s + q * r) + 2 * f.c * r * s,
            f.a * q * q + f.b * q * s + f.c * s * s};
}

// textbook Gauss reduction of a positive definite form
inline Form reduce_gauss(Form f) {
    for (;;) {
        // normalize b into (-a, a]
        i64 k = 0;
        if (f.b > f.a || f.b <= -f.a) {
            k = (f.a - f.b) / (2 * f.a);
            if (f.a - f.b < 0 && (f.a - f.b) % (2 * f.a) != 0) --k;
            f = act(f, 1, k, 0, 1);
        }
        if (f.a > f.c) {
            f = act(f, 0, -1, 1, 0);
            continue;
        }
        if (f.a == f.c && f.b < 0) f.b = -f.b;
        return f;
    }
}

// Dirichlet composition through united forms: needs gcd(a1, a2, (b1 + b2)/2) = 1.
// B is found by searching [0, 2 a1 a2), so keep the leading coefficients small.
inline Form dirichlet_compose(const Form& f1, const Form& f2) {
    const i64 D = f1.b * f1.b - 4 * f1.a * f1.c;
    if (D != f2.b * f2.b - 4 * f2.a * f2.c) throw std::invalid_argument("discriminants differ");
    if (gcd3(f1.a, f2.a, (f1.b + f2.b) / 2) != 1) throw std::invalid_argument("forms are not united");
    const i64 A = f1.a * f2.a;
    for (i64 B = 0; B < 2 * A; ++B) {
        if ((B - f1.b) % (2 * f1.a) != 0 || (B - f2.b) % (2 * f2.a) != 0) continue;
        if ((B * B - D) % (4 * A) != 0) continue;
        return {A, B, (B * B - D) / (4 * A)};
    }
    throw std::logic_error("no united B found");
}

// does the form x^2 + xy + k y^2 (delta odd) or x^2 + k y^2 (delta even)
// represent n with gcd(x, y) coprime to p (p = 0: any representation)? brute force over y
inline bool principal_represents_primitively(i64 delta, i64 n, i64 p) {
    const bool odd = delta % 2 != 0;
    for (i64 y = 0; delta * y * y <= 4 * n; ++y) {
        // 4n = (2x + y)^2 + delta y^2  or  n = x^2 + (delta/4) y^2
        i64 rest = odd ? 4 * n - delta * y * y : n - (delta / 4) * y * y;
        if (rest < 0) break;
        i64 r = static_cast<i64>(std::sqrt(static_cast<double>(rest)));
        while (r * r > rest) --r;
        while ((r + 1) * (r + 1) <= rest) ++r;
        if (r * r != rest) continue;
        for (i64 sgn : {1, -1}) {
            i64 x;
            if (odd) {
                i64 t = sgn * r - y;
                if (t % 2 != 0) continue;
                x = t / 2;
            } else {
                x = sgn * r;
            }
            i64 g = std::gcd(x < 0 ? -x : x, y);
            if (p == 0 || g % p != 0) return true;
        }
    }
    return false;
}

}  // namespace oracle

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "arith.hpp"
#include "primes.hpp"

namespace lowlying {

// (a + b sqrt(m)) / den in lowest terms, den > 0
struct K0Element {
    i128 a = 0;
    i128 b = 0;
    i128 den = 1;

    static K0Element make(i128 a, i128 b, i128 den = 1) {
        if (den == 0) throw std::invalid_argument("K0Element: zero denominator");
        if (den < 0) {
            a = -a;
            b = -b;
            den = -den;
        }
        i128 g = gcd_val(gcd_val(a, b), den);
        if (g > 1) {
            a /= g;
            b /= g;
            den /= g;
        }
        return {a, b, den};
    }

    bool operator==(const K0Element&) const = default;
};

struct RealQuadBase {
    i64 m = 0;
    i64 disc_K0 = 0;
    K0Element fundamental_unit;
    bool narrow_h1 = false;

    // omega_0 with O_K0 = Z[omega_0]
    bool half_basis() const { return m % 4 == 1; }

    double embed(const K0Element& x, int i) const {
        const double r = std::sqrt(static_cast<double>(m));
        return (static_cast<double>(x.a) + (i == 0 ? 1.0 : -1.0) * static_cast<double>(x.b) * r) / static_cast<double>(x.den);
    }

    K0Element mul(const K0Element& x, const K0Element& y) const {
        return K0Element::make(x.a * y.a + m * x.b * y.b, x.a * y.b + x.b * y.a, x.den * y.den);
    }

    K0Element add(const K0Element& x, const K0Element& y) const {
        return K0Element::make(x.a * y.den + y.a * x.den, x.b * y.den + y.b * x.den, x.den * y.den);
    }

    K0Element neg(const K0Element& x) const { return {-x.a, -x.b, x.den}; }

    bool is_integral(const K0Element& x) const {
        if (x.den == 1) return true;
        return x.den == 2 && half_basis() && (x.a & 1) && (x.b & 1);
    }

    // norm as an exact rational numerator / denominator
    i128 norm_numerator(const K0Element& x) const { return x.a * x.a - m * x.b * x.b; }
    i128 norm_denominator(const K0Element& x) const { return x.den * x.den; }

    i128 norm(const K0Element& x) const {
        i128 n = norm_numerator(x);
        i128 d = norm_denominator(x);
        if (n % d != 0) throw std::invalid_argument("norm of a non-integral element requested as integer");
        return n / d;
    }

    // coordinates (u, v) with x = u + v omega_0; x must be integral
    std::pair<i128, i128> coords(const K0Element& x) const {
        if (!is_integral(x)) throw std::invalid_argument("coords: element not integral");
        if (!half_basis()) return {x.a, x.b};
        // sqrt m = 2 omega_0 - 1
        if (x.den == 1) return {x.a - x.b, 2 * x.b};
        return {(x.a - x.b) / 2, x.b};
    }

    K0Element from_coords(i128 u, i128 v) const {
        if (!half_basis()) return K0Element::make(u, v, 1);
        return K0Element::make(2 * u + v, v, 2);
    }

    K0Element omega() const { return from_coords(0, 1); }
};

inline RealQuadBase make_base(i64 m) {
    RealQuadBase b;
    b.m = m;
    if (m == 2) {
        b.disc_K0 = 8;
        b.fundamental_unit = K0Element::make(1, 1, 1);
    } else if (m == 5) {
        b.disc_K0 = 5;
        b.fundamental_unit = K0Element::make(1, 1, 2);
    } else {
        throw std::invalid_argument("real quadratic base fields are limited to Q(sqrt 2) and Q(sqrt 5)");
    }
    if (b.disc_K0 != (m % 4 == 1 ? m : 4 * m)) throw std::logic_error("base discriminant inconsistent with m");
    // a unit of norm -1 forces narrow class number = class number = 1 here
    b.narrow_h1 = b.norm(b.fundamental_unit) == -1;
    if (!b.narrow_h1) throw std::logic_error("fundamental unit does not have norm -1");
    return b;
}

inline bool is_totally_negative(const RealQuadBase& base, const K0Element& beta) {
    if (!base.is_integral(beta)) throw std::invalid_argument("is_totally_negative: beta must be integral");
    // u +- v sqrt m < 0  <=>  trace < 0 and norm > 0
    return beta.a < 0 && base.norm_numerator(beta) > 0;
}

enum class RingCase { AdjoinSqrt, AdjoinHalfOnePlusSqrt };

inline const char* ring_case_name(RingCase r) {
    return r == RingCase::AdjoinSqrt ? "O_K0[sqrt(beta)]" : "O_K0[(1+sqrt(beta))/2]";
}

inline RingCase ring_case(const RealQuadBase& base, const K0Element& beta) {
    K0Element t = K0Element::make(beta.den - beta.a, -beta.b, 4 * beta.den);  // (1 - beta) / 4
    return base.is_integral(t) ? RingCase::AdjoinHalfOnePlusSqrt : RingCase::AdjoinSqrt;
}

struct CMQuartic {
    RealQuadBase base;
    K0Element beta;
    RingCase ring = RingCase::AdjoinSqrt;
    i128 norm_beta = 0;
    i128 rel_disc_norm = 0;
    i128 abs_delta = 0;
};

struct Discriminants {
    i128 rel_disc_norm;
    i128 abs_delta;
};

inline Discriminants discriminants(const RealQuadBase& base, const K0Element& beta, RingCase rc) {
    i128 nb = abs_val(base.norm(beta));
    i128 rel = rc == RingCase::AdjoinHalfOnePlusSqrt ? nb : 16 * nb;  // 4^N |N(beta)| with N = 2
    return {rel, rel * base.disc_K0 * base.disc_K0};
}

inline Discriminants discriminants(const CMQuartic& q) { return {q.rel_disc_norm, q.abs_delta}; }

inline CMQuartic make_cm_quartic(const RealQuadBase& base, const K0Element& beta) {
    if (!base.is_integral(beta)) throw std::invalid_argument("beta is not an algebraic integer of K0");
    for (int i = 0; i < 2; ++i) {
        double v = base.embed(beta, i);
        if (!(v < 0.0))
            throw std::invalid_argument("beta is not totally negative: embedding sigma_" + std::to_string(i + 1) +
                                        "(beta) = " + std::to_string(v) + " >= 0");
    }
    CMQuartic q;
    q.base = base;
    q.beta = beta;
    q.norm_beta = base.norm(beta);
    // squarefree up to units, enforced through |N(beta)|
    if (!is_squarefree(static_cast<u64>(abs_val(q.norm_beta))))
        throw std::invalid_argument("|N(beta)| = " + to_string(abs_val(q.norm_beta)) + " is not squarefree");
    q.ring = ring_case(base, beta);
    Discriminants d = discriminants(base, beta, q.ring);
    q.rel_disc_norm = d.rel_disc_norm;
    q.abs_delta = d.abs_delta;
    return q;
}

// constant of the principal-prime norm lower bound; the second case is derived
// from the same chain of inequalities, not quoted
inline double norm_form_constant(const CMQuartic& q) {
    const double D = static_cast<double>(q.base.disc_K0);
    return q.ring == RingCase::AdjoinSqrt ? 1.0 / (16.0 * D * D) : 1.0 / (D * D);
}

struct EmbeddingMatrices {
    Eigen::Matrix4cd B;
    Eigen::Matrix4cd G;
    double gamma_max = 0.0;
    double M_unit = 0.0;
    double inverse_residual = 0.0;      // ||B G - I||_inf
    double lu_inverse_residual = 0.0;   // ||G - B^{-1}||_inf against a generic LU inverse
    double max_inv_diff = 0.0;          // max |(Abar - A)^{-1}| entry
    double max_a_inv_diff = 0.0;        // max |A (Abar - A)^{-1}| and |Abar (Abar - A)^{-1}| entries
    double bound_inv_diff = 0.0;        // |D_K0|^{1/N}
    double bound_a_inv_diff = 0.0;      // 1/2 + |D_K0|^{1/N}
    bool entry_bound_ok = false;
    std::array<double, 4> sqrtbeta_abs{};  // |sqrt(beta)^{(i)}| over the four embeddings
};

inline double inf_norm(const Eigen::Matrix4cd& m) {
    double best = 0.0;
    for (int i = 0; i < 4; ++i) best = std::max(best, m.row(i).cwiseAbs().sum());
    return best;
}

inline EmbeddingMatrices build_embedding_matrices(const CMQuartic& q) {
    using cd = std::complex<double>;
    const RealQuadBase& base = q.base;
    const K0Element w = base.omega();
    Eigen::Matrix2cd X;
    for (int i = 0; i < 2; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = base.embed(w, i);
    }
    Eigen::Matrix2cd A = Eigen::Matrix2cd::Zero();
    EmbeddingMatrices e;
    for (int i = 0; i < 2; ++i) {
        const double sb = base.embed(q.beta, i);
        if (!(sb < 0.0)) throw std::logic_error("build_embedding_matrices: beta not totally negative");
        const cd root(0.0, std::sqrt(-sb));  // purely imaginary
        A(i, i) = q.ring == RingCase::AdjoinSqrt ? root : 0.5 * (1.0 + root);
        e.sqrtbeta_abs[i] = std::abs(root);
        e.sqrtbeta_abs[i + 2] = std::abs(root);
    }
    const Eigen::Matrix2cd Abar = A.conjugate();
    const double detX = std::abs(X.determinant());
    if (detX < 1e-12) throw std::logic_error("build_embedding_matrices: singular X");
    Eigen::Matrix2cd diff_inv = Eigen::Matrix2cd::Zero();
    for (int i = 0; i < 2; ++i) {
        cd d = Abar(i, i) - A(i, i);
        if (std::abs(d) < 1e-300) throw std::logic_error("build_embedding_matrices: Abar = A");
        diff_inv(i, i) = 1.0 / d;
    }
    const Eigen::Matrix2cd Xinv = X.inverse();
    e.B.block<2, 2>(0, 0) = X;
    e.B.block<2, 2>(0, 2) = A * X;
    e.B.block<2, 2>(2, 0) = X;
    e.B.block<2, 2>(2, 2) = Abar * X;
    e.G.block<2, 2>(0, 0) = Xinv * Abar * diff_inv;
    e.G.block<2, 2>(0, 2) = -Xinv * A * diff_inv;
    e.G.block<2, 2>(2, 0) = -Xinv * diff_inv;
    e.G.block<2, 2>(2, 2) = Xinv * diff_inv;
    e.inverse_residual = inf_norm(e.B * e.G - Eigen::Matrix4cd::Identity());
    e.lu_inverse_residual = inf_norm(e.G - e.B.inverse());
    e.gamma_max = e.G.cwiseAbs().maxCoeff();
    for (int i = 0; i < 2; ++i) {
        e.max_inv_diff = std::max(e.max_inv_diff, std::abs(diff_inv(i, i)));
        e.max_a_inv_diff = std::max({e.max_a_inv_diff, std::abs(A(i, i) * diff_inv(i, i)), std::abs(Abar(i, i) * diff_inv(i, i))});
    }
    const double droot = std::sqrt(static_cast<double>(base.disc_K0));  // |D_K0|^{1/N}, N = 2
    e.bound_inv_diff = droot;
    e.bound_a_inv_diff = 0.5 + droot;
    e.entry_bound_ok = e.max_inv_diff <= e.bound_inv_diff && e.max_a_inv_diff <= e.bound_a_inv_diff;
    // the unit group of K is W_K times that of K0, so M only sees the base unit
    for (int i = 0; i < 2; ++i) e.M_unit = std::max(e.M_unit, std::fabs(std::log(std::fabs(base.embed(base.fundamental_unit, i)))));
    return e;
}

struct SqrtBetaIdentity {
    double target = 0.0;          // (Delta / D^2)^{1/(2N)}
    double identity_err = 0.0;    // max_i | |sqrt(beta)^{(i)}| - target |
    double norm_err = 0.0;        // | prod_i |sqrt(beta)^{(i)}| - |N(beta)| | / |N(beta)|
};

inline SqrtBetaIdentity sqrtbeta_identity(const CMQuartic& q, const EmbeddingMatrices& e) {
    SqrtBetaIdentity s;
    const double D = static_cast<double>(q.base.disc_K0);
    s.target = std::pow(static_cast<double>(q.abs_delta) / (D * D), 0.25);
    double prod = 1.0;
    for (double v : e.sqrtbeta_abs) {
        s.identity_err = std::max(s.identity_err, std::fabs(v - s.target));
        prod *= v;
    }
    const double nb = static_cast<double>(abs_val(q.norm_beta));
    s.norm_err = std::fabs(prod - nb) / nb;
    return s;
}

// counts violations of N(x^2 - beta y^2) >= N(x)^2 + |N(beta)| N(y)^2 over random
// integral x, y (y != 0) with coordinates in [-1000, 1000]; exact integer arithmetic
inline long long norm_form_inequality_check(const RealQuadBase& base, const K0Element& beta, long long trials, u64 seed) {
    if (trials < 1) throw std::invalid_argument("norm_form_inequality_check: trials must be >= 1");
    if (!is_totally_negative(base, beta)) throw std::invalid_argument("norm_form_inequality_check: beta not totally negative");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<i64> coord(-1000, 1000);
    const i128 nbeta = abs_val(base.norm(beta));
    long long violations = 0;
    for (long long t = 0; t < trials; ++t) {
        K0Element x = base.from_coords(coord(rng), coord(rng));
        K0Element y;
        do {
            y = base.from_coords(coord(rng), coord(rng));
        } while (y.a == 0 && y.b == 0);
        K0Element z = base.add(base.mul(x, x), base.neg(base.mul(beta, base.mul(y, y))));
        i128 lhs = base.norm(z);
        i128 nx = base.norm(x);
        i128 ny = base.norm(y);
        i128 rhs = nx * nx + nbeta * ny * ny;
        if (lhs < rhs) ++violations;
    }
    return violations;
}

// prime of O_K0 above ell: degree 1 with omega_0 -> root (mod ell), or degree 2
struct K0Prime {
    u64 ell = 0;
    int degree = 1;
    i64 root = -1;
    bool ramified_in_K0 = false;
    u64 norm() const { return degree == 1 ? ell : ell * ell; }
};

inline std::string describe(const K0Prime& p) {
    if (p.degree == 2) return "(" + std::to_string(p.ell) + ") inert, N=" + std::to_string(p.norm());
    return "(" + std::to_string(p.ell) + ", omega-" + std::to_string(p.root) + ")" + (p.ramified_in_K0 ? " ramified" : "") +
           ", N=" + std::to_string(p.norm());
}

struct InertnessEntry {
    K0Prime prime;
    int chi = 0;
};

namespace detail {

// F_ell[t] / (t^2 - s t - r), elements c0 + c1 t
struct Fq2 {
    u64 ell, s, r;
    std::pair<u64, u64> mul(std::pair<u64, u64> x, std::pair<u64, u64> y) const {
        // t^2 = s t + r
        u64 c0 = (mulmod(x.first, y.first, ell) + mulmod(mulmod(x.second, y.second, ell), r, ell)) % ell;
        u64 c1 = (mulmod(x.first, y.second, ell) + mulmod(x.second, y.first, ell) + mulmod(mulmod(x.second, y.second, ell), s, ell)) % ell;
        return {c0, c1};
    }
    std::pair<u64, u64> pow(std::pair<u64, u64> x, u64 e) const {
        std::pair<u64, u64> out{1 % ell, 0};
        while (e) {
            if (e & 1) out = mul(out, x);
            x = mul(x, x);
            e >>= 1;
        }
        return out;
    }
};

// omega_0 satisfies t^2 = s t + r
inline std::pair<i64, i64> omega_poly(const RealQuadBase& b) {
    if (b.half_basis()) return {1, (b.m - 1) / 4};
    return {0, b.m};
}

inline u64 red(i128 v, u64 ell) { return static_cast<u64>(mod_floor<i128>(v, static_cast<i128>(ell))); }

inline std::vector<K0Prime> primes_above(const RealQuadBase& b, u64 ell) {
    auto [s, r] = omega_poly(b);
    std::vector<u64> roots;
    for (u64 t = 0; t < ell; ++t) {
        // brute force is fine at panel scale only for small ell; use formula otherwise
        if (ell > 64) break;
        if (red(static_cast<i128>(t) * t - s * static_cast<i128>(t) - r, ell) == 0) roots.push_back(t);
    }
    if (ell > 64) {
        // discriminant of t^2 - s t - r is s^2 + 4r = m (or 4m); ell odd here
        u64 disc = red(static_cast<i128>(s) * s + 4 * static_cast<i128>(r), ell);
        if (disc == 0) {
            u64 inv2 = (ell + 1) / 2;
            roots.push_back(mulmod(red(s, ell), inv2, ell));
        } else if (powmod(disc, (ell - 1) / 2, ell) == 1) {
            u64 sq = sqrt_mod_prime(disc, ell);
            u64 inv2 = (ell + 1) / 2;
            roots.push_back(mulmod((red(s, ell) + sq) % ell, inv2, ell));
            roots.push_back(mulmod((red(s, ell) + ell - sq) % ell, inv2, ell));
            std::sort(roots.begin(), roots.end());
        }
    }
    const bool ramified = static_cast<u64>(b.disc_K0) % ell == 0;
    std::vector<K0Prime> out;
    if (roots.empty()) {
        out.push_back({ell, 2, -1, false});
    } else if (ramified) {
        out.push_back({ell, 1, static_cast<i64>(roots.front()), true});
    } else {
        for (u64 t : roots) out.push_back({ell, 1, static_cast<i64>(t), false});
    }
    return out;
}

// x = u + v omega_0 reduced into the residue field of p; returned as (c0, c1)
inline std::pair<u64, u64> reduce_at(const RealQuadBase& b, const K0Element& x, const K0Prime& p) {
    auto [u, v] = b.coords(x);
    if (p.degree == 1) return {red(u + v * static_cast<i128>(p.root), p.ell), 0};
    return {red(u, p.ell), red(v, p.ell)};
}

inline int character_at(const RealQuadBase& b, const CMQuartic& q, const K0Prime& p) {
    const Fq2 F{p.ell, detail::red(omega_poly(b).first, p.ell), detail::red(omega_poly(b).second, p.ell)};
    auto bz = reduce_at(b, q.beta, p);
    const bool beta_zero = bz.first == 0 && bz.second == 0;
    if (beta_zero) return 0;
    if (p.ell == 2) {
        if (q.ring == RingCase::AdjoinSqrt) return 0;
        // alpha = (1 + sqrt beta)/2 has minimal polynomial t^2 - t + (1 - beta)/4:
        // split iff it has a root in the residue field (Artin-Schreier)
        K0Element c = K0Element::make(q.beta.den - q.beta.a, -q.beta.b, 4 * q.beta.den);
        auto cz = reduce_at(b, c, p);
        const u64 n = p.norm();
        for (u64 k = 0; k < n; ++k) {
            std::pair<u64, u64> t{k % 2, p.degree == 2 ? k / 2 : 0};
            auto t2 = p.degree == 2 ? F.mul(t, t) : std::pair<u64, u64>{t.first * t.first % 2, 0};
            u64 c0 = (t2.first + t.first + cz.first) % 2;  // t^2 - t + c == t^2 + t + c in char 2
            u64 c1 = (t2.second + t.second + cz.second) % 2;
            if (c0 == 0 && c1 == 0) return 1;
        }
        return -1;
    }
    if (p.degree == 1) return powmod(bz.first, (p.ell - 1) / 2, p.ell) == 1 ? 1 : -1;
    auto e = F.pow(bz, (p.ell * p.ell - 1) / 2);
    if (e.second != 0) throw std::logic_error("Euler criterion left the prime field");
    return e.first == 1 ? 1 : -1;
}

}  // namespace detail

// chi at each prime of O_K0 above ell: +1 split in K, -1 inert, 0 ramified
inline std::vector<InertnessEntry> inert_in_K(const CMQuartic& q, u64 ell) {
    if (!is_prime(ell)) throw std::invalid_argument("inert_in_K: ell must be prime");
    if (static_cast<u64>(q.base.disc_K0) % ell == 0)
        throw std::invalid_argument("inert_in_K: " + std::to_string(ell) + " ramifies in K0");
    std::vector<InertnessEntry> out;
    for (const K0Prime& p : detail::primes_above(q.base, ell)) out.push_back({p, detail::character_at(q.base, q, p)});
    return out;
}

struct QuarticInertSum {
    double value = 0.0;
    double tail_bound = 0.0;
};

// sum over primes q of O_K0 with N q <= cutoff and chi(q) = -1 of log Nq / (Nq^2 - 1)
inline QuarticInertSum quartic_inert_sum(const CMQuartic& q, u64 cutoff) {
    if (cutoff < 2) throw std::invalid_argument("quartic_inert_sum: cutoff must be >= 2");
    CompensatedSum acc;
    for (std::uint32_t ell : primes_up_to(cutoff)) {
        for (const K0Prime& p : detail::primes_above(q.base, ell)) {
            if (p.norm() > cutoff) continue;
            if (detail::character_at(q.base, q, p) != -1) continue;
            const double n = static_cast<double>(p.norm());
            acc.add(std::log(n) / (n * n - 1.0));
        }
    }
    const double c = static_cast<double>(cutoff);
    return {acc.value(), 2.0 * (std::log(c) + 1.0) / c};
}

struct AppendixReport {
    i64 m = 0;
    K0Element beta;
    RingCase ring = RingCase::AdjoinSqrt;
    i128 rel_disc_norm = 0;
    i128 delta = 0;
    double inverse_residual = 0.0;
    double lu_inverse_residual = 0.0;
    bool entry_bound_ok = false;
    double gamma_max = 0.0;
    double sqrtbeta_identity_err = 0.0;
    double sqrtbeta_norm_err = 0.0;
    long long normform_violations = 0;
    double M_unit = 0.0;
    bool totally_negative = false;
    bool discriminant_identity = false;
};

inline AppendixReport appendix_report(const CMQuartic& q, long long trials, u64 seed) {
    AppendixReport r;
    r.m = q.base.m;
    r.beta = q.beta;
    r.ring = q.ring;
    r.rel_disc_norm = q.rel_disc_norm;
    r.delta = q.abs_delta;
    r.totally_negative = is_totally_negative(q.base, q.beta);
    r.discriminant_identity = q.abs_delta == q.rel_disc_norm * q.base.disc_K0 * q.base.disc_K0 &&
                              (q.ring == RingCase::AdjoinSqrt || q.rel_disc_norm == abs_val(q.norm_beta));
    EmbeddingMatrices e = build_embedding_matrices(q);
    r.inverse_residual = e.inverse_residual;
    r.lu_inverse_residual = e.lu_inverse_residual;
    r.entry_bound_ok = e.entry_bound_ok;
    r.gamma_max = e.gamma_max;
    SqrtBetaIdentity s = sqrtbeta_identity(q, e);
    r.sqrtbeta_identity_err = s.identity_err;
    r.sqrtbeta_norm_err = s.norm_err;
    r.normform_violations = norm_form_inequality_check(q.base, q.beta, trials, seed);
    r.M_unit = e.M_unit;
    return r;
}

inline std::string to_string(const RealQuadBase& b, const K0Element& x) {
    std::string s = to_string(x.a);
    if (x.b != 0) s += (x.b < 0 ? " - " : " + ") + (abs_val(x.b) == 1 ? std::string() : to_string(abs_val(x.b))) + "sqrt(" + std::to_string(b.m) + ")";
    if (x.den != 1) s = "(" + s + ")/" + to_string(x.den);
    return s;
}

}  // namespace lowlying

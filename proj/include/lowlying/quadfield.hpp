#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "arith.hpp"

namespace lowlying {

// ax^2 + bxy + cy^2
struct QuadForm {
    i128 a = 0;
    i128 b = 0;
    i128 c = 0;

    i128 disc() const { return b * b - 4 * a * c; }
    bool operator==(const QuadForm&) const = default;
    auto operator<=>(const QuadForm& o) const {
        return std::tie(a, b, c) <=> std::tie(o.a, o.b, o.c);
    }
};

inline std::string to_string(const QuadForm& f) {
    return "(" + to_string(f.a) + "," + to_string(f.b) + "," + to_string(f.c) + ")";
}

// discriminants are capped so that every composition intermediate fits in 128 bits
inline constexpr u64 max_delta = 1000000000ULL;

inline bool is_fundamental(u64 delta) {
    if (delta < 3) return false;
    if (delta % 4 == 3) return is_squarefree(delta);  // -delta == 1 mod 4
    if (delta % 4 != 0) return false;
    u64 k = delta / 4;
    // -k == 2 or 3 mod 4  <=>  k == 2 or 1 mod 4
    return (k % 4 == 1 || k % 4 == 2) && is_squarefree(k);
}

inline void require_fundamental(u64 delta) {
    if (!is_fundamental(delta)) throw std::invalid_argument(std::to_string(delta) + " is not a fundamental discriminant");
    if (delta > max_delta) throw std::invalid_argument("discriminant above supported range 1e9");
}

inline int roots_of_unity(u64 delta) { return delta == 3 ? 6 : (delta == 4 ? 4 : 2); }

inline bool is_reduced(const QuadForm& f) {
    if (f.a <= 0) return false;
    if (abs_val(f.b) > f.a || f.a > f.c) return false;
    if ((abs_val(f.b) == f.a || f.a == f.c) && f.b < 0) return false;
    return true;
}

inline QuadForm reduce(QuadForm f) {
    if (f.a <= 0 || f.disc() >= 0) throw std::invalid_argument("reduce: need a > 0 and negative discriminant");
    auto normalize = [](QuadForm& g) {
        // b -> b + 2ar with r chosen so that -a < b <= a
        i128 r = floor_div<i128>(g.a - g.b, 2 * g.a);
        g.c = g.a * r * r + g.b * r + g.c;
        g.b = g.b + 2 * g.a * r;
    };
    normalize(f);
    while (f.a > f.c) {
        f = {f.c, -f.b, f.a};
        normalize(f);
    }
    if (f.a == f.c && f.b < 0) f.b = -f.b;
    return f;
}

inline QuadForm principal_form(u64 delta) {
    if (delta % 4 == 3) return {1, 1, static_cast<i128>((delta + 1) / 4)};
    return {1, 0, static_cast<i128>(delta / 4)};
}

inline QuadForm inverse(const QuadForm& f) { return reduce({f.a, -f.b, f.c}); }

// Gauss composition through Dirichlet united forms (Shanks' formulation), then reduction
inline QuadForm compose(QuadForm f1, QuadForm f2) {
    const i128 d = f1.disc();
    if (d != f2.disc()) throw std::invalid_argument("compose: mismatched discriminants");
    if (f1.a > f2.a) std::swap(f1, f2);
    const i128 s = (f1.b + f2.b) / 2;
    const i128 n = f2.b - s;
    i128 y1 = 0;
    i128 g = f1.a;
    if (f2.a % f1.a != 0) {
        Xgcd e = xgcd(f2.a, f1.a);  // e.x * a2 + e.y * a1 = g
        y1 = e.x;
        g = e.g;
    }
    i128 x2 = 0;
    i128 y2 = -1;
    i128 d1 = g;
    if (s % g != 0) {
        Xgcd e = xgcd(s, g);  // e.x * s + e.y * g = d1
        x2 = e.x;
        y2 = -e.y;
        d1 = e.g;
    }
    const i128 v1 = f1.a / d1;
    const i128 v2 = f2.a / d1;
    const i128 r = mod_floor<i128>(y1 * y2 * n - x2 * f2.c, v1);
    QuadForm out;
    out.b = f2.b + 2 * v2 * r;
    out.a = v1 * v2;
    out.c = (out.b * out.b - d) / (4 * out.a);
    return reduce(out);
}

inline QuadForm power(QuadForm f, u64 e) {
    QuadForm result = principal_form(static_cast<u64>(-f.disc()));
    f = reduce(f);
    while (e) {
        if (e & 1) result = compose(result, f);
        e >>= 1;
        if (e) f = compose(f, f);
    }
    return result;
}

inline bool is_principal_form(const QuadForm& f) { return reduce(f).a == 1; }

class ClassGroup {
public:
    explicit ClassGroup(u64 delta) : delta_(delta) {
        require_fundamental(delta);
        const i64 D = -static_cast<i64>(delta);
        const i64 amax = static_cast<i64>(isqrt(delta / 3));
        for (i64 a = 1; a <= amax; ++a) {
            // b == delta (mod 2), |b| <= a, b^2 - 4ac = D
            for (i64 b = -a + 1; b <= a; ++b) {
                if (((b - D) & 1) != 0) continue;
                i64 num = b * b - D;
                if (num % (4 * a) != 0) continue;
                i64 c = num / (4 * a);
                if (c < a) continue;
                if (b < 0 && (a == c)) continue;
                if (std::gcd(std::gcd(a, abs_val(b)), c) != 1) continue;
                forms_.push_back({a, b, c});
            }
        }
        std::sort(forms_.begin(), forms_.end());
        principal_ = principal_form(delta);
    }

    u64 delta() const { return delta_; }
    u64 h() const { return forms_.size(); }
    const std::vector<QuadForm>& forms() const { return forms_; }
    const QuadForm& principal() const { return principal_; }

    // position of a (reduced) form in forms()
    std::size_t index_of(const QuadForm& f) const {
        QuadForm r = reduce(f);
        auto it = std::lower_bound(forms_.begin(), forms_.end(), r);
        if (it == forms_.end() || !(*it == r)) throw std::logic_error("form not in class group: " + to_string(r));
        return static_cast<std::size_t>(it - forms_.begin());
    }

    // order of the class of f, by stripping prime factors from h
    u64 order(const QuadForm& f) const {
        u64 d = h();
        for (u64 q : prime_factors(d)) {
            while (d % q == 0 && power(f, d / q).a == 1) d /= q;
        }
        return d;
    }

private:
    u64 delta_;
    std::vector<QuadForm> forms_;
    QuadForm principal_;
};

inline ClassGroup class_group(u64 delta) { return ClassGroup(delta); }

// Kronecker character of the field: 0 ramified, +1 split, -1 inert
inline int kronecker_chi(u64 delta, u64 p) { return kronecker(-static_cast<i64>(delta), p); }

enum class SplitType { Split, Inert, Ramified };

inline const char* split_type_name(SplitType s) {
    switch (s) {
        case SplitType::Split: return "split";
        case SplitType::Inert: return "inert";
        case SplitType::Ramified: return "ramified";
    }
    return "?";
}

struct PrimeIdealRecord {
    u64 p = 0;
    int f = 1;
    u64 norm = 0;
    SplitType split_type = SplitType::Split;
    QuadForm ideal_class;
    u64 order = 1;
    bool principal = true;
};

// reduced class of a prime of degree one above p (p split or ramified);
// b is the least positive root of b^2 == -delta (mod 4p) with b == delta (mod 2)
inline QuadForm prime_form(u64 delta, u64 p) {
    const i128 D = -static_cast<i128>(delta);
    i128 b = 0;
    if (p == 2) {
        switch (delta % 8) {
            case 7: b = 1; break;   // split
            case 3: throw std::invalid_argument("prime_form: 2 is inert");
            case 4: b = 2; break;   // ramified, -delta/4 == 3 mod 4
            case 0: b = 0; break;   // ramified, 8 | delta
            default: throw std::invalid_argument("prime_form: bad discriminant");
        }
    } else if (delta % p == 0) {
        b = (delta & 1) ? static_cast<i128>(p) : 0;
    } else {
        u64 r = sqrt_mod_prime(static_cast<u64>(mod_floor<i128>(D, p)), p);
        r = std::min(r, p - r);
        // parity fix-up: b == delta (mod 2), b in (0, p]
        b = static_cast<i128>(r);
        if (((b - D) & 1) != 0) b = static_cast<i128>(p) - b;
        if (b == 0) b = static_cast<i128>(p);
    }
    i128 num = b * b - D;
    if (num % (4 * static_cast<i128>(p)) != 0) throw std::logic_error("prime_form: no root for p=" + std::to_string(p));
    return QuadForm{static_cast<i128>(p), b, num / (4 * static_cast<i128>(p))};
}

inline std::vector<PrimeIdealRecord> prime_ideal(const ClassGroup& cg, u64 p) {
    if (!is_prime(p)) throw std::invalid_argument("prime_ideal: " + std::to_string(p) + " is not prime");
    const u64 delta = cg.delta();
    const int chi = kronecker_chi(delta, p);
    std::vector<PrimeIdealRecord> out;
    if (chi == -1) {
        out.push_back({p, 2, p * p, SplitType::Inert, cg.principal(), 1, true});
        return out;
    }
    QuadForm raw = prime_form(delta, p);
    QuadForm cls = reduce(raw);
    u64 d = cg.order(cls);
    if (chi == 0) {
        out.push_back({p, 1, p, SplitType::Ramified, cls, d, cls.a == 1});
        return out;
    }
    QuadForm conj = reduce({raw.a, -raw.b, raw.c});
    out.push_back({p, 1, p, SplitType::Split, cls, d, cls.a == 1});
    out.push_back({p, 1, p, SplitType::Split, conj, d, conj.a == 1});
    return out;
}

inline std::vector<PrimeIdealRecord> prime_ideal(u64 delta, u64 p) { return prime_ideal(ClassGroup(delta), p); }

struct BrauerSiegelRow {
    u64 delta;
    u64 h;
    double ratio;
};

inline BrauerSiegelRow brauer_siegel_row(const ClassGroup& cg) {
    double ratio = std::log(static_cast<double>(cg.h())) / (0.5 * std::log(static_cast<double>(cg.delta())));
    return {cg.delta(), cg.h(), ratio};
}

inline BrauerSiegelRow brauer_siegel_row(u64 delta) { return brauer_siegel_row(ClassGroup(delta)); }

// Decomposition of the class group into cyclic factors, with discrete logs
// for every element. Built by repeatedly extracting an element of maximal
// order modulo the subgroup found so far; intended for h up to a few thousand.
class GroupStructure {
public:
    explicit GroupStructure(const ClassGroup& cg) : cg_(&cg) {
        const std::size_t h = cg.h();
        const std::size_t e = cg.index_of(cg.principal());
        std::vector<std::vector<i64>> logs(h);
        std::vector<char> in_sub(h, 0);
        in_sub[e] = 1;
        logs[e] = {};
        std::vector<std::size_t> members = {e};
        std::size_t found = 1;
        while (found < h) {
            // order of each outside element modulo the current subgroup
            i64 best_n = 0;
            std::vector<std::size_t> candidates;
            for (std::size_t i = 0; i < h; ++i) {
                if (in_sub[i]) continue;
                QuadForm g = cg.forms()[i];
                QuadForm x = g;
                i64 n = 1;
                while (!in_sub[cg.index_of(x)]) {
                    x = compose(x, g);
                    ++n;
                }
                if (n > best_n) {
                    best_n = n;
                    candidates.clear();
                }
                if (n == best_n) candidates.push_back(i);
            }
            // among maximal candidates, pick one whose n-th power has exponents divisible by n
            bool placed = false;
            for (std::size_t i : candidates) {
                QuadForm g = cg.forms()[i];
                const auto& ex = logs[cg.index_of(power(g, static_cast<u64>(best_n)))];
                bool ok = std::all_of(ex.begin(), ex.end(), [&](i64 v) { return v % best_n == 0; });
                if (!ok) continue;
                QuadForm adj = g;
                for (std::size_t k = 0; k < ex.size(); ++k) {
                    i64 shift = mod_floor<i64>(-ex[k] / best_n, invariants_[k]);
                    adj = compose(adj, power(generators_[k], static_cast<u64>(shift)));
                }
                generators_.push_back(adj);
                invariants_.push_back(best_n);
                placed = true;
                break;
            }
            if (!placed) throw std::logic_error("group structure: no liftable generator found");
            // enlarge the subgroup: products m * adj^j for j = 1..n-1
            std::vector<std::size_t> grown = members;
            const QuadForm adj = generators_.back();
            const std::size_t k = generators_.size() - 1;
            for (std::size_t m : members) logs[m].resize(generators_.size(), 0);
            for (std::size_t m : members) {
                QuadForm x = cg.forms()[m];
                for (i64 j = 1; j < best_n; ++j) {
                    x = compose(x, adj);
                    std::size_t idx = cg.index_of(x);
                    if (in_sub[idx]) throw std::logic_error("group structure: subgroup not direct");
                    in_sub[idx] = 1;
                    logs[idx] = logs[m];
                    logs[idx][k] = j;
                    grown.push_back(idx);
                }
            }
            members = std::move(grown);
            found = members.size();
        }
        for (auto& v : logs) v.resize(generators_.size(), 0);
        logs_ = std::move(logs);
    }

    const std::vector<i64>& invariants() const { return invariants_; }
    const std::vector<QuadForm>& generators() const { return generators_; }
    const std::vector<i64>& log_of(const QuadForm& f) const { return logs_[cg_->index_of(f)]; }
    std::size_t character_count() const { return cg_->h(); }

    // character values chi_k(f) for k ranging over all exponent vectors (mixed radix)
    template <typename F>
    void for_each_character(F&& fn) const {
        std::vector<i64> k(invariants_.size(), 0);
        for (std::size_t t = 0; t < cg_->h(); ++t) {
            fn(k);
            for (std::size_t i = 0; i < k.size(); ++i) {
                if (++k[i] < invariants_[i]) break;
                k[i] = 0;
            }
        }
    }

    // phase of chi_k(f) as a fraction of a full turn
    double character_phase(const std::vector<i64>& k, const QuadForm& f) const {
        const auto& e = log_of(f);
        double turn = 0.0;
        for (std::size_t i = 0; i < k.size(); ++i)
            turn += static_cast<double>(mod_floor<i64>(k[i] * e[i], invariants_[i])) / static_cast<double>(invariants_[i]);
        return turn - std::floor(turn);
    }

private:
    const ClassGroup* cg_;
    std::vector<i64> invariants_;
    std::vector<QuadForm> generators_;
    std::vector<std::vector<i64>> logs_;
};

}  // namespace lowlying

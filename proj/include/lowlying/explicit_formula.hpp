#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "primes.hpp"
#include "quadfield.hpp"
#include "sweep.hpp"
#include "testfn.hpp"

namespace lowlying {

inline constexpr double euler_gamma = std::numbers::egamma;

// gamma from H_n - log n with the Euler-Maclaurin correction series
inline double euler_gamma_from_limit(int n = 10000) {
    double h = 0.0;
    for (int k = n; k >= 1; --k) h += 1.0 / k;
    const double x = static_cast<double>(n);
    const double x2 = x * x;
    return h - std::log(x) - 1.0 / (2.0 * x) + 1.0 / (12.0 * x2) - 1.0 / (120.0 * x2 * x2) + 1.0 / (252.0 * x2 * x2 * x2);
}

struct DensityBreakdown {
    u64 delta = 0;
    u64 h = 0;
    double sigma = 0.0;
    double log_delta = 0.0;
    double cosh_term = 0.0;
    double const_term = 0.0;
    double s1 = 0.0;
    double s2 = 0.0;
    double sinh_term = 0.0;
    double total_D = 0.0;
    double residual_vs_usp = 0.0;
    double gamma_em = euler_gamma;
};

struct TermLogEntry {
    u64 p = 0;
    int f = 1;
    int m = 1;
    double norm_power = 0.0;  // (p^f)^m
    double weight = 0.0;      // contribution of this prime ideal and m
    bool principal = true;    // true: S2 term; false: S1 term
};

struct PrimeSums {
    double s1 = 0.0;
    double s2 = 0.0;
};

struct PrimeSumOptions {
    // enumerate primes up to guard * Delta^sigma and evaluate phihat on every
    // candidate term; guard > 1 only adds terms that phihat must kill
    double guard = 1.0;
    std::vector<TermLogEntry>* log = nullptr;
};

// S1 and S2 over every prime ideal and prime power inside the support of phihat
inline PrimeSums prime_sums(const ClassGroup& cg, const TestFunction& t, const PrimeTable& primes,
                            const PrimeSumOptions& opt = {}) {
    const u64 delta = cg.delta();
    const double L = std::log(static_cast<double>(delta));
    const double X = t.sigma() * L + std::log(opt.guard);  // candidate window for m log N
    const double support = t.sigma() * L;
    const u64 bound = static_cast<u64>(std::floor(std::exp(X)));
    if (bound > primes.limit()) throw std::out_of_range("prime_sums: prime table too small for Delta^sigma");
    CompensatedSum s1;
    CompensatedSum s2;
    auto add_terms = [&](u64 p, int f, double log_n, int multiplicity, int step, bool principal) {
        // m runs over multiples of step, starting at step (principal) or at the first multiple >= 2
        int m = principal ? 1 : step;
        if (!principal && m < 2) m = 2;
        for (; m * log_n < X; m += step) {
            double y = m * log_n / L;
            double w = -2.0 * log_n * t.phihat(y) * std::exp(-0.5 * m * log_n);
            if (principal)
                s2.add(multiplicity * w);
            else
                s1.add(multiplicity * w);
            if (opt.log && m * log_n < support) {
                for (int k = 0; k < multiplicity; ++k)
                    opt.log->push_back({p, f, m, std::exp(m * log_n), w, principal});
            }
        }
    };
    for (std::uint32_t p32 : primes.upto(bound)) {
        const u64 p = p32;
        const double lp = std::log(static_cast<double>(p));
        const int chi = kronecker_chi(delta, p);
        if (chi == -1) {
            if (2.0 * lp < X) add_terms(p, 2, 2.0 * lp, 1, 1, true);
            continue;
        }
        const QuadForm cls = reduce(prime_form(delta, p));
        const int mult = chi == 0 ? 1 : 2;
        if (cls.a == 1) {
            add_terms(p, 1, lp, mult, 1, true);
            continue;
        }
        // non-principal: only powers m >= 2 can enter, so most large p stop here
        if (2.0 * lp >= X) continue;
        const u64 d = cg.order(cls);
        if (static_cast<double>(d) * lp >= X) continue;
        add_terms(p, 1, lp, mult, static_cast<int>(d), false);
    }
    return {s1.value(), s2.value()};
}

inline double s1_sum(const ClassGroup& cg, const TestFunction& t) {
    PrimeTable primes(static_cast<u64>(std::pow(static_cast<double>(cg.delta()), t.sigma())) + 2);
    return prime_sums(cg, t, primes).s1;
}

inline double s2_sum(const ClassGroup& cg, const TestFunction& t) {
    PrimeTable primes(static_cast<u64>(std::pow(static_cast<double>(cg.delta()), t.sigma())) + 2);
    return prime_sums(cg, t, primes).s2;
}

inline double const_term(const TestFunction& t, double log_delta) {
    return t.phihat(0.0) * (log_delta - 2.0 * euler_gamma - 2.0 * std::log(8.0 * std::numbers::pi));
}

// Evaluates the averaged explicit formula for one test function over many
// discriminants; holds the shared prime table and the Delta-free sinh integral.
class DensityEngine {
public:
    DensityEngine(TestFunction t, u64 max_delta)
        : t_(std::move(t)),
          primes_(static_cast<u64>(std::pow(static_cast<double>(std::max<u64>(max_delta, 3)), t_.sigma())) + 2),
          max_delta_(max_delta),
          sinh_(sinh_integral(t_)) {}

    const TestFunction& test_function() const { return t_; }
    const PrimeTable& primes() const { return primes_; }
    double sinh_value() const { return sinh_; }

    DensityBreakdown operator()(const ClassGroup& cg, PrimeSums* sums_out = nullptr) const {
        if (cg.delta() > max_delta_) throw std::out_of_range("DensityEngine: Delta above configured maximum");
        DensityBreakdown b;
        b.delta = cg.delta();
        b.h = cg.h();
        b.sigma = t_.sigma();
        b.log_delta = std::log(static_cast<double>(cg.delta()));
        b.cosh_term = cosh_term(t_, static_cast<long long>(cg.h()), b.log_delta);
        b.const_term = const_term(t_, b.log_delta);
        PrimeSums s = prime_sums(cg, t_, primes_);
        if (sums_out) *sums_out = s;
        b.s1 = s.s1;
        b.s2 = s.s2;
        b.sinh_term = 2.0 * sinh_;
        b.total_D = (b.cosh_term + b.const_term + b.s1 + b.s2 + b.sinh_term) / b.log_delta;
        b.residual_vs_usp = b.total_D - usp_prediction(t_);
        return b;
    }

    DensityBreakdown operator()(u64 delta) const { return (*this)(ClassGroup(delta)); }

private:
    TestFunction t_;
    PrimeTable primes_;
    u64 max_delta_;
    double sinh_;
};

inline DensityBreakdown density(u64 delta, const TestFunction& t) { return DensityEngine(t, delta)(delta); }

inline std::vector<RowResult<DensityBreakdown>> density_sweep(const std::vector<u64>& deltas, const TestFunction& t,
                                                              unsigned threads = 1) {
    u64 top = 3;
    for (u64 d : deltas) top = std::max(top, d);
    DensityEngine engine(t, top);
    return sweep_rows<DensityBreakdown>(deltas, threads, [&](u64 d) { return engine(d); });
}

}  // namespace lowlying

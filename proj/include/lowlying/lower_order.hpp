#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/special_functions/zeta.hpp>

#include "dirichlet.hpp"
#include "explicit_formula.hpp"
#include "primes.hpp"
#include "quadfield.hpp"
#include "testfn.hpp"

namespace lowlying {

// residue and Euler constant of the base field Q
inline constexpr double rho_K0 = 1.0;
inline constexpr double gamma_K0 = euler_gamma;

// residue of zeta_K at s = 1: 2 pi h / (w sqrt(Delta))
inline double rho_exact(const ClassGroup& cg) {
    return 2.0 * std::numbers::pi * static_cast<double>(cg.h()) /
           (roots_of_unity(cg.delta()) * std::sqrt(static_cast<double>(cg.delta())));
}

class LSeriesMismatch : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// L(1, chi) by the character series, cross-checked against the class number formula
inline double L_one(const ClassGroup& cg, const KroneckerCharacter& chi) {
    const double series = L_one_series(chi).value;
    const double exact = rho_exact(cg);
    if (std::fabs(series - exact) > 1e-10 * std::max(1.0, exact))
        throw LSeriesMismatch("L(1,chi) series " + std::to_string(series) + " disagrees with class number formula " +
                              std::to_string(exact) + " at Delta=" + std::to_string(cg.delta()));
    return series;
}

inline double L_one(u64 delta) {
    ClassGroup cg(delta);
    return L_one(cg, KroneckerCharacter(delta));
}

inline SeriesValue L_prime_one(u64 delta) {
    require_fundamental(delta);
    return L_prime_one_series(KroneckerCharacter(delta));
}

// gamma_K = gamma L(1,chi) + L'(1,chi): constant term of (s-1) zeta(s) L(s,chi) at s = 1
inline double gamma_K(double L1, double L1prime) { return euler_gamma * L1 + L1prime; }

inline double gamma_K(u64 delta) {
    KroneckerCharacter chi(delta);
    ClassGroup cg(delta);
    return gamma_K(L_one(cg, chi), L_prime_one_series(chi).value);
}

struct InertSum {
    double value = 0.0;
    double tail_bound = 0.0;
};

// sum over inert q <= cutoff of log q / (q^2 - 1)
template <typename Chi>
InertSum inert_sum_with(Chi&& chi, std::span<const std::uint32_t> primes, u64 cutoff) {
    if (cutoff < 2) throw std::invalid_argument("inert_sum: cutoff must be >= 2");
    CompensatedSum acc;
    for (std::uint32_t q : primes) {
        if (q > cutoff) break;
        if (chi(q) != -1) continue;
        const double qd = static_cast<double>(q);
        acc.add(std::log(qd) / (qd * qd - 1.0));
    }
    const double c = static_cast<double>(cutoff);
    return {acc.value(), (std::log(c) + 1.0) / c};
}

inline InertSum inert_sum(u64 delta, u64 cutoff) {
    require_fundamental(delta);
    auto primes = primes_up_to(cutoff);
    return inert_sum_with([&](u64 q) { return kronecker_chi(delta, q); }, primes, cutoff);
}

inline double tau_from_parts(double gamma_k, double rho_k, double inert) {
    return 4.0 * gamma_K0 / rho_K0 - 2.0 * gamma_k / rho_k - 4.0 * inert;
}

// log-derivative of zeta_ram at 1 enters with a minus sign: sum_{p | Delta} log p / (p - 1)
inline double ramified_log_derivative_term(u64 delta) {
    double s = 0.0;
    for (u64 p : prime_factors(delta)) s += std::log(static_cast<double>(p)) / (static_cast<double>(p) - 1.0);
    return s;
}

inline double beta0_formula(double gamma_k, double rho_k, u64 delta) {
    return 2.0 * gamma_K0 / rho_K0 - gamma_k / rho_k + ramified_log_derivative_term(delta);
}

// log U(s) = log((s-1) zeta(s)) - log L(s,chi) - log zeta_ram(s)
inline double log_U(u64 delta, double s) {
    double v = std::log((s - 1.0) * boost::math::zeta(s)) - std::log(L_smoothed(delta, s));
    for (u64 p : prime_factors(delta)) v += std::log1p(-std::pow(static_cast<double>(p), -s));
    return v;
}

struct Beta0Numeric {
    double value = 0.0;
    double step = 0.0;
    double richardson_change = 0.0;  // |R(step) - R(step/2)|
};

class DifferentiationUnstable : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// d/ds log U at s = 1 by Richardson-extrapolated central differences
inline Beta0Numeric beta0_numeric(u64 delta, double step = 1e-4) {
    if (!(step >= 1e-6 && step <= 1e-2)) throw std::invalid_argument("beta0_numeric: step must lie in [1e-6, 1e-2]");
    require_fundamental(delta);
    auto central = [&](double h) { return (log_U(delta, 1.0 + h) - log_U(delta, 1.0 - h)) / (2.0 * h); };
    const double d1 = central(step);
    const double d2 = central(step / 2);
    const double d4 = central(step / 4);
    const double r1 = (4.0 * d2 - d1) / 3.0;
    const double r2 = (4.0 * d4 - d2) / 3.0;
    Beta0Numeric out{r2, step, std::fabs(r1 - r2)};
    if (!std::isfinite(r2) || out.richardson_change > 1e-6)
        throw DifferentiationUnstable("beta0_numeric unstable at Delta=" + std::to_string(delta) +
                                      " with step " + std::to_string(step));
    return out;
}

struct EulerBound {
    double gamma_basis = 0.0;  // max |entry| of the inverse embedding matrix
    double phi0 = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

// |gamma_K| <= rho_K (1 + n 2^n max(1, Phi0^n)) with n = 2; unit rank 0 so the
// regulator factor is 1
inline EulerBound euler_bound_check(u64 delta, double gamma_k, double rho_k) {
    using cd = std::complex<double>;
    const double sq = std::sqrt(static_cast<double>(delta));
    const cd omega = (delta % 4 == 0) ? cd(0.0, 0.5 * sq) : cd(0.5, 0.5 * sq);
    // rows are the two complex embeddings applied to the basis {1, omega}
    const cd m00 = 1.0, m01 = omega, m10 = 1.0, m11 = std::conj(omega);
    const cd det = m00 * m11 - m01 * m10;
    if (std::abs(det) < 1e-12) throw std::logic_error("euler_bound_check: singular basis matrix");
    const cd inv[4] = {m11 / det, -m01 / det, -m10 / det, m00 / det};
    EulerBound e;
    for (const cd& z : inv) e.gamma_basis = std::max(e.gamma_basis, std::abs(z));
    const int n = 2;
    e.phi0 = std::pow(2.0, n - 1) * std::pow(n, 2 * n) * std::pow(e.gamma_basis, n - 1);
    e.lhs = std::fabs(gamma_k);
    e.rhs = rho_k * (1.0 + n * std::pow(2.0, n) * std::max(1.0, std::pow(e.phi0, n)));
    e.holds = e.lhs <= e.rhs;
    return e;
}

inline EulerBound euler_bound_check(u64 delta) {
    KroneckerCharacter chi(delta);
    ClassGroup cg(delta);
    const double rho = rho_exact(cg);
    return euler_bound_check(delta, gamma_K(L_one(cg, chi), L_prime_one_series(chi).value), rho);
}

// cosh term + phihat(0)(-2 gamma - 2 log 8 pi) + 2 sinh integral, N = 1
inline double L1_term(const TestFunction& t, u64 h, double log_delta, double sinh_value) {
    return cosh_term(t, static_cast<long long>(h), log_delta) +
           t.phihat(0.0) * (-2.0 * euler_gamma - 2.0 * std::log(8.0 * std::numbers::pi)) + 2.0 * sinh_value;
}

inline double L1_term(u64 delta, const TestFunction& t, u64 h) {
    require_fundamental(delta);
    return L1_term(t, h, std::log(static_cast<double>(delta)), sinh_integral(t));
}

struct ResidualPair {
    double lhs = 0.0;
    double rhs = 0.0;
};

struct LowerOrderReport {
    u64 delta = 0;
    u64 h = 0;
    bool h_odd = false;
    double rho_K0 = lowlying::rho_K0;
    double gamma_K0 = lowlying::gamma_K0;
    double L1chi = 0.0;
    double L1chi_tail = 0.0;
    double L1chi_prime = 0.0;
    double L1chi_prime_tail = 0.0;
    double rho_K = 0.0;
    double gamma_K = 0.0;
    double inert_sum = 0.0;
    double inert_tail = 0.0;
    double tau = 0.0;
    double L1_term = 0.0;
    double beta0_formula = 0.0;
    double beta0_numeric = 0.0;
    double beta0_step = 0.0;
    EulerBound euler;
    ResidualPair residual;
    DensityBreakdown density;
};

struct LowerOrderOptions {
    u64 cutoff_inert = 10000000;
    double beta0_step = 1e-4;
    bool with_beta0 = true;
    bool require_odd_h = false;
};

// Everything of the first lower-order term for a range of discriminants, with
// one shared prime table and one shared density engine.
class LowerOrderEngine {
public:
    LowerOrderEngine(TestFunction t, u64 max_delta, LowerOrderOptions opt = {})
        : opt_(opt),
          density_(std::move(t), max_delta),
          inert_primes_(opt.cutoff_inert >= 2 ? primes_up_to(opt.cutoff_inert)
                                              : throw std::invalid_argument("inert_sum: cutoff must be >= 2")) {}

    const DensityEngine& density_engine() const { return density_; }
    const LowerOrderOptions& options() const { return opt_; }

    LowerOrderReport operator()(u64 delta) const {
        ClassGroup cg(delta);
        LowerOrderReport r;
        r.delta = delta;
        r.h = cg.h();
        r.h_odd = cg.h() % 2 == 1;
        if (r.h_odd && prime_factors(delta).size() != 1)
            throw std::logic_error("odd class number with more than one ramified prime at Delta=" + std::to_string(delta));
        if (opt_.require_odd_h && !r.h_odd) throw std::invalid_argument("Delta=" + std::to_string(delta) + " has even class number");
        KroneckerCharacter chi(delta);
        SeriesValue l1 = L_one_series(chi);
        r.rho_K = rho_exact(cg);
        if (std::fabs(l1.value - r.rho_K) > 1e-10 * std::max(1.0, r.rho_K))
            throw LSeriesMismatch("rho_K != L(1,chi) at Delta=" + std::to_string(delta));
        r.L1chi = l1.value;
        r.L1chi_tail = l1.tail_bound;
        SeriesValue lp = L_prime_one_series(chi);
        r.L1chi_prime = lp.value;
        r.L1chi_prime_tail = lp.tail_bound;
        r.gamma_K = gamma_K(r.L1chi, r.L1chi_prime);
        InertSum is = inert_sum_with(chi, inert_primes_, opt_.cutoff_inert);
        r.inert_sum = is.value;
        r.inert_tail = is.tail_bound;
        r.tau = tau_from_parts(r.gamma_K, r.rho_K, r.inert_sum);
        r.beta0_formula = beta0_formula(r.gamma_K, r.rho_K, delta);
        if (opt_.with_beta0) {
            Beta0Numeric b = beta0_numeric(delta, opt_.beta0_step);
            r.beta0_numeric = b.value;
            r.beta0_step = b.step;
        } else {
            r.beta0_numeric = std::nan("");
        }
        r.euler = euler_bound_check(delta, r.gamma_K, r.rho_K);
        r.density = density_(cg);
        const TestFunction& t = density_.test_function();
        r.L1_term = L1_term(t, cg.h(), r.density.log_delta, density_.sinh_value());
        r.residual.lhs = (r.density.total_D - usp_prediction(t)) * r.density.log_delta;
        r.residual.rhs = t.phihat(0.0) * r.tau + r.L1_term;
        return r;
    }

private:
    LowerOrderOptions opt_;
    DensityEngine density_;
    std::vector<std::uint32_t> inert_primes_;
};

inline double tau(u64 delta, u64 cutoff) {
    require_fundamental(delta);
    ClassGroup cg(delta);
    KroneckerCharacter chi(delta);
    const double rho = rho_exact(cg);
    const double gk = gamma_K(L_one(cg, chi), L_prime_one_series(chi).value);
    auto primes = primes_up_to(cutoff);
    return tau_from_parts(gk, rho, inert_sum_with(chi, primes, cutoff).value);
}

inline ResidualPair residual_decomposition(u64 delta, const TestFunction& t, u64 cutoff) {
    LowerOrderOptions opt;
    opt.cutoff_inert = cutoff;
    opt.with_beta0 = false;
    return LowerOrderEngine(t, delta, opt)(delta).residual;
}

inline LowerOrderReport lower_order_report(u64 delta, const TestFunction& t, const LowerOrderOptions& opt = {}) {
    return LowerOrderEngine(t, delta, opt)(delta);
}

}  // namespace lowlying

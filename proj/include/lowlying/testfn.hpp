#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace lowlying {

class QuadratureError : public std::runtime_error {
    static std::string fmt_estimate(double e) {
        std::ostringstream os;
        os << e;
        return os.str();
    }

public:
    QuadratureError(const std::string& what, double estimate)
        : std::runtime_error(what + " (error estimate " + fmt_estimate(estimate) + ")"), estimate_(estimate) {}
    double estimate() const { return estimate_; }

private:
    double estimate_;
};

namespace detail {

// adaptive Gauss-Kronrod on [a, b]; throws when the error estimate exceeds
// max(abs_tol, rel_tol * \int |f|)
template <typename F>
double integrate(F&& f, double a, double b, double abs_tol, const char* what, double rel_tol = 0.0) {
    if (b <= a) return 0.0;
    double err = 0.0;
    double l1 = 0.0;
    double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-13, &err, &l1);
    if (!std::isfinite(v) || err > std::max(abs_tol, rel_tol * l1)) throw QuadratureError(what, err);
    return v;
}

}  // namespace detail

enum class TestFunctionKind { Fejer, PiecewiseLinearHat };

// Even pair (phi, phihat) with phihat(y) = 0 for |y| >= sigma and
// phihat(y) = \int phi(x) e^{-2 pi i x y} dx. Immutable after construction.
class TestFunction {
public:
    double sigma() const { return sigma_; }
    double scale() const { return scale_; }
    TestFunctionKind kind() const { return kind_; }

    // knots on [0, sigma] with values already multiplied by scale
    const std::vector<std::pair<double, double>>& half_knots() const { return knots_; }

    double phihat(double y) const {
        y = std::fabs(y);
        if (!(y < sigma_)) return 0.0;
        if (kind_ == TestFunctionKind::Fejer) return scale_ * (1.0 - y / sigma_);
        std::size_t j = segment_of(y);
        return knots_[j].second + slopes_[j] * (y - knots_[j].first);
    }

    // phihat(0) - phihat(y), free of cancellation near 0
    double phihat_drop(double y) const {
        y = std::fabs(y);
        if (!(y < sigma_)) return phihat(0.0);
        if (kind_ == TestFunctionKind::Fejer) return scale_ * y / sigma_;
        std::size_t j = segment_of(y);
        return (knots_[0].second - knots_[j].second) - slopes_[j] * (y - knots_[j].first);
    }

    // right derivative of phihat at 0
    double phihat_slope0() const { return kind_ == TestFunctionKind::Fejer ? -scale_ / sigma_ : slopes_.front(); }

    double phi(double x) const {
        if (kind_ == TestFunctionKind::Fejer) {
            double t = std::numbers::pi * sigma_ * x;
            double s = (t == 0.0) ? 1.0 : std::sin(t) / t;
            return scale_ * sigma_ * s * s;
        }
        if (x == 0.0) {
            double area = 0.0;
            for (std::size_t j = 0; j + 1 < knots_.size(); ++j)
                area += 0.5 * (knots_[j].second + knots_[j + 1].second) * (knots_[j + 1].first - knots_[j].first);
            return 2.0 * area;
        }
        // 2 \int_0^sigma phihat(y) cos(k y) dy, integrated by parts twice per linear piece
        const double k = 2.0 * std::numbers::pi * x;
        double acc = 0.0;
        for (std::size_t j = 0; j + 1 < knots_.size(); ++j) {
            double y0 = knots_[j].first;
            double y1 = knots_[j + 1].first;
            acc += slopes_[j] * 2.0 * std::sin(0.5 * k * (y0 + y1)) * std::sin(0.5 * k * (y1 - y0));
        }
        return -2.0 * acc / (k * k);
    }

    static TestFunction fejer(double sigma, double scale) {
        check_sigma(sigma);
        TestFunction t;
        t.kind_ = TestFunctionKind::Fejer;
        t.sigma_ = sigma;
        t.scale_ = scale;
        t.knots_ = {{0.0, scale}, {sigma, 0.0}};
        t.slopes_ = {-scale / sigma};
        return t;
    }

    // knots: (y, value) pairs covering both signs of y; the pair set must be
    // even, and values must vanish at and beyond the support edge.
    static TestFunction piecewise_linear(std::vector<std::pair<double, double>> knots, double scale = 1.0) {
        if (knots.size() < 2) throw std::invalid_argument("piecewise-linear phihat needs at least two knots");
        std::sort(knots.begin(), knots.end());
        for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
            if (knots[i].first == knots[i + 1].first) throw std::invalid_argument("duplicate knot abscissa");
        }
        constexpr double tol = 1e-12;
        for (const auto& [y, v] : knots) {
            if (!std::isfinite(y) || !std::isfinite(v)) throw std::invalid_argument("non-finite knot");
            auto it = std::find_if(knots.begin(), knots.end(), [&](const auto& k) { return std::fabs(k.first + y) <= tol; });
            if (it == knots.end() || std::fabs(it->second - v) > tol)
                throw std::invalid_argument("phihat knots are not even in y");
        }
        std::vector<std::pair<double, double>> half;
        for (const auto& k : knots) {
            if (k.first >= 0.0) half.push_back(k);
        }
        if (half.front().first > 0.0) half.insert(half.begin(), {0.0, half.front().second});
        while (half.size() >= 2 && half.back().second == 0.0 && half[half.size() - 2].second == 0.0) half.pop_back();
        if (half.back().second != 0.0) throw std::invalid_argument("phihat must vanish at the outermost knot");
        if (half.size() < 2) throw std::invalid_argument("phihat is identically zero");
        double sigma = half.back().first;
        check_sigma(sigma);
        TestFunction t;
        t.kind_ = TestFunctionKind::PiecewiseLinearHat;
        t.sigma_ = sigma;
        t.scale_ = scale;
        for (auto& k : half) k.second *= scale;
        t.knots_ = std::move(half);
        for (std::size_t j = 0; j + 1 < t.knots_.size(); ++j) {
            t.slopes_.push_back((t.knots_[j + 1].second - t.knots_[j].second) /
                                (t.knots_[j + 1].first - t.knots_[j].first));
        }
        return t;
    }

    TestFunction scaled(double factor) const {
        TestFunction t = *this;
        t.scale_ *= factor;
        for (auto& k : t.knots_) k.second *= factor;
        for (auto& s : t.slopes_) s *= factor;
        return t;
    }

private:
    TestFunction() = default;

    static void check_sigma(double sigma) {
        if (!(sigma > 0.0 && sigma < 1.0))
            throw std::invalid_argument("sigma must lie in (0,1): supp(phihat) has to sit inside (-1,1)");
    }

    std::size_t segment_of(double y) const {
        auto it = std::upper_bound(knots_.begin(), knots_.end(), y,
                                   [](double v, const auto& k) { return v < k.first; });
        std::size_t j = static_cast<std::size_t>(it - knots_.begin());
        return j == 0 ? 0 : std::min(j - 1, slopes_.size() - 1);
    }

    TestFunctionKind kind_ = TestFunctionKind::Fejer;
    double sigma_ = 0.5;
    double scale_ = 1.0;
    std::vector<std::pair<double, double>> knots_;
    std::vector<double> slopes_;
};

inline TestFunction make_fejer(double sigma, double scale) { return TestFunction::fejer(sigma, scale); }

inline double eval_phi(const TestFunction& t, double x) { return t.phi(x); }
inline double eval_phihat(const TestFunction& t, double y) { return t.phihat(y); }

// two-column CSV "y,value"; lines starting with '#' and a non-numeric header are skipped
inline TestFunction load_phihat_csv(const std::string& path, double scale = 1.0) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open phihat knots file: " + path);
    std::vector<std::pair<double, double>> knots;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double y = 0.0;
        double v = 0.0;
        if (!(ss >> y >> v)) {
            if (knots.empty() && lineno == 1) continue;
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected two numbers");
        }
        knots.emplace_back(y, v);
    }
    return TestFunction::piecewise_linear(std::move(knots), scale);
}

// \int_0^\infty (phihat(0) - phihat(x)) / (2 sinh(x/2)) dx
inline double sinh_integral(const TestFunction& t) {
    const double slope0 = t.phihat_slope0();
    auto g = [&](double x) {
        if (x == 0.0) return -slope0;
        return t.phihat_drop(x) / (2.0 * std::sinh(0.5 * x));
    };
    double total = 0.0;
    const auto& k = t.half_knots();
    for (std::size_t j = 0; j + 1 < k.size(); ++j) {
        total += detail::integrate(g, k[j].first, k[j + 1].first, 1e-13, "sinh_integral did not converge");
    }
    // beyond the support the integrand is phihat(0)/(2 sinh(x/2)), whose primitive is log tanh(x/4)
    total += -t.phihat(0.0) * std::log(std::tanh(0.25 * t.sigma()));
    return total;
}

// (4/h) \int_0^\infty phihat(x/logDelta) cosh(x/2) dx
inline double cosh_term(const TestFunction& t, long long h, double log_delta) {
    if (h < 1) throw std::invalid_argument("cosh_term: h must be >= 1");
    if (!(log_delta > 0.0)) throw std::invalid_argument("cosh_term: logDelta must be positive");
    const double a = 0.5 * log_delta;
    auto f = [&](double u) { return t.phihat(u) * std::cosh(a * u); };
    double integral = 0.0;
    const auto& k = t.half_knots();
    for (std::size_t j = 0; j + 1 < k.size(); ++j) {
        integral += detail::integrate(f, k[j].first, k[j + 1].first, 0.0, "cosh_term did not converge", 1e-10);
    }
    return 4.0 / static_cast<double>(h) * log_delta * integral;
}

enum class Symmetry { SOeven, SOodd, O, USp, U };

inline const char* symmetry_name(Symmetry s) {
    switch (s) {
        case Symmetry::SOeven: return "SO(even)";
        case Symmetry::SOodd: return "SO(odd)";
        case Symmetry::O: return "O";
        case Symmetry::USp: return "USp";
        case Symmetry::U: return "U";
    }
    return "?";
}

struct SymmetryPrediction {
    Symmetry symmetry;
    double value;
};

// one-level density predictions, valid while supp(phihat) sits inside (-1, 1)
inline std::vector<SymmetryPrediction> symmetry_predictions(const TestFunction& t) {
    const double f0 = t.phihat(0.0);
    const double p0 = t.phi(0.0);
    return {{Symmetry::SOeven, f0 + 0.5 * p0},
            {Symmetry::SOodd, f0 + 0.5 * p0},
            {Symmetry::O, f0 + 0.5 * p0},
            {Symmetry::USp, f0 - 0.5 * p0},
            {Symmetry::U, f0}};
}

inline double usp_prediction(const TestFunction& t) { return t.phihat(0.0) - 0.5 * t.phi(0.0); }

// \int phihat(y) e^{2 pi i x y} dy by quadrature (phihat even, so a cosine transform)
inline double inverse_transform_numeric(const TestFunction& t, double x) {
    const double k = 2.0 * std::numbers::pi * x;
    auto f = [&](double y) { return t.phihat(y) * std::cos(k * y); };
    const auto& kn = t.half_knots();
    double total = 0.0;
    for (std::size_t j = 0; j + 1 < kn.size(); ++j) {
        // split long oscillatory segments so each panel holds about one period
        double a = kn[j].first;
        double b = kn[j + 1].first;
        int pieces = std::max(1, static_cast<int>(std::ceil(std::fabs(x) * (b - a))));
        for (int i = 0; i < pieces; ++i) {
            double lo = a + (b - a) * i / pieces;
            double hi = a + (b - a) * (i + 1) / pieces;
            total += detail::integrate(f, lo, hi, 1e-11, "inverse transform did not converge");
        }
    }
    return 2.0 * total;
}

}  // namespace lowlying

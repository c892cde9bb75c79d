#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "wbdbn/error.hpp"

namespace wbdbn::stats {

namespace detail {

// Continued fraction for the incomplete beta (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

} // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete_beta: a and b must be positive");
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete_beta: x outside [0, 1]");
    if (x == 0.0 || x == 1.0) return x;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

// P(T > t) for Student's t with `df` degrees of freedom.
inline double student_t_upper_tail(double t, double df) {
    if (!(df > 0.0)) throw DomainError("student_t_upper_tail: df must be positive");
    if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
    const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
    return t >= 0.0 ? tail : 1.0 - tail;
}

enum class Tail { One, Two };

struct TTestResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
};

struct SampleMoments {
    double n = 0.0;
    double mean = 0.0;
    double variance = 0.0;  // unbiased
};

inline bool is_constant(std::span<const double> x) {
    return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

inline SampleMoments moments(std::span<const double> x) {
    SampleMoments m;
    m.n = static_cast<double>(x.size());
    for (double v : x) m.mean += v;
    m.mean /= m.n;
    for (double v : x) m.variance += (v - m.mean) * (v - m.mean);
    m.variance /= (m.n - 1.0);
    return m;
}

// Welch's unequal-variance t-test with Welch-Satterthwaite degrees of freedom.
// The one-tailed p-value is for the alternative mean(a) > mean(b).
inline TTestResult welch_t_test(std::span<const double> a, std::span<const double> b, Tail tail = Tail::Two) {
    if (a.size() < 2 || b.size() < 2) {
        throw UndefinedStatistic("welch_t_test: each sample needs at least two values");
    }
    const auto ma = moments(a);
    const auto mb = moments(b);
    const double va = ma.variance / ma.n;
    const double vb = mb.variance / mb.n;
    if (is_constant(a) && is_constant(b)) {
        throw UndefinedStatistic("welch_t_test: both samples have zero variance");
    }
    TTestResult r;
    r.t = (ma.mean - mb.mean) / std::sqrt(va + vb);
    r.df = (va + vb) * (va + vb) / (va * va / (ma.n - 1.0) + vb * vb / (mb.n - 1.0));
    r.p = tail == Tail::Two ? 2.0 * student_t_upper_tail(std::abs(r.t), r.df) : student_t_upper_tail(r.t, r.df);
    if (r.p > 1.0) r.p = 1.0;
    return r;
}

struct CorrelationResult {
    double r = 0.0;
    double df = 0.0;
    double p = 1.0;  // two-tailed
};

// Sample Pearson correlation with a t-based two-tailed p-value on n-2 df.
inline CorrelationResult pearson_r(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw UndefinedStatistic("pearson_r: samples differ in length");
    if (x.size() < 3) throw UndefinedStatistic("pearson_r: need at least three pairs");
    const auto mx = moments(x);
    const auto my = moments(y);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double dx = x[k] - mx.mean;
        const double dy = y[k] - my.mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (is_constant(x) || is_constant(y) || sxx == 0.0 || syy == 0.0) throw UndefinedStatistic("pearson_r: zero variance");
    CorrelationResult c;
    // Exactly +/-1 when y = +/-x.
    c.r = std::clamp((sxy / sxx) * std::sqrt(sxx / syy), -1.0, 1.0);
    c.df = static_cast<double>(x.size()) - 2.0;
    if (std::abs(c.r) == 1.0) {
        c.p = 0.0;
    } else {
        const double t = c.r * std::sqrt(c.df / (1.0 - c.r * c.r));
        c.p = std::min(1.0, 2.0 * student_t_upper_tail(std::abs(t), c.df));
    }
    return c;
}

} // namespace wbdbn::stats

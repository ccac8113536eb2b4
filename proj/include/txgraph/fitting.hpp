#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "txgraph/error.hpp"
#include "txgraph/ingest.hpp"
#include "txgraph/records.hpp"

namespace txgraph {

/// Hurwitz zeta ζ(s, q) = Σ_{k≥0} (q+k)^-s for s > 1, q > 0, by
/// Euler-Maclaurin summation.
inline double hurwitz_zeta(double s, double q) {
    if (!(s > 1.0) || !(q > 0.0)) throw std::domain_error("hurwitz_zeta needs s > 1 and q > 0");
    constexpr int kDirect = 12;
    // B_2j / (2j)!
    static constexpr double kCoef[] = {
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
        1.0 / 74724249600.0,
        -3617.0 / 10670622842880000.0,
    };
    double sum = 0.0;
    for (int k = 0; k < kDirect; ++k) sum += std::pow(q + k, -s);
    const double a = q + kDirect;
    sum += std::pow(a, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(a, -s);
    // Rising factorial s(s+1)...(s+2j-2) times a^(-s-2j+1).
    double term = s * std::pow(a, -s - 1.0);
    for (int j = 0; j < 8; ++j) {
        const double contrib = kCoef[j] * term;
        sum += contrib;
        if (std::abs(contrib) < 1e-17 * sum) break;
        term *= (s + 2 * j + 1) * (s + 2 * j + 2) / (a * a);
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Power-law degree fits

enum class PowerLawEstimator {
    // Exact maximum likelihood for the discrete law p(x) = x^-α / ζ(α, x_min).
    discrete_mle,
    // α = 1 + n [Σ ln(x / (x_min - 1/2))]^-1. Biased for small x_min.
    closed_form,
};

/// Tail model f(x) = C x^-α for x >= x_min with C = (α-1) x_min^(α-1).
struct PowerLawFit {
    double alpha = 0.0;
    std::uint64_t x_min = 1;
    std::uint64_t n_tail = 0;
    double log_likelihood = 0.0;
    PowerLawEstimator estimator = PowerLawEstimator::discrete_mle;
    std::optional<double> ks_distance;

    double normalization() const { return (alpha - 1.0) * std::pow(static_cast<double>(x_min), alpha - 1.0); }
    double density(double x) const { return x < static_cast<double>(x_min) ? 0.0 : normalization() * std::pow(x, -alpha); }
};

namespace detail {

struct Tail {
    std::uint64_t n = 0;
    double log_sum = 0.0;  // Σ ln x over the tail
    bool single_value = true;
};

template <typename T>
Tail tail_of(std::span<const T> values, std::uint64_t x_min) {
    Tail t;
    std::optional<T> first;
    for (auto x : values) {
        if (static_cast<std::uint64_t>(x) < x_min) continue;
        ++t.n;
        t.log_sum += std::log(static_cast<double>(x));
        if (!first)
            first = x;
        else if (x != *first)
            t.single_value = false;
    }
    return t;
}

inline double discrete_log_likelihood(double alpha, std::uint64_t x_min, const Tail& t) {
    return -static_cast<double>(t.n) * std::log(hurwitz_zeta(alpha, static_cast<double>(x_min))) - alpha * t.log_sum;
}

inline double shifted_log_likelihood(double alpha, std::uint64_t x_min, const Tail& t) {
    const double n = static_cast<double>(t.n);
    const double lo = static_cast<double>(x_min) - 0.5;
    return n * std::log(alpha - 1.0) + n * (alpha - 1.0) * std::log(lo) - alpha * t.log_sum;
}

}  // namespace detail

/// Fits α to the observations >= x_min; smaller values (including zeros) are
/// ignored.
template <typename T>
PowerLawFit fit_power_law(std::span<const T> degrees, std::uint64_t x_min,
                          PowerLawEstimator estimator = PowerLawEstimator::discrete_mle) {
    if (x_min < 1) throw PreconditionError("x_min must be positive");
    const auto tail = detail::tail_of(degrees, x_min);
    if (tail.n < 2) throw UndefinedError("power-law fit needs at least 2 tail observations");
    if (tail.single_value) throw UndefinedError("power-law fit undefined: tail holds a single distinct value");

    PowerLawFit fit;
    fit.x_min = x_min;
    fit.n_tail = tail.n;
    fit.estimator = estimator;
    const double n = static_cast<double>(tail.n);
    const double denom = tail.log_sum - n * std::log(static_cast<double>(x_min) - 0.5);
    if (!(denom > 0.0)) throw UndefinedError("power-law fit undefined: degenerate tail");
    const double closed = 1.0 + n / denom;
    if (estimator == PowerLawEstimator::closed_form) {
        fit.alpha = closed;
        fit.log_likelihood = detail::shifted_log_likelihood(closed, x_min, tail);
        return fit;
    }
    auto neg = [&](double a) { return -detail::discrete_log_likelihood(a, x_min, tail) / n; };
    const double hi = std::max(20.0, 2.0 * closed);
    auto [alpha, value] = boost::math::tools::brent_find_minima(neg, 1.0 + 1e-9, hi, 40);
    fit.alpha = alpha;
    fit.log_likelihood = -value * n;
    return fit;
}

template <typename T>
PowerLawFit fit_power_law(const std::vector<T>& degrees, std::uint64_t x_min,
                          PowerLawEstimator estimator = PowerLawEstimator::discrete_mle) {
    return fit_power_law(std::span<const T>(degrees), x_min, estimator);
}

/// Kolmogorov-Smirnov distance between the tail's empirical CDF and the
/// fitted discrete law.
template <typename T>
double ks_distance(std::span<const T> degrees, const PowerLawFit& fit) {
    std::vector<std::uint64_t> tail;
    for (auto x : degrees)
        if (static_cast<std::uint64_t>(x) >= fit.x_min) tail.push_back(static_cast<std::uint64_t>(x));
    std::sort(tail.begin(), tail.end());
    const double n = static_cast<double>(tail.size());
    const double z0 = hurwitz_zeta(fit.alpha, static_cast<double>(fit.x_min));
    double worst = 0.0;
    for (std::size_t i = 0; i < tail.size();) {
        std::size_t j = i;
        while (j < tail.size() && tail[j] == tail[i]) ++j;
        const double below = static_cast<double>(i) / n;  // P_emp(X < x)
        const double upto = static_cast<double>(j) / n;   // P_emp(X <= x)
        const double model_below = 1.0 - hurwitz_zeta(fit.alpha, static_cast<double>(tail[i])) / z0;
        const double model_upto = 1.0 - hurwitz_zeta(fit.alpha, static_cast<double>(tail[i] + 1)) / z0;
        worst = std::max({worst, std::abs(below - model_below), std::abs(upto - model_upto)});
        i = j;
    }
    return worst;
}

/// Scans x_min over the distinct observed values (keeping at least
/// `min_tail` tail observations) and returns the fit with the smallest KS
/// distance.
template <typename T>
PowerLawFit fit_power_law_scan(std::span<const T> degrees, PowerLawEstimator estimator = PowerLawEstimator::discrete_mle,
                               std::uint64_t min_tail = 10) {
    std::vector<std::uint64_t> values;
    for (auto x : degrees)
        if (x > 0) values.push_back(static_cast<std::uint64_t>(x));
    std::sort(values.begin(), values.end());
    std::optional<PowerLawFit> best;
    for (std::size_t i = 0; i < values.size();) {
        const auto x_min = values[i];
        const auto remaining = values.size() - i;
        if (remaining < std::max<std::uint64_t>(min_tail, 2)) break;
        while (i < values.size() && values[i] == x_min) ++i;
        if (i == values.size()) break;  // single distinct value left
        auto fit = fit_power_law(std::span<const std::uint64_t>(values), x_min, estimator);
        fit.ks_distance = ks_distance(std::span<const std::uint64_t>(values), fit);
        if (!best || *fit.ks_distance < *best->ks_distance) best = fit;
    }
    if (!best) throw UndefinedError("power-law scan found no admissible x_min");
    return *best;
}

// ---------------------------------------------------------------------------
// Edge-vs-node power model

struct PowerModelFit {
    double a = 0.0;
    double b = 0.0;
    double adjusted_r2 = 0.0;
    std::size_t n_points = 0;
};

struct SizePoint {
    double nodes = 0.0;
    double edges = 0.0;
};

/// 1 - (1 - r2)(n - 1)/(n - p - 1).
inline double adjusted_r2(double r2, std::size_t n, std::size_t p) {
    if (n <= p + 1) throw PreconditionError("adjusted R^2 needs n > p + 1");
    if (!(r2 >= 0.0 && r2 <= 1.0)) throw PreconditionError("R^2 must lie in [0, 1]");
    return 1.0 - (1.0 - r2) * static_cast<double>(n - 1) / static_cast<double>(n - p - 1);
}

/// Least squares on (ln V, ln E): E = a V^b.
inline PowerModelFit fit_power_model(std::span<const SizePoint> points) {
    if (points.size() < 3) throw UndefinedError("power-model fit needs at least 3 points");
    const double n = static_cast<double>(points.size());
    std::vector<double> lx, ly;
    for (const auto& p : points) {
        if (!(p.nodes >= 2.0) || !(p.edges >= 1.0)) throw PreconditionError("power-model points need V >= 2, E >= 1");
        lx.push_back(std::log(p.nodes));
        ly.push_back(std::log(p.edges));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (std::adjacent_find(lx.begin(), lx.end(), std::not_equal_to<>()) == lx.end() || !(sxx > 0.0))
        throw UndefinedError("power-model fit undefined: all points share one node count");
    PowerModelFit fit;
    fit.b = sxy / sxx;
    const double intercept = my - fit.b * mx;
    fit.a = std::exp(intercept);
    double ss_res = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - (intercept + fit.b * lx[i]);
        ss_res += r * r;
    }
    const double r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
    fit.adjusted_r2 = adjusted_r2(r2, points.size(), 1);
    fit.n_points = points.size();
    return fit;
}

inline PowerModelFit fit_power_model(const std::vector<SizePoint>& points) {
    return fit_power_model(std::span<const SizePoint>(points));
}

// ---------------------------------------------------------------------------
// Growth and correlation

struct GrowthRate {
    double rgr = 0.0;  // per month
    MonthIndex t1, t2;
    double s1 = 0.0, s2 = 0.0;
};

/// (ln s2 - ln s1) / (t2 - t1).
inline GrowthRate rgr(double s1, MonthIndex t1, double s2, MonthIndex t2) {
    if (!(s1 > 0.0) || !(s2 > 0.0)) throw PreconditionError("growth rate needs positive sizes");
    if (t2 <= t1) throw PreconditionError("growth rate needs t2 > t1");
    const double dt = static_cast<double>(t2.value) - static_cast<double>(t1.value);
    return GrowthRate{(std::log(s2) - std::log(s1)) / dt, t1, t2, s1, s2};
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw PreconditionError("pearson needs equal-length series");
    if (x.size() < 3) throw UndefinedError("pearson needs at least 3 aligned points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) throw UndefinedError("pearson undefined: zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    return pearson(std::span<const double>(x), std::span<const double>(y));
}

using PriceSeries = std::map<YearMonth, double>;

/// month,price CSV with YYYY-MM months.
inline PriceSeries parse_price_csv(std::istream& in) {
    std::vector<std::string> fields;
    std::size_t line = 0;
    if (!csv::read_row(in, fields, line) || fields != std::vector<std::string>{"month", "price"})
        throw InputError("expected header month,price", 1);
    PriceSeries series;
    while (csv::read_row(in, fields, line)) {
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (fields.size() != 2) throw InputError("expected 2 fields", line);
        YearMonth month;
        try {
            month = YearMonth::parse(fields[0]);
        } catch (const InputError& e) {
            throw InputError(e.what(), line);
        }
        double price = 0;
        try {
            std::size_t used = 0;
            price = std::stod(fields[1], &used);
            if (used != fields[1].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw InputError("invalid price '" + fields[1] + "'", line);
        }
        if (!(price > 0.0) || !std::isfinite(price)) throw InputError("price must be positive", line);
        if (!series.emplace(month, price).second) throw InputError("duplicate month " + fields[0], line);
    }
    return series;
}

struct PairedSeries {
    std::vector<YearMonth> months;
    std::vector<double> metric;
    std::vector<double> price;
    std::size_t dropped = 0;  // months present on only one side
};

/// Inner join on year-month.
inline PairedSeries align_with_price(const std::map<YearMonth, double>& metric, const PriceSeries& price) {
    PairedSeries out;
    for (const auto& [month, value] : metric) {
        auto it = price.find(month);
        if (it == price.end()) continue;
        out.months.push_back(month);
        out.metric.push_back(value);
        out.price.push_back(it->second);
    }
    if (out.months.empty()) throw UndefinedError("metric and price series share no months");
    out.dropped = (metric.size() - out.months.size()) + (price.size() - out.months.size());
    return out;
}

}  // namespace txgraph

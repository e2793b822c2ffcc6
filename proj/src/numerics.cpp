#include "latinv/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace latinv {

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

namespace {

// Lower regularized incomplete gamma by series, for x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 1000; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized incomplete gamma by continued fraction, for x >= a + 1.
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -double(i) * (double(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

} // namespace

double gamma_q(double a, double x) {
    if (x < 0 || a <= 0) throw std::invalid_argument("gamma_q: bad arguments");
    if (x == 0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double chisq_sf(double x, double dof) { return gamma_q(dof / 2.0, x / 2.0); }

Wilson wilson_ci(uint64_t successes, uint64_t trials, double z) {
    if (trials == 0) throw std::invalid_argument("wilson_ci: zero trials");
    const double n = double(trials);
    const double p = double(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2 * n)) / denom;
    const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
    return {p, center - half, center + half};
}

TwoProportion two_proportion_test(uint64_t s1, uint64_t n1, uint64_t s2, uint64_t n2) {
    if (n1 == 0 || n2 == 0) throw std::invalid_argument("two_proportion_test: zero trials");
    const double p1 = double(s1) / double(n1);
    const double p2 = double(s2) / double(n2);
    const double pool = double(s1 + s2) / double(n1 + n2);
    const double se = std::sqrt(pool * (1 - pool) * (1.0 / double(n1) + 1.0 / double(n2)));
    if (se == 0) return {0.0, 1.0};
    const double z = (p1 - p2) / se;
    return {z, 2.0 * normal_sf(std::fabs(z))};
}

std::vector<double> holm_adjust(std::span<const double> p_values) {
    const size_t m = p_values.size();
    std::vector<size_t> order(m);
    std::iota(order.begin(), order.end(), size_t(0));
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return p_values[a] < p_values[b]; });
    std::vector<double> adj(m, 0.0);
    double running = 0.0;
    for (size_t rank = 0; rank < m; ++rank) {
        const double scaled = double(m - rank) * p_values[order[rank]];
        running = std::max(running, std::min(1.0, scaled));
        adj[order[rank]] = running;
    }
    return adj;
}

KsResult ks_uniform_test(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("ks_uniform_test: no samples");
    std::sort(values.begin(), values.end());
    const double n = double(values.size());
    double d = 0;
    for (size_t i = 0; i < values.size(); ++i) {
        const double cdf = values[i];
        d = std::max(d, std::fabs(double(i + 1) / n - cdf));
        d = std::max(d, std::fabs(cdf - double(i) / n));
    }
    const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
    double p = 0;
    for (int j = 1; j <= 100; ++j) {
        const double term = 2.0 * std::pow(-1.0, j - 1) * std::exp(-2.0 * j * j * lambda * lambda);
        p += term;
        if (std::fabs(term) < 1e-12) break;
    }
    return {d, std::clamp(p, 0.0, 1.0)};
}

double mean_of(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("mean_of: empty");
    double s = 0;
    for (double x : xs) s += x;
    return s / double(xs.size());
}

double stddev_of(std::span<const double> xs) {
    if (xs.size() < 2) throw std::invalid_argument("stddev_of: need two samples");
    const double mu = mean_of(xs);
    double s = 0;
    for (double x : xs) s += (x - mu) * (x - mu);
    return std::sqrt(s / double(xs.size() - 1));
}

double quantile_of(std::vector<double> xs, double q) {
    if (xs.empty()) throw std::invalid_argument("quantile_of: empty");
    std::sort(xs.begin(), xs.end());
    const double pos = q * double(xs.size() - 1);
    const size_t i = size_t(pos);
    if (i + 1 >= xs.size()) return xs.back();
    const double frac = pos - double(i);
    return xs[i] * (1 - frac) + xs[i + 1] * frac;
}

} // namespace latinv

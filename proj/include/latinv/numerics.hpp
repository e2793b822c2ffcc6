#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace latinv {

// Upper tail of the standard normal, Phi_bar(z).
double normal_sf(double z);

// Regularized upper incomplete gamma Q(a, x); the chi-square upper tail is
// Q(k/2, x/2).
double gamma_q(double a, double x);

double chisq_sf(double x, double dof);

struct Wilson {
    double p_hat = 0;
    double lo = 0;
    double hi = 0;
};

// Wilson score interval at normal quantile z (1.96 for 95%).
Wilson wilson_ci(uint64_t successes, uint64_t trials, double z);

struct TwoProportion {
    double z = 0;
    double p_value = 1; // two-sided, pooled
};

TwoProportion two_proportion_test(uint64_t s1, uint64_t n1, uint64_t s2, uint64_t n2);

// Holm step-down adjustment; returns adjusted p-values in input order.
std::vector<double> holm_adjust(std::span<const double> p_values);

// Kolmogorov-Smirnov one-sample test against Uniform[0,1]; asymptotic
// p-value.
struct KsResult {
    double statistic = 0;
    double p_value = 1;
};
KsResult ks_uniform_test(std::vector<double> values);

// Sample mean / unbiased standard deviation.
double mean_of(std::span<const double> xs);
double stddev_of(std::span<const double> xs);
double quantile_of(std::vector<double> xs, double q); // linear interpolation

} // namespace latinv

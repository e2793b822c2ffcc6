#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latinv/numerics.hpp"
#include "latinv/process.hpp"

namespace latinv {

struct Estimate {
    double value = 0;
    double std_error = 0;
    uint64_t n = 0;
};

// Box density with binomial standard error.
Estimate intensity(const PointSet& s);

// Finite set of pairwise distinct probe points.
struct MarginalQuery {
    std::vector<LatticePoint> points;

    explicit MarginalQuery(std::vector<LatticePoint> pts);
    size_t size() const { return points.size(); }
};

struct MarginalEstimate {
    uint64_t successes = 0;
    uint64_t trials = 0;
    Wilson ci; // 95%
    double p_hat() const { return ci.p_hat; }
};

// Fraction of independent realizations containing every point of the
// query; trials are seeded per-index from `seed` and run in parallel.
MarginalEstimate k_point_marginal(const ProcessSpec& spec, const MarginalQuery& q,
                                  uint64_t trials, uint64_t seed);

struct Histogram {
    std::vector<uint64_t> bins;
    uint64_t total = 0;

    void add(size_t bin) {
        bins[bin] += 1;
        total += 1;
    }
    void merge(const Histogram& o);
};

// Random-AP ensemble: step r uniform on [-max_step, max_step]^d \ {0}
// restricted to steps that keep some length-L progression inside the box,
// base point uniform among admissible positions for the drawn step.
struct ApEnsemble {
    Box box;
    int64_t max_step = 3;
};

// Histogram over {0..L} of |sample ∩ AP| across independent trials.
// The AP points are the only points materialized; per-point keyed
// randomness makes this identical in law (in fact bit-identical per seed)
// to sampling the whole box and reading the progression off it.
Histogram ap_count_distribution(const ProcessSpec& spec, int ap_length, uint64_t trials,
                                const ApEnsemble& ens, uint64_t seed);

struct ChiSq {
    double statistic = 0;
    int dof = 0;
    double p_value = 1;
};

// Two-sample chi-square on shared binning; adjacent bins are pooled until
// every expected count is at least 5. Throws StatError when fewer than
// two pooled bins remain.
ChiSq two_sample_chisq(const Histogram& a, const Histogram& b);

struct QueryVerdict {
    MarginalQuery query;
    MarginalEstimate at_f;
    MarginalEstimate at_gf;
    double p_value = 1;
    double p_holm = 1;
    bool pass = true;
};

struct InvarianceReport {
    std::vector<QueryVerdict> queries;
    double alpha = 0.01;
    bool all_pass = true;
};

// Compares the marginal at each query with the marginal at its image
// under g via two-proportion z-tests, Holm-corrected at level alpha.
InvarianceReport invariance_test(const ProcessSpec& spec, const AffineMap& g,
                                 std::span<const MarginalQuery> queries, uint64_t trials,
                                 double alpha, uint64_t seed);

} // namespace latinv

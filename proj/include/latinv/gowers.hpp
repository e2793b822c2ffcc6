#pragma once

#include <cstdint>
#include <vector>

#include "latinv/process.hpp"

namespace latinv {

// Real-valued function sampled on an integer box, linear storage order.
struct GridFn {
    Box box;
    std::vector<double> values;

    static GridFn indicator(const PointSet& s);
    static GridFn constant(const Box& box, double value);

    double at(std::span<const int64_t> t) const { return values[box.linear_index(t)]; }
};

struct GowersConfig {
    int order = 2; // k >= 1
    Box base;      // must match the grid's box
    Box shift;     // per-component range of each h_i
    uint64_t samples = 10000;
    enum class Mode { MonteCarlo, Exact } mode = Mode::Exact;
};

// Uniformity norm estimate of order k over combinatorial cubes
// x + omega.h with corner containment: only (x, h) with all 2^k corners
// inside the base box contribute. Exact mode sums every admissible tuple
// in a fixed order (bit-reproducible, thread-count independent);
// Monte-Carlo mode averages `samples` uniform admissible draws.
// Throws StatError when no admissible tuple exists.
double gowers_norm(const GridFn& f, const GowersConfig& cfg, uint64_t seed,
                   Execution exec = Execution::Parallel);

} // namespace latinv

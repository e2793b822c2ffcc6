#pragma once

#include <cstdint>

#include "latinv/process.hpp"
#include "latinv/stats.hpp"

namespace latinv {

enum class CouplingMode {
    // One uniform per point shared by both thinnings: keep in y_i iff
    // u < f_i(P(t)). Same per-point joint law as the two-step redraw and
    // additionally monotone (f1 <= f2 pointwise implies y1 subset y2).
    SharedUniform,
    // Two-stage redraw: realize y1 first, then conditionally remove with
    // probability -min(delta,0)/f1 or add with probability
    // max(delta,0)/(1-f1), with probability 0 whenever the denominator
    // vanishes.
    TwoStep,
};

// Two thinnings of one structured draw.
struct CoupledPair {
    PointSet y1, y2;
    PolyMap shared_draw;
    Box box;
    uint64_t seed = 0;
    CouplingMode mode = CouplingMode::SharedUniform;
};

// Couples the f1- and f2-thinnings of the polynomial core. The y1
// marginal equals the standalone polynomial process with window f1
// bit-for-bit at the same seed; in shared-uniform mode the same holds
// for y2 with window f2.
CoupledPair couple_thinnings(const PolynomialSpec& core, const WindowFn& f1, const WindowFn& f2,
                             const Box& box, uint64_t seed,
                             CouplingMode mode = CouplingMode::SharedUniform);

// Box density of y1 Δ y2 with binomial standard error.
Estimate symdiff_density(const CoupledPair& pair);

// Deterministic audit of the mechanism: draws the shared polynomial, then
// per point compares the mechanism's conditional disagreement probability
// (an exact dyadic rational) with |f2(P(t)) - f1(P(t))|.
struct CouplingExactCheck {
    long double mean_abs_delta = 0;      // E|delta| over the box given the draw
    long double max_mechanism_error = 0; // sup |P(disagree) - |delta||
};
CouplingExactCheck coupling_exact_expectation(const PolynomialSpec& core, const WindowFn& f1,
                                              const WindowFn& f2, const Box& box, uint64_t seed,
                                              CouplingMode mode = CouplingMode::SharedUniform);

} // namespace latinv

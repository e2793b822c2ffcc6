#include "latinv/coupling.hpp"

#include <cmath>
#include <stdexcept>

namespace latinv {

namespace {

using u128 = unsigned __int128;
using i128 = __int128;

constexpr u128 kOne64 = u128(1) << 64; // probability 1 on the 2^-64 scale

u128 prob_scale(Prob64 p) { return p.one ? kOne64 : u128(p.thr); }

// Probability thresholds of the two-step redraw at one point, on the
// 2^-64 scale, rounded to nearest.
struct TwoStepThresholds {
    u128 remove = 0; // conditional on t in y1
    u128 add = 0;    // conditional on t not in y1
};

TwoStepThresholds two_step_thresholds(u128 t1, u128 t2) {
    TwoStepThresholds out;
    if (t2 < t1 && t1 > 0) {
        // remove with probability (t1 - t2) / t1; saturates at 1 when
        // t2 = 0 (and the << 64 below would overflow there)
        const u128 num = t1 - t2;
        out.remove = num >= t1 ? kOne64 : ((num << 64) + t1 / 2) / t1;
    }
    if (t2 > t1 && t1 < kOne64) {
        const u128 denom = kOne64 - t1;
        const u128 num = t2 - t1;
        out.add = num >= denom ? kOne64 : ((num << 64) + denom / 2) / denom;
    }
    return out;
}

bool threshold_keep(u128 thr, uint64_t u) { return thr > u128(u); }

} // namespace

CoupledPair couple_thinnings(const PolynomialSpec& core, const WindowFn& f1, const WindowFn& f2,
                             const Box& box, uint64_t seed, CouplingMode mode) {
    if (f1.dim() != 0 && f1.dim() != core.m)
        throw std::invalid_argument("couple_thinnings: f1 dimension mismatch");
    if (f2.dim() != 0 && f2.dim() != core.m)
        throw std::invalid_argument("couple_thinnings: f2 dimension mismatch");
    check_monomial_range(box.lo, box.hi, core.k);

    const PolynomialDraw draw = draw_polynomial_for_seed(core, seed);
    const uint64_t step_key = rng::derive(draw.node_key, rng::tag::kCoupleStep);
    const uint64_t vol = uint64_t(box.volume());
    std::vector<uint8_t> b1(vol), b2(vol);

#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < int64_t(vol); ++i) {
        const LatticePoint t = box.point_at(uint64_t(i));
        const TorusVec v = draw.map.evaluate(t);
        const u128 t1 = prob_scale(f1.eval(v));
        const u128 t2 = prob_scale(f2.eval(v));
        const uint64_t u = rng::point_uniform(draw.thin_key, t);
        const bool in1 = threshold_keep(t1, u);
        b1[i] = in1 ? 1 : 0;
        if (mode == CouplingMode::SharedUniform) {
            b2[i] = threshold_keep(t2, u) ? 1 : 0;
        } else {
            const TwoStepThresholds ts = two_step_thresholds(t1, t2);
            const uint64_t w = rng::point_uniform(step_key, t);
            const bool in2 = in1 ? !threshold_keep(ts.remove, w) : threshold_keep(ts.add, w);
            b2[i] = in2 ? 1 : 0;
        }
    }

    CoupledPair pair;
    pair.y1 = PointSet::pack(box, b1);
    pair.y2 = PointSet::pack(box, b2);
    pair.shared_draw = draw.map;
    pair.box = box;
    pair.seed = seed;
    pair.mode = mode;
    return pair;
}

Estimate symdiff_density(const CoupledPair& pair) {
    const uint64_t vol = uint64_t(pair.box.volume());
    if (vol == 0) return {0, 0, 0};
    const uint64_t diff = PointSet::symmetric_difference_count(pair.y1, pair.y2);
    const double p = double(diff) / double(vol);
    return {p, std::sqrt(p * (1 - p) / double(vol)), vol};
}

CouplingExactCheck coupling_exact_expectation(const PolynomialSpec& core, const WindowFn& f1,
                                              const WindowFn& f2, const Box& box, uint64_t seed,
                                              CouplingMode mode) {
    check_monomial_range(box.lo, box.hi, core.k);
    const PolynomialDraw draw = draw_polynomial_for_seed(core, seed);
    const uint64_t vol = uint64_t(box.volume());
    if (vol == 0) return {};

    // |delta| accumulates exactly on the 2^-64 scale; the mechanism error
    // is measured on the 2^-128 scale and reported in units
    u128 sum_abs_delta = 0;
    u128 max_err = 0;

    LatticePoint t = box.lo;
    do {
        const TorusVec v = draw.map.evaluate(t);
        const u128 t1 = prob_scale(f1.eval(v));
        const u128 t2 = prob_scale(f2.eval(v));
        const u128 abs_delta = t1 > t2 ? t1 - t2 : t2 - t1;
        sum_abs_delta += abs_delta;

        if (abs_delta == kOne64) {
            // |delta| = 1: both mechanisms disagree with probability
            // exactly 1 (remove/add threshold saturates), error 0
        } else {
            u128 mech; // P(disagree | draw) on the 2^-128 scale
            if (mode == CouplingMode::SharedUniform) {
                // disagreement iff u falls between the thresholds
                mech = abs_delta << 64;
            } else {
                const TwoStepThresholds ts = two_step_thresholds(t1, t2);
                mech = t1 * ts.remove + (kOne64 - t1) * ts.add;
            }
            const u128 ideal = abs_delta << 64;
            const u128 err = mech > ideal ? mech - ideal : ideal - mech;
            max_err = std::max(max_err, err);
        }

        bool more = false;
        for (int i = box.dim() - 1; i >= 0; --i) {
            if (++t[size_t(i)] < box.hi[size_t(i)]) {
                more = true;
                break;
            }
            t[size_t(i)] = box.lo[size_t(i)];
        }
        if (!more) break;
    } while (true);

    auto to_ld = [](u128 x, int scale) {
        const long double hi = static_cast<long double>(uint64_t(x >> 64));
        const long double lo = static_cast<long double>(uint64_t(x));
        return std::ldexp(hi, 64 - scale) + std::ldexp(lo, -scale);
    };
    CouplingExactCheck out;
    out.mean_abs_delta = to_ld(sum_abs_delta, 64) / (long double)(vol);
    out.max_mechanism_error = to_ld(max_err, 128);
    return out;
}

} // namespace latinv

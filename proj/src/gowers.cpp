#include "latinv/gowers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "latinv/errors.hpp"
#include "latinv/rng.hpp"

namespace latinv {

GridFn GridFn::indicator(const PointSet& s) {
    GridFn g;
    g.box = s.box();
    const uint64_t vol = uint64_t(g.box.volume());
    g.values.resize(vol);
    for (uint64_t i = 0; i < vol; ++i) g.values[i] = s.bit(i) ? 1.0 : 0.0;
    return g;
}

GridFn GridFn::constant(const Box& box, double value) {
    GridFn g;
    g.box = box;
    g.values.assign(size_t(box.volume()), value);
    return g;
}

namespace {

struct CubeGeometry {
    int d;
    int k;
    std::vector<int64_t> h;          // k shift vectors, flattened k*d
    std::vector<uint64_t> corner_off; // linear-offset of each of the 2^k corners
    Box valid;                        // admissible x range
    bool empty = false;
};

// Valid x range for given shifts: x + sum_i omega_i h_i must stay in base
// for every omega, which per axis pins x between the extreme offset sums.
void compute_geometry(const Box& base, const std::vector<int64_t>& h, int k, CubeGeometry& geo) {
    const int d = base.dim();
    geo.d = d;
    geo.k = k;
    geo.h = h;
    std::vector<int64_t> lo((size_t(d))), hi((size_t(d)));
    for (int a = 0; a < d; ++a) {
        int64_t mn = 0, mx = 0;
        for (int i = 0; i < k; ++i) {
            const int64_t v = h[size_t(i) * d + a];
            mn += std::min<int64_t>(0, v);
            mx += std::max<int64_t>(0, v);
        }
        lo[size_t(a)] = base.lo[size_t(a)] - mn;
        hi[size_t(a)] = base.hi[size_t(a)] - mx;
        if (lo[size_t(a)] >= hi[size_t(a)]) {
            geo.empty = true;
            return;
        }
    }
    geo.empty = false;
    geo.valid = Box(std::move(lo), std::move(hi));

    // linear offsets of the cube corners relative to x (valid because all
    // corners stay in-box, so index arithmetic never wraps an axis)
    std::vector<int64_t> strides(size_t(d), 1);
    for (int a = d - 2; a >= 0; --a)
        strides[size_t(a)] = strides[size_t(a) + 1] * base.extent(a + 1);
    geo.corner_off.assign(size_t(1) << k, 0);
    for (uint64_t mask = 0; mask < (uint64_t(1) << k); ++mask) {
        int64_t off = 0;
        for (int i = 0; i < k; ++i)
            if ((mask >> i) & 1)
                for (int a = 0; a < d; ++a) off += h[size_t(i) * d + a] * strides[size_t(a)];
        geo.corner_off[mask] = uint64_t(off);
    }
}

double corner_product(const GridFn& f, uint64_t x_linear, const CubeGeometry& geo) {
    double prod = 1.0;
    for (uint64_t off : geo.corner_off) prod *= f.values[x_linear + off];
    return prod;
}

// Sum of corner products over the admissible x range, iterated in linear
// order for reproducibility.
double sum_over_valid(const GridFn& f, const CubeGeometry& geo, uint64_t& count) {
    double sum = 0;
    LatticePoint x = geo.valid.lo;
    uint64_t n = 0;
    do {
        sum += corner_product(f, f.box.linear_index(x), geo);
        ++n;
        // advance odometer over the valid box
        int a = geo.d - 1;
        for (; a >= 0; --a) {
            if (++x[size_t(a)] < geo.valid.hi[size_t(a)]) break;
            x[size_t(a)] = geo.valid.lo[size_t(a)];
        }
        if (a < 0) break;
    } while (true);
    count += n;
    return sum;
}

double signed_root(double mean, int k) {
    const double p = std::ldexp(1.0, -k); // 2^-k
    return mean >= 0 ? std::pow(mean, p) : -std::pow(-mean, p);
}

} // namespace

double gowers_norm(const GridFn& f, const GowersConfig& cfg, uint64_t seed, Execution exec) {
    if (cfg.order < 1) throw std::invalid_argument("gowers_norm: order must be >= 1");
    if (!(f.box == cfg.base)) throw std::invalid_argument("gowers_norm: grid box != base box");
    const int d = cfg.base.dim();
    if (cfg.shift.dim() != d) throw std::invalid_argument("gowers_norm: shift dimension mismatch");
    const int k = cfg.order;

    const uint64_t shift_vol = uint64_t(cfg.shift.volume());
    if (shift_vol == 0) throw StatError("gowers_norm: empty shift box");

    if (cfg.mode == GowersConfig::Mode::Exact) {
        // number of shift tuples = shift_vol^k
        uint64_t tuples = 1;
        for (int i = 0; i < k; ++i) {
            if (tuples > (uint64_t(1) << 24) / shift_vol)
                throw StatError("gowers_norm: shift ensemble too large for exact mode");
            tuples *= shift_vol;
        }

        // one partial sum per tuple, combined sequentially afterwards, so
        // the result does not depend on the thread count
        std::vector<double> partial(tuples, 0.0);
        std::vector<uint64_t> counts(tuples, 0);

#pragma omp parallel if (exec == Execution::Parallel)
        {
            CubeGeometry geo;
            std::vector<int64_t> h(size_t(k) * d);
#pragma omp for schedule(dynamic, 16)
            for (int64_t ti = 0; ti < int64_t(tuples); ++ti) {
                uint64_t rest = uint64_t(ti);
                for (int i = k - 1; i >= 0; --i) {
                    const LatticePoint hi = cfg.shift.point_at(rest % shift_vol);
                    rest /= shift_vol;
                    for (int a = 0; a < d; ++a) h[size_t(i) * d + a] = hi[size_t(a)];
                }
                compute_geometry(cfg.base, h, k, geo);
                if (geo.empty) continue;
                uint64_t n = 0;
                partial[size_t(ti)] = sum_over_valid(f, geo, n);
                counts[size_t(ti)] = n;
            }
        }
        double sum = 0;
        uint64_t count = 0;
        for (uint64_t i = 0; i < tuples; ++i) {
            sum += partial[i];
            count += counts[i];
        }
        if (count == 0) throw StatError("gowers_norm: empty admissible set");
        return signed_root(sum / double(count), k);
    }

    // Monte Carlo: uniform admissible (x, h) via rejection
    rng::Stream stream(rng::derive(seed, 0x676F7772ull));
    const uint64_t base_vol = uint64_t(cfg.base.volume());
    if (base_vol == 0) throw StatError("gowers_norm: empty base box");
    double sum = 0;
    uint64_t accepted = 0, rejected = 0;
    CubeGeometry geo;
    std::vector<int64_t> h(size_t(k) * d);
    while (accepted < cfg.samples) {
        for (int i = 0; i < k; ++i) {
            const LatticePoint hi = cfg.shift.point_at(stream.next_below(shift_vol));
            for (int a = 0; a < d; ++a) h[size_t(i) * d + a] = hi[size_t(a)];
        }
        const LatticePoint x = cfg.base.point_at(stream.next_below(base_vol));
        compute_geometry(cfg.base, h, k, geo);
        if (geo.empty || !geo.valid.contains(x)) {
            if (++rejected > 1000000 + 1000 * cfg.samples)
                throw StatError("gowers_norm: empty admissible set (rejection cap reached)");
            continue;
        }
        sum += corner_product(f, f.box.linear_index(x), geo);
        ++accepted;
    }
    return signed_root(sum / double(accepted), k);
}

} // namespace latinv

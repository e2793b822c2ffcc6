#include "latinv/process.hpp"

#include <algorithm>
#include <bit>
#include <random>
#include <set>
#include <stdexcept>

namespace latinv {

namespace {

// Advances an odometer over [lo, hi) in linear (last-axis-fastest) order.
inline bool advance(LatticePoint& t, const Box& box) {
    for (int i = box.dim() - 1; i >= 0; --i) {
        if (++t[size_t(i)] < box.hi[size_t(i)]) return true;
        t[size_t(i)] = box.lo[size_t(i)];
    }
    return false;
}

} // namespace

Box::Box(std::vector<int64_t> l, std::vector<int64_t> h) : lo(std::move(l)), hi(std::move(h)) {
    if (lo.size() != hi.size() || lo.empty())
        throw std::invalid_argument("Box: lower/upper dimension mismatch");
    for (size_t i = 0; i < lo.size(); ++i)
        if (hi[i] < lo[i]) throw std::invalid_argument("Box: upper below lower");
    (void)volume(); // overflow check
}

Box Box::centered(int d, int64_t half) {
    return Box(std::vector<int64_t>(size_t(d), -half), std::vector<int64_t>(size_t(d), half));
}

Box Box::cube(int d, int64_t n) {
    return Box(std::vector<int64_t>(size_t(d), 0), std::vector<int64_t>(size_t(d), n));
}

int64_t Box::volume() const {
    int64_t v = 1;
    for (size_t i = 0; i < lo.size(); ++i) v = checked_mul(v, hi[i] - lo[i]);
    return v;
}

bool Box::contains(std::span<const int64_t> t) const {
    if (int(t.size()) != dim()) return false;
    for (size_t i = 0; i < lo.size(); ++i)
        if (t[i] < lo[i] || t[i] >= hi[i]) return false;
    return true;
}

uint64_t Box::linear_index(std::span<const int64_t> t) const {
    uint64_t idx = 0;
    for (size_t i = 0; i < lo.size(); ++i)
        idx = idx * uint64_t(hi[i] - lo[i]) + uint64_t(t[i] - lo[i]);
    return idx;
}

LatticePoint Box::point_at(uint64_t idx) const {
    LatticePoint t(lo.size());
    for (int i = dim() - 1; i >= 0; --i) {
        const uint64_t e = uint64_t(extent(i));
        t[size_t(i)] = lo[size_t(i)] + int64_t(idx % e);
        idx /= e;
    }
    return t;
}

PointSet PointSet::pack(Box box, std::span<const uint8_t> bytes) {
    const uint64_t n = uint64_t(box.volume());
    if (bytes.size() != n) throw std::invalid_argument("PointSet::pack: size mismatch");
    PointSet ps;
    ps.box_ = std::move(box);
    ps.words_.assign((n + 63) / 64, 0);
    uint64_t count = 0;
    for (uint64_t i = 0; i < n; ++i) {
        if (bytes[i]) {
            ps.words_[i >> 6] |= 1ull << (i & 63);
            ++count;
        }
    }
    ps.count_ = count;
    return ps;
}

bool PointSet::contains(std::span<const int64_t> t) const {
    if (!box_.contains(t)) throw std::out_of_range("PointSet::contains: point outside box");
    return bit(box_.linear_index(t));
}

uint64_t PointSet::symmetric_difference_count(const PointSet& a, const PointSet& b) {
    if (!(a.box_ == b.box_))
        throw std::invalid_argument("symmetric_difference_count: box mismatch");
    uint64_t c = 0;
    for (size_t i = 0; i < a.words_.size(); ++i) c += uint64_t(std::popcount(a.words_[i] ^ b.words_[i]));
    return c;
}

int ProcessNode::dim_hint() const {
    struct V {
        int operator()(const BernoulliSpec&) const { return 0; }
        int operator()(const PeriodicSpec&) const { return 0; }
        int operator()(const PolynomialSpec& s) const { return s.d; }
        int operator()(const CutProjectSpec& s) const { return s.d; }
        int operator()(const UnionSpec& s) const {
            const int l = s.left->dim_hint();
            return l != 0 ? l : s.right->dim_hint();
        }
        int operator()(const IntersectSpec& s) const {
            const int l = s.left->dim_hint();
            return l != 0 ? l : s.right->dim_hint();
        }
        int operator()(const ThinSpec& s) const { return s.inner->dim_hint(); }
        int operator()(const ImageSpec& s) const { return s.map.dim(); }
    };
    return std::visit(V{}, v);
}

ProcessNode clone(const ProcessNode& n) {
    struct V {
        ProcessNode operator()(const BernoulliSpec& s) const { return ProcessNode{s}; }
        ProcessNode operator()(const PeriodicSpec& s) const { return ProcessNode{s}; }
        ProcessNode operator()(const PolynomialSpec& s) const { return ProcessNode{s}; }
        ProcessNode operator()(const CutProjectSpec& s) const { return ProcessNode{s}; }
        ProcessNode operator()(const UnionSpec& s) const {
            return ProcessNode{UnionSpec{std::make_unique<ProcessNode>(clone(*s.left)),
                                         std::make_unique<ProcessNode>(clone(*s.right))}};
        }
        ProcessNode operator()(const IntersectSpec& s) const {
            return ProcessNode{IntersectSpec{std::make_unique<ProcessNode>(clone(*s.left)),
                                             std::make_unique<ProcessNode>(clone(*s.right))}};
        }
        ProcessNode operator()(const ThinSpec& s) const {
            return ProcessNode{ThinSpec{std::make_unique<ProcessNode>(clone(*s.inner)), s.keep}};
        }
        ProcessNode operator()(const ImageSpec& s) const {
            return ProcessNode{ImageSpec{std::make_unique<ProcessNode>(clone(*s.inner)), s.map}};
        }
    };
    return std::visit(V{}, n.v);
}

namespace {

void validate_node(const ProcessNode& n, int d) {
    struct V {
        int d;
        void operator()(const BernoulliSpec&) const {}
        void operator()(const PeriodicSpec& s) const {
            if (s.modulus < 1) throw std::invalid_argument("periodic: modulus must be >= 1");
            for (const auto& r : s.pattern)
                if (int(r.size()) != d)
                    throw std::invalid_argument("periodic: residue dimension mismatch");
        }
        void operator()(const PolynomialSpec& s) const {
            if (s.d != d) throw std::invalid_argument("polynomial: dimension mismatch with box");
            const int wd = s.window.dim();
            if (wd != 0 && wd != s.m)
                throw std::invalid_argument("polynomial: window dimension mismatch");
            if (s.coeff_action_gen && s.coeff_action_gen->n != s.m)
                throw std::invalid_argument("polynomial: coefficient action dimension mismatch");
        }
        void operator()(const CutProjectSpec& s) const {
            if (s.d != d) throw std::invalid_argument("cut-project: dimension mismatch with box");
            if (s.m_total != s.d + 1)
                throw std::invalid_argument(
                    "cut-project: only the graph normal form m_total = d + 1 is supported");
            if (s.window_len < 0 || s.window_lo < 0 || s.window_lo >= 1)
                throw std::invalid_argument("cut-project: window outside [0,1)");
        }
        void operator()(const UnionSpec& s) const {
            validate_node(*s.left, d);
            validate_node(*s.right, d);
        }
        void operator()(const IntersectSpec& s) const {
            validate_node(*s.left, d);
            validate_node(*s.right, d);
        }
        void operator()(const ThinSpec& s) const { validate_node(*s.inner, d); }
        void operator()(const ImageSpec& s) const {
            if (s.map.dim() != d) throw std::invalid_argument("image: map dimension mismatch");
            validate_node(*s.inner, d);
        }
    };
    std::visit(V{d}, n.v);
}

// --- node samplers ----------------------------------------------------------
//
// Every sampler writes one 0/1 byte per point of `box` in linear order.
// Randomness comes from (a) structured draws on a sequential stream keyed
// to the node, (b) stateless per-point uniforms keyed by absolute
// coordinates, so results are independent of tiling and box placement.

void fill_node(const ProcessNode& n, uint64_t key, const Box& box, uint8_t* out, Execution exec);

void fill_bernoulli(const BernoulliSpec& s, uint64_t key, const Box& box, uint8_t* out,
                    Execution exec) {
    const uint64_t vol = uint64_t(box.volume());
    const uint64_t pkey = rng::derive(key, rng::tag::kBernoulli);
#pragma omp parallel for schedule(static) if (exec == Execution::Parallel)
    for (int64_t i = 0; i < int64_t(vol); ++i) {
        const LatticePoint t = box.point_at(uint64_t(i));
        out[i] = s.p.keep(rng::point_uniform(pkey, t)) ? 1 : 0;
    }
}

void fill_periodic(const PeriodicSpec& s, uint64_t key, const Box& box, uint8_t* out,
                   Execution exec) {
    const int d = box.dim();
    const int64_t n = s.modulus;
    rng::Stream stream(rng::derive(key, rng::tag::kPeriodic));
    LatticePoint c((size_t)(d));
    for (int i = 0; i < d; ++i) c[size_t(i)] = int64_t(stream.next_below(uint64_t(n)));

    std::set<std::vector<int64_t>> residues;
    if (s.pattern.empty()) {
        residues.insert(std::vector<int64_t>(size_t(d), 0));
    } else {
        for (auto r : s.pattern) {
            for (auto& x : r) x = ((x % n) + n) % n;
            residues.insert(std::move(r));
        }
    }

    const uint64_t vol = uint64_t(box.volume());
#pragma omp parallel for schedule(static) if (exec == Execution::Parallel)
    for (int64_t i = 0; i < int64_t(vol); ++i) {
        LatticePoint t = box.point_at(uint64_t(i));
        for (int j = 0; j < d; ++j) {
            int64_t r = (t[size_t(j)] - c[size_t(j)]) % n;
            if (r < 0) r += n;
            t[size_t(j)] = r;
        }
        out[i] = residues.count(t) ? 1 : 0;
    }
}

struct PolyDraw {
    PolyMap map;
    uint64_t thin_key;
};

PolyDraw draw_polynomial(const PolynomialSpec& s, uint64_t key) {
    rng::Stream stream(rng::derive(key, rng::tag::kCoeffs));
    PolyDraw d{haar_sample(s.d, s.m, s.k, s.filter, s.subgroup, stream,
                           s.filter == DegreeFilter::Custom ? &s.custom_indices : nullptr),
               rng::derive(key, rng::tag::kThin)};
    return d;
}

// Reference implementation: direct evaluation at every point.
void fill_polynomial_serial(const PolynomialSpec& s, uint64_t key, const Box& box, uint8_t* out) {
    check_monomial_range(box.lo, box.hi, s.k);
    const PolyDraw draw = draw_polynomial(s, key);
    LatticePoint t = box.lo;
    uint64_t idx = 0;
    do {
        const TorusVec v = draw.map.evaluate(t);
        const Prob64 p = s.window.eval(v);
        out[idx++] = p.keep(rng::point_uniform(draw.thin_key, t)) ? 1 : 0;
    } while (advance(t, box));
}

// Production kernel: exact forward-difference stepping along the last
// axis (degree <= k in each variable over the wrapping torus group, so
// the stepped values coincide bit-for-bit with direct evaluation), rows
// distributed over OpenMP threads.
void fill_polynomial_parallel(const PolynomialSpec& s, uint64_t key, const Box& box,
                              uint8_t* out) {
    check_monomial_range(box.lo, box.hi, s.k);
    const PolyDraw draw = draw_polynomial(s, key);
    const int d = box.dim();
    const int64_t row_len = box.extent(d - 1);
    const int64_t n_rows = row_len == 0 ? 0 : box.volume() / row_len;
    const int k = s.k;
    const int m = s.m;

#pragma omp parallel
    {
        std::vector<uint64_t> diffs(size_t(k + 1) * m); // diffs[i*m + j] = (Delta^i P)_j
        std::vector<uint64_t> seeds(size_t(k + 1) * m);
        LatticePoint t((size_t)(d));
#pragma omp for schedule(static)
        for (int64_t row = 0; row < n_rows; ++row) {
            // decode row prefix (all axes but the last)
            uint64_t rest = uint64_t(row);
            for (int i = d - 2; i >= 0; --i) {
                const uint64_t e = uint64_t(box.extent(i));
                t[size_t(i)] = box.lo[size_t(i)] + int64_t(rest % e);
                rest /= e;
            }
            uint8_t* row_out = out + uint64_t(row) * uint64_t(row_len);

            const int64_t seed_count = std::min<int64_t>(row_len, k + 1);
            for (int64_t j = 0; j < seed_count; ++j) {
                t[size_t(d - 1)] = box.lo[size_t(d - 1)] + j;
                const TorusVec v = draw.map.evaluate(t);
                for (int c = 0; c < m; ++c) seeds[size_t(j) * m + c] = v[size_t(c)].frac;
            }
            // forward differences at the row start
            for (int64_t i = 1; i < seed_count; ++i)
                for (int64_t j = seed_count - 1; j >= i; --j)
                    for (int c = 0; c < m; ++c)
                        seeds[size_t(j) * m + c] -= seeds[size_t(j - 1) * m + c];
            std::copy(seeds.begin(), seeds.begin() + seed_count * m, diffs.begin());

            for (int64_t j = 0; j < row_len; ++j) {
                t[size_t(d - 1)] = box.lo[size_t(d - 1)] + j;
                const Prob64 p = s.window.eval_raw(diffs.data(), size_t(m));
                row_out[j] = p.keep(rng::point_uniform(draw.thin_key, t)) ? 1 : 0;
                for (int64_t i = 0; i + 1 < seed_count; ++i)
                    for (int c = 0; c < m; ++c)
                        diffs[size_t(i) * m + c] += diffs[size_t(i + 1) * m + c];
            }
        }
    }
}

void fill_cut_project(const CutProjectSpec& s, uint64_t key, const Box& box, uint8_t* out,
                      Execution exec) {
    rng::Stream stream(rng::derive(key, rng::tag::kCutProject));
    std::vector<double> xi(size_t(s.d) + 1);
    for (auto& x : xi) x = stream.next_unit();
    const double wlo = s.window_lo, wlen = s.window_len;
    const uint64_t vol = uint64_t(box.volume());
#pragma omp parallel for schedule(static) if (exec == Execution::Parallel)
    for (int64_t i = 0; i < int64_t(vol); ++i) {
        const LatticePoint t = box.point_at(uint64_t(i));
        double y = xi[0];
        for (int j = 0; j < s.d; ++j) y += double(t[size_t(j)]) * xi[size_t(j) + 1];
        double u = y - wlo;
        u -= std::floor(u);
        out[i] = (u < wlen) ? 1 : 0;
    }
}

void fill_image(const ImageSpec& s, uint64_t key, const Box& box, uint8_t* out, Execution exec) {
    const Box pre = preimage_box(s.map, box);
    std::vector<uint8_t> inner(size_t(pre.volume()));
    fill_node(*s.inner, rng::derive(key, rng::tag::kInner), pre, inner.data(), exec);
    const PointSet ps = PointSet::pack(pre, inner);
    const AffineMap ginv = invert(s.map);
    const uint64_t vol = uint64_t(box.volume());
#pragma omp parallel for schedule(static) if (exec == Execution::Parallel)
    for (int64_t i = 0; i < int64_t(vol); ++i) {
        const LatticePoint t = box.point_at(uint64_t(i));
        const LatticePoint u = latinv::apply(ginv, t);
        out[i] = ps.contains(u) ? 1 : 0;
    }
}

void fill_node(const ProcessNode& n, uint64_t key, const Box& box, uint8_t* out, Execution exec) {
    const uint64_t vol = uint64_t(box.volume());
    struct V {
        uint64_t key;
        const Box& box;
        uint8_t* out;
        Execution exec;
        uint64_t vol;

        void operator()(const BernoulliSpec& s) const { fill_bernoulli(s, key, box, out, exec); }
        void operator()(const PeriodicSpec& s) const { fill_periodic(s, key, box, out, exec); }
        void operator()(const PolynomialSpec& s) const {
            if (exec == Execution::Serial)
                fill_polynomial_serial(s, key, box, out);
            else
                fill_polynomial_parallel(s, key, box, out);
        }
        void operator()(const CutProjectSpec& s) const { fill_cut_project(s, key, box, out, exec); }
        void operator()(const UnionSpec& s) const {
            std::vector<uint8_t> right(vol);
            fill_node(*s.left, rng::derive(key, rng::tag::kLeft), box, out, exec);
            fill_node(*s.right, rng::derive(key, rng::tag::kRight), box, right.data(), exec);
            for (uint64_t i = 0; i < vol; ++i) out[i] |= right[i];
        }
        void operator()(const IntersectSpec& s) const {
            std::vector<uint8_t> right(vol);
            fill_node(*s.left, rng::derive(key, rng::tag::kLeft), box, out, exec);
            fill_node(*s.right, rng::derive(key, rng::tag::kRight), box, right.data(), exec);
            for (uint64_t i = 0; i < vol; ++i) out[i] &= right[i];
        }
        void operator()(const ThinSpec& s) const {
            fill_node(*s.inner, rng::derive(key, rng::tag::kInner), box, out, exec);
            const uint64_t pkey = rng::derive(key, rng::tag::kThinQ);
#pragma omp parallel for schedule(static) if (exec == Execution::Parallel)
            for (int64_t i = 0; i < int64_t(vol); ++i) {
                if (!out[i]) continue;
                const LatticePoint t = box.point_at(uint64_t(i));
                out[i] = s.keep.keep(rng::point_uniform(pkey, t)) ? 1 : 0;
            }
        }
        void operator()(const ImageSpec& s) const { fill_image(s, key, box, out, exec); }
    };
    std::visit(V{key, box, out, exec, vol}, n.v);
}

// Membership of a finite point list, mirroring fill_node's randomness
// exactly so that results agree bit-for-bit with box sampling.
void membership_node(const ProcessNode& n, uint64_t key, std::span<const LatticePoint> pts,
                     uint8_t* out) {
    struct V {
        uint64_t key;
        std::span<const LatticePoint> pts;
        uint8_t* out;

        void operator()(const BernoulliSpec& s) const {
            const uint64_t pkey = rng::derive(key, rng::tag::kBernoulli);
            for (size_t i = 0; i < pts.size(); ++i)
                out[i] = s.p.keep(rng::point_uniform(pkey, pts[i])) ? 1 : 0;
        }
        void operator()(const PeriodicSpec& s) const {
            const int64_t n = s.modulus;
            rng::Stream stream(rng::derive(key, rng::tag::kPeriodic));
            const int d = pts.empty() ? 0 : int(pts[0].size());
            LatticePoint c((size_t)(d));
            for (int i = 0; i < d; ++i) c[size_t(i)] = int64_t(stream.next_below(uint64_t(n)));
            std::set<std::vector<int64_t>> residues;
            if (s.pattern.empty()) {
                residues.insert(std::vector<int64_t>(size_t(d), 0));
            } else {
                for (auto r : s.pattern) {
                    for (auto& x : r) x = ((x % n) + n) % n;
                    residues.insert(std::move(r));
                }
            }
            for (size_t i = 0; i < pts.size(); ++i) {
                LatticePoint t = pts[i];
                for (int j = 0; j < d; ++j) {
                    int64_t r = (t[size_t(j)] - c[size_t(j)]) % n;
                    if (r < 0) r += n;
                    t[size_t(j)] = r;
                }
                out[i] = residues.count(t) ? 1 : 0;
            }
        }
        void operator()(const PolynomialSpec& s) const {
            const PolyDraw draw = draw_polynomial(s, key);
            for (size_t i = 0; i < pts.size(); ++i) {
                const TorusVec v = draw.map.evaluate(pts[i]);
                const Prob64 p = s.window.eval(v);
                out[i] = p.keep(rng::point_uniform(draw.thin_key, pts[i])) ? 1 : 0;
            }
        }
        void operator()(const CutProjectSpec& s) const {
            rng::Stream stream(rng::derive(key, rng::tag::kCutProject));
            std::vector<double> xi(size_t(s.d) + 1);
            for (auto& x : xi) x = stream.next_unit();
            for (size_t i = 0; i < pts.size(); ++i) {
                double y = xi[0];
                for (int j = 0; j < s.d; ++j) y += double(pts[i][size_t(j)]) * xi[size_t(j) + 1];
                double u = y - s.window_lo;
                u -= std::floor(u);
                out[i] = (u < s.window_len) ? 1 : 0;
            }
        }
        void operator()(const UnionSpec& s) const {
            std::vector<uint8_t> right(pts.size());
            membership_node(*s.left, rng::derive(key, rng::tag::kLeft), pts, out);
            membership_node(*s.right, rng::derive(key, rng::tag::kRight), pts, right.data());
            for (size_t i = 0; i < pts.size(); ++i) out[i] |= right[i];
        }
        void operator()(const IntersectSpec& s) const {
            std::vector<uint8_t> right(pts.size());
            membership_node(*s.left, rng::derive(key, rng::tag::kLeft), pts, out);
            membership_node(*s.right, rng::derive(key, rng::tag::kRight), pts, right.data());
            for (size_t i = 0; i < pts.size(); ++i) out[i] &= right[i];
        }
        void operator()(const ThinSpec& s) const {
            membership_node(*s.inner, rng::derive(key, rng::tag::kInner), pts, out);
            const uint64_t pkey = rng::derive(key, rng::tag::kThinQ);
            for (size_t i = 0; i < pts.size(); ++i)
                if (out[i]) out[i] = s.keep.keep(rng::point_uniform(pkey, pts[i])) ? 1 : 0;
        }
        void operator()(const ImageSpec& s) const {
            const AffineMap ginv = invert(s.map);
            std::vector<LatticePoint> pre(pts.size());
            for (size_t i = 0; i < pts.size(); ++i) pre[i] = latinv::apply(ginv, pts[i]);
            membership_node(*s.inner, rng::derive(key, rng::tag::kInner), pre, out);
        }
    };
    std::visit(V{key, pts, out}, n.v);
}

} // namespace

void validate_spec(const ProcessSpec& spec, int d) { validate_node(spec.root, d); }

PolynomialDraw draw_polynomial_for_seed(const PolynomialSpec& s, uint64_t seed) {
    const uint64_t node_key = rng::derive(seed, rng::tag::kRoot);
    PolyDraw d = draw_polynomial(s, node_key);
    return PolynomialDraw{std::move(d.map), node_key, d.thin_key};
}

std::optional<ApFastPath> ApFastPath::create(const ProcessSpec& spec) {
    const auto* s = std::get_if<PolynomialSpec>(&spec.root.v);
    if (!s) return std::nullopt;
    if (s->m != 1) return std::nullopt;
    if (s->d > 8 || s->k > 8) return std::nullopt;
    if (s->subgroup.kind == CoeffSubgroup::Kind::CoordinateSubtorus &&
        (s->subgroup.active_coords.size() != 1 || !s->subgroup.active_coords[0]))
        return std::nullopt;

    ApFastPath fp;
    fp.spec_ = s;
    fp.d_ = s->d;
    fp.k_ = s->k;
    fp.dyadic_level_ =
        s->subgroup.kind == CoeffSubgroup::Kind::Dyadic ? s->subgroup.dyadic_level : 64;
    if (fp.dyadic_level_ < 0 || fp.dyadic_level_ > 64) return std::nullopt;

    const auto& basis = monomial_basis_cached(s->d, s->k);
    if (basis.size() > 256) return std::nullopt;
    fp.selected_.assign(basis.size(), 0);
    fp.exponents_.assign(basis.size() * size_t(s->d), 0);
    for (size_t a = 0; a < basis.size(); ++a) {
        switch (s->filter) {
        case DegreeFilter::AtMostK: fp.selected_[a] = 1; break;
        case DegreeFilter::TopDegreeOnly: fp.selected_[a] = basis[a].degree() == s->k; break;
        case DegreeFilter::Custom: break;
        }
        for (int i = 0; i < s->d; ++i)
            fp.exponents_[a * size_t(s->d) + size_t(i)] = uint8_t(basis[a].e[size_t(i)]);
    }
    if (s->filter == DegreeFilter::Custom)
        for (size_t i : s->custom_indices) {
            if (i >= basis.size()) return std::nullopt;
            fp.selected_[i] = 1;
        }
    return fp;
}

void ApFastPath::run(uint64_t seed, std::span<const int64_t> base, std::span<const int64_t> step,
                     int L, uint8_t* out) const {
    const int d = d_, k = k_;
    const size_t D = selected_.size();
    const uint64_t node_key = rng::derive(seed, rng::tag::kRoot);

    // coefficient draw, mirroring haar_sample's order exactly
    uint64_t coeffs[256];
    {
        rng::Stream stream(rng::derive(node_key, rng::tag::kCoeffs));
        for (size_t a = 0; a < D; ++a) {
            uint64_t u = 0;
            if (selected_[a]) {
                u = stream.next();
                if (dyadic_level_ < 64)
                    u = dyadic_level_ == 0 ? 0 : (u >> (64 - dyadic_level_)) << (64 - dyadic_level_);
            }
            coeffs[a] = u;
        }
    }

    // seed values of the restricted polynomial by direct evaluation;
    // plain multiplications are safe because the caller validated the
    // monomial range of the enclosing box (AP points never leave it)
    const int seeds = std::min(L, k + 1);
    uint64_t diffs[9];
    int64_t pt[8];
    for (int j = 0; j < seeds; ++j) {
        for (int i = 0; i < d; ++i) pt[i] = base[size_t(i)] + int64_t(j) * step[size_t(i)];
        int64_t powers[8][9];
        for (int i = 0; i < d; ++i) {
            powers[i][0] = 1;
            for (int e = 1; e <= k; ++e) powers[i][e] = powers[i][e - 1] * pt[i];
        }
        uint64_t acc = 0;
        const uint8_t* exp = exponents_.data();
        for (size_t a = 0; a < D; ++a, exp += d) {
            int64_t mono = powers[0][exp[0]];
            for (int i = 1; i < d; ++i) mono *= powers[i][exp[i]];
            acc += uint64_t(mono) * coeffs[a];
        }
        diffs[j] = acc;
    }
    for (int i = 1; i < seeds; ++i)
        for (int j = seeds - 1; j >= i; --j) diffs[j] -= diffs[j - 1];

    const WindowFn& window = spec_->window;
    const uint64_t thin_key = rng::derive(node_key, rng::tag::kThin);
    for (int j = 0; j < L; ++j) {
        const Prob64 p = window.eval_raw(&diffs[0], 1);
        bool keep;
        if (p.one) {
            keep = true;
        } else if (p.thr == 0) {
            keep = false;
        } else {
            for (int i = 0; i < d; ++i) pt[i] = base[size_t(i)] + int64_t(j) * step[size_t(i)];
            keep = p.keep(rng::point_uniform(thin_key, std::span<const int64_t>(pt, size_t(d))));
        }
        out[j] = keep ? 1 : 0;
        for (int i = 0; i + 1 < seeds; ++i) diffs[i] += diffs[i + 1];
    }
}

PointSet sample_with_seed(const ProcessSpec& spec, const Box& box, uint64_t seed, Execution exec) {
    validate_spec(spec, box.dim());
    const uint64_t vol = uint64_t(box.volume());
    std::vector<uint8_t> bytes(vol);
    if (vol > 0) fill_node(spec.root, rng::derive(seed, rng::tag::kRoot), box, bytes.data(), exec);
    return PointSet::pack(box, bytes);
}

PointSet sample(const ProcessSpec& spec, const Box& box, Execution exec) {
    return sample_with_seed(spec, box, spec.seed, exec);
}

std::vector<uint8_t> sample_membership(const ProcessSpec& spec, uint64_t seed,
                                       std::span<const LatticePoint> points) {
    std::vector<uint8_t> out(points.size());
    if (!points.empty()) {
        validate_spec(spec, int(points[0].size()));
        membership_node(spec.root, rng::derive(seed, rng::tag::kRoot), points, out.data());
    }
    return out;
}

Box preimage_box(const AffineMap& g, const Box& target) {
    const int d = target.dim();
    const AffineMap ginv = invert(g);
    std::vector<int64_t> mn(size_t(d), INT64_MAX), mx(size_t(d), INT64_MIN);
    // corners of the closed box [lo, hi-1]
    for (uint64_t mask = 0; mask < (uint64_t(1) << d); ++mask) {
        LatticePoint c((size_t)(d));
        for (int i = 0; i < d; ++i)
            c[size_t(i)] = (mask >> i) & 1 ? target.hi[size_t(i)] - 1 : target.lo[size_t(i)];
        const LatticePoint u = latinv::apply(ginv, c);
        for (int i = 0; i < d; ++i) {
            mn[size_t(i)] = std::min(mn[size_t(i)], u[size_t(i)]);
            mx[size_t(i)] = std::max(mx[size_t(i)], u[size_t(i)]);
        }
    }
    for (int i = 0; i < d; ++i) mx[size_t(i)] = checked_add(mx[size_t(i)], 1);
    return Box(std::move(mn), std::move(mx));
}

PointSet transform(const PointSet& s, const AffineMap& g, const Box& target_box) {
    const AffineMap ginv = invert(g);
    const uint64_t vol = uint64_t(target_box.volume());
    std::vector<uint8_t> bytes(vol);
    for (uint64_t i = 0; i < vol; ++i) {
        const LatticePoint t = target_box.point_at(i);
        const LatticePoint u = latinv::apply(ginv, t);
        if (!s.box().contains(u))
            throw CoverageError("transform: source sample does not cover the target box");
        bytes[i] = s.contains(u) ? 1 : 0;
    }
    return PointSet::pack(target_box, bytes);
}

double RealBox::volume() const {
    double v = 1;
    for (size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
    return v;
}

PoissonSample sample_poisson(double eta, const RealBox& region, rng::Stream& stream) {
    if (eta < 0) throw std::invalid_argument("sample_poisson: negative intensity");
    const double mean = eta * region.volume();
    if (!(mean < 4294967296.0)) throw std::invalid_argument("sample_poisson: mean count too large");
    PoissonSample out;
    if (mean == 0) return out;
    std::poisson_distribution<int64_t> pois(mean);
    out.count = uint64_t(pois(stream));
    out.points.resize(out.count);
    for (auto& p : out.points) {
        p.resize(size_t(region.dim()));
        for (int i = 0; i < region.dim(); ++i)
            p[size_t(i)] = region.lo[size_t(i)] +
                           stream.next_unit() * (region.hi[size_t(i)] - region.lo[size_t(i)]);
    }
    return out;
}

} // namespace latinv

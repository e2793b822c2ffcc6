#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "latinv/affine.hpp"
#include "latinv/polymap.hpp"
#include "latinv/rng.hpp"
#include "latinv/torus.hpp"

namespace latinv {

// Half-open product of integer intervals [lo_i, hi_i).
struct Box {
    std::vector<int64_t> lo, hi;

    Box() = default;
    Box(std::vector<int64_t> l, std::vector<int64_t> h);
    // [-half, half)^d
    static Box centered(int d, int64_t half);
    // [0, n)^d
    static Box cube(int d, int64_t n);

    int dim() const { return int(lo.size()); }
    int64_t extent(int i) const { return hi[size_t(i)] - lo[size_t(i)]; }
    int64_t volume() const;
    bool contains(std::span<const int64_t> t) const;

    // Row-major linear index, last axis fastest.
    uint64_t linear_index(std::span<const int64_t> t) const;
    LatticePoint point_at(uint64_t idx) const;

    friend bool operator==(const Box& a, const Box& b) { return a.lo == b.lo && a.hi == b.hi; }
};

// Realized sample on a finite box, bit-packed.
class PointSet {
public:
    PointSet() = default;
    // bytes: one 0/1 byte per point in linear order.
    static PointSet pack(Box box, std::span<const uint8_t> bytes);

    const Box& box() const { return box_; }
    uint64_t cardinality() const { return count_; }

    // Throws std::out_of_range for points outside the box.
    bool contains(std::span<const int64_t> t) const;
    bool bit(uint64_t linear) const {
        return (words_[linear >> 6] >> (linear & 63)) & 1ull;
    }

    const std::vector<uint64_t>& words() const { return words_; }

    friend bool operator==(const PointSet& a, const PointSet& b) {
        return a.box_ == b.box_ && a.words_ == b.words_;
    }

    static uint64_t symmetric_difference_count(const PointSet& a, const PointSet& b);

private:
    Box box_;
    std::vector<uint64_t> words_;
    uint64_t count_ = 0;
};

// --- process description tree -------------------------------------------

struct ProcessNode;
using NodePtr = std::unique_ptr<ProcessNode>;

struct BernoulliSpec {
    Prob64 p;
};

// Uniform random translate of the union of residue classes `pattern`
// modulo n. The default pattern {0} gives a random translate of nZ^d.
// Density is exactly |pattern| / n^d.
struct PeriodicSpec {
    int64_t modulus = 2;
    std::vector<std::vector<int64_t>> pattern; // residue tuples; empty = {0}
};

struct PolynomialSpec {
    int d = 2;
    int m = 1;
    int k = 1;
    DegreeFilter filter = DegreeFilter::AtMostK;
    CoeffSubgroup subgroup;
    WindowFn window;
    std::vector<size_t> custom_indices;      // for DegreeFilter::Custom
    std::optional<IntMat> coeff_action_gen;  // optional fixed coefficient action
};

// Graph normal form over Z^d with one internal dimension: the lattice is
// {(t, z + xi_0 + sum t_i xi_i)} and t is kept iff the internal coordinate
// lands in the window (mod 1). Translates xi are drawn uniformly per
// sample. Internal-space arithmetic is floating point on purpose: this is
// an independent route from the torus-arithmetic samplers.
struct CutProjectSpec {
    int d = 2;
    int m_total = 3; // must equal d + 1 (graph form)
    double window_lo = 0.0;
    double window_len = 0.5;
};

struct UnionSpec {
    NodePtr left, right;
};
struct IntersectSpec {
    NodePtr left, right;
};
struct ThinSpec {
    NodePtr inner;
    Prob64 keep;
};
struct ImageSpec {
    NodePtr inner;
    AffineMap map;
};

struct ProcessNode {
    std::variant<BernoulliSpec, PeriodicSpec, PolynomialSpec, CutProjectSpec, UnionSpec,
                 IntersectSpec, ThinSpec, ImageSpec>
        v;

    int dim_hint() const; // 0 if any dimension works (Bernoulli)
};

ProcessNode clone(const ProcessNode& n);

struct ProcessSpec {
    ProcessNode root;
    uint64_t seed = 0;

    ProcessSpec() = default;
    ProcessSpec(ProcessNode n, uint64_t s) : root(std::move(n)), seed(s) {}
    ProcessSpec(const ProcessSpec& o) : root(clone(o.root)), seed(o.seed) {}
    ProcessSpec(ProcessSpec&&) = default;
    ProcessSpec& operator=(const ProcessSpec& o) {
        root = clone(o.root);
        seed = o.seed;
        return *this;
    }
    ProcessSpec& operator=(ProcessSpec&&) = default;

    int dim_hint() const { return root.dim_hint(); }
};

// Validates dimensions through the tree against a box of dimension d.
void validate_spec(const ProcessSpec& spec, int d);

enum class Execution { Serial, Parallel };

// Draws the realization of the process restricted to `box`. Deterministic
// function of (spec tree, seed, box); Serial and Parallel produce
// bit-identical results.
PointSet sample(const ProcessSpec& spec, const Box& box, Execution exec = Execution::Parallel);
PointSet sample_with_seed(const ProcessSpec& spec, const Box& box, uint64_t seed,
                          Execution exec = Execution::Parallel);

// Membership of an arbitrary finite point list under the same randomness:
// bit i of the result equals sample(spec, any box containing points[i],
// seed).contains(points[i]).
std::vector<uint8_t> sample_membership(const ProcessSpec& spec, uint64_t seed,
                                       std::span<const LatticePoint> points);

// Structured draw of a polynomial process placed at the tree root: the
// coefficient map and the per-point thinning key, exactly as the box
// sampler would derive them. Shared with the coupling module so coupled
// marginals coincide bit-for-bit with standalone samples.
struct PolynomialDraw {
    PolyMap map;
    uint64_t node_key = 0;
    uint64_t thin_key = 0;
};
PolynomialDraw draw_polynomial_for_seed(const PolynomialSpec& s, uint64_t seed);

// Allocation-free membership along an arithmetic progression for a
// root-level polynomial node (forward differences along the progression
// direction). Returns false when the spec shape is unsupported; when it
// returns true, out[j] equals sample_membership at base + j*step
// bit-for-bit. Reusable plan, one instance per (spec) per thread.
class ApFastPath {
public:
    // spec must outlive the fast path
    static std::optional<ApFastPath> create(const ProcessSpec& spec);

    int dim() const { return d_; }

    // Caller must have validated the monomial range of the box containing
    // the progression (check_monomial_range); the inner loop then runs
    // without per-operation overflow checks.
    void run(uint64_t seed, std::span<const int64_t> base, std::span<const int64_t> step, int L,
             uint8_t* out) const;

private:
    const PolynomialSpec* spec_ = nullptr;
    int d_ = 0, k_ = 0;
    std::vector<uint8_t> selected_;       // per-basis-index draw flag
    std::vector<uint8_t> exponents_;      // flattened basis exponents, D x d
    int dyadic_level_ = 64;
};

// t is in the result iff g^{-1}(t) is in s. Throws CoverageError when the
// preimage of target_box is not contained in s's box.
PointSet transform(const PointSet& s, const AffineMap& g, const Box& target_box);

// Smallest box whose g-image covers `target` (computed from corner
// preimages); convenience for callers of transform.
Box preimage_box(const AffineMap& g, const Box& target);

// --- continuous Poisson baseline ------------------------------------------

struct RealBox {
    std::vector<double> lo, hi;
    int dim() const { return int(lo.size()); }
    double volume() const;
};

struct PoissonSample {
    uint64_t count = 0;
    std::vector<std::vector<double>> points;
};

// Homogeneous Poisson process of intensity eta on a real box: count is
// Poisson(eta * vol), locations i.i.d. uniform; disjoint regions sampled
// with distinct streams are independent.
PoissonSample sample_poisson(double eta, const RealBox& region, rng::Stream& stream);

} // namespace latinv

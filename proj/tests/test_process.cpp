#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "latinv/numerics.hpp"
#include "latinv/process.hpp"
#include "latinv/stats.hpp"

using namespace latinv;

namespace {

ProcessSpec bernoulli(long double p, uint64_t seed) {
    return ProcessSpec(ProcessNode{BernoulliSpec{Prob64::from_unit(p)}}, seed);
}

ProcessSpec poly_process(int d, int k, long double delta, uint64_t seed) {
    PolynomialSpec s;
    s.d = d;
    s.k = k;
    s.window = WindowFn::box1(0.0L, delta);
    return ProcessSpec(ProcessNode{std::move(s)}, seed);
}

} // namespace

TEST_CASE("box basics") {
    const Box b({-2, 0}, {3, 4});
    CHECK(b.volume() == 20);
    CHECK(b.contains(LatticePoint{-2, 3}));
    CHECK(!b.contains(LatticePoint{3, 0}));
    CHECK(b.point_at(b.linear_index(LatticePoint{1, 2})) == LatticePoint{1, 2});
    CHECK(b.linear_index(LatticePoint{-2, 0}) == 0);
    CHECK(b.linear_index(LatticePoint{-2, 1}) == 1); // last axis fastest
}

TEST_CASE("bernoulli extremes") {
    const Box box = Box::cube(2, 10);
    CHECK(sample(bernoulli(1.0L, 7), box).cardinality() == 100);
    CHECK(sample(bernoulli(0.0L, 7), box).cardinality() == 0);
}

TEST_CASE("degenerate boxes return empty sets") {
    const Box empty({0, 0}, {0, 5});
    const PointSet s = sample(bernoulli(0.5L, 9), empty);
    CHECK(s.cardinality() == 0);
}

TEST_CASE("identical spec, seed and box reproduce bit-identical samples") {
    const ProcessSpec spec = poly_process(2, 2, 0.5L, 99);
    const Box box = Box::centered(2, 12);
    CHECK(sample(spec, box) == sample(spec, box));
}

TEST_CASE("serial and parallel execution agree bit-for-bit") {
    const Box b2 = Box::centered(2, 17);
    for (int k = 0; k <= 3; ++k) {
        const ProcessSpec spec = poly_process(2, k, 0.5L, 1000 + uint64_t(k));
        CHECK(sample(spec, b2, Execution::Serial) == sample(spec, b2, Execution::Parallel));
    }
    const Box b3 = Box::centered(3, 6);
    const ProcessSpec spec3 = poly_process(3, 3, 0.25L, 5);
    CHECK(sample(spec3, b3, Execution::Serial) == sample(spec3, b3, Execution::Parallel));

    const Box b1({-40}, {41});
    const ProcessSpec spec1 = poly_process(1, 2, 0.5L, 6);
    CHECK(sample(spec1, b1, Execution::Serial) == sample(spec1, b1, Execution::Parallel));
}

TEST_CASE("membership sampling equals box sampling restricted") {
    // combinator tree exercising every node type
    PolynomialSpec poly;
    poly.d = 2;
    poly.k = 2;
    poly.window = WindowFn::box1(0.0L, 0.5L);
    PeriodicSpec per;
    per.modulus = 3;
    auto leaf_poly = std::make_unique<ProcessNode>(ProcessNode{std::move(poly)});
    auto leaf_per = std::make_unique<ProcessNode>(ProcessNode{per});
    auto uni = std::make_unique<ProcessNode>(
        ProcessNode{UnionSpec{std::move(leaf_poly), std::move(leaf_per)}});
    auto thin = std::make_unique<ProcessNode>(
        ProcessNode{ThinSpec{std::move(uni), Prob64::from_unit(0.8L)}});
    auto bern = std::make_unique<ProcessNode>(ProcessNode{BernoulliSpec{Prob64::from_unit(0.9L)}});
    auto inter =
        std::make_unique<ProcessNode>(ProcessNode{IntersectSpec{std::move(thin), std::move(bern)}});
    ProcessSpec spec(ProcessNode{ImageSpec{std::move(inter), affine_preset("shear-12", 2)}}, 321);

    const Box box = Box::centered(2, 9);
    const PointSet ps = sample(spec, box);
    std::vector<LatticePoint> pts;
    for (uint64_t i = 0; i < uint64_t(box.volume()); ++i) pts.push_back(box.point_at(i));
    const auto bits = sample_membership(spec, spec.seed, pts);
    for (size_t i = 0; i < pts.size(); ++i) CHECK(bool(bits[i]) == ps.contains(pts[i]));
}

TEST_CASE("polynomial with constant window matches bernoulli occupancy") {
    PolynomialSpec s;
    s.d = 2;
    s.k = 2;
    s.window = WindowFn::constant(0.3L);
    const ProcessSpec via_poly(ProcessNode{std::move(s)}, 0);
    const ProcessSpec via_bern = bernoulli(0.3L, 0);

    const Box box = Box::cube(2, 24);
    uint64_t occ_poly = 0, occ_bern = 0;
    const int trials = 150;
    for (int t = 0; t < trials; ++t) {
        occ_poly += sample_with_seed(via_poly, box, rng::trial_seed(10, uint64_t(t))).cardinality();
        occ_bern += sample_with_seed(via_bern, box, rng::trial_seed(20, uint64_t(t))).cardinality();
    }
    const uint64_t n = uint64_t(trials) * uint64_t(box.volume());
    const auto tp = two_proportion_test(occ_poly, n, occ_bern, n);
    CHECK(tp.p_value > 1e-4);
}

TEST_CASE("planar degree-1 process has intensity near one half") {
    const Box box = Box::cube(2, 40);
    std::vector<double> vals;
    for (uint64_t seed = 0; seed < 50; ++seed)
        vals.push_back(intensity(sample(poly_process(2, 1, 0.5L, seed), box)).value);
    const double mu = mean_of(vals);
    const double se = stddev_of(vals) / std::sqrt(50.0);
    CHECK(std::fabs(mu - 0.5) < 4 * se + 1e-3);
}

TEST_CASE("shared-draw window monotonicity") {
    PolynomialSpec narrow;
    narrow.d = 2;
    narrow.k = 2;
    narrow.window = WindowFn::box1(0.0L, 0.4L);
    PolynomialSpec wide = narrow;
    wide.window = WindowFn::box1(0.0L, 0.7L);
    const ProcessSpec sn(ProcessNode{std::move(narrow)}, 77);
    const ProcessSpec sw(ProcessNode{std::move(wide)}, 77);
    const Box box = Box::centered(2, 16);
    const PointSet a = sample(sn, box);
    const PointSet b = sample(sw, box);
    for (size_t i = 0; i < a.words().size(); ++i) CHECK((a.words()[i] & ~b.words()[i]) == 0);
}

TEST_CASE("union and intersection intensities for independent bernoullis") {
    auto l = std::make_unique<ProcessNode>(ProcessNode{BernoulliSpec{Prob64::from_unit(0.3L)}});
    auto r = std::make_unique<ProcessNode>(ProcessNode{BernoulliSpec{Prob64::from_unit(0.5L)}});
    const ProcessSpec u(ProcessNode{UnionSpec{std::move(l), std::move(r)}}, 31);
    auto l2 = std::make_unique<ProcessNode>(ProcessNode{BernoulliSpec{Prob64::from_unit(0.3L)}});
    auto r2 = std::make_unique<ProcessNode>(ProcessNode{BernoulliSpec{Prob64::from_unit(0.5L)}});
    const ProcessSpec i(ProcessNode{IntersectSpec{std::move(l2), std::move(r2)}}, 33);

    const Box box = Box::cube(2, 128);
    const Estimate eu = intensity(sample(u, box));
    const Estimate ei = intensity(sample(i, box));
    CHECK(std::fabs(eu.value - (0.3 + 0.5 - 0.15)) < 4 * eu.std_error);
    CHECK(std::fabs(ei.value - 0.15) < 4 * ei.std_error);
}

TEST_CASE("thinning multiplies intensity") {
    auto inner = std::make_unique<ProcessNode>(ProcessNode{BernoulliSpec{Prob64::from_unit(0.8L)}});
    const ProcessSpec t(ProcessNode{ThinSpec{std::move(inner), Prob64::from_unit(0.5L)}}, 5);
    const Estimate e = intensity(sample(t, Box::cube(2, 128)));
    CHECK(std::fabs(e.value - 0.4) < 4 * e.std_error);
}

TEST_CASE("periodic sampler") {
    PeriodicSpec s;
    s.modulus = 3;
    const ProcessSpec spec(ProcessNode{s}, 11);
    const Box box = Box::cube(2, 30);
    const PointSet ps = sample(spec, box);
    CHECK(ps.cardinality() == 100); // exactly one residue class of 3Z^2

    // the sample is a translate of 3Z^2: differences of members vanish mod 3
    LatticePoint first;
    bool found = false;
    for (uint64_t i = 0; i < uint64_t(box.volume()); ++i) {
        if (!ps.bit(i)) continue;
        const LatticePoint t = box.point_at(i);
        if (!found) {
            first = t;
            found = true;
        } else {
            CHECK((t[0] - first[0]) % 3 == 0);
            CHECK((t[1] - first[1]) % 3 == 0);
        }
    }

    // shifting a realization lands on the shifted residue class
    const AffineMap shift = AffineMap::translation({1, 0});
    const Box target({1, 0}, {25, 24});
    const PointSet moved = transform(ps, shift, target);
    for (uint64_t i = 0; i < uint64_t(target.volume()); ++i) {
        if (!moved.bit(i)) continue;
        const LatticePoint t = target.point_at(i);
        CHECK(((t[0] - first[0] - 1) % 3 + 3) % 3 == 0);
    }
}

TEST_CASE("periodic translate classes are uniform across seeds") {
    PeriodicSpec s;
    s.modulus = 2;
    std::vector<uint64_t> class_counts(4, 0);
    const Box probe({0, 0}, {2, 2});
    for (uint64_t seed = 0; seed < 2000; ++seed) {
        const PointSet ps = sample(ProcessSpec(ProcessNode{s}, seed), probe);
        for (uint64_t i = 0; i < 4; ++i)
            if (ps.bit(i)) class_counts[i] += 1;
    }
    // chi-square against uniform over the 4 classes
    double stat = 0;
    for (uint64_t c : class_counts) stat += (double(c) - 500.0) * (double(c) - 500.0) / 500.0;
    CHECK(chisq_sf(stat, 3) > 1e-4);
}

TEST_CASE("pattern periodic density") {
    PeriodicSpec s;
    s.modulus = 2;
    s.pattern = {{0, 0}, {1, 1}};
    const ProcessSpec spec(ProcessNode{s}, 3);
    const PointSet ps = sample(spec, Box::cube(2, 10));
    CHECK(ps.cardinality() == 50); // density |pattern| / n^d = 1/2
}

TEST_CASE("transform identity and coverage") {
    const ProcessSpec spec = bernoulli(0.5L, 17);
    const Box box = Box::cube(2, 8);
    const PointSet ps = sample(spec, box);
    CHECK(transform(ps, AffineMap::identity(2), box) == ps);
    const Box bigger = Box::cube(2, 9);
    CHECK_THROWS_AS(transform(ps, AffineMap::identity(2), bigger), CoverageError);
}

TEST_CASE("shear image of the even sublattice is a coset pattern") {
    PeriodicSpec s;
    s.modulus = 2;
    ProcessSpec spec(ProcessNode{s}, 123);
    const Box target = Box::cube(2, 16);
    const AffineMap shear = affine_preset("shear-12", 2);
    const Box source = preimage_box(shear, target);
    const PointSet src = sample(spec, source);
    const PointSet img = transform(src, shear, target);
    // index-4 sublattice pattern: intensity exactly 1/4
    CHECK(img.cardinality() * 4 == uint64_t(target.volume()));
    const AffineMap inv = invert(shear);
    for (uint64_t i = 0; i < uint64_t(target.volume()); ++i) {
        const LatticePoint t = target.point_at(i);
        const LatticePoint u = latinv::apply(inv, t);
        CHECK(img.bit(i) == src.contains(u));
    }
}

TEST_CASE("cut-and-project window extremes") {
    CutProjectSpec s;
    s.d = 2;
    s.m_total = 3;
    s.window_lo = 0;
    s.window_len = 1.0;
    const Box box = Box::centered(2, 8);
    CHECK(sample(ProcessSpec(ProcessNode{s}, 4), box).cardinality() == uint64_t(box.volume()));
    s.window_len = 0.0;
    CHECK(sample(ProcessSpec(ProcessNode{s}, 4), box).cardinality() == 0);
}

TEST_CASE("cut-and-project one-point marginal matches the window length") {
    CutProjectSpec s;
    s.d = 2;
    s.m_total = 3;
    s.window_lo = 0;
    s.window_len = 0.5;
    const ProcessSpec spec(ProcessNode{s}, 0);
    const MarginalQuery q({LatticePoint{0, 0}});
    const auto est = k_point_marginal(spec, q, 20000, 555);
    CHECK(est.ci.lo <= 0.5);
    CHECK(est.ci.hi >= 0.5);
}

TEST_CASE("cut-and-project rejects non-graph forms") {
    CutProjectSpec s;
    s.d = 2;
    s.m_total = 5;
    CHECK_THROWS_AS(sample(ProcessSpec(ProcessNode{s}, 0), Box::cube(2, 4)),
                    std::invalid_argument);
}

TEST_CASE("poisson baseline moments") {
    rng::Stream s(2025);
    const RealBox region{{0, 0, 0}, {10, 10, 10}};
    CHECK(sample_poisson(0.0, region, s).count == 0);

    double sum = 0;
    const int trials = 1000;
    for (int i = 0; i < trials; ++i) sum += double(sample_poisson(1.0, region, s).count);
    const double mean = sum / trials;
    CHECK(std::fabs(mean - 1000.0) < 4 * std::sqrt(1000.0 / trials));
}

TEST_CASE("poisson counts in disjoint regions are uncorrelated") {
    rng::Stream s(2026);
    const RealBox a{{0, 0}, {1, 1}};
    const RealBox b{{5, 5}, {6, 6}};
    const int n = 10000;
    std::vector<double> xs, ys;
    for (int i = 0; i < n; ++i) {
        xs.push_back(double(sample_poisson(4.0, a, s).count));
        ys.push_back(double(sample_poisson(4.0, b, s).count));
    }
    const double mx = mean_of(xs), my = mean_of(ys);
    double cov = 0;
    for (int i = 0; i < n; ++i) cov += (xs[size_t(i)] - mx) * (ys[size_t(i)] - my);
    cov /= n - 1;
    const double corr = cov / (stddev_of(xs) * stddev_of(ys));
    CHECK(std::fabs(corr) * std::sqrt(double(n)) < 4);
}

TEST_CASE("spec validation reports mismatches") {
    const ProcessSpec spec = poly_process(3, 1, 0.5L, 0);
    CHECK_THROWS_AS(sample(spec, Box::cube(2, 4)), std::invalid_argument);

    PolynomialSpec bad;
    bad.d = 2;
    bad.k = 1;
    bad.window = WindowFn::box({TorusInterval::closed_open(0.0L, 0.5L),
                                TorusInterval::closed_open(0.0L, 0.5L)}); // m = 1 vs 2-D window
    CHECK_THROWS_AS(sample(ProcessSpec(ProcessNode{std::move(bad)}, 0), Box::cube(2, 4)),
                    std::invalid_argument);
}

TEST_CASE("arithmetic-progression fast path matches generic membership") {
    for (int k = 0; k <= 3; ++k) {
        const ProcessSpec spec = poly_process(2, k, 0.37L, 0);
        const auto fast = ApFastPath::create(spec);
        REQUIRE(fast.has_value());
        rng::Stream s(811 + uint64_t(k));
        for (int rep = 0; rep < 200; ++rep) {
            const LatticePoint base{int64_t(s.next_below(41)) - 20, int64_t(s.next_below(41)) - 20};
            const LatticePoint step{int64_t(s.next_below(7)) - 3, int64_t(s.next_below(7)) - 3};
            const int L = 1 + int(s.next_below(8));
            const uint64_t seed = s.next();
            std::vector<uint8_t> got(size_t(L), 0);
            fast->run(seed, base, step, L, got.data());
            std::vector<LatticePoint> pts;
            for (int j = 0; j < L; ++j)
                pts.push_back(LatticePoint{base[0] + j * step[0], base[1] + j * step[1]});
            CHECK(sample_membership(spec, seed, pts) == got);
        }
    }
    // unsupported shapes fall back
    CHECK(!ApFastPath::create(bernoulli(0.5L, 0)).has_value());
}

TEST_CASE("monomial overflow in sampling is reported") {
    const ProcessSpec spec = poly_process(1, 3, 0.5L, 0);
    const Box huge({int64_t(1) << 22}, {(int64_t(1) << 22) + 2});
    CHECK_THROWS_AS(sample(spec, huge), OverflowError);
}

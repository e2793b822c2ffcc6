#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "latinv/io.hpp"
#include "latinv/stats.hpp"
#include "oracles.hpp"

using namespace latinv;

TEST_CASE("intensity of empty and full sets") {
    const Box box = Box::cube(2, 10);
    CHECK(intensity(sample(spec_from_preset("bernoulli:0", 1), box)).value == 0.0);
    CHECK(intensity(sample(spec_from_preset("bernoulli:1", 1), box)).value == 1.0);
}

TEST_CASE("marginal of the empty query is one") {
    const auto est = k_point_marginal(spec_from_preset("bernoulli:0.5", 0),
                                      MarginalQuery(std::vector<LatticePoint>{}), 100, 7);
    CHECK(est.successes == 100);
}

TEST_CASE("marginal query rejects duplicate points") {
    CHECK_THROWS_AS(MarginalQuery({LatticePoint{0, 0}, LatticePoint{0, 0}}),
                    std::invalid_argument);
}

TEST_CASE("bernoulli marginals factor as p^|F|") {
    const ProcessSpec spec = spec_from_preset("bernoulli:0.5", 0);
    rng::Stream s(31337);
    for (int size = 1; size <= 5; ++size) {
        std::vector<LatticePoint> pts;
        while (int(pts.size()) < size) {
            LatticePoint t{int64_t(s.next_below(10)), int64_t(s.next_below(10))};
            if (std::find(pts.begin(), pts.end(), t) == pts.end()) pts.push_back(t);
        }
        const auto est = k_point_marginal(spec, MarginalQuery(pts), 100000, s.next());
        const double want = std::pow(0.5, size);
        const double se = std::sqrt(want * (1 - want) / 100000.0);
        CHECK(std::fabs(est.p_hat() - want) < 4 * se);
    }
}

TEST_CASE("degree-1 pair marginal matches the quadrature oracle") {
    // frozen from the quadrature oracle: P(0 in S, e1 in S) = 1/4 for
    // window length 1/2 (the two window values are independent uniforms)
    const double oracle = test_oracles::pair_marginal_quadrature_deg1(0.5, 1 << 11);
    CHECK(oracle == doctest::Approx(0.25).epsilon(1e-3));

    const ProcessSpec spec = spec_from_preset("s1", 0);
    const MarginalQuery q({LatticePoint{0, 0}, LatticePoint{1, 0}});
    const auto est = k_point_marginal(spec, q, 200000, 99);
    const double se = std::sqrt(0.25 * 0.75 / 200000.0);
    CHECK(std::fabs(est.p_hat() - oracle) < 4 * se + 1e-3);
}

TEST_CASE("two-sample chi-square basics") {
    Histogram a;
    a.bins = {50, 100, 50};
    a.total = 200;
    const ChiSq same = two_sample_chisq(a, a);
    CHECK(same.statistic == doctest::Approx(0.0));
    CHECK(same.p_value == doctest::Approx(1.0));

    Histogram b;
    b.bins = {0, 0, 200};
    b.total = 200;
    Histogram c;
    c.bins = {200, 0, 0};
    c.total = 200;
    CHECK(two_sample_chisq(b, c).p_value < 1e-12);

    Histogram tiny;
    tiny.bins = {1, 0, 1};
    tiny.total = 2;
    CHECK_THROWS_AS(two_sample_chisq(tiny, tiny), StatError);
}

TEST_CASE("chi-square p-values are calibrated under the null") {
    // binomial(8, 1/2) count histograms from the same law across seeds
    rng::Stream s(555);
    auto draw_hist = [&](uint64_t n) {
        Histogram h;
        h.bins.assign(9, 0);
        for (uint64_t i = 0; i < n; ++i) {
            const int c = std::popcount(uint8_t(s.next() & 0xff));
            h.add(size_t(c));
        }
        return h;
    };
    std::vector<double> pvals;
    for (int rep = 0; rep < 200; ++rep)
        pvals.push_back(two_sample_chisq(draw_hist(4000), draw_hist(4000)).p_value);
    CHECK(ks_uniform_test(pvals).p_value > 1e-3);
}

TEST_CASE("ap histogram of the full lattice is a point mass") {
    const ProcessSpec spec = spec_from_preset("bernoulli:1", 0);
    ApEnsemble ens{Box::cube(2, 32), 3};
    const Histogram h = ap_count_distribution(spec, 8, 500, ens, 4);
    CHECK(h.bins[8] == h.total);
}

TEST_CASE("ap histogram of bernoulli(1/2) is binomial(8, 1/2)") {
    const ProcessSpec spec = spec_from_preset("bernoulli:0.5", 0);
    ApEnsemble ens{Box::cube(2, 32), 3};
    const Histogram got = ap_count_distribution(spec, 8, 40000, ens, 4);
    Histogram want;
    want.bins.assign(9, 0);
    const double binom[9] = {1, 8, 28, 56, 70, 56, 28, 8, 1};
    for (int c = 0; c <= 8; ++c)
        want.bins[size_t(c)] = uint64_t(std::llround(binom[c] / 256.0 * 40000.0));
    want.total = 0;
    for (auto b : want.bins) want.total += b;
    CHECK(two_sample_chisq(got, want).p_value > 0.01);
}

TEST_CASE("ap ensemble errors when the box cannot hold the progression") {
    const ProcessSpec spec = spec_from_preset("bernoulli:0.5", 0);
    ApEnsemble ens{Box::cube(2, 4), 2};
    CHECK_THROWS_AS(ap_count_distribution(spec, 8, 10, ens, 0), StatError);
}

TEST_CASE("invariance of bernoulli under any map") {
    const ProcessSpec spec = spec_from_preset("bernoulli:0.5", 0);
    std::vector<MarginalQuery> queries;
    queries.emplace_back(std::vector<LatticePoint>{{0, 0}});
    queries.emplace_back(std::vector<LatticePoint>{{0, 0}, {1, 0}});
    queries.emplace_back(std::vector<LatticePoint>{{0, 0}, {0, 1}, {2, 1}});
    const auto rep =
        invariance_test(spec, affine_preset("shear-12", 2), queries, 50000, 0.01, 12);
    CHECK(rep.all_pass);
}

TEST_CASE("spiked constant coefficient breaks translation invariance") {
    // constant coefficient pinned to zero instead of Haar: membership at
    // the origin is then certain while generic points keep probability 1/2
    PolynomialSpec s;
    s.d = 2;
    s.k = 1;
    s.window = WindowFn::box1(0.0L, 0.5L);
    s.filter = DegreeFilter::Custom;
    s.custom_indices = {1, 2}; // linear coefficients only
    const ProcessSpec spiked(ProcessNode{std::move(s)}, 0);

    std::vector<MarginalQuery> queries;
    queries.emplace_back(std::vector<LatticePoint>{{0, 0}});
    const auto rep = invariance_test(spiked, affine_preset("translate-1", 2), queries, 20000,
                                     0.01, 5);
    CHECK(!rep.all_pass);
}

TEST_CASE("holm adjustment is monotone and bounded") {
    const std::vector<double> p{0.001, 0.04, 0.2, 0.9};
    const auto adj = holm_adjust(p);
    CHECK(adj[0] == doctest::Approx(0.004));
    CHECK(adj[3] <= 1.0);
    for (size_t i = 0; i < p.size(); ++i) CHECK(adj[i] >= p[i]);
}

TEST_CASE("wilson interval brackets the point estimate") {
    const Wilson w = wilson_ci(40, 100, 1.96);
    CHECK(w.lo < 0.4);
    CHECK(w.hi > 0.4);
    CHECK(w.lo > 0.3);
    CHECK(w.hi < 0.5);
}

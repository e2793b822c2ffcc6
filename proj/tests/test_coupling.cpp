#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "latinv/coupling.hpp"
#include "latinv/numerics.hpp"

using namespace latinv;

namespace {

PolynomialSpec s1_core() {
    PolynomialSpec s;
    s.d = 2;
    s.k = 1;
    s.window = WindowFn::box1(0.0L, 0.5L); // placeholder; coupling passes f1/f2 explicitly
    return s;
}

} // namespace

TEST_CASE("equal windows couple to identical sets") {
    const WindowFn f = WindowFn::box1(0.0L, 0.5L);
    for (const auto mode : {CouplingMode::SharedUniform, CouplingMode::TwoStep}) {
        const CoupledPair pair = couple_thinnings(s1_core(), f, f, Box::centered(2, 20), 3, mode);
        CHECK(pair.y1 == pair.y2);
        CHECK(symdiff_density(pair).value == 0.0);
    }
}

TEST_CASE("never versus always gives symmetric difference one") {
    const WindowFn f0 = WindowFn::constant(0.0L);
    const WindowFn f1 = WindowFn::constant(1.0L);
    for (const auto mode : {CouplingMode::SharedUniform, CouplingMode::TwoStep}) {
        const CoupledPair pair = couple_thinnings(s1_core(), f0, f1, Box::centered(2, 10), 3, mode);
        CHECK(symdiff_density(pair).value == 1.0);
        CHECK(pair.y1.cardinality() == 0);
    }
}

TEST_CASE("y1 marginal equals the standalone thinning bit-for-bit") {
    const WindowFn f1 = WindowFn::box1(0.0L, 0.5L);
    const WindowFn f2 = WindowFn::box1(0.0L, 0.6L);
    const Box box = Box::centered(2, 24);
    const uint64_t seed = 77;
    const CoupledPair pair = couple_thinnings(s1_core(), f1, f2, box, seed);

    PolynomialSpec standalone = s1_core();
    standalone.window = f1;
    CHECK(pair.y1 == sample(ProcessSpec(ProcessNode{std::move(standalone)}, seed), box));

    PolynomialSpec standalone2 = s1_core();
    standalone2.window = f2;
    CHECK(pair.y2 == sample(ProcessSpec(ProcessNode{std::move(standalone2)}, seed), box));
}

TEST_CASE("nested windows give nested samples") {
    const WindowFn f1 = WindowFn::box1(0.0L, 0.5L);
    const WindowFn f2 = WindowFn::box1(0.0L, 0.6L);
    const CoupledPair pair = couple_thinnings(s1_core(), f1, f2, Box::centered(2, 32), 11);
    for (size_t i = 0; i < pair.y1.words().size(); ++i)
        CHECK((pair.y1.words()[i] & ~pair.y2.words()[i]) == 0);
}

TEST_CASE("symmetric-difference density approaches the window gap") {
    const WindowFn f1 = WindowFn::box1(0.0L, 0.5L);
    const WindowFn f2 = WindowFn::box1(0.0L, 0.6L);
    std::vector<double> densities;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        const CoupledPair pair = couple_thinnings(s1_core(), f1, f2, Box::centered(2, 100), seed);
        densities.push_back(symdiff_density(pair).value);
    }
    const double mu = mean_of(densities);
    const double se = stddev_of(densities) / std::sqrt(double(densities.size()));
    CHECK(std::fabs(mu - 0.1) < 4 * se + 2e-3);
    CHECK(mu <= std::sqrt(0.1));
}

TEST_CASE("two-step mode reproduces the same law") {
    const WindowFn f1 = WindowFn::box1(0.0L, 0.5L);
    const WindowFn f2 = WindowFn::box1(0.0L, 0.6L);
    const Box box = Box::centered(2, 64);
    std::vector<double> shared_d, twostep_d;
    uint64_t shared_y2 = 0, twostep_y2 = 0;
    const uint64_t vol = uint64_t(box.volume());
    for (uint64_t seed = 0; seed < 30; ++seed) {
        const auto a = couple_thinnings(s1_core(), f1, f2, box, seed, CouplingMode::SharedUniform);
        const auto b = couple_thinnings(s1_core(), f1, f2, box, seed + 1000, CouplingMode::TwoStep);
        shared_d.push_back(symdiff_density(a).value);
        twostep_d.push_back(symdiff_density(b).value);
        shared_y2 += a.y2.cardinality();
        twostep_y2 += b.y2.cardinality();
    }
    // same mean symdiff density and same y2 occupancy within noise
    const double gap = std::fabs(mean_of(shared_d) - mean_of(twostep_d));
    const double se = std::sqrt(stddev_of(shared_d) * stddev_of(shared_d) / 30.0 +
                                stddev_of(twostep_d) * stddev_of(twostep_d) / 30.0);
    CHECK(gap < 4 * se + 2e-3);
    const auto tp = two_proportion_test(shared_y2, 30 * vol, twostep_y2, 30 * vol);
    CHECK(tp.p_value > 1e-4);
}

TEST_CASE("per-point disagreement probability equals |delta| exactly") {
    const WindowFn f1 = WindowFn::box1(0.0L, 0.5L);
    const WindowFn f2 = WindowFn::box1(0.0L, 0.6L);
    const Box box = Box::centered(2, 12);
    const auto shared = coupling_exact_expectation(s1_core(), f1, f2, box, 9,
                                                   CouplingMode::SharedUniform);
    CHECK(shared.max_mechanism_error == 0.0L); // exact identity, no tolerance
    CHECK(shared.mean_abs_delta >= 0.0L);
    CHECK(shared.mean_abs_delta <= 1.0L);

    // the two-step thresholds round once to the 2^-64 grid
    const auto two = coupling_exact_expectation(s1_core(), f1, f2, box, 9, CouplingMode::TwoStep);
    CHECK(two.max_mechanism_error <= std::ldexp(1.0L, -63));
}

TEST_CASE("expected symdiff density for indicator windows is the window gap") {
    // for nested box windows the per-point |delta| is the indicator of
    // P(t) in [0.5, 0.6), so the conditional density concentrates near 0.1
    const WindowFn f1 = WindowFn::box1(0.0L, 0.5L);
    const WindowFn f2 = WindowFn::box1(0.0L, 0.6L);
    std::vector<double> vals;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        const auto c =
            coupling_exact_expectation(s1_core(), f1, f2, Box::centered(2, 64), seed);
        vals.push_back(double(c.mean_abs_delta));
    }
    const double mu = mean_of(vals);
    CHECK(std::fabs(mu - 0.1) < 0.02);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "latinv/numerics.hpp"
#include "latinv/polymap.hpp"

using namespace latinv;

namespace {

PolyMap random_poly(int d, int m, int k, rng::Stream& s) {
    return haar_sample(d, m, k, DegreeFilter::AtMostK, CoeffSubgroup{}, s);
}

// all lattice points of [-r, r]^d
std::vector<LatticePoint> grid_points(int d, int64_t r) {
    std::vector<LatticePoint> pts;
    LatticePoint t(size_t(d), -r);
    while (true) {
        pts.push_back(t);
        int i = d - 1;
        for (; i >= 0; --i) {
            if (++t[size_t(i)] <= r) break;
            t[size_t(i)] = -r;
        }
        if (i < 0) break;
    }
    return pts;
}

} // namespace

TEST_CASE("basis layout") {
    const auto basis = monomial_basis(2, 2);
    REQUIRE(basis.size() == 6);
    CHECK(basis.size() == basis_size(2, 2));
    CHECK(basis[0].degree() == 0);
    // graded order: degrees ascend
    for (size_t i = 1; i < basis.size(); ++i) CHECK(basis[i - 1].degree() <= basis[i].degree());
    CHECK(basis_size(3, 3) == 20);
    CHECK(basis_size(4, 5) == 126);
}

TEST_CASE("degree-0 map evaluates to its constant") {
    PolyMap p = PolyMap::zero(2, 1, 0);
    p.coeffs[0][0] = t_from_rational(3, 8);
    CHECK(p.evaluate(LatticePoint{17, -4})[0] == t_from_rational(3, 8));
}

TEST_CASE("linear one-dimensional map") {
    PolyMap p = PolyMap::zero(1, 1, 1);
    p.coeffs[basis_index(1, 1, MultiIndex{{1}})][0] = t_from_rational(1, 4);
    CHECK(p.evaluate(LatticePoint{2})[0] == t_from_rational(1, 2));
}

TEST_CASE("planar degree-2 map at (1,1) sums all coefficients") {
    rng::Stream s(5);
    const PolyMap p = random_poly(2, 1, 2, s);
    TorusElem sum{0};
    for (const auto& c : p.coeffs) sum = sum + c[0];
    CHECK(p.evaluate(LatticePoint{1, 1})[0] == sum);
}

TEST_CASE("evaluation at zero returns the constant coefficient") {
    rng::Stream s(6);
    for (int rep = 0; rep < 20; ++rep) {
        const PolyMap p = random_poly(1 + int(s.next_below(3)), 1 + int(s.next_below(2)),
                                      int(s.next_below(4)), s);
        const LatticePoint zero(size_t(p.d), 0);
        CHECK(p.evaluate(zero) == p.coeffs[0]);
    }
}

TEST_CASE("substitution matrix of the identity is the identity") {
    const SubstitutionMatrix c = substitution_matrix(AffineMap::identity(2), 2);
    for (size_t b = 0; b < c.size; ++b)
        for (size_t a = 0; a < c.size; ++a)
            CHECK(c.at(b, a) == (a == b ? 1 : 0));
}

TEST_CASE("translation substitution in one variable") {
    // g: t -> t + 1 sends (tau0, tau1) to (tau0 + tau1, tau1)
    const AffineMap g(LatticeMatrix::identity(1), {1});
    const SubstitutionMatrix c = substitution_matrix(g, 1);
    // basis order: 1, t
    CHECK(c.at(0, 0) == 1);
    CHECK(c.at(0, 1) == 1);
    CHECK(c.at(1, 0) == 0);
    CHECK(c.at(1, 1) == 1);

    PolyMap p = PolyMap::zero(1, 1, 1);
    p.coeffs[0][0] = t_from_rational(1, 8);
    p.coeffs[1][0] = t_from_rational(1, 4);
    const PolyMap q = precompose(p, g);
    CHECK(q.coeffs[0][0] == t_from_rational(3, 8)); // 1/8 + 1/4
    CHECK(q.coeffs[1][0] == t_from_rational(1, 4));
}

TEST_CASE("shear substitution row for t1^2 is the binomial row") {
    // t1 -> t1 + t2: the t1^2 source column expands to t1^2 + 2 t1 t2 + t2^2
    const AffineMap shear = affine_preset("shear-12", 2);
    const SubstitutionMatrix c = substitution_matrix(shear, 2);
    const size_t src = basis_index(2, 2, MultiIndex{{2, 0}});
    CHECK(c.at(basis_index(2, 2, MultiIndex{{2, 0}}), src) == 1);
    CHECK(c.at(basis_index(2, 2, MultiIndex{{1, 1}}), src) == 2);
    CHECK(c.at(basis_index(2, 2, MultiIndex{{0, 2}}), src) == 1);
}

TEST_CASE("precompose with identity is a no-op") {
    rng::Stream s(10);
    const PolyMap p = random_poly(2, 1, 3, s);
    CHECK(precompose(p, AffineMap::identity(2)) == p);
}

TEST_CASE("evaluate/precompose identity holds bit-exactly on random pairs") {
    rng::Stream s(2024);
    for (int rep = 0; rep < 60; ++rep) {
        const int d = 1 + int(s.next_below(3));
        const int k = int(s.next_below(4));
        const int m = 1 + int(s.next_below(2));
        const PolyMap p = random_poly(d, m, k, s);
        const AffineMap g = random_element(d, 4, s);
        const PolyMap q = precompose(p, g);
        for (const auto& t : grid_points(d, 2)) {
            CHECK(q.evaluate(t) == p.evaluate(latinv::apply(g, t)));
        }
    }
}

TEST_CASE("substitution matrices compose contravariantly") {
    rng::Stream s(77);
    for (int rep = 0; rep < 100; ++rep) {
        const int d = 1 + int(s.next_below(2));
        const int k = 1 + int(s.next_below(3));
        const AffineMap g = random_element(d, 3, s);
        const AffineMap h = random_element(d, 3, s);
        const SubstitutionMatrix lhs = substitution_matrix(compose(g, h), k);
        const SubstitutionMatrix rhs = mul(substitution_matrix(h, k), substitution_matrix(g, k));
        REQUIRE(lhs.size == rhs.size);
        for (size_t i = 0; i < lhs.size * lhs.size; ++i) CHECK(lhs.a[i] == rhs.a[i]);
    }
}

TEST_CASE("precompose composes") {
    rng::Stream s(78);
    for (int rep = 0; rep < 30; ++rep) {
        const PolyMap p = random_poly(2, 1, 3, s);
        const AffineMap g = random_element(2, 3, s);
        const AffineMap h = random_element(2, 3, s);
        CHECK(precompose(precompose(p, g), h) == precompose(p, compose(g, h)));
    }
}

TEST_CASE("coefficient action examples and commutation") {
    rng::Stream s(79);
    const PolyMap p = random_poly(2, 2, 2, s);

    CHECK(coeff_action(IntMat::identity(2), p) == p);

    IntMat swap;
    swap.n = 2;
    swap.a = {0, 1, 1, 0}; // det -1, allowed for the coefficient action
    const PolyMap swapped = coeff_action(swap, p);
    for (size_t a = 0; a < p.coeffs.size(); ++a) {
        CHECK(swapped.coeffs[a][0] == p.coeffs[a][1]);
        CHECK(swapped.coeffs[a][1] == p.coeffs[a][0]);
    }

    for (int rep = 0; rep < 20; ++rep) {
        const AffineMap g = random_element(2, 4, s);
        CHECK(coeff_action(swap, precompose(p, g)) == precompose(coeff_action(swap, p), g));
    }
}

TEST_CASE("monomial overflow raises with diagnostics") {
    PolyMap p = PolyMap::zero(1, 1, 5);
    p.coeffs.back()[0] = t_from_rational(1, 2);
    CHECK_THROWS_AS(p.evaluate(LatticePoint{int64_t(1) << 13}), OverflowError);
    CHECK_THROWS_AS(
        check_monomial_range(LatticePoint{0}, LatticePoint{int64_t(1) << 62}, 5),
        OverflowError);
}

TEST_CASE("haar sample degree filters") {
    rng::Stream s(80);
    const PolyMap top = haar_sample(2, 1, 2, DegreeFilter::TopDegreeOnly, CoeffSubgroup{}, s);
    const auto& basis = monomial_basis_cached(2, 2);
    for (size_t a = 0; a < basis.size(); ++a) {
        if (basis[a].degree() < 2) CHECK(top.coeffs[a][0] == TorusElem{0});
    }
    // k = 0 draws a single uniform constant
    const PolyMap c = haar_sample(2, 1, 0, DegreeFilter::AtMostK, CoeffSubgroup{}, s);
    CHECK(c.coeffs.size() == 1);

    std::vector<size_t> only_linear{1, 2};
    const PolyMap custom =
        haar_sample(2, 1, 2, DegreeFilter::Custom, CoeffSubgroup{}, s, &only_linear);
    CHECK(custom.coeffs[0][0] == TorusElem{0});
}

TEST_CASE("dyadic subgroup draws land on the grid") {
    rng::Stream s(81);
    CoeffSubgroup sub;
    sub.kind = CoeffSubgroup::Kind::Dyadic;
    sub.dyadic_level = 3;
    const PolyMap p = haar_sample(1, 1, 2, DegreeFilter::AtMostK, sub, s);
    for (const auto& c : p.coeffs) CHECK((c[0].frac & ((uint64_t(1) << 61) - 1)) == 0);
}

TEST_CASE("coordinate subtorus draws only active coordinates") {
    rng::Stream s(82);
    CoeffSubgroup sub;
    sub.kind = CoeffSubgroup::Kind::CoordinateSubtorus;
    sub.active_coords = {1, 0};
    const PolyMap p = haar_sample(1, 2, 1, DegreeFilter::AtMostK, sub, s);
    for (const auto& c : p.coeffs) CHECK(c[1] == TorusElem{0});
}

TEST_CASE("haar coefficients pass a KS uniformity check") {
    rng::Stream s(83);
    const int draws = 10000;
    std::vector<double> first, last;
    first.reserve(draws);
    last.reserve(draws);
    for (int i = 0; i < draws; ++i) {
        const PolyMap p = random_poly(2, 1, 1, s);
        first.push_back(double(t_to_unit(p.coeffs[0][0])));
        last.push_back(double(t_to_unit(p.coeffs.back()[0])));
    }
    CHECK(ks_uniform_test(first).p_value > 0.01);
    CHECK(ks_uniform_test(last).p_value > 0.01);
}

TEST_CASE("fixed seed coefficient draw is frozen") {
    rng::Stream s(424242);
    const PolyMap p = random_poly(1, 1, 1, s);
    rng::Stream s2(424242);
    const PolyMap q = random_poly(1, 1, 1, s2);
    CHECK(p == q);
}

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "latinv/affine.hpp"
#include "latinv/rng.hpp"
#include "latinv/torus.hpp"

namespace latinv {

// Exponent tuple of a monomial t_1^{e_1} ... t_d^{e_d}.
struct MultiIndex {
    std::vector<uint32_t> e;

    int degree() const {
        int s = 0;
        for (uint32_t x : e) s += int(x);
        return s;
    }
    friend bool operator==(const MultiIndex& a, const MultiIndex& b) { return a.e == b.e; }
};

// All multi-indices of dimension d and total degree <= k in graded
// lexicographic order (degree-major, then lexicographic on the tuple).
// Index 0 is the constant monomial.
std::vector<MultiIndex> monomial_basis(int d, int k);

// Memoized variant for hot paths; reference stays valid for the process
// lifetime.
const std::vector<MultiIndex>& monomial_basis_cached(int d, int k);

// binomial(k+d, d); the basis size.
size_t basis_size(int d, int k);

// Position of an exponent tuple in monomial_basis(d, k).
size_t basis_index(int d, int k, const MultiIndex& idx);

enum class DegreeFilter {
    AtMostK,       // all coefficients of degree <= k drawn
    TopDegreeOnly, // degree-k coefficients drawn, lower degrees zero
    Custom,        // caller-supplied index set
};

// Supported coefficient subgroups T of T^m: the full torus, a coordinate
// subtorus, or the finite subgroup of multiples of 2^-level.
struct CoeffSubgroup {
    enum class Kind { Full, CoordinateSubtorus, Dyadic };
    Kind kind = Kind::Full;
    std::vector<uint8_t> active_coords; // CoordinateSubtorus: 1 = drawn, 0 = zero
    int dyadic_level = 0;               // Dyadic: coefficients in (1/2^level)Z / Z
};

// Polynomial map Z^d -> T^m of total degree <= k with dense coefficient
// storage in graded-lex basis order.
struct PolyMap {
    int d = 1;
    int m = 1;
    int k = 0;
    std::vector<TorusVec> coeffs; // size basis_size(d, k)

    static PolyMap zero(int d, int m, int k);

    // Sum over the basis of t^alpha * tau_alpha with exact wrapping torus
    // arithmetic. Throws OverflowError if a monomial value leaves int64.
    TorusVec evaluate(std::span<const int64_t> t) const;

    friend bool operator==(const PolyMap& a, const PolyMap& b) {
        return a.d == b.d && a.m == b.m && a.k == b.k && a.coeffs == b.coeffs;
    }
};

// Throws OverflowError unless every monomial of degree <= k is
// representable in int64 at every point of [lo, hi)^per-axis.
void check_monomial_range(std::span<const int64_t> lo, std::span<const int64_t> hi, int k);

// Integer matrix C with (P o g) coefficients = C applied to P's
// coefficients: entry (beta, alpha) is the coefficient of t^beta in the
// expansion of (A t + v)^alpha. Entries are 128-bit; expansion overflow
// raises OverflowError with the offending sizes.
struct SubstitutionMatrix {
    int d = 1;
    int k = 0;
    size_t size = 1;            // basis_size(d, k)
    std::vector<__int128> a;    // row-major, a[beta * size + alpha]

    __int128 at(size_t beta, size_t alpha) const { return a[beta * size + alpha]; }
};

SubstitutionMatrix substitution_matrix(const AffineMap& g, int k);

// Exact product: matrices compose contravariantly with the maps, so
// substitution_matrix(compose(g,h), k) equals mul(substitution_matrix(h,k),
// substitution_matrix(g,k)).
SubstitutionMatrix mul(const SubstitutionMatrix& a, const SubstitutionMatrix& b);

// P o g: for every point t, precompose(P, g).evaluate(t) ==
// P.evaluate(apply(g, t)) bit-exactly.
PolyMap precompose(const PolyMap& p, const AffineMap& g);

// Applies an integer m x m matrix with det +-1 to every coefficient
// vector. Commutes with precompose.
PolyMap coeff_action(const IntMat& mat, const PolyMap& p);

// Haar sample: coefficients in the selected index set drawn independently
// uniform on the chosen subgroup of T^m (64-bit uniforms, dyadic draws
// masked to the top bits); the rest zero. Draw order is basis order, then
// coordinate order, and is part of the stable sampling format.
PolyMap haar_sample(int d, int m, int k, DegreeFilter filter, const CoeffSubgroup& subgroup,
                    rng::Stream& stream,
                    const std::vector<size_t>* custom_indices = nullptr);

} // namespace latinv

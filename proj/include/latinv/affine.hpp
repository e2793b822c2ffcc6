#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "latinv/errors.hpp"
#include "latinv/rng.hpp"

namespace latinv {

// Checked signed arithmetic; throws OverflowError instead of wrapping.
int64_t checked_add(int64_t a, int64_t b);
int64_t checked_mul(int64_t a, int64_t b);

using LatticePoint = std::vector<int64_t>;

// General square integer matrix (no determinant constraint). Used for
// coefficient-torus actions, where det ±1 is allowed.
struct IntMat {
    int n = 0;
    std::vector<int64_t> a; // row-major

    static IntMat identity(int n);
    int64_t at(int i, int j) const { return a[size_t(i) * n + j]; }
    int64_t& at(int i, int j) { return a[size_t(i) * n + j]; }
};

// Exact determinant (cofactor expansion for n <= 4, fraction-free Bareiss
// elimination above). Throws OverflowError if an intermediate leaves the
// 128-bit range.
int64_t det_exact(const IntMat& m);

// Element of SL_d(Z): determinant checked to be exactly 1 at construction.
class LatticeMatrix {
public:
    explicit LatticeMatrix(IntMat m);
    static LatticeMatrix identity(int d);
    // E_ij(c): identity plus c in entry (i,j), i != j.
    static LatticeMatrix elementary(int d, int i, int j, int64_t c);

    int dim() const { return m_.n; }
    int64_t at(int i, int j) const { return m_.at(i, j); }
    const IntMat& mat() const { return m_; }

    friend bool operator==(const LatticeMatrix& a, const LatticeMatrix& b) {
        return a.m_.n == b.m_.n && a.m_.a == b.m_.a;
    }

private:
    IntMat m_;
};

// Element of ASL_d(Z): t -> A t + v.
struct AffineMap {
    LatticeMatrix linear;
    LatticePoint shift;

    AffineMap(LatticeMatrix a, LatticePoint v);
    static AffineMap identity(int d);
    static AffineMap translation(LatticePoint v);

    int dim() const { return linear.dim(); }

    friend bool operator==(const AffineMap& a, const AffineMap& b) {
        return a.linear == b.linear && a.shift == b.shift;
    }
};

// (g o h)(t) = g(h(t)); exact, throws OverflowError.
AffineMap compose(const AffineMap& g, const AffineMap& h);

// Exact inverse via the adjugate (det = 1). compose(g, invert(g)) is the
// identity.
AffineMap invert(const AffineMap& g);

LatticePoint apply(const AffineMap& g, std::span<const int64_t> t);
LatticePoint apply_linear(const LatticeMatrix& a, std::span<const int64_t> t);

// Product of word_len uniform draws from the generators
// {E_ij(+-1) : i != j} u {translations by +-e_i}.
AffineMap random_element(int d, int word_len, rng::Stream& stream);

// Named presets: "identity", "shear-ij", "swap-ij", "unipotent-u",
// "translate-i". Indices are 1-based single digits.
AffineMap affine_preset(const std::string& name, int d);

} // namespace latinv

#include "latinv/affine.hpp"

#include <algorithm>
#include <stdexcept>

namespace latinv {

namespace {
using i128 = __int128;

i128 checked_add_128(i128 a, i128 b) {
    i128 r;
    if (__builtin_add_overflow(a, b, &r)) throw OverflowError("128-bit addition overflow");
    return r;
}

i128 checked_mul_128(i128 a, i128 b) {
    i128 r;
    if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("128-bit multiplication overflow");
    return r;
}

int64_t narrow_64(i128 v, const char* what) {
    if (v > i128(INT64_MAX) || v < i128(INT64_MIN)) throw OverflowError(what);
    return int64_t(v);
}

int64_t det_cofactor(const IntMat& m) {
    const int n = m.n;
    if (n == 1) return m.at(0, 0);
    if (n == 2)
        return narrow_64(checked_mul_128(m.at(0, 0), m.at(1, 1)) -
                             checked_mul_128(m.at(0, 1), m.at(1, 0)),
                         "2x2 determinant overflow");
    i128 det = 0;
    IntMat minor;
    minor.n = n - 1;
    minor.a.assign(size_t(n - 1) * (n - 1), 0);
    for (int col = 0; col < n; ++col) {
        for (int r = 1; r < n; ++r) {
            int cc = 0;
            for (int c = 0; c < n; ++c) {
                if (c == col) continue;
                minor.at(r - 1, cc++) = m.at(r, c);
            }
        }
        const i128 term = checked_mul_128(m.at(0, col), det_cofactor(minor));
        det = checked_add_128(det, (col % 2 == 0) ? term : -term);
    }
    return narrow_64(det, "determinant overflow");
}

int64_t det_bareiss(IntMat m) {
    const int n = m.n;
    std::vector<i128> a(m.a.begin(), m.a.end());
    auto at = [&](int i, int j) -> i128& { return a[size_t(i) * n + j]; };
    i128 prev = 1;
    int sign = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (at(k, k) == 0) {
            int p = -1;
            for (int i = k + 1; i < n; ++i)
                if (at(i, k) != 0) { p = i; break; }
            if (p < 0) return 0;
            for (int j = 0; j < n; ++j) std::swap(at(k, j), at(p, j));
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i) {
            for (int j = k + 1; j < n; ++j) {
                const i128 num = checked_mul_128(at(i, j), at(k, k)) -
                                 checked_mul_128(at(i, k), at(k, j));
                at(i, j) = num / prev; // Bareiss division is exact
            }
            at(i, k) = 0;
        }
        prev = at(k, k);
    }
    return narrow_64(sign > 0 ? at(n - 1, n - 1) : -at(n - 1, n - 1), "determinant overflow");
}

} // namespace

int64_t checked_add(int64_t a, int64_t b) {
    int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw OverflowError("64-bit addition overflow");
    return r;
}

int64_t checked_mul(int64_t a, int64_t b) {
    int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("64-bit multiplication overflow");
    return r;
}

IntMat IntMat::identity(int n) {
    IntMat m;
    m.n = n;
    m.a.assign(size_t(n) * n, 0);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
}

int64_t det_exact(const IntMat& m) {
    if (m.n < 1 || m.a.size() != size_t(m.n) * m.n)
        throw std::invalid_argument("det_exact: malformed matrix");
    return m.n <= 4 ? det_cofactor(m) : det_bareiss(m);
}

LatticeMatrix::LatticeMatrix(IntMat m) : m_(std::move(m)) {
    if (det_exact(m_) != 1)
        throw std::invalid_argument("LatticeMatrix: determinant must be exactly 1");
}

LatticeMatrix LatticeMatrix::identity(int d) { return LatticeMatrix(IntMat::identity(d)); }

LatticeMatrix LatticeMatrix::elementary(int d, int i, int j, int64_t c) {
    if (i == j || i < 0 || j < 0 || i >= d || j >= d)
        throw std::invalid_argument("elementary: need distinct indices in range");
    IntMat m = IntMat::identity(d);
    m.at(i, j) = c;
    return LatticeMatrix(std::move(m));
}

AffineMap::AffineMap(LatticeMatrix a, LatticePoint v) : linear(std::move(a)), shift(std::move(v)) {
    if (int(shift.size()) != linear.dim())
        throw std::invalid_argument("AffineMap: translation dimension mismatch");
}

AffineMap AffineMap::identity(int d) {
    return AffineMap(LatticeMatrix::identity(d), LatticePoint(d, 0));
}

AffineMap AffineMap::translation(LatticePoint v) {
    const int d = int(v.size());
    return AffineMap(LatticeMatrix::identity(d), std::move(v));
}

LatticePoint apply_linear(const LatticeMatrix& a, std::span<const int64_t> t) {
    const int d = a.dim();
    if (int(t.size()) != d) throw std::invalid_argument("apply: dimension mismatch");
    LatticePoint out(d, 0);
    for (int i = 0; i < d; ++i) {
        int64_t acc = 0;
        for (int j = 0; j < d; ++j) acc = checked_add(acc, checked_mul(a.at(i, j), t[j]));
        out[i] = acc;
    }
    return out;
}

LatticePoint apply(const AffineMap& g, std::span<const int64_t> t) {
    LatticePoint out = apply_linear(g.linear, t);
    for (int i = 0; i < g.dim(); ++i) out[i] = checked_add(out[i], g.shift[i]);
    return out;
}

AffineMap compose(const AffineMap& g, const AffineMap& h) {
    const int d = g.dim();
    if (h.dim() != d) throw std::invalid_argument("compose: dimension mismatch");
    IntMat m;
    m.n = d;
    m.a.assign(size_t(d) * d, 0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            int64_t acc = 0;
            for (int k = 0; k < d; ++k)
                acc = checked_add(acc, checked_mul(g.linear.at(i, k), h.linear.at(k, j)));
            m.at(i, j) = acc;
        }
    LatticePoint v = latinv::apply(g, h.shift);
    return AffineMap(LatticeMatrix(std::move(m)), std::move(v));
}

AffineMap invert(const AffineMap& g) {
    const int d = g.dim();
    // adjugate; with det = 1 the inverse is integral
    IntMat inv;
    inv.n = d;
    inv.a.assign(size_t(d) * d, 0);
    if (d == 1) {
        inv.at(0, 0) = g.linear.at(0, 0); // must be 1
    } else {
        IntMat minor;
        minor.n = d - 1;
        minor.a.assign(size_t(d - 1) * (d - 1), 0);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                int rr = 0;
                for (int r = 0; r < d; ++r) {
                    if (r == i) continue;
                    int cc = 0;
                    for (int c = 0; c < d; ++c) {
                        if (c == j) continue;
                        minor.at(rr, cc++) = g.linear.at(r, c);
                    }
                    ++rr;
                }
                const int64_t cof = det_exact(minor);
                inv.at(j, i) = ((i + j) % 2 == 0) ? cof : -cof;
            }
    }
    LatticeMatrix ainv(std::move(inv));
    LatticePoint v(d, 0);
    const LatticePoint av = apply_linear(ainv, g.shift);
    for (int i = 0; i < d; ++i) v[i] = checked_mul(av[i], -1);
    return AffineMap(std::move(ainv), std::move(v));
}

AffineMap random_element(int d, int word_len, rng::Stream& stream) {
    if (word_len < 1) throw std::invalid_argument("random_element: word_len must be >= 1");
    AffineMap g = AffineMap::identity(d);
    const uint64_t n_elem = uint64_t(d) * (d - 1) * 2; // E_ij(+-1)
    const uint64_t n_trans = uint64_t(d) * 2;          // +-e_i
    for (int w = 0; w < word_len; ++w) {
        const uint64_t pick = stream.next_below(n_elem + n_trans);
        AffineMap factor = AffineMap::identity(d);
        if (pick < n_elem) {
            const uint64_t pair = pick / 2;
            const int64_t sign = (pick % 2 == 0) ? 1 : -1;
            // enumerate ordered pairs (i,j), i != j
            int i = int(pair / uint64_t(d - 1));
            int j = int(pair % uint64_t(d - 1));
            if (j >= i) ++j;
            factor = AffineMap(LatticeMatrix::elementary(d, i, j, sign), LatticePoint(d, 0));
        } else {
            const uint64_t t = pick - n_elem;
            LatticePoint v(d, 0);
            v[t / 2] = (t % 2 == 0) ? 1 : -1;
            factor = AffineMap::translation(std::move(v));
        }
        g = compose(g, factor);
    }
    return g;
}

AffineMap affine_preset(const std::string& name, int d) {
    auto index_pair = [&](size_t pos) {
        if (name.size() < pos + 2)
            throw std::invalid_argument("affine preset needs two indices: " + name);
        const int i = name[pos] - '1';
        const int j = name[pos + 1] - '1';
        if (i < 0 || j < 0 || i >= d || j >= d || i == j)
            throw std::invalid_argument("affine preset indices out of range: " + name);
        return std::pair<int, int>{i, j};
    };
    if (name == "identity") return AffineMap::identity(d);
    if (name == "unipotent-u") {
        // e_1 -> e_1 + e_2, other basis vectors fixed
        if (d < 2) throw std::invalid_argument("unipotent-u needs d >= 2");
        return AffineMap(LatticeMatrix::elementary(d, 1, 0, 1), LatticePoint(d, 0));
    }
    if (name.rfind("shear-", 0) == 0) {
        auto [i, j] = index_pair(6);
        return AffineMap(LatticeMatrix::elementary(d, i, j, 1), LatticePoint(d, 0));
    }
    if (name.rfind("swap-", 0) == 0) {
        // determinant-one swap: e_i -> e_j, e_j -> -e_i
        auto [i, j] = index_pair(5);
        IntMat m = IntMat::identity(d);
        m.at(i, i) = 0;
        m.at(j, j) = 0;
        m.at(j, i) = 1;
        m.at(i, j) = -1;
        return AffineMap(LatticeMatrix(std::move(m)), LatticePoint(d, 0));
    }
    if (name.rfind("translate-", 0) == 0) {
        const int i = name.size() > 10 ? name[10] - '1' : -1;
        if (i < 0 || i >= d) throw std::invalid_argument("translate preset index out of range");
        LatticePoint v(d, 0);
        v[i] = 1;
        return AffineMap::translation(std::move(v));
    }
    throw std::invalid_argument("unknown affine preset: " + name);
}

} // namespace latinv

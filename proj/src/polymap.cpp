#include "latinv/polymap.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

namespace latinv {

namespace {
using i128 = __int128;

i128 checked_add_128(i128 a, i128 b) {
    i128 r;
    if (__builtin_add_overflow(a, b, &r))
        throw OverflowError("substitution expansion: 128-bit addition overflow");
    return r;
}

i128 checked_mul_128(i128 a, i128 b) {
    i128 r;
    if (__builtin_mul_overflow(a, b, &r))
        throw OverflowError("substitution expansion: 128-bit multiplication overflow");
    return r;
}

void enumerate(int d, int k, int pos, int remaining, MultiIndex& cur,
               std::vector<MultiIndex>& out) {
    if (pos == d) {
        out.push_back(cur);
        return;
    }
    for (int e = 0; e <= remaining; ++e) {
        cur.e[size_t(pos)] = uint32_t(e);
        enumerate(d, k, pos + 1, remaining - e, cur, out);
    }
    cur.e[size_t(pos)] = 0;
}

bool grlex_less(const MultiIndex& a, const MultiIndex& b) {
    const int da = a.degree(), db = b.degree();
    if (da != db) return da < db;
    return a.e < b.e;
}

} // namespace

std::vector<MultiIndex> monomial_basis(int d, int k) {
    if (d < 1 || k < 0) throw std::invalid_argument("monomial_basis: need d >= 1, k >= 0");
    std::vector<MultiIndex> out;
    MultiIndex cur;
    cur.e.assign(size_t(d), 0);
    enumerate(d, k, 0, k, cur, out);
    std::sort(out.begin(), out.end(), grlex_less);
    return out;
}

const std::vector<MultiIndex>& monomial_basis_cached(int d, int k) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::vector<MultiIndex>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto [it, inserted] = cache.try_emplace({d, k});
    if (inserted) it->second = monomial_basis(d, k);
    return it->second;
}

size_t basis_size(int d, int k) {
    // binomial(k+d, d)
    unsigned long long r = 1;
    for (int i = 1; i <= d; ++i) r = r * (unsigned long long)(k + i) / (unsigned long long)i;
    return size_t(r);
}

size_t basis_index(int d, int k, const MultiIndex& idx) {
    const auto basis = monomial_basis(d, k);
    for (size_t i = 0; i < basis.size(); ++i)
        if (basis[i] == idx) return i;
    throw std::invalid_argument("basis_index: exponent tuple outside basis");
}

PolyMap PolyMap::zero(int d, int m, int k) {
    PolyMap p;
    p.d = d;
    p.m = m;
    p.k = k;
    p.coeffs.assign(basis_size(d, k), TorusVec(size_t(m)));
    return p;
}

TorusVec PolyMap::evaluate(std::span<const int64_t> t) const {
    if (int(t.size()) != d) throw std::invalid_argument("PolyMap::evaluate: dimension mismatch");
    // per-coordinate powers t_i^e, overflow-checked
    std::vector<int64_t> powers(size_t(d) * (k + 1));
    for (int i = 0; i < d; ++i) {
        powers[size_t(i) * (k + 1)] = 1;
        for (int e = 1; e <= k; ++e)
            powers[size_t(i) * (k + 1) + e] =
                checked_mul(powers[size_t(i) * (k + 1) + e - 1], t[size_t(i)]);
    }
    const auto& basis = monomial_basis_cached(d, k);
    TorusVec acc{size_t(m)};
    for (size_t a = 0; a < basis.size(); ++a) {
        int64_t mono = 1;
        for (int i = 0; i < d; ++i)
            mono = checked_mul(mono, powers[size_t(i) * (k + 1) + basis[a].e[size_t(i)]]);
        for (int j = 0; j < m; ++j)
            acc[size_t(j)] = acc[size_t(j)] + t_int_mul(mono, coeffs[a][size_t(j)]);
    }
    return acc;
}

void check_monomial_range(std::span<const int64_t> lo, std::span<const int64_t> hi, int k) {
    // conservative: bound |t_i| by the box corner farthest from zero and
    // check the largest pure powers and their mixed products
    const int d = int(lo.size());
    std::vector<int64_t> mx(size_t(d), 0);
    for (int i = 0; i < d; ++i) {
        const int64_t a = lo[size_t(i)] < 0 ? -lo[size_t(i)] : lo[size_t(i)];
        int64_t b = hi[size_t(i)] == INT64_MIN ? INT64_MAX : hi[size_t(i)] - 1;
        if (b < 0) b = -b;
        mx[size_t(i)] = std::max<int64_t>(std::max(a, b), 1);
    }
    const int64_t worst = *std::max_element(mx.begin(), mx.end());
    int64_t acc = 1;
    for (int e = 0; e < k; ++e) acc = checked_mul(acc, worst); // throws on overflow
}

SubstitutionMatrix substitution_matrix(const AffineMap& g, int k) {
    const int d = g.dim();
    const auto& basis = monomial_basis_cached(d, k);
    const size_t D = basis.size();

    // index lookup for exponent tuples
    std::map<std::vector<uint32_t>, size_t> pos;
    for (size_t i = 0; i < D; ++i) pos[basis[i].e] = i;

    SubstitutionMatrix out;
    out.d = d;
    out.k = k;
    out.size = D;
    out.a.assign(D * D, 0);

    // dense working polynomial over the degree-<=k basis with i128 coeffs
    std::vector<i128> poly(D), next(D);
    for (size_t alpha = 0; alpha < D; ++alpha) {
        std::fill(poly.begin(), poly.end(), i128(0));
        poly[0] = 1;
        // multiply by L_j = sum_i A[j][i] t_i + v_j, once per unit of alpha_j
        for (int j = 0; j < d; ++j) {
            for (uint32_t rep = 0; rep < basis[alpha].e[size_t(j)]; ++rep) {
                std::fill(next.begin(), next.end(), i128(0));
                for (size_t b = 0; b < D; ++b) {
                    if (poly[b] == 0) continue;
                    // constant term v_j
                    if (g.shift[size_t(j)] != 0)
                        next[b] = checked_add_128(next[b],
                                                  checked_mul_128(poly[b], g.shift[size_t(j)]));
                    // linear terms A[j][i] t_i
                    for (int i = 0; i < d; ++i) {
                        const int64_t c = g.linear.at(j, i);
                        if (c == 0) continue;
                        MultiIndex up = basis[b];
                        up.e[size_t(i)] += 1;
                        auto it = pos.find(up.e);
                        if (it == pos.end())
                            throw std::logic_error("substitution expansion left the basis");
                        next[it->second] =
                            checked_add_128(next[it->second], checked_mul_128(poly[b], c));
                    }
                }
                poly.swap(next);
            }
        }
        for (size_t beta = 0; beta < D; ++beta) out.a[beta * D + alpha] = poly[beta];
    }
    return out;
}

SubstitutionMatrix mul(const SubstitutionMatrix& a, const SubstitutionMatrix& b) {
    if (a.size != b.size || a.d != b.d || a.k != b.k)
        throw std::invalid_argument("substitution matrix product: shape mismatch");
    SubstitutionMatrix out;
    out.d = a.d;
    out.k = a.k;
    out.size = a.size;
    out.a.assign(a.size * a.size, 0);
    for (size_t i = 0; i < a.size; ++i)
        for (size_t l = 0; l < a.size; ++l) {
            const i128 v = a.at(i, l);
            if (v == 0) continue;
            for (size_t j = 0; j < a.size; ++j)
                out.a[i * a.size + j] =
                    checked_add_128(out.a[i * a.size + j], checked_mul_128(v, b.at(l, j)));
        }
    return out;
}

PolyMap precompose(const PolyMap& p, const AffineMap& g) {
    if (g.dim() != p.d) throw std::invalid_argument("precompose: dimension mismatch");
    const SubstitutionMatrix c = substitution_matrix(g, p.k);
    PolyMap out = PolyMap::zero(p.d, p.m, p.k);
    for (size_t beta = 0; beta < c.size; ++beta) {
        TorusVec acc{size_t(p.m)};
        for (size_t alpha = 0; alpha < c.size; ++alpha) {
            const i128 entry = c.at(beta, alpha);
            if (entry == 0) continue;
            // wrapping multiplication only sees the entry mod 2^64
            const int64_t folded = int64_t(uint64_t(static_cast<unsigned __int128>(entry)));
            for (int j = 0; j < p.m; ++j)
                acc[size_t(j)] = acc[size_t(j)] + t_int_mul(folded, p.coeffs[alpha][size_t(j)]);
        }
        out.coeffs[beta] = std::move(acc);
    }
    return out;
}

PolyMap coeff_action(const IntMat& mat, const PolyMap& p) {
    if (mat.n != p.m) throw std::invalid_argument("coeff_action: matrix dimension mismatch");
    const int64_t det = det_exact(mat);
    if (det != 1 && det != -1)
        throw std::invalid_argument("coeff_action: determinant must be +-1");
    PolyMap out = p;
    for (auto& tau : out.coeffs) {
        TorusVec v{size_t(p.m)};
        for (int i = 0; i < p.m; ++i) {
            TorusElem acc{0};
            for (int j = 0; j < p.m; ++j) acc = acc + t_int_mul(mat.at(i, j), tau[size_t(j)]);
            v[size_t(i)] = acc;
        }
        tau = std::move(v);
    }
    return out;
}

PolyMap haar_sample(int d, int m, int k, DegreeFilter filter, const CoeffSubgroup& subgroup,
                    rng::Stream& stream, const std::vector<size_t>* custom_indices) {
    PolyMap p = PolyMap::zero(d, m, k);
    const auto& basis = monomial_basis_cached(d, k);

    std::vector<uint8_t> selected(basis.size(), 0);
    switch (filter) {
    case DegreeFilter::AtMostK:
        std::fill(selected.begin(), selected.end(), uint8_t(1));
        break;
    case DegreeFilter::TopDegreeOnly:
        for (size_t i = 0; i < basis.size(); ++i) selected[i] = basis[i].degree() == k;
        break;
    case DegreeFilter::Custom:
        if (!custom_indices) throw std::invalid_argument("haar_sample: custom filter needs indices");
        for (size_t i : *custom_indices) {
            if (i >= basis.size()) throw std::invalid_argument("haar_sample: index outside basis");
            selected[i] = 1;
        }
        break;
    }

    const bool coord_mask = subgroup.kind == CoeffSubgroup::Kind::CoordinateSubtorus;
    if (coord_mask && int(subgroup.active_coords.size()) != m)
        throw std::invalid_argument("haar_sample: coordinate mask dimension mismatch");
    const int level = subgroup.kind == CoeffSubgroup::Kind::Dyadic ? subgroup.dyadic_level : 64;
    if (level < 0 || level > 64) throw std::invalid_argument("haar_sample: dyadic level out of range");

    for (size_t a = 0; a < basis.size(); ++a) {
        if (!selected[a]) continue;
        for (int j = 0; j < m; ++j) {
            if (coord_mask && !subgroup.active_coords[size_t(j)]) continue;
            uint64_t u = stream.next();
            if (level < 64) u = level == 0 ? 0 : (u >> (64 - level)) << (64 - level);
            p.coeffs[a][size_t(j)] = TorusElem{u};
        }
    }
    return p;
}

} // namespace latinv

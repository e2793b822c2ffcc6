#include "latinv/torus.hpp"

#include <algorithm>
#include <stdexcept>

namespace latinv {

namespace {
using u128 = unsigned __int128;
}

TorusElem t_from_rational(int64_t p, uint64_t q) {
    if (q == 0) throw std::invalid_argument("t_from_rational: zero denominator");
    // reduce p mod q into [0, q)
    int64_t r = p % int64_t(q);
    if (r < 0) r += int64_t(q);
    const u128 num = (u128(uint64_t(r)) << 64) + q / 2;
    return TorusElem{uint64_t(num / q)};
}

TorusElem t_from_unit(long double x) {
    long double f = x - std::floor(x);
    long double scaled = std::floor(std::ldexp(f, 64) + 0.5L);
    if (scaled >= std::ldexp(1.0L, 64)) return TorusElem{0};
    if (scaled < 0) return TorusElem{0};
    return TorusElem{uint64_t(scaled)};
}

TorusVec tv_add(const TorusVec& a, const TorusVec& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("tv_add: dimension mismatch");
    TorusVec out(a.dim());
    for (size_t i = 0; i < a.dim(); ++i) out[i] = a[i] + b[i];
    return out;
}

TorusVec tv_int_mul(int64_t k, const TorusVec& a) {
    TorusVec out(a.dim());
    for (size_t i = 0; i < a.dim(); ++i) out[i] = t_int_mul(k, a[i]);
    return out;
}

Prob64 Prob64::from_unit(long double p) {
    if (p <= 0) return never();
    if (p >= 1) return always();
    long double scaled = std::floor(std::ldexp(p, 64) + 0.5L);
    if (scaled >= std::ldexp(1.0L, 64)) return always();
    return {uint64_t(scaled), false};
}

TorusInterval TorusInterval::closed_open(long double a, long double b) {
    if (b <= a) return {0, 0, false};
    if (b - a >= 1.0L) return circle();
    const TorusElem lo = t_from_unit(a);
    const TorusElem hi = t_from_unit(b);
    uint64_t len = hi.frac - lo.frac; // wrapping; b-a < 1 keeps this faithful
    if (len == 0) {
        // endpoints rounded to the same fraction: b - a >= 2^-64 would
        // not round both ends together, so the arc is empty
        return {lo.frac, 0, false};
    }
    return {lo.frac, len, false};
}

WindowFn::WindowFn(TableWindow w) : v_(std::move(w)) {
    const auto& t = std::get<TableWindow>(v_);
    if (t.m < 1 || t.depth < 0 || t.depth * t.m > 62)
        throw std::invalid_argument("table window: bad dimensions");
    if (t.values.size() != (size_t(1) << (size_t(t.depth) * t.m)))
        throw std::invalid_argument("table window: value count must be 2^(depth*m)");
}

WindowFn WindowFn::box(std::vector<TorusInterval> intervals) {
    if (intervals.empty()) throw std::invalid_argument("box window: no intervals");
    return WindowFn(BoxWindow{std::move(intervals)});
}

WindowFn WindowFn::box1(long double a, long double b) {
    return box({TorusInterval::closed_open(a, b)});
}

WindowFn WindowFn::constant(long double p) {
    if (p < 0 || p > 1) throw std::invalid_argument("constant window: p outside [0,1]");
    return WindowFn(ConstWindow{Prob64::from_unit(p)});
}

WindowFn WindowFn::table(int m, int depth, std::vector<Prob64> values) {
    return WindowFn(TableWindow{m, depth, std::move(values)});
}

int WindowFn::dim() const {
    if (auto* b = std::get_if<BoxWindow>(&v_)) return int(b->intervals.size());
    if (auto* t = std::get_if<TableWindow>(&v_)) return t->m;
    return 0;
}

Prob64 WindowFn::eval(const TorusVec& x) const {
    static_assert(sizeof(TorusElem) == sizeof(uint64_t));
    return eval_raw(reinterpret_cast<const uint64_t*>(x.c.data()), x.dim());
}

Prob64 WindowFn::eval_raw(const uint64_t* fracs, size_t m) const {
    if (auto* b = std::get_if<BoxWindow>(&v_)) {
        if (m != b->intervals.size())
            throw std::invalid_argument("window_eval: dimension mismatch");
        for (size_t i = 0; i < m; ++i)
            if (!b->intervals[i].contains(TorusElem{fracs[i]})) return Prob64::never();
        return Prob64::always();
    }
    if (auto* t = std::get_if<TableWindow>(&v_)) {
        if (int(m) != t->m) throw std::invalid_argument("window_eval: dimension mismatch");
        size_t idx = 0;
        for (size_t i = 0; i < m; ++i) {
            const uint64_t cell = t->depth == 0 ? 0 : (fracs[i] >> (64 - t->depth));
            idx = (idx << t->depth) | cell;
        }
        return t->values[idx];
    }
    return std::get<ConstWindow>(v_).p;
}

long double WindowFn::haar_mass() const {
    if (auto* b = std::get_if<BoxWindow>(&v_)) {
        long double mass = 1.0L;
        for (const auto& iv : b->intervals) mass *= iv.length();
        return mass;
    }
    if (auto* t = std::get_if<TableWindow>(&v_)) {
        // exact dyadic sum: every cell mass is thr/2^(64+depth*m)
        unsigned __int128 acc = 0;
        for (const auto& p : t->values) acc += p.one ? ((unsigned __int128)1 << 64) : (unsigned __int128)p.thr;
        const long double hi = static_cast<long double>(uint64_t(acc >> 64));
        const long double lo = static_cast<long double>(uint64_t(acc));
        return std::ldexp(hi, -int(t->depth) * t->m) + std::ldexp(lo, -64 - int(t->depth) * t->m);
    }
    return std::get<ConstWindow>(v_).p.unit();
}

Prob64 parse_unit_decimal(const std::string& s) {
    size_t i = 0;
    if (i < s.size() && (s[i] == '+')) ++i;
    uint64_t int_part = 0;
    bool any = false;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
        int_part = int_part * 10 + uint64_t(s[i] - '0');
        if (int_part > 1) throw std::invalid_argument("unit decimal out of [0,1]: " + s);
        any = true;
        ++i;
    }
    uint64_t digits = 0, pow10 = 1;
    if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
            if (pow10 <= 1000000000000000000ull) { // keep 19 significant digits
                digits = digits * 10 + uint64_t(s[i] - '0');
                pow10 *= 10;
            }
            any = true;
            ++i;
        }
    }
    if (!any || i != s.size()) throw std::invalid_argument("malformed unit decimal: " + s);
    if (int_part == 1) {
        if (digits != 0) throw std::invalid_argument("unit decimal out of [0,1]: " + s);
        return Prob64::always();
    }
    const unsigned __int128 num = ((unsigned __int128)digits << 64) + pow10 / 2;
    return Prob64{uint64_t(num / pow10), false};
}

} // namespace latinv

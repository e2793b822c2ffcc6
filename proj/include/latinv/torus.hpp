#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "latinv/errors.hpp"

namespace latinv {

// Point of the circle R/Z stored as frac/2^64. All group operations are
// wrapping 64-bit integer arithmetic and therefore exact.
struct TorusElem {
    uint64_t frac = 0;

    friend constexpr bool operator==(TorusElem a, TorusElem b) { return a.frac == b.frac; }
    friend constexpr bool operator!=(TorusElem a, TorusElem b) { return a.frac != b.frac; }
};

constexpr TorusElem t_add(TorusElem a, TorusElem b) { return {a.frac + b.frac}; }
constexpr TorusElem t_sub(TorusElem a, TorusElem b) { return {a.frac - b.frac}; }
constexpr TorusElem t_neg(TorusElem a) { return {0ull - a.frac}; }

// (c * a) mod 1 via wrapping multiplication. Exact for every signed c
// because multiplication mod 2^64 only sees c mod 2^64.
constexpr TorusElem t_int_mul(int64_t c, TorusElem a) { return {uint64_t(c) * a.frac}; }

constexpr TorusElem operator+(TorusElem a, TorusElem b) { return t_add(a, b); }
constexpr TorusElem operator-(TorusElem a, TorusElem b) { return t_sub(a, b); }
constexpr TorusElem operator-(TorusElem a) { return t_neg(a); }

// p/q rounded to the nearest representable fraction; exact when q is a
// power of two. q must be nonzero.
TorusElem t_from_rational(int64_t p, uint64_t q);

// Nearest representable fraction to x mod 1.
TorusElem t_from_unit(long double x);

inline long double t_to_unit(TorusElem a) { return std::ldexp(static_cast<long double>(a.frac), -64); }
inline double t_to_double(TorusElem a) { return double(t_to_unit(a)); }

// Point of T^m with componentwise group structure.
struct TorusVec {
    std::vector<TorusElem> c;

    TorusVec() = default;
    explicit TorusVec(size_t m) : c(m) {}

    size_t dim() const { return c.size(); }
    TorusElem& operator[](size_t i) { return c[i]; }
    TorusElem operator[](size_t i) const { return c[i]; }

    friend bool operator==(const TorusVec& a, const TorusVec& b) { return a.c == b.c; }
    friend bool operator!=(const TorusVec& a, const TorusVec& b) { return !(a == b); }
};

TorusVec tv_add(const TorusVec& a, const TorusVec& b);
TorusVec tv_int_mul(int64_t k, const TorusVec& a);

// Exact keep-probability: keep iff u < thr, or always when one is set.
// thr/2^64 is the probability; p = 1 is not representable as a threshold
// and gets its own flag.
struct Prob64 {
    uint64_t thr = 0;
    bool one = false;

    static constexpr Prob64 never() { return {0, false}; }
    static constexpr Prob64 always() { return {0, true}; }
    static Prob64 from_unit(long double p);

    constexpr bool keep(uint64_t u) const { return one || u < thr; }
    long double unit() const { return one ? 1.0L : std::ldexp(static_cast<long double>(thr), -64); }

    friend constexpr bool operator==(Prob64 a, Prob64 b) {
        return a.one == b.one && (a.one || a.thr == b.thr);
    }
};

// Half-open arc {x : (x - lo) mod 1 < len/2^64}, or the full circle.
// len = 0 with full unset is the empty arc. Wrap-around arcs are allowed.
struct TorusInterval {
    uint64_t lo = 0;
    uint64_t len = 0;
    bool full = false;

    constexpr bool contains(TorusElem x) const { return full || (x.frac - lo) < len; }
    long double length() const { return full ? 1.0L : std::ldexp(static_cast<long double>(len), -64); }

    // [a, b) with dyadic-rounded endpoints; b = 1 means up to the wrap.
    static TorusInterval closed_open(long double a, long double b);
    static constexpr TorusInterval circle() { return {0, 0, true}; }
};

struct BoxWindow {
    std::vector<TorusInterval> intervals; // one per torus coordinate
};

struct ConstWindow {
    Prob64 p;
};

// Piecewise-constant on the dyadic grid splitting each coordinate into
// 2^depth equal cells; cell index concatenates the top `depth` bits of
// each coordinate, first coordinate most significant.
struct TableWindow {
    int m = 1;
    int depth = 0;
    std::vector<Prob64> values; // size 2^(depth*m)
};

// Measurable f : T^m -> [0,1] restricted to the three supported shapes.
class WindowFn {
public:
    WindowFn() : v_(ConstWindow{Prob64::never()}) {}
    explicit WindowFn(BoxWindow w) : v_(std::move(w)) {}
    explicit WindowFn(ConstWindow w) : v_(w) {}
    explicit WindowFn(TableWindow w);

    static WindowFn box(std::vector<TorusInterval> intervals);
    static WindowFn box1(long double a, long double b); // one-dimensional [a,b)
    static WindowFn constant(long double p);
    static WindowFn table(int m, int depth, std::vector<Prob64> values);

    // 0 means "matches any dimension" (constant windows).
    int dim() const;

    Prob64 eval(const TorusVec& x) const; // throws std::invalid_argument on mismatch
    double eval_unit(const TorusVec& x) const { return double(eval(x).unit()); }

    // Allocation-free variant on raw 64-bit fractions (hot sampling path).
    Prob64 eval_raw(const uint64_t* fracs, size_t m) const;

    long double haar_mass() const;

    const std::variant<BoxWindow, ConstWindow, TableWindow>& variant() const { return v_; }

private:
    std::variant<BoxWindow, ConstWindow, TableWindow> v_;
};

// Decimal string in [0,1] ("0.3", ".5", "1") rounded to the nearest
// multiple of 2^-64 without an intermediate double.
Prob64 parse_unit_decimal(const std::string& s);

} // namespace latinv

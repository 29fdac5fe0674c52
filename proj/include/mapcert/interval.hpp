#ifndef MAPCERT_INTERVAL_HPP
#define MAPCERT_INTERVAL_HPP

/*
 * Closed intervals with outward-rounded endpoint arithmetic.
 *
 * Endpoints are computed in round-to-nearest and then adjusted by one ulp
 * only when an error-free transformation proves the rounded result lies on
 * the wrong side of the exact one.  TwoSum gives the exact additive error;
 * fma gives the exact multiplicative and division residuals away from the
 * underflow range.  Inside the guard band (|r| < 1e-280) we give up on the
 * residual sign and nudge both ways.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "mapcert/errors.hpp"

namespace mapcert {

namespace detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kTiny = 1e-280; // well above where fma residuals lose exactness

inline double next_up(double x) { return std::nextafter(x, kInf); }
inline double next_down(double x) { return std::nextafter(x, -kInf); }

struct Rounded {
    double dn, up; // dn <= exact <= up
};

inline Rounded overflowed(double r) {
    if (r == kInf) return {std::numeric_limits<double>::max(), kInf};
    if (r == -kInf) return {-kInf, -std::numeric_limits<double>::max()};
    return {-kInf, kInf}; // NaN from inf - inf; only reachable through unbounded inputs
}

// sign of (exact - r): err < 0 means exact < r, err > 0 means exact > r
inline Rounded from_error(double r, double err) {
    return {err < 0 ? next_down(r) : r, err > 0 ? next_up(r) : r};
}

inline Rounded r_add(double a, double b) {
    double s = a + b;
    if (!std::isfinite(s)) return overflowed(s);
    double bb = s - a;
    double err = (a - (s - bb)) + (b - bb); // TwoSum: exact for all finite inputs
    return from_error(s, err);
}

inline Rounded r_sub(double a, double b) { return r_add(a, -b); }

inline Rounded r_mul(double a, double b) {
    double p = a * b;
    if (!std::isfinite(p)) return overflowed(p);
    if (a == 0.0 || b == 0.0) return {p, p};
    if (std::fabs(p) < kTiny) return {next_down(p), next_up(p)}; // includes underflow to 0
    return from_error(p, std::fma(a, b, -p));
}

inline Rounded r_div(double a, double b) { // b != 0 guaranteed by the caller
    double q = a / b;
    if (!std::isfinite(q)) return overflowed(q);
    if (a == 0.0) return {q, q};
    // the fma residual q*b - a is exact only while q*b (~ a) stays clear of
    // the underflow range; otherwise settle for a symmetric one-ulp nudge
    if (std::fabs(q) < kTiny || std::fabs(a) < kTiny) return {next_down(q), next_up(q)};
    double res = std::fma(q, b, -a);
    return from_error(q, b > 0 ? -res : res);
}

} // namespace detail

class Interval {
public:
    Interval() : lo_(0.0), hi_(0.0) {}
    Interval(double v) : lo_(v), hi_(v) { check(); } // NOLINT: implicit by design
    Interval(double lo, double hi) : lo_(lo), hi_(hi) { check(); }

    double lo() const { return lo_; }
    double hi() const { return hi_; }

    // midpoint is finite, representable and always contained
    double mid() const {
        if (lo_ == hi_) return lo_;
        double a = std::max(lo_, -std::numeric_limits<double>::max());
        double b = std::min(hi_, std::numeric_limits<double>::max());
        double m = 0.5 * (a + b);
        if (!std::isfinite(m)) m = 0.5 * a + 0.5 * b;
        return std::min(std::max(m, lo_), hi_);
    }

    double width() const { return hi_ - lo_; }
    double width_upper() const { return detail::r_sub(hi_, lo_).up; }
    double mag() const { return std::max(std::fabs(lo_), std::fabs(hi_)); }

    bool contains(double v) const { return lo_ <= v && v <= hi_; }
    bool contains(const Interval& o) const { return lo_ <= o.lo_ && o.hi_ <= hi_; }
    bool strictly_contains(const Interval& o) const { return lo_ < o.lo_ && o.hi_ < hi_; }
    bool is_point() const { return lo_ == hi_; }

    bool operator==(const Interval& o) const { return lo_ == o.lo_ && hi_ == o.hi_; }
    bool operator!=(const Interval& o) const { return !(*this == o); }

    Interval operator-() const { return Interval(-hi_, -lo_, NoCheck{}); }

    friend Interval operator+(const Interval& a, const Interval& b) {
        return Interval(detail::r_add(a.lo_, b.lo_).dn, detail::r_add(a.hi_, b.hi_).up, NoCheck{});
    }
    friend Interval operator-(const Interval& a, const Interval& b) {
        return Interval(detail::r_sub(a.lo_, b.hi_).dn, detail::r_sub(a.hi_, b.lo_).up, NoCheck{});
    }
    friend Interval operator*(const Interval& a, const Interval& b) {
        detail::Rounded p1 = detail::r_mul(a.lo_, b.lo_);
        detail::Rounded p2 = detail::r_mul(a.lo_, b.hi_);
        detail::Rounded p3 = detail::r_mul(a.hi_, b.lo_);
        detail::Rounded p4 = detail::r_mul(a.hi_, b.hi_);
        return Interval(std::min(std::min(p1.dn, p2.dn), std::min(p3.dn, p4.dn)),
                        std::max(std::max(p1.up, p2.up), std::max(p3.up, p4.up)), NoCheck{});
    }
    friend Interval operator/(const Interval& a, const Interval& b) {
        if (b.contains(0.0)) throw DivisionByZeroInterval();
        detail::Rounded q1 = detail::r_div(a.lo_, b.lo_);
        detail::Rounded q2 = detail::r_div(a.lo_, b.hi_);
        detail::Rounded q3 = detail::r_div(a.hi_, b.lo_);
        detail::Rounded q4 = detail::r_div(a.hi_, b.hi_);
        return Interval(std::min(std::min(q1.dn, q2.dn), std::min(q3.dn, q4.dn)),
                        std::max(std::max(q1.up, q2.up), std::max(q3.up, q4.up)), NoCheck{});
    }

    Interval& operator+=(const Interval& o) { return *this = *this + o; }
    Interval& operator-=(const Interval& o) { return *this = *this - o; }
    Interval& operator*=(const Interval& o) { return *this = *this * o; }
    Interval& operator/=(const Interval& o) { return *this = *this / o; }

private:
    struct NoCheck {};
    Interval(double lo, double hi, NoCheck) : lo_(lo), hi_(hi) {}

    void check() const {
        if (std::isnan(lo_) || std::isnan(hi_) || lo_ > hi_)
            throw InvariantViolation("interval endpoints out of order or NaN");
    }

    double lo_, hi_;
};

inline std::optional<Interval> intersect(const Interval& a, const Interval& b) {
    double lo = std::max(a.lo(), b.lo());
    double hi = std::min(a.hi(), b.hi());
    if (lo > hi) return std::nullopt;
    return Interval(lo, hi);
}

inline Interval hull(const Interval& a, const Interval& b) {
    return Interval(std::min(a.lo(), b.lo()), std::max(a.hi(), b.hi()));
}

// a fattened outward by radius r >= 0
inline Interval widened(const Interval& a, double r) {
    return a + Interval(-r, r);
}

inline std::pair<double, double> mid_width(const Interval& a) {
    return {a.mid(), a.width()};
}

inline std::ostream& operator<<(std::ostream& os, const Interval& a) {
    os << '[' << a.lo() << ", " << a.hi() << ']';
    return os;
}

struct IntervalBox {
    Interval x, u;

    bool contains(const IntervalBox& o) const { return x.contains(o.x) && u.contains(o.u); }
};

inline std::ostream& operator<<(std::ostream& os, const IntervalBox& b) {
    os << '(' << b.x << ", " << b.u << ')';
    return os;
}

class IntervalMatrix2 {
public:
    IntervalMatrix2() = default;
    IntervalMatrix2(Interval a00, Interval a01, Interval a10, Interval a11)
        : m_{{a00, a01}, {a10, a11}} {}

    static IntervalMatrix2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    Interval& at(int r, int c) { return m_[r][c]; }
    const Interval& at(int r, int c) const { return m_[r][c]; }

    Interval trace() const { return m_[0][0] + m_[1][1]; }
    Interval det() const { return m_[0][0] * m_[1][1] - m_[0][1] * m_[1][0]; }

    friend IntervalMatrix2 operator*(const IntervalMatrix2& a, const IntervalMatrix2& b) {
        IntervalMatrix2 r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                r.m_[i][j] = a.m_[i][0] * b.m_[0][j] + a.m_[i][1] * b.m_[1][j];
        return r;
    }

private:
    Interval m_[2][2];
};

inline constexpr double kDefaultSplitFloor = 1e-13;

// Bisect the widest interval in the sequence; the two results differ only in
// that coordinate and their union covers the input exactly.
inline std::pair<std::vector<Interval>, std::vector<Interval>>
split_widest(std::span<const Interval> seq, double floor = kDefaultSplitFloor) {
    if (seq.empty()) throw InvariantViolation("split_widest on an empty sequence");
    std::size_t best = 0;
    double w = -1.0;
    for (std::size_t k = 0; k < seq.size(); ++k) {
        if (seq[k].width() > w) {
            w = seq[k].width();
            best = k;
        }
    }
    if (w < floor) throw DegenerateSplit();
    std::vector<Interval> a(seq.begin(), seq.end());
    std::vector<Interval> b(seq.begin(), seq.end());
    double m = seq[best].mid();
    a[best] = Interval(seq[best].lo(), m);
    b[best] = Interval(m, seq[best].hi());
    return {std::move(a), std::move(b)};
}

inline std::pair<std::vector<IntervalBox>, std::vector<IntervalBox>>
split_widest(std::span<const IntervalBox> pts, double floor = kDefaultSplitFloor) {
    if (pts.empty()) throw InvariantViolation("split_widest on an empty sequence");
    std::size_t best = 0;
    bool on_x = true;
    double w = -1.0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        if (pts[k].x.width() > w) { w = pts[k].x.width(); best = k; on_x = true; }
        if (pts[k].u.width() > w) { w = pts[k].u.width(); best = k; on_x = false; }
    }
    if (w < floor) throw DegenerateSplit();
    std::vector<IntervalBox> a(pts.begin(), pts.end());
    std::vector<IntervalBox> b(pts.begin(), pts.end());
    Interval target = on_x ? pts[best].x : pts[best].u;
    double m = target.mid();
    Interval left(target.lo(), m), right(m, target.hi());
    if (on_x) { a[best].x = left; b[best].x = right; }
    else      { a[best].u = left; b[best].u = right; }
    return {std::move(a), std::move(b)};
}

} // namespace mapcert

#endif

#include <doctest.h>

#include <bit>
#include <cfenv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "mapcert/errors.hpp"
#include "mapcert/interval.hpp"

using mapcert::Interval;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// hardware directed rounding as the oracle; the library never touches the
// fp environment, so agreement here is meaningful
double dir_op(double a, double b, char op, int mode) {
    volatile double x = a, y = b, r = 0.0;
    std::fesetround(mode);
    switch (op) {
    case '+': r = x + y; break;
    case '-': r = x - y; break;
    case '*': r = x * y; break;
    default: r = x / y; break;
    }
    std::fesetround(FE_TONEAREST);
    return r;
}

Interval point_op(double a, double b, char op) {
    Interval ia(a), ib(b);
    switch (op) {
    case '+': return ia + ib;
    case '-': return ia - ib;
    case '*': return ia * ib;
    default: return ia / ib;
    }
}

std::vector<double> specials() {
    const double mx = std::numeric_limits<double>::max();
    const double mn = std::numeric_limits<double>::min();
    const double sub = std::numeric_limits<double>::denorm_min();
    return {0.0,    -0.0,  1.0,    -1.0,   0.5,   -0.5,     0.1,  -0.1,
            1.0 / 3.0,     2.0 / 3.0,     1e-300, -1e-300,  1e300, -1e300,
            mx,     -mx,   mn,     -mn,   sub,    -sub,     3.0,  7.0,
            1e16,   1.0 + 2e-16,   6.0e-7, 0.2,   0.000525, -0.55, 1.13};
}

double random_finite(std::mt19937_64& rng) {
    for (;;) {
        double d = std::bit_cast<double>(rng());
        if (std::isfinite(d)) return d;
    }
}

bool check_one(double a, double b, char op) {
    if (op == '/' && b == 0.0) return true;
    double dn = dir_op(a, b, op, FE_DOWNWARD);
    double up = dir_op(a, b, op, FE_UPWARD);
    if (std::isnan(dn) || std::isnan(up)) return true;
    Interval r = point_op(a, b, op);
    if (!(r.lo() <= dn && r.hi() >= up)) return false;
    bool guard = (op == '*' || op == '/') &&
                 std::fabs(dir_op(a, b, op, FE_TONEAREST)) < 1e-280;
    if (op == '/' && std::fabs(a) < 1e-280) guard = true;
    if (guard) // endpoints may be one ulp generous below the guard band
        return r.lo() >= mapcert::detail::next_down(dn) && r.hi() <= mapcert::detail::next_up(up);
    return r.lo() == dn && r.hi() == up;
}

Interval random_interval(std::mt19937_64& rng) {
    double a = random_finite(rng), b = random_finite(rng);
    return Interval(std::min(a, b), std::max(a, b));
}

bool subset(const Interval& a, const Interval& b) { return b.lo() <= a.lo() && a.hi() <= b.hi(); }

} // namespace

TEST_CASE("point endpoints are correctly rounded in both directions") {
    const char ops[] = {'+', '-', '*', '/'};
    auto sp = specials();
    for (double a : sp)
        for (double b : sp)
            for (char op : ops) {
                if (!check_one(a, b, op)) {
                    CAPTURE(a);
                    CAPTURE(b);
                    CAPTURE(op);
                    REQUIRE(check_one(a, b, op));
                }
            }
    std::mt19937_64 rng(0x51a9be7);
    for (int it = 0; it < 100000; ++it) {
        double a = random_finite(rng), b = random_finite(rng);
        char op = ops[rng() % 4];
        if (!check_one(a, b, op)) {
            CAPTURE(a);
            CAPTURE(b);
            CAPTURE(op);
            REQUIRE(check_one(a, b, op));
        }
    }
}

TEST_CASE("exact operations stay points") {
    CHECK((Interval(0.25) + Interval(0.5)).is_point());
    CHECK((Interval(0.25) + Interval(0.5)).lo() == 0.75);
    CHECK((Interval(3.0) * Interval(0.125)).is_point());
    CHECK((Interval(1.0) / Interval(4.0)).lo() == 0.25);
    CHECK((Interval(1.0) / Interval(4.0)).is_point());
    CHECK((Interval(1e300) - Interval(1e300)).is_point());
    Interval tenth = Interval(0.1) + Interval(0.2); // not representable
    CHECK(tenth.hi() == 0.1 + 0.2);
    CHECK(tenth.lo() == mapcert::detail::next_down(0.1 + 0.2));
}

TEST_CASE("overflow widens to the unbounded side only") {
    const double mx = std::numeric_limits<double>::max();
    Interval s = Interval(mx) + Interval(mx);
    CHECK(s.lo() == mx);
    CHECK(s.hi() == kInf);
    Interval p = Interval(-1e300) * Interval(1e300);
    CHECK(p.lo() == -kInf);
    CHECK(p.hi() == -mx);
}

TEST_CASE("invalid constructions throw") {
    CHECK_THROWS_AS(Interval(2.0, 1.0), mapcert::InvariantViolation);
    CHECK_THROWS_AS(Interval(std::nan("")), mapcert::InvariantViolation);
    CHECK_THROWS_AS(Interval(0.0, std::nan("")), mapcert::InvariantViolation);
    CHECK_THROWS_AS(Interval(1.0) / Interval(-1.0, 1.0), mapcert::DivisionByZeroInterval);
    CHECK_THROWS_AS(Interval(1.0) / Interval(0.0), mapcert::DivisionByZeroInterval);
}

TEST_CASE("sampled true values always land inside") {
    std::mt19937_64 rng(0xfeed);
    std::uniform_real_distribution<double> mag(-1e8, 1e8);
    const char ops[] = {'+', '-', '*', '/'};
    for (int it = 0; it < 20000; ++it) {
        double a0 = mag(rng), a1 = mag(rng), b0 = mag(rng), b1 = mag(rng);
        Interval a(std::min(a0, a1), std::max(a0, a1));
        Interval b(std::min(b0, b1), std::max(b0, b1));
        char op = ops[rng() % 4];
        if (op == '/' && b.contains(0.0)) continue;
        Interval r;
        switch (op) {
        case '+': r = a + b; break;
        case '-': r = a - b; break;
        case '*': r = a * b; break;
        default: r = a / b; break;
        }
        std::uniform_real_distribution<double> ina(a.lo(), a.hi()), inb(b.lo(), b.hi());
        for (int k = 0; k < 8; ++k) {
            double x = ina(rng), y = inb(rng);
            double dn = dir_op(x, y, op, FE_DOWNWARD), up = dir_op(x, y, op, FE_UPWARD);
            if (!(r.lo() <= dn && up <= r.hi())) {
                CAPTURE(x);
                CAPTURE(y);
                CAPTURE(op);
                REQUIRE(r.lo() <= dn);
                REQUIRE(up <= r.hi());
            }
        }
    }
}

TEST_CASE("containment is monotone under operand widening") {
    std::mt19937_64 rng(0xabcd01);
    const char ops[] = {'+', '-', '*', '/'};
    int done = 0;
    while (done < 20000) {
        Interval a = random_interval(rng), b = random_interval(rng);
        Interval aw = hull(a, Interval(random_finite(rng)));
        Interval bw = hull(b, Interval(random_finite(rng)));
        char op = ops[rng() % 4];
        if (op == '/' && (b.contains(0.0) || bw.contains(0.0))) continue;
        ++done;
        auto apply = [&](const Interval& u, const Interval& v) {
            switch (op) {
            case '+': return u + v;
            case '-': return u - v;
            case '*': return u * v;
            default: return u / v;
            }
        };
        Interval r = apply(a, b), rw = apply(aw, bw);
        if (!subset(r, rw)) {
            CAPTURE(op);
            REQUIRE(subset(r, rw));
        }
    }
}

TEST_CASE("set helpers") {
    Interval a(1.0, 3.0), b(2.0, 5.0), c(4.0, 6.0);
    CHECK(intersect(a, b).has_value());
    CHECK(intersect(a, b)->lo() == 2.0);
    CHECK(intersect(a, b)->hi() == 3.0);
    CHECK(!intersect(a, c).has_value());
    CHECK(intersect(a, Interval(3.0, 9.0)).has_value()); // closed: endpoint touch
    CHECK(hull(a, c).lo() == 1.0);
    CHECK(hull(a, c).hi() == 6.0);
    CHECK(a.contains(1.0));
    CHECK(a.contains(3.0));
    CHECK(!a.strictly_contains(1.0));
    CHECK(a.strictly_contains(2.0));
    CHECK(widened(a, 0.5).lo() <= 0.5);
    CHECK(widened(a, 0.5).hi() >= 3.5);
    CHECK(Interval(-2.0, 1.0).mag() == 2.0);
}

TEST_CASE("midpoint is finite, representable and contained") {
    std::mt19937_64 rng(0x77);
    for (int it = 0; it < 5000; ++it) {
        Interval a = random_interval(rng);
        double m = a.mid();
        CHECK(std::isfinite(m));
        CHECK(a.contains(m));
    }
    CHECK(Interval(-kInf, kInf).mid() == 0.0);
    CHECK(std::isfinite(Interval(1e308, kInf).mid()));
    CHECK(std::isfinite(Interval(-kInf, -1e308).mid()));
    CHECK(Interval(2.0, 2.0).mid() == 2.0);
    double sub = std::numeric_limits<double>::denorm_min();
    Interval tiny(sub, 2 * sub);
    CHECK(tiny.contains(tiny.mid()));
}

TEST_CASE("split_widest bisects the widest coordinate") {
    std::vector<Interval> seq{Interval(0.0, 1.0), Interval(0.0, 4.0), Interval(2.0, 3.0)};
    auto halves = mapcert::split_widest(std::span<const Interval>(seq));
    CHECK(halves.first[0].hi() == 1.0);
    CHECK(halves.first[1].hi() == 2.0);
    CHECK(halves.second[1].lo() == 2.0);
    CHECK(halves.second[1].hi() == 4.0);
    CHECK(halves.first[2].lo() == 2.0);

    std::vector<Interval> flat{Interval(0.0, 1e-14)};
    CHECK_THROWS_AS(mapcert::split_widest(std::span<const Interval>(flat)),
                    mapcert::DegenerateSplit);
    std::vector<Interval> none;
    CHECK_THROWS_AS(mapcert::split_widest(std::span<const Interval>(none)),
                    mapcert::InvariantViolation);
}

TEST_CASE("2x2 interval matrices multiply like scalars on points") {
    mapcert::IntervalMatrix2 a, b;
    // a = [[1,2],[3,4]], b = [[5,6],[7,8]]
    a.at(0, 0) = Interval(1.0);
    a.at(0, 1) = Interval(2.0);
    a.at(1, 0) = Interval(3.0);
    a.at(1, 1) = Interval(4.0);
    b.at(0, 0) = Interval(5.0);
    b.at(0, 1) = Interval(6.0);
    b.at(1, 0) = Interval(7.0);
    b.at(1, 1) = Interval(8.0);
    auto c = a * b;
    CHECK(c.at(0, 0).lo() == 19.0);
    CHECK(c.at(0, 1).lo() == 22.0);
    CHECK(c.at(1, 0).lo() == 43.0);
    CHECK(c.at(1, 1).lo() == 50.0);
    CHECK(c.at(0, 0).is_point());
    CHECK(a.trace().lo() == 5.0);
    CHECK(a.det().lo() == -2.0);
    auto id = mapcert::IntervalMatrix2::identity();
    CHECK((id * a).at(1, 0).lo() == 3.0);
}

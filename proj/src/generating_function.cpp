#include "mapcert/generating_function.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mapcert/errors.hpp"

namespace mapcert {

namespace detail {

namespace {

// value of tok as integer-mantissa times power of ten; false when the shape
// is not a plain decimal literal
bool decompose_decimal(const std::string& tok, bool& neg, std::string& digits, long& exp10) {
    neg = false;
    digits.clear();
    exp10 = 0;
    std::size_t p = 0;
    if (p < tok.size() && (tok[p] == '+' || tok[p] == '-')) {
        neg = tok[p] == '-';
        ++p;
    }
    std::size_t digits_seen = 0, frac_len = 0;
    bool dot = false;
    for (; p < tok.size(); ++p) {
        char ch = tok[p];
        if (ch == '.') {
            if (dot) return false;
            dot = true;
        } else if (std::isdigit(static_cast<unsigned char>(ch))) {
            digits.push_back(ch);
            ++digits_seen;
            if (dot) ++frac_len;
        } else {
            break;
        }
    }
    if (digits_seen == 0) return false;
    if (p < tok.size() && (tok[p] == 'e' || tok[p] == 'E')) {
        ++p;
        bool eneg = false;
        if (p < tok.size() && (tok[p] == '+' || tok[p] == '-')) {
            eneg = tok[p] == '-';
            ++p;
        }
        if (p == tok.size()) return false;
        long e = 0;
        for (; p < tok.size(); ++p) {
            if (!std::isdigit(static_cast<unsigned char>(tok[p]))) return false;
            if (e < 100000) e = e * 10 + (tok[p] - '0');
        }
        exp10 = eneg ? -e : e;
    }
    if (p != tok.size()) return false;
    exp10 -= static_cast<long>(frac_len);
    std::size_t lead = digits.find_first_not_of('0');
    digits = lead == std::string::npos ? "" : digits.substr(lead);
    while (!digits.empty() && digits.back() == '0') {
        digits.pop_back();
        ++exp10;
    }
    return true;
}

const double kPow10[23] = {1e0,  1e1,  1e2,  1e3,  1e4,  1e5,  1e6,  1e7,
                           1e8,  1e9,  1e10, 1e11, 1e12, 1e13, 1e14, 1e15,
                           1e16, 1e17, 1e18, 1e19, 1e20, 1e21, 1e22};

// d parses tok; is d == mantissa * 10^exp10 exactly?
bool provably_exact(double d, const std::string& digits, long exp10) {
    if (digits.empty()) return d == 0.0;
    if (digits.size() > 17) return false;
    double m = 0.0;
    for (char ch : digits) m = m * 10.0 + (ch - '0');
    if (m >= 9007199254740992.0) return false; // mantissa exceeds 2^53
    double ad = std::fabs(d);
    if (exp10 >= 0) {
        if (exp10 > 22) return false;
        double prod = m * kPow10[exp10];
        if (!std::isfinite(prod) || std::fma(m, kPow10[exp10], -prod) != 0.0) return false;
        return ad == prod;
    }
    long k = -exp10;
    if (k > 22) return false;
    double q = ad * kPow10[k];
    if (!std::isfinite(q) || std::fma(ad, kPow10[k], -q) != 0.0) return false;
    return q == m;
}

} // namespace

Interval parse_decimal_outward(const std::string& tok) {
    char* end = nullptr;
    double d = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0' || !std::isfinite(d))
        throw ParseError("bad decimal literal: " + tok);
    bool neg;
    std::string digits;
    long exp10;
    if (decompose_decimal(tok, neg, digits, exp10) && provably_exact(d, digits, exp10))
        return Interval(d);
    return Interval(next_down(d), next_up(d));
}

} // namespace detail

GeneratingFunction::GeneratingFunction(double center, double radius,
                                       const std::vector<Coefficient>& coeffs,
                                       double ball_radius)
    : center_(center), radius_(radius), ball_radius_(ball_radius) {
    if (std::isnan(center) || std::isnan(radius) || radius <= 0.0)
        throw InvariantViolation("generating function needs a positive disk radius");
    if (ball_radius < 0.0) throw InvariantViolation("negative ball radius");
    int nx = 1, ny = 1;
    for (const auto& t : coeffs) {
        if (t.i < 0 || t.j < 0) throw InvariantViolation("negative coefficient index");
        nx = std::max(nx, t.i + 1);
        ny = std::max(ny, t.j + 1);
    }
    s_.nx = nx;
    s_.ny = ny;
    s_.c.assign(std::size_t(nx) * ny, Interval(0.0));
    std::vector<bool> seen(s_.c.size(), false);
    for (const auto& t : coeffs) {
        std::size_t idx = std::size_t(t.i) * ny + t.j;
        if (seen[idx]) throw InvariantViolation("duplicate coefficient index pair");
        seen[idx] = true;
        s_.at(t.i, t.j) = ball_radius > 0.0 ? widened(t.c, ball_radius) : t.c;
    }
    finish_setup();
}

void GeneratingFunction::finish_setup() {
    // differentiate the grid in each variable; integer scaling is exact
    d1_.nx = std::max(s_.nx - 1, 1);
    d1_.ny = s_.ny;
    d1_.c.assign(std::size_t(d1_.nx) * d1_.ny, Interval(0.0));
    for (int i = 0; i + 1 < s_.nx; ++i)
        for (int j = 0; j < s_.ny; ++j)
            d1_.at(i, j) = Interval(double(i + 1)) * s_.at(i + 1, j);

    d2_.nx = s_.nx;
    d2_.ny = std::max(s_.ny - 1, 1);
    d2_.c.assign(std::size_t(d2_.nx) * d2_.ny, Interval(0.0));
    for (int i = 0; i < s_.nx; ++i)
        for (int j = 0; j + 1 < s_.ny; ++j)
            d2_.at(i, j) = Interval(double(j + 1)) * s_.at(i, j + 1);

    d1_mirror_symmetric_ = true;
    int m = std::max(d1_.nx, d1_.ny);
    for (int i = 0; i < m && d1_mirror_symmetric_; ++i)
        for (int j = 0; j < m; ++j)
            if (d1_.get(i, j) != d1_.get(j, i)) {
                d1_mirror_symmetric_ = false;
                break;
            }

    Interval c(center_), r(radius_);
    gate_lo_ = std::isfinite(radius_) ? (c - r).hi() : -detail::kInf;
    gate_hi_ = std::isfinite(radius_) ? (c + r).lo() : detail::kInf;
}

GeneratingFunction GeneratingFunction::henon(double a) {
    std::vector<Coefficient> c{{1, 0, Interval(1.0)}, {0, 0, Interval(-1.0)}, {0, 2, Interval(a)}};
    return GeneratingFunction(0.0, detail::kInf, c);
}

void GeneratingFunction::require_inside(const Interval& v) const {
    if (!(v.lo() > gate_lo_ && v.hi() < gate_hi_)) {
        std::ostringstream os;
        os << "argument " << v << " leaves the disk |t - " << center_ << "| < " << radius_;
        throw OutOfDomain(os.str());
    }
}

Interval GeneratingFunction::eval_grid(const Grid& g, const Interval& x, const Interval& y) const {
    require_inside(x);
    require_inside(y);
    Interval tx = x - Interval(center_);
    Interval ty = y - Interval(center_);
    Interval acc(0.0);
    for (int i = g.nx - 1; i >= 0; --i) {
        Interval inner(0.0);
        for (int j = g.ny - 1; j >= 0; --j) inner = inner * ty + g.at(i, j);
        acc = acc * tx + inner;
    }
    return acc;
}

Interval GeneratingFunction::eval(const Interval& x, const Interval& y) const {
    return eval_grid(s_, x, y);
}

Interval GeneratingFunction::d1(const Interval& x, const Interval& y) const {
    return eval_grid(d1_, x, y);
}

Interval GeneratingFunction::d2(const Interval& x, const Interval& y) const {
    return eval_grid(d2_, x, y);
}

Interval GeneratingFunction::coefficient(int i, int j) const {
    return s_.get(i, j);
}

Interval GeneratingFunction::norm(double rho) const {
    Interval acc(0.0);
    Interval r(rho);
    for (int i = 0; i < s_.nx; ++i) {
        Interval row_pow(1.0);
        for (int k = 0; k < i; ++k) row_pow *= r;
        for (int j = 0; j < s_.ny; ++j) {
            double m = s_.at(i, j).mag();
            if (m == 0.0) continue;
            Interval pw = row_pow;
            for (int k = 0; k < j; ++k) pw *= r;
            acc += Interval(m) * pw;
        }
    }
    return acc;
}

SymmetryReport GeneratingFunction::check_symmetry() const {
    SymmetryReport rep;
    int m = std::max(d1_.nx, d1_.ny);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            if (!intersect(d1_.get(i, j), d1_.get(j, i))) {
                rep.symmetric = false;
                rep.bad_i = i;
                rep.bad_j = j;
                return rep;
            }
        }
    return rep;
}

NormalizationReport GeneratingFunction::check_normalization() const {
    NormalizationReport rep;
    rep.value = eval(Interval(1.0), Interval(0.0));
    rep.slope = d2(Interval(1.0), Interval(0.0));
    rep.value_ok = rep.value.contains(0.0);
    rep.slope_ok = rep.slope.contains(0.2);
    return rep;
}

GeneratingFunction GeneratingFunction::parse(std::istream& in) {
    bool have_center = false, have_radius = false;
    double center = 0.0, radius = 0.0, ball_radius = 0.0;
    std::vector<Coefficient> coeffs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string head;
        if (!(ls >> head) || head[0] == '#') continue;
        auto fail = [&](const std::string& what) {
            throw ParseError("line " + std::to_string(lineno) + ": " + what);
        };
        if (head == "center" || head == "radius" || head == "ball_radius") {
            std::string tok;
            if (!(ls >> tok)) fail("missing value after " + head);
            double v;
            if (tok == "inf") {
                v = detail::kInf;
            } else {
                char* end = nullptr;
                v = std::strtod(tok.c_str(), &end);
                if (end == tok.c_str() || *end != '\0' || std::isnan(v)) fail("bad number " + tok);
            }
            if (head == "center") { center = v; have_center = true; }
            else if (head == "radius") { radius = v; have_radius = true; }
            else { ball_radius = detail::parse_decimal_outward(tok).hi(); }
        } else {
            int i, j;
            std::string lo_tok, hi_tok, extra;
            std::istringstream cs(line);
            if (!(cs >> i >> j >> lo_tok >> hi_tok)) fail("expected: i j lo hi");
            if (cs >> extra) fail("trailing tokens");
            Interval lo = detail::parse_decimal_outward(lo_tok);
            Interval hi = detail::parse_decimal_outward(hi_tok);
            if (lo.lo() > hi.hi())
                throw InvariantViolation("line " + std::to_string(lineno) +
                                         ": coefficient endpoints out of order");
            coeffs.push_back({i, j, Interval(lo.lo(), hi.hi())});
        }
    }
    if (!have_center || !have_radius) throw ParseError("missing center or radius header");
    return GeneratingFunction(center, radius, coeffs, ball_radius);
}

GeneratingFunction GeneratingFunction::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open map file " + path);
    return parse(in);
}

} // namespace mapcert

#ifndef MAPCERT_GENERATING_FUNCTION_HPP
#define MAPCERT_GENERATING_FUNCTION_HPP

/*
 * Bivariate polynomials in the shifted basis (x - center)^i (y - center)^j
 * with interval coefficients, restricted to the open bi-disk
 * |x - center| < radius, |y - center| < radius.
 *
 * A map generator s(x,y) lives here together with its two partial
 * derivatives, which are coefficient grids of their own.
 */

#include <iosfwd>
#include <string>
#include <tuple>
#include <vector>

#include "mapcert/interval.hpp"

namespace mapcert {

struct SymmetryReport {
    bool symmetric = true;
    // first (i, j) whose mirrored d1 coefficients have disjoint enclosures
    int bad_i = -1;
    int bad_j = -1;
};

struct NormalizationReport {
    Interval value; // s(1, 0)
    Interval slope; // d2 s(1, 0)
    bool value_ok = false;
    bool slope_ok = false;
    bool ok() const { return value_ok && slope_ok; }
};

class GeneratingFunction {
public:
    struct Coefficient {
        int i, j;
        Interval c;
    };

    GeneratingFunction(double center, double radius, const std::vector<Coefficient>& coeffs,
                       double ball_radius = 0.0);

    // s(x,y) = x - 1 + a*y^2 on the whole plane
    static GeneratingFunction henon(double a);

    static GeneratingFunction load(const std::string& path);
    static GeneratingFunction parse(std::istream& in);

    Interval eval(const Interval& x, const Interval& y) const;
    Interval d1(const Interval& x, const Interval& y) const;
    Interval d2(const Interval& x, const Interval& y) const;

    double center() const { return center_; }
    double radius() const { return radius_; }
    double ball_radius() const { return ball_radius_; }
    int deg_x() const { return s_.nx - 1; }
    int deg_y() const { return s_.ny - 1; }
    Interval coefficient(int i, int j) const;

    // sum over |c_ij| rho^(i+j), rounded up
    Interval norm(double rho) const;

    SymmetryReport check_symmetry() const;
    NormalizationReport check_normalization() const;

    // stored d1 grid equals its transpose entrywise; evaluating one mirrored
    // Jacobian entry then encloses both
    bool d1_mirror_symmetric() const { return d1_mirror_symmetric_; }

    // throws OutOfDomain unless v lies inside the open disk slice
    void require_inside(const Interval& v) const;

private:
    struct Grid {
        int nx = 0, ny = 0;
        std::vector<Interval> c;
        const Interval& at(int i, int j) const { return c[std::size_t(i) * ny + j]; }
        Interval& at(int i, int j) { return c[std::size_t(i) * ny + j]; }
        Interval get(int i, int j) const {
            if (i < 0 || j < 0 || i >= nx || j >= ny) return Interval(0.0);
            return at(i, j);
        }
    };

    Interval eval_grid(const Grid& g, const Interval& x, const Interval& y) const;
    void finish_setup();

    double center_ = 0.0;
    double radius_ = 0.0;
    double ball_radius_ = 0.0;
    Grid s_, d1_, d2_;
    bool d1_mirror_symmetric_ = false;
    double gate_lo_ = 0.0, gate_hi_ = 0.0; // eval admits v with gate_lo < v.lo, v.hi < gate_hi
};

namespace detail {
// Interval enclosure of a decimal literal: a point when the literal is provably
// an exact double, one ulp outward otherwise.
Interval parse_decimal_outward(const std::string& tok);
} // namespace detail

} // namespace mapcert

#endif

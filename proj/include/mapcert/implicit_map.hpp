#ifndef MAPCERT_IMPLICIT_MAP_HPP
#define MAPCERT_IMPLICIT_MAP_HPP

/*
 * The area-preserving map F generated by s:
 *
 *   F(x, u) = (y, s(x, y))   where y solves   u = -s(y, x).
 *
 * Reversible when s1 is symmetric; then T F T = F^{-1} with T(x,u) = (x,-u).
 */

#include <span>
#include <vector>

#include "mapcert/generating_function.hpp"
#include "mapcert/interval.hpp"
#include "mapcert/root_enclosure.hpp"

namespace mapcert {

struct ReversibilityReport {
    std::size_t checked = 0;
    std::vector<std::size_t> violations;
    bool consistent() const { return violations.empty(); }
};

class MapContext {
public:
    MapContext(GeneratingFunction s, const Interval& y_search_domain,
               const RootSearchParams& params = {});

    const GeneratingFunction& s() const { return s_; }
    const Interval& y_search_domain() const { return y_dom_; }

    // unique y in the search domain with u = -s(y,x); the returned interval
    // carries the contraction certificate N(Y) inside interior(Y)
    Interval solve_y(const Interval& x, const Interval& u) const;

    IntervalBox forward(const IntervalBox& p) const;

    // DF at (x,u); solves for y first
    IntervalMatrix2 derivative(const IntervalBox& p) const;
    // DF with the image position already enclosed; used along orbits where
    // the next position is known
    IntervalMatrix2 derivative_with_y(const Interval& x, const Interval& y) const;

    // checks that F(T(F(p))) meets T(p) on each sample box
    ReversibilityReport check_reversibility(std::span<const IntervalBox> samples) const;

private:
    GeneratingFunction s_;
    Interval y_dom_;
    RootSearchParams params_;
};

} // namespace mapcert

#endif

#include "mapcert/implicit_map.hpp"

#include "mapcert/errors.hpp"

namespace mapcert {

MapContext::MapContext(GeneratingFunction s, const Interval& y_search_domain,
                       const RootSearchParams& params)
    : s_(std::move(s)), y_dom_(y_search_domain), params_(params) {}

Interval MapContext::solve_y(const Interval& x, const Interval& u) const {
    auto f = [&](const Interval& y) { return s_.eval(y, x) + u; };
    auto df = [&](const Interval& y) { return s_.d1(y, x); };
    RootSearch found = search_roots_1d(f, df, y_dom_, params_);
    if (found.certified.empty() && found.undecided.empty())
        throw EmptySolution("no y in the search domain satisfies u = -s(y,x)");
    if (found.certified.size() != 1 || !found.undecided.empty())
        throw NoUniqueSolution("could not certify a unique y for the given (x,u)");
    return found.certified.front();
}

IntervalBox MapContext::forward(const IntervalBox& p) const {
    Interval y = solve_y(p.x, p.u);
    return {y, s_.eval(p.x, y)};
}

IntervalMatrix2 MapContext::derivative_with_y(const Interval& x, const Interval& y) const {
    Interval s1yx = s_.d1(y, x);
    if (s1yx.contains(0.0)) throw SingularImplicit();
    Interval s2yx = s_.d2(y, x);
    Interval s1xy = s_.d1(x, y);
    Interval s2xy = s_.d2(x, y);
    Interval a00 = -(s2yx / s1yx);
    Interval a01 = -(Interval(1.0) / s1yx);
    Interval a10 = s1xy - s2xy * (s2yx / s1yx);
    Interval a11 = -(s2xy / s1yx);
    return {a00, a01, a10, a11};
}

IntervalMatrix2 MapContext::derivative(const IntervalBox& p) const {
    return derivative_with_y(p.x, solve_y(p.x, p.u));
}

ReversibilityReport MapContext::check_reversibility(std::span<const IntervalBox> samples) const {
    ReversibilityReport rep;
    rep.checked = samples.size();
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const IntervalBox& p = samples[k];
        bool ok = false;
        try {
            IntervalBox q = forward(p);
            IntervalBox r = forward({q.x, -q.u});
            ok = intersect(r.x, p.x).has_value() && intersect(r.u, -p.u).has_value();
        } catch (const Error&) {
            ok = false; // could not even evaluate the composition on this box
        }
        if (!ok) rep.violations.push_back(k);
    }
    return rep;
}

} // namespace mapcert

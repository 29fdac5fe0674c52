#ifndef MAPCERT_ROOT_ENCLOSURE_HPP
#define MAPCERT_ROOT_ENCLOSURE_HPP

/*
 * Interval Newton on one scalar unknown with bisection fallback.
 *
 * Parameters inside f are allowed to be intervals themselves, in which case
 * the search covers the union of the solution sets over every parameter
 * value.  A certified box carries the usual contraction certificate
 * N(Y) in interior(Y), so it holds exactly one root per parameter value;
 * undecided boxes are merely not excluded.
 */

#include <utility>
#include <vector>

#include "mapcert/interval.hpp"

namespace mapcert {

struct RootSearchParams {
    double tol = 1e-10;        // width at which an unresolved box stops splitting
    int max_depth = 64;        // bisection depth bound
    double stall_ratio = 1e-3; // certified roots stop contracting below this relative gain
    int max_iters = 80;
};

struct RootSearch {
    std::vector<Interval> certified;
    std::vector<Interval> undecided;

    std::vector<Interval> cover() const {
        std::vector<Interval> all = certified;
        all.insert(all.end(), undecided.begin(), undecided.end());
        return all;
    }
};

namespace detail {

// bisection point with f thick at the midpoint avoided when possible, so a
// root sitting exactly on the cut does not stall both halves
template <class F>
double bisection_point(F&& f, const Interval& y) {
    double w = y.width();
    double probes[3] = {y.mid(), y.mid() + 0.125 * w, y.mid() - 0.125 * w};
    for (double p : probes) {
        if (p <= y.lo() || p >= y.hi()) continue;
        if (!f(Interval(p)).contains(0.0)) return p;
    }
    return y.mid();
}

} // namespace detail

template <class F, class DF>
RootSearch search_roots_1d(F&& f, DF&& df, const Interval& domain,
                           const RootSearchParams& p = {}) {
    RootSearch out;
    struct Item {
        Interval y;
        int depth;
    };
    std::vector<Item> work{{domain, 0}};
    while (!work.empty()) {
        Item it = work.back();
        work.pop_back();
        Interval y = it.y;
        bool resolved = false;
        for (int iter = 0; iter < p.max_iters && !resolved; ++iter) {
            if (!f(y).contains(0.0)) {
                resolved = true;
                break;
            }
            Interval dy = df(y);
            if (dy.contains(0.0)) {
                if (y.width() <= p.tol || it.depth >= p.max_depth) {
                    out.undecided.push_back(y);
                } else {
                    double c = detail::bisection_point(f, y);
                    work.push_back({Interval(y.lo(), c), it.depth + 1});
                    work.push_back({Interval(c, y.hi()), it.depth + 1});
                }
                resolved = true;
                break;
            }
            double m = y.mid();
            Interval n = Interval(m) - f(Interval(m)) / dy;
            auto meet = intersect(n, y);
            if (!meet) {
                resolved = true; // no root anywhere in y
                break;
            }
            if (y.strictly_contains(n)) {
                // unique root; keep contracting until the width gain stalls
                Interval root = *meet;
                for (int k = 0; k < p.max_iters; ++k) {
                    double m2 = root.mid();
                    Interval n2 = Interval(m2) - f(Interval(m2)) / df(root);
                    auto meet2 = intersect(n2, root);
                    if (!meet2) break;
                    double w_old = root.width();
                    root = *meet2;
                    if (w_old - root.width() < p.stall_ratio * w_old) break;
                }
                out.certified.push_back(root);
                resolved = true;
                break;
            }
            double w_old = y.width();
            y = *meet;
            if (w_old - y.width() < 0.01 * w_old) {
                // Newton is stuck; split unless already fine enough
                if (y.width() <= p.tol || it.depth >= p.max_depth) {
                    out.undecided.push_back(y);
                } else {
                    double c = detail::bisection_point(f, y);
                    work.push_back({Interval(y.lo(), c), it.depth + 1});
                    work.push_back({Interval(c, y.hi()), it.depth + 1});
                }
                resolved = true;
                break;
            }
        }
        if (!resolved) out.undecided.push_back(y); // iteration budget exhausted
    }
    return out;
}

} // namespace mapcert

#endif

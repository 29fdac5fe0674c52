#include "mapcert/stability.hpp"

#include <limits>
#include <optional>
#include <utility>

#include "mapcert/errors.hpp"

namespace mapcert {

const char* to_string(Classification c) {
    switch (c) {
    case Classification::ProvenHyperbolic: return "hyperbolic";
    case Classification::EllipticCandidate: return "elliptic_candidate";
    case Classification::Inconclusive: break;
    }
    return "inconclusive";
}

IntervalMatrix2 monodromy(const MapContext& ctx, std::span<const Interval> positions) {
    if (positions.empty()) throw InvariantViolation("monodromy of an empty orbit");
    const std::size_t n = positions.size();
    IntervalMatrix2 m = IntervalMatrix2::identity();
    for (std::size_t t = 0; t < n; ++t) {
        const Interval& x = positions[t];
        const Interval& y = positions[(t + 1) % n];
        m = ctx.derivative_with_y(x, y) * m;
    }
    return m;
}

StabilityReport classify_orbit(const MapContext& ctx, std::span<const Interval> positions) {
    StabilityReport rep;
    IntervalMatrix2 m = IntervalMatrix2::identity();
    try {
        m = monodromy(ctx, positions);
    } catch (const SingularImplicit&) {
        // derivative undefined somewhere in the enclosure; nothing to decide
        constexpr double inf = std::numeric_limits<double>::infinity();
        rep.kind = Classification::Inconclusive;
        rep.trace = Interval(-inf, inf);
        rep.det = Interval(-inf, inf);
        return rep;
    }
    rep.trace = m.trace();
    rep.det = m.det();
    rep.det_contains_one = rep.det.contains(1.0);
    if (rep.trace.lo() > 2.0 || rep.trace.hi() < -2.0)
        rep.kind = Classification::ProvenHyperbolic;
    else if (rep.trace.lo() > -2.0 && rep.trace.hi() < 2.0)
        rep.kind = Classification::EllipticCandidate;
    else
        rep.kind = Classification::Inconclusive;
    return rep;
}

CycleVerdict certify_cycle(const MapContext& ctx, const CycleSystem& sys,
                           std::vector<Interval> positions, const CertifyOptions& opt) {
    CycleVerdict v;
    std::vector<std::vector<Interval>> work;
    work.push_back(std::move(positions));
    std::optional<Interval> trace;
    bool any_surviving = false, any_elliptic = false, any_open = false;

    while (!work.empty()) {
        std::vector<Interval> piece = std::move(work.back());
        work.pop_back();
        OrbitEnclosure enc = refine_orbit(sys, std::move(piece), opt.refine);
        if (enc.discarded) continue;
        StabilityReport rep = classify_orbit(ctx, enc.positions);
        any_surviving = true;
        trace = trace ? hull(*trace, rep.trace) : rep.trace;
        if (rep.kind == Classification::ProvenHyperbolic) continue;
        if (rep.kind == Classification::EllipticCandidate) {
            any_elliptic = true;
            continue;
        }
        if (v.splits_used >= opt.max_splits) {
            any_open = true;
            continue;
        }
        try {
            auto halves = split_widest(std::span<const Interval>(enc.positions), opt.split_floor);
            ++v.splits_used;
            work.push_back(std::move(halves.first));
            work.push_back(std::move(halves.second));
        } catch (const DegenerateSplit&) {
            v.degenerate_split = true;
            any_open = true;
        }
    }

    if (!any_surviving) {
        v.discarded = true;
        v.kind = Classification::ProvenHyperbolic; // vacuously
        return v;
    }
    v.trace = *trace;
    if (!any_elliptic && !any_open)
        v.kind = Classification::ProvenHyperbolic;
    else if (any_elliptic)
        v.kind = Classification::EllipticCandidate;
    else
        v.kind = Classification::Inconclusive;
    return v;
}

} // namespace mapcert

#ifndef MAPCERT_STABILITY_HPP
#define MAPCERT_STABILITY_HPP

/*
 * Linear stability of an enclosed periodic orbit.
 *
 * The monodromy matrix is the product of DF along the orbit; its trace decides
 * the type.  Every real orbit inside the enclosure has its trace inside the
 * computed interval, so
 *
 *   trace interval strictly outside [-2, 2]  ->  proven hyperbolic,
 *   trace interval strictly inside (-2, 2)   ->  elliptic candidate,
 *   anything touching the boundary           ->  inconclusive.
 *
 * An inconclusive verdict is attacked by bisecting the widest position
 * interval and certifying the halves; pieces proven orbit-free drop out.
 */

#include <span>
#include <vector>

#include "mapcert/implicit_map.hpp"
#include "mapcert/interval.hpp"
#include "mapcert/orbit_refinement.hpp"

namespace mapcert {

enum class Classification { ProvenHyperbolic, EllipticCandidate, Inconclusive };

const char* to_string(Classification c);

struct StabilityReport {
    Classification kind = Classification::Inconclusive;
    Interval trace{0.0};
    Interval det{1.0}; // contains 1 whenever the enclosure is consistent
    bool det_contains_one = true;
};

// DF(p_{n-1}) ... DF(p_0) along the cyclic orbit
IntervalMatrix2 monodromy(const MapContext& ctx, std::span<const Interval> positions);

StabilityReport classify_orbit(const MapContext& ctx, std::span<const Interval> positions);

struct CertifyOptions {
    int max_splits = 40;
    double split_floor = kDefaultSplitFloor;
    RefineOptions refine;
};

struct CycleVerdict {
    Classification kind = Classification::Inconclusive;
    Interval trace{0.0};    // hull over surviving pieces
    bool discarded = false; // every piece proved orbit-free
    bool degenerate_split = false; // split floor hit with the verdict still open
    int splits_used = 0;
};

// Splits on inconclusive pieces until the budget or the floor; surviving
// pieces combine as: all hyperbolic -> hyperbolic (vacuously when none
// survive), any elliptic candidate wins otherwise.
CycleVerdict certify_cycle(const MapContext& ctx, const CycleSystem& sys,
                           std::vector<Interval> positions, const CertifyOptions& opt = {});

} // namespace mapcert

#endif

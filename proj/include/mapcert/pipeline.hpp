#ifndef MAPCERT_PIPELINE_HPP
#define MAPCERT_PIPELINE_HPP

/*
 * End-to-end runs: configuration, the area study and the periodic-orbit
 * certification, plus the text outputs the command line tool writes.
 */

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mapcert/cycle_search.hpp"
#include "mapcert/implicit_map.hpp"
#include "mapcert/orbit_refinement.hpp"
#include "mapcert/stability.hpp"
#include "mapcert/transition_graph.hpp"

namespace mapcert {

struct RunConfig {
    std::string map_file = "henon:1.0"; // "henon:<a>" or a coefficient file
    double domain_lo = -1.0, domain_hi = 2.0;
    std::optional<double> y_lo, y_hi; // y search range; defaults to the domain
    int nominal = 100;                // cells at the coarsest level
    int levels = 0;                   // extra refinement levels in the area study
    int max_period = 6;
    bool bootstrap = true;
    int bootstrap_cells = 100;
    int bootstrap_rounds = 12;
    int workers = 1;
    std::int64_t max_cycles = 200000; // per period, before the resource flag trips
    std::size_t exact_filter_limit = 6000;
    int max_splits = 40;
    double split_floor = kDefaultSplitFloor;
    int newton_sweeps = 50;
    int krawczyk_iters = 25;
    std::string output_dir = ".";

    static RunConfig from_file(const std::string& path);
    // one "key=value" assignment; unknown keys throw ParseError
    void apply(const std::string& key, const std::string& value);
};

GeneratingFunction load_map(const RunConfig& cfg);
MapContext make_context(const RunConfig& cfg);

// hull of the surviving cover, iterated until the hull stops moving
Interval bootstrap_domain(const MapContext& ctx, const Interval& domain, int cells,
                          int max_rounds, int workers = 1);

struct MeasureRow {
    long nominal = 0;
    std::size_t nodes = 0, edges = 0;
    double area = 0.0;
    double improvement = 0.0; // previous area / this area; 0 on the first row
};

struct MeasureStudy {
    Interval domain{0.0, 1.0};
    std::vector<MeasureRow> rows;
};

MeasureStudy run_measure_study(const MapContext& ctx, const RunConfig& cfg);
void write_measure_csv(std::ostream& os, const MeasureStudy& m);

struct OrbitRecord {
    int period = 0;
    int cycle_id = 0;
    std::vector<Interval> positions;
    Classification kind = Classification::Inconclusive;
    Interval trace{0.0};
    int splits_used = 0;
    bool degenerate_split = false;
    bool primitive = true; // no rotation by a proper divisor maps it into itself
    bool unique = false;   // Krawczyk proved exactly one orbit in the enclosure
};

struct PeriodReport {
    int period = 0;
    std::size_t nodes = 0, edges = 0; // period subgraph of the reduced cover
    std::int64_t closed_walks = 0;
    std::int64_t candidates = 0;
    std::int64_t surviving_candidates = 0; // candidates not discarded by refinement
    bool resource_limited = false;
    std::vector<OrbitRecord> orbits;

    std::size_t hyperbolic_primitive() const;
    std::size_t elliptic() const;
    std::size_t inconclusive() const;
};

struct CertificationReport {
    std::string map_name;
    Interval domain{0.0, 1.0};
    long nominal = 0;
    std::size_t nodes = 0, edges = 0; // reduced nominal cover
    std::vector<PeriodReport> periods;

    // no elliptic candidates, nothing inconclusive, no tripped budgets
    bool clean() const;
    int largest_certified_period() const;
};

CertificationReport run_certification(const MapContext& ctx, const RunConfig& cfg);

void write_cycles_csv(std::ostream& os, const CertificationReport& r);
void write_verdicts_csv(std::ostream& os, const CertificationReport& r);
void write_summary(std::ostream& os, const CertificationReport& r);

// phase-plane picture of the cover; marks are drawn on top
void write_cover_svg(std::ostream& os, const MapContext& ctx, const TransitionGraph& g,
                     const Partition& p, std::span<const IntervalBox> marks = {});

} // namespace mapcert

#endif

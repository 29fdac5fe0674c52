#ifndef MAPCERT_CYCLE_SEARCH_HPP
#define MAPCERT_CYCLE_SEARCH_HPP

/*
 * Periodic combinatorics on the transition graph.
 *
 * A period-n candidate is a closed walk of length exactly n, kept as one
 * canonical representative per rotation class: the lexicographically least
 * rotation.  Repeated nodes are allowed; orbits of every period dividing n
 * appear among the candidates.
 */

#include <cstdint>
#include <functional>
#include <vector>

#include "mapcert/transition_graph.hpp"

namespace mapcert {

struct CandidateCycle {
    std::vector<std::uint32_t> cells; // canonical rotation of position cells
};

struct CycleStats {
    std::int64_t canonical_count = 0;
    std::int64_t closed_walks = 0; // number of length-n closed node sequences
    bool resource_limited = false;
};

struct EnumerateOptions {
    int workers = 1;
    std::int64_t max_cycles = -1; // canonical candidates streamed before flagging
};

// nodes lying on closed walks of length exactly n.  Small graphs get the
// exact boolean-walk filter; past exact_limit nodes a sound over-approximation
// (component period divides n) is used instead.
TransitionGraph period_subgraph(const TransitionGraph& g, int n, std::size_t exact_limit = 6000);

// streams every canonical candidate to sink; sink may run on several threads
// at once.  Counts are exact unless resource_limited is set.
CycleStats enumerate_cycles(const TransitionGraph& g, int n,
                            const std::function<void(const CandidateCycle&)>& sink,
                            const EnumerateOptions& opts = {});

} // namespace mapcert

#endif

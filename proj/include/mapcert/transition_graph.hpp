#ifndef MAPCERT_TRANSITION_GRAPH_HPP
#define MAPCERT_TRANSITION_GRAPH_HPP

/*
 * Combinatorial outer cover of the invariant set.
 *
 * Cells partition the position interval I.  A node (i,j) stands for the
 * phase box (I_i, -s(I_j, I_i)): position now in cell i, position next in
 * cell j.  An edge (i,j) -> (j,k) exists whenever the three-point equation
 * s(x,y) + s(z,y) = 0 admits a solution z in cell k for some x in I_i,
 * y in I_j.  Orbits that stay in I forever trace bi-infinite walks, so
 * trimming nodes without predecessors or successors never loses them.
 */

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "mapcert/implicit_map.hpp"
#include "mapcert/interval.hpp"

namespace mapcert {

struct Partition {
    Interval domain{0.0, 1.0};
    std::vector<Interval> cells; // ascending, interiors disjoint
    int level = 0;
    long nominal = 0; // discretization this level corresponds to

    static Partition uniform(const Interval& domain, int n);

    double min_cell_width() const;
    // indices of cells meeting z (closed overlap; shared endpoints count)
    std::vector<std::uint32_t> overlapping(const Interval& z) const;
};

class TransitionGraph {
public:
    struct Node {
        std::uint32_t i = 0, j = 0;
        bool operator==(const Node&) const = default;
        auto operator<=>(const Node&) const = default;
    };

    TransitionGraph() = default;
    // nodes must be sorted; succ[idx] holds node indices
    static TransitionGraph from_adjacency(std::vector<Node> nodes,
                                          const std::vector<std::vector<std::uint32_t>>& succ);

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return adj_.size(); }
    const Node& node(std::size_t idx) const { return nodes_[idx]; }
    const std::vector<Node>& nodes() const { return nodes_; }

    std::span<const std::uint32_t> successors(std::size_t idx) const {
        return {adj_.data() + off_[idx], adj_.data() + off_[idx + 1]};
    }

    // index of (i,j), or -1
    std::ptrdiff_t find(std::uint32_t i, std::uint32_t j) const;
    bool has_edge(std::uint32_t i, std::uint32_t j, std::uint32_t k) const;

private:
    std::vector<Node> nodes_;
    std::vector<std::size_t> off_;
    std::vector<std::uint32_t> adj_;
};

struct BuildOptions {
    int workers = 1;
    double z_tol_factor = 0.25; // z boxes resolved to this fraction of a cell width
    int z_max_depth = 64;
};

// every z in z_domain solving s(x,y) + s(z,y) = 0 for some parameter values
// in (x, y) lies in one of the returned intervals
std::vector<Interval> three_point_solve(const GeneratingFunction& s, const Interval& x,
                                        const Interval& y, const Interval& z_domain, double tol);

// all pairs (i,j), with edges from the three-point solutions; not reduced
TransitionGraph build_graph(const MapContext& ctx, const Partition& partition,
                            const BuildOptions& opts = {});

// maximal subgraph in which every node has a predecessor and a successor
TransitionGraph reduce_graph(const TransitionGraph& g);

// outward-rounded total area of the phase boxes of the graph's nodes
double invariant_cover_area(const MapContext& ctx, const TransitionGraph& g,
                            const Partition& partition, int workers = 1);

// bisect surviving cells, rebuild edges among children of connected nodes,
// reduce; the new cover lies inside the old one
std::pair<TransitionGraph, Partition> refine(const MapContext& ctx, const TransitionGraph& reduced,
                                             const Partition& partition,
                                             const BuildOptions& opts = {});

void dump_graph(std::ostream& os, const TransitionGraph& g);
TransitionGraph load_graph(std::istream& in);

} // namespace mapcert

#endif

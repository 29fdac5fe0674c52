#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "mapcert/errors.hpp"
#include "mapcert/transition_graph.hpp"

using mapcert::GeneratingFunction;
using mapcert::Interval;
using mapcert::MapContext;
using mapcert::Partition;
using mapcert::TransitionGraph;
using Node = TransitionGraph::Node;

namespace {

MapContext quad_context(double a) {
    return MapContext(GeneratingFunction::henon(a), Interval(-12.0, 12.0));
}

// reference reducer: recompute degrees from scratch after every removal,
// visiting nodes in the supplied order
std::set<std::size_t> slow_reduce(std::size_t n,
                                  const std::vector<std::vector<std::uint32_t>>& succ,
                                  std::vector<std::size_t> order) {
    std::set<std::size_t> alive;
    for (std::size_t v = 0; v < n; ++v) alive.insert(v);
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t v : order) {
            if (!alive.count(v)) continue;
            bool has_out = false, has_in = false;
            for (std::uint32_t t : succ[v])
                if (alive.count(t)) { has_out = true; break; }
            for (std::size_t w : alive) {
                if (std::find(succ[w].begin(), succ[w].end(), std::uint32_t(v)) != succ[w].end()) {
                    has_in = true;
                    break;
                }
            }
            if (!has_out || !has_in) {
                alive.erase(v);
                changed = true;
            }
        }
    }
    return alive;
}

} // namespace

TEST_CASE("uniform partitions tile the domain exactly") {
    Partition p = Partition::uniform(Interval(-1.0, 2.0), 7);
    REQUIRE(p.cells.size() == 7);
    CHECK(p.cells.front().lo() == -1.0);
    CHECK(p.cells.back().hi() == 2.0);
    for (std::size_t k = 1; k < p.cells.size(); ++k)
        CHECK(p.cells[k].lo() == p.cells[k - 1].hi()); // endpoints shared, no gaps
    CHECK(p.min_cell_width() > 0.42);
    CHECK(p.min_cell_width() < 0.44);
    CHECK(p.level == 0);
    CHECK(p.nominal == 7);

    CHECK_THROWS_AS(Partition::uniform(Interval(0.0, 1.0), 0), mapcert::InvariantViolation);
    CHECK_THROWS_AS(Partition::uniform(Interval(1.0, 1.0), 4), mapcert::InvariantViolation);
}

TEST_CASE("cell overlap uses closed intersection") {
    Partition p = Partition::uniform(Interval(0.0, 1.0), 4);
    auto hit = p.overlapping(Interval(0.25)); // exactly on a shared endpoint
    REQUIRE(hit.size() == 2);
    CHECK(hit[0] == 0);
    CHECK(hit[1] == 1);

    hit = p.overlapping(Interval(0.1, 0.6));
    REQUIRE(hit.size() == 3);
    CHECK(hit[0] == 0);
    CHECK(hit[2] == 2);

    CHECK(p.overlapping(Interval(1.5, 2.0)).empty());
    CHECK(p.overlapping(Interval(-0.5, -0.1)).empty());
    CHECK(p.overlapping(Interval(-1.0, 2.0)).size() == 4);
    CHECK(p.overlapping(Interval(1.0)).size() == 1); // domain endpoint
}

TEST_CASE("three-point solutions cover the algebraic branch") {
    // s(x,y) + s(z,y) = 0 at a = 1 solves to z = 2 - x - 2y^2
    auto s = GeneratingFunction::henon(1.0);
    std::mt19937_64 rng(0x3137);
    std::uniform_real_distribution<double> pick(-1.0, 1.5);
    Interval zdom(-6.0, 6.0);
    int nonempty = 0;
    for (int it = 0; it < 200; ++it) {
        double x = pick(rng), y = pick(rng);
        double z = 2.0 - x - 2.0 * y * y;
        auto boxes = mapcert::three_point_solve(s, Interval(x), Interval(y), zdom, 1e-6);
        if (z < zdom.lo() || z > zdom.hi()) continue;
        ++nonempty;
        bool covered = false;
        for (const auto& b : boxes)
            if (mapcert::widened(b, 1e-9).contains(z)) covered = true;
        CHECK(covered);
    }
    CHECK(nonempty > 100);

    // interval parameters widen the solution set but never lose it
    auto boxes = mapcert::three_point_solve(s, Interval(0.0, 0.5), Interval(0.0, 0.5), zdom, 1e-6);
    for (double x : {0.0, 0.2, 0.5})
        for (double y : {0.0, 0.3, 0.5}) {
            double z = 2.0 - x - 2.0 * y * y;
            bool covered = false;
            for (const auto& b : boxes)
                if (mapcert::widened(b, 1e-9).contains(z)) covered = true;
            CHECK(covered);
        }
}

TEST_CASE("every admissible transition appears in the unreduced graph") {
    MapContext ctx = quad_context(1.0);
    Partition p = Partition::uniform(Interval(-1.0, 2.0), 12);
    TransitionGraph g = mapcert::build_graph(ctx, p);
    CHECK(g.node_count() == 144); // all position pairs

    std::mt19937_64 rng(0xA11CE);
    std::uniform_real_distribution<double> pick(-1.0, 2.0);
    int checked = 0;
    for (int it = 0; it < 2000; ++it) {
        double x = pick(rng), y = pick(rng);
        double z = 2.0 - x - 2.0 * y * y;
        if (z < -1.0 || z > 2.0) continue;
        ++checked;
        bool found = false;
        for (std::uint32_t i : p.overlapping(Interval(x)))
            for (std::uint32_t j : p.overlapping(Interval(y)))
                for (std::uint32_t k : p.overlapping(Interval(z)))
                    if (g.has_edge(i, j, k)) found = true;
        if (!found) {
            CAPTURE(x);
            CAPTURE(y);
            CAPTURE(z);
            REQUIRE(found);
        }
    }
    CHECK(checked > 400);
}

TEST_CASE("reduction matches a from-scratch reference on random graphs") {
    std::mt19937_64 rng(0xD00D);
    for (int trial = 0; trial < 60; ++trial) {
        std::size_t n = 2 + rng() % 28;
        std::vector<Node> nodes;
        for (std::size_t k = 0; k < n; ++k) nodes.push_back({std::uint32_t(k), 0});
        std::vector<std::vector<std::uint32_t>> succ(n);
        for (std::size_t v = 0; v < n; ++v) {
            std::size_t deg = rng() % 4;
            for (std::size_t e = 0; e < deg; ++e) succ[v].push_back(std::uint32_t(rng() % n));
            std::sort(succ[v].begin(), succ[v].end());
            succ[v].erase(std::unique(succ[v].begin(), succ[v].end()), succ[v].end());
        }
        TransitionGraph g = TransitionGraph::from_adjacency(nodes, succ);
        TransitionGraph r = mapcert::reduce_graph(g);

        std::vector<std::size_t> order(n);
        for (std::size_t k = 0; k < n; ++k) order[k] = k;
        auto ref1 = slow_reduce(n, succ, order);
        std::shuffle(order.begin(), order.end(), rng);
        auto ref2 = slow_reduce(n, succ, order);
        CHECK(ref1 == ref2); // the maximal subgraph is unique

        std::set<std::size_t> got;
        for (const auto& nd : r.nodes()) got.insert(nd.i);
        CHECK(got == ref1);

        // surviving edges are exactly the original ones among survivors
        std::size_t expect_edges = 0;
        for (std::size_t v : ref1)
            for (std::uint32_t t : succ[v])
                if (ref1.count(t)) ++expect_edges;
        CHECK(r.edge_count() == expect_edges);

        // idempotent
        TransitionGraph rr = mapcert::reduce_graph(r);
        CHECK(rr.node_count() == r.node_count());
        CHECK(rr.edge_count() == r.edge_count());
    }
}

TEST_CASE("acyclic graphs reduce to nothing, cycles survive whole") {
    std::vector<Node> nodes{{0, 0}, {1, 0}, {2, 0}};
    std::vector<std::vector<std::uint32_t>> path{{1}, {2}, {}};
    CHECK(mapcert::reduce_graph(TransitionGraph::from_adjacency(nodes, path)).node_count() == 0);

    std::vector<std::vector<std::uint32_t>> loop{{1}, {2}, {0}};
    TransitionGraph r = mapcert::reduce_graph(TransitionGraph::from_adjacency(nodes, loop));
    CHECK(r.node_count() == 3);
    CHECK(r.edge_count() == 3);

    // a tail hanging off a cycle disappears, the cycle stays
    std::vector<Node> nodes4{{0, 0}, {1, 0}, {2, 0}, {3, 0}};
    std::vector<std::vector<std::uint32_t>> tail{{1}, {0}, {0}, {2}};
    TransitionGraph t = mapcert::reduce_graph(TransitionGraph::from_adjacency(nodes4, tail));
    CHECK(t.node_count() == 2);
}

TEST_CASE("cover area sums phase box areas with outward rounding") {
    MapContext ctx = quad_context(1.0);
    Partition p;
    p.domain = Interval(0.0, 1.0);
    p.cells = {Interval(0.0, 1.0)};
    std::vector<Node> nodes{{0, 0}};
    std::vector<std::vector<std::uint32_t>> succ{{0}};
    TransitionGraph g = TransitionGraph::from_adjacency(nodes, succ);
    // u-box is -s([0,1],[0,1]) = [-1,1]: area 1 x 2
    double area = mapcert::invariant_cover_area(ctx, g, p);
    CHECK(area >= 2.0);
    CHECK(area < 2.0 + 1e-9);
}

TEST_CASE("cover area is independent of the worker count") {
    MapContext ctx = quad_context(1.0);
    Partition p = Partition::uniform(Interval(-1.0, 2.0), 24);
    TransitionGraph g = mapcert::reduce_graph(mapcert::build_graph(ctx, p));
    CHECK(g.node_count() > 0);
    double a1 = mapcert::invariant_cover_area(ctx, g, p, 1);
    double a4 = mapcert::invariant_cover_area(ctx, g, p, 4);
    CHECK(a1 == a4);
}

TEST_CASE("refinement nests inside the parent cover") {
    MapContext ctx = quad_context(1.0);
    Partition p = Partition::uniform(Interval(-1.0, 2.0), 16);
    TransitionGraph g0 = mapcert::reduce_graph(mapcert::build_graph(ctx, p));
    REQUIRE(g0.node_count() > 0);
    double area0 = mapcert::invariant_cover_area(ctx, g0, p);

    auto [g1, p1] = mapcert::refine(ctx, g0, p);
    CHECK(p1.level == 1);
    CHECK(p1.nominal == 32);
    CHECK(g1.node_count() > 0);

    // every child cell lies inside a cell used by a surviving parent node
    std::set<std::uint32_t> used;
    for (const auto& nd : g0.nodes()) {
        used.insert(nd.i);
        used.insert(nd.j);
    }
    for (const auto& c : p1.cells) {
        bool inside = false;
        for (std::uint32_t pc : used)
            if (p.cells[pc].contains(c)) inside = true;
        CHECK(inside);
    }

    // surviving child pairs descend from surviving parent pairs
    auto parent_of = [&](const Interval& child) -> std::uint32_t {
        for (std::size_t k = 0; k < p.cells.size(); ++k)
            if (p.cells[k].contains(child)) return std::uint32_t(k);
        return 0xffffffff;
    };
    for (const auto& nd : g1.nodes()) {
        std::uint32_t pi = parent_of(p1.cells[nd.i]);
        std::uint32_t pj = parent_of(p1.cells[nd.j]);
        REQUIRE(pi != 0xffffffff);
        REQUIRE(pj != 0xffffffff);
        CHECK(g0.find(pi, pj) >= 0);
    }

    double area1 = mapcert::invariant_cover_area(ctx, g1, p1);
    CHECK(area1 <= area0);
    CHECK(area1 > 0.0);
}

TEST_CASE("graph text dumps round trip") {
    MapContext ctx = quad_context(1.0);
    Partition p = Partition::uniform(Interval(-1.0, 2.0), 10);
    TransitionGraph g = mapcert::reduce_graph(mapcert::build_graph(ctx, p));
    std::ostringstream os;
    mapcert::dump_graph(os, g);
    std::istringstream in(os.str());
    TransitionGraph h = mapcert::load_graph(in);
    REQUIRE(h.node_count() == g.node_count());
    CHECK(h.edge_count() == g.edge_count());
    for (std::size_t v = 0; v < g.node_count(); ++v) {
        CHECK(h.node(v) == g.node(v));
        auto a = g.successors(v);
        auto b = h.successors(v);
        REQUIRE(a.size() == b.size());
        for (std::size_t e = 0; e < a.size(); ++e) CHECK(h.node(b[e]) == g.node(a[e]));
    }
}

TEST_CASE("malformed graph text is rejected") {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return mapcert::load_graph(in);
    };
    CHECK_NOTHROW(parse("# empty\n"));
    CHECK_THROWS_AS(parse("node 0\n"), mapcert::ParseError);
    CHECK_THROWS_AS(parse("node 0 0\nnode 0 0\n"), mapcert::ParseError);
    CHECK_THROWS_AS(parse("node 0 0\nedge 0 0 5\n"), mapcert::ParseError);
    CHECK_THROWS_AS(parse("frob 1 2\n"), mapcert::ParseError);
    CHECK_THROWS_AS(parse("node -1 0\n"), mapcert::ParseError);
    CHECK_THROWS_AS(parse("edge 0 0\n"), mapcert::ParseError);
}

TEST_CASE("graph construction rejects malformed inputs") {
    std::vector<Node> unsorted{{1, 0}, {0, 0}};
    std::vector<std::vector<std::uint32_t>> two(2);
    CHECK_THROWS_AS(TransitionGraph::from_adjacency(unsorted, two), mapcert::InvariantViolation);
    std::vector<Node> dup{{0, 0}, {0, 0}};
    CHECK_THROWS_AS(TransitionGraph::from_adjacency(dup, two), mapcert::InvariantViolation);
    std::vector<Node> one{{0, 0}};
    CHECK_THROWS_AS(TransitionGraph::from_adjacency(one, two), mapcert::InvariantViolation);

    MapContext ctx = quad_context(1.0);
    Partition empty;
    empty.domain = Interval(0.0, 1.0);
    CHECK_THROWS_AS(mapcert::build_graph(ctx, empty), mapcert::InvariantViolation);

    // partitions must respect the generator's disk of definition
    std::vector<GeneratingFunction::Coefficient> c{{0, 0, Interval(1.0)}, {0, 2, Interval(1.0)}};
    MapContext narrow(GeneratingFunction(0.5, 1.6, c), Interval(-1.0, 2.0));
    Partition wide = Partition::uniform(Interval(-2.0, 0.0), 4);
    CHECK_THROWS_AS(mapcert::build_graph(narrow, wide), mapcert::OutOfDomain);
}

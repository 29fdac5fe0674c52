#include "mapcert/transition_graph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "mapcert/errors.hpp"
#include "mapcert/parallel.hpp"
#include "mapcert/root_enclosure.hpp"

namespace mapcert {

Partition Partition::uniform(const Interval& domain, int n) {
    if (n < 1) throw InvariantViolation("partition needs at least one cell");
    if (!(domain.width() > 0.0) || !std::isfinite(domain.lo()) || !std::isfinite(domain.hi()))
        throw InvariantViolation("partition domain must be a finite nondegenerate interval");
    Partition p;
    p.domain = domain;
    p.level = 0;
    p.nominal = n;
    p.cells.reserve(std::size_t(n));
    double w = domain.width();
    double prev = domain.lo();
    for (int k = 1; k <= n; ++k) {
        double e = k == n ? domain.hi() : domain.lo() + w * (double(k) / double(n));
        e = std::max(e, prev); // monotone even under endpoint rounding
        p.cells.emplace_back(prev, e);
        prev = e;
    }
    return p;
}

double Partition::min_cell_width() const {
    double w = detail::kInf;
    for (const auto& c : cells) w = std::min(w, c.width());
    return w;
}

std::vector<std::uint32_t> Partition::overlapping(const Interval& z) const {
    std::vector<std::uint32_t> out;
    // first cell whose upper end reaches z
    auto it = std::lower_bound(cells.begin(), cells.end(), z.lo(),
                               [](const Interval& c, double v) { return c.hi() < v; });
    for (; it != cells.end() && it->lo() <= z.hi(); ++it) {
        if (it->hi() >= z.lo()) out.push_back(std::uint32_t(it - cells.begin()));
    }
    return out;
}

TransitionGraph TransitionGraph::from_adjacency(std::vector<Node> nodes,
                                                const std::vector<std::vector<std::uint32_t>>& succ) {
    if (succ.size() != nodes.size()) throw InvariantViolation("adjacency size mismatch");
    if (!std::is_sorted(nodes.begin(), nodes.end()) ||
        std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end())
        throw InvariantViolation("graph nodes must be sorted and unique");
    TransitionGraph g;
    g.nodes_ = std::move(nodes);
    g.off_.assign(g.nodes_.size() + 1, 0);
    std::size_t total = 0;
    for (std::size_t k = 0; k < succ.size(); ++k) {
        total += succ[k].size();
        g.off_[k + 1] = total;
    }
    g.adj_.reserve(total);
    for (const auto& row : succ) g.adj_.insert(g.adj_.end(), row.begin(), row.end());
    return g;
}

std::ptrdiff_t TransitionGraph::find(std::uint32_t i, std::uint32_t j) const {
    Node key{i, j};
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), key);
    if (it == nodes_.end() || !(*it == key)) return -1;
    return it - nodes_.begin();
}

bool TransitionGraph::has_edge(std::uint32_t i, std::uint32_t j, std::uint32_t k) const {
    std::ptrdiff_t from = find(i, j);
    std::ptrdiff_t to = find(j, k);
    if (from < 0 || to < 0) return false;
    auto row = successors(std::size_t(from));
    return std::binary_search(row.begin(), row.end(), std::uint32_t(to));
}

std::vector<Interval> three_point_solve(const GeneratingFunction& s, const Interval& x,
                                        const Interval& y, const Interval& z_domain, double tol) {
    Interval k = s.eval(x, y);
    auto f = [&](const Interval& z) { return k + s.eval(z, y); };
    auto df = [&](const Interval& z) { return s.d1(z, y); };
    RootSearchParams p;
    p.tol = tol;
    return search_roots_1d(f, df, z_domain, p).cover();
}

namespace {

RootSearchParams z_params(const Partition& partition, const BuildOptions& opts) {
    RootSearchParams p;
    p.tol = std::max(opts.z_tol_factor * partition.min_cell_width(), 1e-14);
    p.max_depth = opts.z_max_depth;
    return p;
}

} // namespace

TransitionGraph build_graph(const MapContext& ctx, const Partition& partition,
                            const BuildOptions& opts) {
    const GeneratingFunction& s = ctx.s();
    const std::size_t n = partition.cells.size();
    if (n == 0) throw InvariantViolation("empty partition");
    if (n > 65535) throw InvariantViolation("partition too fine for a full pair build");
    for (const auto& c : partition.cells) s.require_inside(c);

    RootSearchParams zp = z_params(partition, opts);
    std::vector<TransitionGraph::Node> nodes(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            nodes[i * n + j] = {std::uint32_t(i), std::uint32_t(j)};

    std::vector<std::vector<std::uint32_t>> succ(n * n);
    parallel_for(n, opts.workers, [&](std::size_t i) {
        const Interval& xi = partition.cells[i];
        for (std::size_t j = 0; j < n; ++j) {
            const Interval& yj = partition.cells[j];
            Interval k0 = s.eval(xi, yj);
            auto f = [&](const Interval& z) { return k0 + s.eval(z, yj); };
            auto df = [&](const Interval& z) { return s.d1(z, yj); };
            RootSearch roots = search_roots_1d(f, df, partition.domain, zp);
            std::vector<std::uint32_t>& row = succ[i * n + j];
            for (const Interval& box : roots.cover())
                for (std::uint32_t k : partition.overlapping(box))
                    row.push_back(std::uint32_t(j * n + k));
            std::sort(row.begin(), row.end());
            row.erase(std::unique(row.begin(), row.end()), row.end());
        }
    });
    return TransitionGraph::from_adjacency(std::move(nodes), succ);
}

TransitionGraph reduce_graph(const TransitionGraph& g) {
    const std::size_t n = g.node_count();
    std::vector<std::size_t> out_deg(n), in_deg(n, 0);
    for (std::size_t v = 0; v < n; ++v) {
        auto row = g.successors(v);
        out_deg[v] = row.size();
        for (std::uint32_t t : row) ++in_deg[t];
    }
    // reverse adjacency, CSR
    std::vector<std::size_t> roff(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) roff[v + 1] = roff[v] + in_deg[v];
    std::vector<std::uint32_t> radj(roff[n]);
    {
        std::vector<std::size_t> cursor(roff.begin(), roff.end() - 1);
        for (std::size_t v = 0; v < n; ++v)
            for (std::uint32_t t : g.successors(v)) radj[cursor[t]++] = std::uint32_t(v);
    }
    std::vector<char> alive(n, 1);
    std::vector<std::uint32_t> queue;
    for (std::size_t v = 0; v < n; ++v)
        if (out_deg[v] == 0 || in_deg[v] == 0) {
            alive[v] = 0;
            queue.push_back(std::uint32_t(v));
        }
    while (!queue.empty()) {
        std::uint32_t v = queue.back();
        queue.pop_back();
        for (std::uint32_t t : g.successors(v))
            if (alive[t] && --in_deg[t] == 0) {
                alive[t] = 0;
                queue.push_back(t);
            }
        for (std::size_t e = roff[v]; e < roff[v + 1]; ++e) {
            std::uint32_t w = radj[e];
            if (alive[w] && --out_deg[w] == 0) {
                alive[w] = 0;
                queue.push_back(w);
            }
        }
    }
    std::vector<std::uint32_t> remap(n, 0);
    std::vector<TransitionGraph::Node> nodes;
    for (std::size_t v = 0; v < n; ++v)
        if (alive[v]) {
            remap[v] = std::uint32_t(nodes.size());
            nodes.push_back(g.node(v));
        }
    std::vector<std::vector<std::uint32_t>> succ(nodes.size());
    for (std::size_t v = 0; v < n; ++v) {
        if (!alive[v]) continue;
        auto& row = succ[remap[v]];
        for (std::uint32_t t : g.successors(v))
            if (alive[t]) row.push_back(remap[t]);
    }
    return TransitionGraph::from_adjacency(std::move(nodes), succ);
}

double invariant_cover_area(const MapContext& ctx, const TransitionGraph& g,
                            const Partition& partition, int workers) {
    const GeneratingFunction& s = ctx.s();
    const std::size_t n = g.node_count();
    if (n == 0) return 0.0;
    // fixed-size blocks summed in index order keep the result independent of
    // the worker count
    const std::size_t block = 4096;
    const std::size_t nblocks = (n + block - 1) / block;
    std::vector<Interval> partial(nblocks, Interval(0.0));
    parallel_for(nblocks, workers, [&](std::size_t b) {
        Interval acc(0.0);
        for (std::size_t v = b * block; v < std::min(n, (b + 1) * block); ++v) {
            const auto& nd = g.node(v);
            const Interval& xi = partition.cells[nd.i];
            const Interval& xj = partition.cells[nd.j];
            Interval u = -s.eval(xj, xi);
            Interval wx = Interval(xi.hi()) - Interval(xi.lo());
            Interval wu = Interval(u.hi()) - Interval(u.lo());
            acc += wx * wu;
        }
        partial[b] = acc;
    });
    Interval total(0.0);
    for (const Interval& p : partial) total += p;
    return total.hi();
}

std::pair<TransitionGraph, Partition> refine(const MapContext& ctx, const TransitionGraph& reduced,
                                             const Partition& partition, const BuildOptions& opts) {
    const GeneratingFunction& s = ctx.s();
    const std::size_t n_old = partition.cells.size();
    std::vector<char> used(n_old, 0);
    for (const auto& nd : reduced.nodes()) {
        used[nd.i] = 1;
        used[nd.j] = 1;
    }

    Partition np;
    np.domain = partition.domain;
    np.level = partition.level + 1;
    np.nominal = partition.nominal * 2;
    std::vector<std::int64_t> first_child(n_old, -1);
    for (std::size_t c = 0; c < n_old; ++c) {
        if (!used[c]) continue;
        first_child[c] = std::int64_t(np.cells.size());
        const Interval& cell = partition.cells[c];
        double m = cell.mid();
        np.cells.emplace_back(cell.lo(), m);
        np.cells.emplace_back(m, cell.hi());
    }

    // children of surviving node pairs are the only candidates
    std::vector<TransitionGraph::Node> child_nodes;
    child_nodes.reserve(reduced.node_count() * 4);
    for (const auto& nd : reduced.nodes())
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                child_nodes.push_back({std::uint32_t(first_child[nd.i] + a),
                                       std::uint32_t(first_child[nd.j] + b)});
    std::sort(child_nodes.begin(), child_nodes.end());

    auto child_index = [&](std::uint32_t i, std::uint32_t j) -> std::uint32_t {
        TransitionGraph::Node key{i, j};
        auto it = std::lower_bound(child_nodes.begin(), child_nodes.end(), key);
        return std::uint32_t(it - child_nodes.begin());
    };

    RootSearchParams zp = z_params(np, opts);
    std::vector<std::vector<std::uint32_t>> succ(child_nodes.size());
    parallel_for(reduced.node_count(), opts.workers, [&](std::size_t v) {
        const auto& nd = reduced.node(v);
        // target cells reachable from the parent, as sorted child cell indices
        std::vector<std::uint32_t> zcells;
        for (std::uint32_t t : reduced.successors(v)) {
            std::uint32_t k = reduced.node(t).j;
            zcells.push_back(std::uint32_t(first_child[k]));
            zcells.push_back(std::uint32_t(first_child[k] + 1));
        }
        std::sort(zcells.begin(), zcells.end());
        zcells.erase(std::unique(zcells.begin(), zcells.end()), zcells.end());
        if (zcells.empty()) return;
        // maximal endpoint-sharing runs
        std::vector<std::pair<std::uint32_t, std::uint32_t>> runs;
        std::uint32_t r0 = zcells.front(), prev = zcells.front();
        for (std::size_t t = 1; t <= zcells.size(); ++t) {
            bool cont = t < zcells.size() && zcells[t] == prev + 1 &&
                        np.cells[prev].hi() == np.cells[zcells[t]].lo();
            if (!cont) {
                runs.emplace_back(r0, prev);
                if (t < zcells.size()) r0 = zcells[t];
            }
            if (t < zcells.size()) prev = zcells[t];
        }
        for (int a = 0; a < 2; ++a) {
            const Interval& xi = np.cells[std::size_t(first_child[nd.i]) + a];
            for (int b = 0; b < 2; ++b) {
                const Interval& yj = np.cells[std::size_t(first_child[nd.j]) + b];
                std::uint32_t src = child_index(std::uint32_t(first_child[nd.i] + a),
                                                std::uint32_t(first_child[nd.j] + b));
                Interval k0 = s.eval(xi, yj);
                auto f = [&](const Interval& z) { return k0 + s.eval(z, yj); };
                auto df = [&](const Interval& z) { return s.d1(z, yj); };
                std::vector<std::uint32_t>& row = succ[src];
                for (const auto& run : runs) {
                    Interval zdom(np.cells[run.first].lo(), np.cells[run.second].hi());
                    RootSearch roots = search_roots_1d(f, df, zdom, zp);
                    for (const Interval& box : roots.cover())
                        for (std::uint32_t k : np.overlapping(box)) {
                            if (k < run.first || k > run.second) continue;
                            row.push_back(child_index(std::uint32_t(first_child[nd.j] + b), k));
                        }
                }
                std::sort(row.begin(), row.end());
                row.erase(std::unique(row.begin(), row.end()), row.end());
            }
        }
    });
    TransitionGraph child = TransitionGraph::from_adjacency(std::move(child_nodes), succ);
    return {reduce_graph(child), np};
}

void dump_graph(std::ostream& os, const TransitionGraph& g) {
    for (std::size_t v = 0; v < g.node_count(); ++v)
        os << "node " << g.node(v).i << ' ' << g.node(v).j << '\n';
    for (std::size_t v = 0; v < g.node_count(); ++v) {
        const auto& nd = g.node(v);
        for (std::uint32_t t : g.successors(v))
            os << "edge " << nd.i << ' ' << nd.j << ' ' << g.node(t).j << '\n';
    }
}

TransitionGraph load_graph(std::istream& in) {
    std::vector<TransitionGraph::Node> nodes;
    std::vector<std::array<std::uint32_t, 3>> edges;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string head;
        if (!(ls >> head) || head[0] == '#') continue;
        auto fail = [&](const std::string& what) {
            throw ParseError("graph line " + std::to_string(lineno) + ": " + what);
        };
        if (head == "node") {
            std::int64_t i, j;
            if (!(ls >> i >> j) || i < 0 || j < 0) fail("expected: node i j");
            nodes.push_back({std::uint32_t(i), std::uint32_t(j)});
        } else if (head == "edge") {
            std::int64_t i, j, k;
            if (!(ls >> i >> j >> k) || i < 0 || j < 0 || k < 0) fail("expected: edge i j k");
            edges.push_back({std::uint32_t(i), std::uint32_t(j), std::uint32_t(k)});
        } else {
            fail("unknown directive " + head);
        }
    }
    std::sort(nodes.begin(), nodes.end());
    if (std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end())
        throw ParseError("duplicate node line");
    auto index_of = [&](std::uint32_t i, std::uint32_t j) -> std::uint32_t {
        TransitionGraph::Node key{i, j};
        auto it = std::lower_bound(nodes.begin(), nodes.end(), key);
        if (it == nodes.end() || !(*it == key)) throw ParseError("edge references missing node");
        return std::uint32_t(it - nodes.begin());
    };
    std::vector<std::vector<std::uint32_t>> succ(nodes.size());
    for (const auto& e : edges) succ[index_of(e[0], e[1])].push_back(index_of(e[1], e[2]));
    for (auto& row : succ) {
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
    }
    return TransitionGraph::from_adjacency(std::move(nodes), succ);
}

} // namespace mapcert

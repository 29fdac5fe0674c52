#include "mapcert/cycle_search.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>

#include "mapcert/errors.hpp"
#include "mapcert/parallel.hpp"

namespace mapcert {

namespace {

TransitionGraph induced(const TransitionGraph& g, const std::vector<char>& keep) {
    std::vector<std::uint32_t> remap(g.node_count());
    std::vector<TransitionGraph::Node> nodes;
    for (std::size_t v = 0; v < g.node_count(); ++v)
        if (keep[v]) {
            remap[v] = std::uint32_t(nodes.size());
            nodes.push_back(g.node(v));
        }
    std::vector<std::vector<std::uint32_t>> succ(nodes.size());
    for (std::size_t v = 0; v < g.node_count(); ++v) {
        if (!keep[v]) continue;
        auto& row = succ[remap[v]];
        for (std::uint32_t t : g.successors(v))
            if (keep[t]) row.push_back(remap[t]);
    }
    return TransitionGraph::from_adjacency(std::move(nodes), succ);
}

// iterative Tarjan
std::vector<std::int64_t> strongly_connected(const TransitionGraph& g, std::size_t& comp_count) {
    const std::size_t n = g.node_count();
    std::vector<std::int64_t> comp(n, -1), idx(n, -1), low(n, 0);
    std::vector<std::uint32_t> stack;
    std::vector<char> on_stack(n, 0);
    struct Frame {
        std::uint32_t v;
        std::size_t next;
    };
    std::vector<Frame> frames;
    std::int64_t counter = 0;
    comp_count = 0;
    for (std::size_t root = 0; root < n; ++root) {
        if (idx[root] >= 0) continue;
        frames.push_back({std::uint32_t(root), 0});
        idx[root] = low[root] = counter++;
        stack.push_back(std::uint32_t(root));
        on_stack[root] = 1;
        while (!frames.empty()) {
            Frame& f = frames.back();
            auto row = g.successors(f.v);
            if (f.next < row.size()) {
                std::uint32_t w = row[f.next++];
                if (idx[w] < 0) {
                    idx[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    frames.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], idx[w]);
                }
            } else {
                std::uint32_t v = f.v;
                frames.pop_back();
                if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
                if (low[v] == idx[v]) {
                    while (true) {
                        std::uint32_t w = stack.back();
                        stack.pop_back();
                        on_stack[w] = 0;
                        comp[w] = std::int64_t(comp_count);
                        if (w == v) break;
                    }
                    ++comp_count;
                }
            }
        }
    }
    return comp;
}

// gcd of cycle lengths per component; 0 when the component carries no cycle
std::vector<std::int64_t> component_periods(const TransitionGraph& g,
                                            const std::vector<std::int64_t>& comp,
                                            std::size_t comp_count) {
    const std::size_t n = g.node_count();
    std::vector<std::int64_t> period(comp_count, 0);
    std::vector<std::int64_t> lev(n, -1);
    std::vector<std::uint32_t> order;
    std::vector<char> seeded(comp_count, 0);
    order.reserve(n);
    for (std::size_t v = 0; v < n; ++v) {
        std::size_t c = std::size_t(comp[v]);
        if (seeded[c]) continue;
        seeded[c] = 1;
        lev[v] = 0;
        order.clear();
        order.push_back(std::uint32_t(v));
        for (std::size_t t = 0; t < order.size(); ++t) {
            std::uint32_t a = order[t];
            for (std::uint32_t b : g.successors(a)) {
                if (comp[b] != comp[v]) continue;
                if (lev[b] < 0) {
                    lev[b] = lev[a] + 1;
                    order.push_back(b);
                }
            }
        }
        for (std::uint32_t a : order)
            for (std::uint32_t b : g.successors(a)) {
                if (comp[b] != comp[v]) continue;
                std::int64_t d = lev[a] + 1 - lev[b];
                period[c] = std::gcd(period[c], d);
            }
        period[c] = std::llabs(period[c]);
    }
    return period;
}

// rows-by-words boolean matrix
struct BitMatrix {
    std::size_t n = 0, words = 0;
    std::vector<std::uint64_t> bits;

    explicit BitMatrix(std::size_t n_) : n(n_), words((n_ + 63) / 64), bits(n_ * words, 0) {}
    void set(std::size_t r, std::size_t c) { bits[r * words + c / 64] |= 1ull << (c % 64); }
    bool get(std::size_t r, std::size_t c) const {
        return (bits[r * words + c / 64] >> (c % 64)) & 1ull;
    }
    const std::uint64_t* row(std::size_t r) const { return bits.data() + r * words; }
    std::uint64_t* row(std::size_t r) { return bits.data() + r * words; }
};

BitMatrix bool_mul(const BitMatrix& a, const BitMatrix& b) {
    BitMatrix c(a.n);
    for (std::size_t r = 0; r < a.n; ++r) {
        const std::uint64_t* ar = a.row(r);
        std::uint64_t* cr = c.row(r);
        for (std::size_t w = 0; w < a.words; ++w) {
            std::uint64_t bitsw = ar[w];
            while (bitsw) {
                std::size_t t = w * 64 + std::size_t(std::countr_zero(bitsw));
                bitsw &= bitsw - 1;
                const std::uint64_t* br = b.row(t);
                for (std::size_t k = 0; k < a.words; ++k) cr[k] |= br[k];
            }
        }
    }
    return c;
}

std::vector<char> exact_walk_diag(const TransitionGraph& g, int n) {
    BitMatrix a(g.node_count());
    for (std::size_t v = 0; v < g.node_count(); ++v)
        for (std::uint32_t t : g.successors(v)) a.set(v, t);
    // binary exponentiation
    BitMatrix r(0);
    bool have = false;
    BitMatrix base = a;
    int e = n;
    while (e > 0) {
        if (e & 1) {
            r = have ? bool_mul(r, base) : base;
            have = true;
        }
        e >>= 1;
        if (e > 0) base = bool_mul(base, base);
    }
    std::vector<char> keep(g.node_count(), 0);
    for (std::size_t v = 0; v < g.node_count(); ++v) keep[v] = r.get(v, v) ? 1 : 0;
    return keep;
}

} // namespace

TransitionGraph period_subgraph(const TransitionGraph& g, int n, std::size_t exact_limit) {
    if (n < 1) throw InvariantViolation("period must be positive");
    TransitionGraph cur = g;
    // peel nodes whose component period cannot divide n, to a fixed point
    while (cur.node_count() > 0) {
        std::size_t comp_count = 0;
        auto comp = strongly_connected(cur, comp_count);
        auto period = component_periods(cur, comp, comp_count);
        std::vector<char> keep(cur.node_count(), 0);
        bool changed = false;
        for (std::size_t v = 0; v < cur.node_count(); ++v) {
            std::int64_t p = period[std::size_t(comp[v])];
            keep[v] = p > 0 && n % p == 0;
            if (!keep[v]) changed = true;
        }
        if (!changed) break;
        cur = induced(cur, keep);
    }
    if (cur.node_count() > 0 && cur.node_count() <= exact_limit) {
        auto keep = exact_walk_diag(cur, n);
        bool changed = false;
        for (char k : keep)
            if (!k) changed = true;
        if (changed) cur = induced(cur, keep);
    }
    return cur;
}

namespace {

bool lex_min_rotation(const std::vector<std::uint32_t>& seq, std::uint32_t u) {
    const int n = int(seq.size());
    for (int start = 1; start < n; ++start) {
        if (seq[std::size_t(start)] != u) continue;
        for (int t = 0; t < n; ++t) {
            std::uint32_t a = seq[std::size_t((start + t) % n)];
            std::uint32_t b = seq[std::size_t(t)];
            if (a != b) {
                if (a < b) return false;
                break;
            }
        }
    }
    return true;
}

int primitive_period(const std::vector<std::uint32_t>& seq) {
    const int n = int(seq.size());
    for (int d = 1; d <= n; ++d) {
        if (n % d != 0) continue;
        bool ok = true;
        for (int t = 0; t < n && ok; ++t) ok = seq[std::size_t(t)] == seq[std::size_t((t + d) % n)];
        if (ok) return d;
    }
    return n;
}

} // namespace

CycleStats enumerate_cycles(const TransitionGraph& g, int n,
                            const std::function<void(const CandidateCycle&)>& sink,
                            const EnumerateOptions& opts) {
    if (n < 1) throw InvariantViolation("period must be positive");
    CycleStats stats;
    const std::size_t nv = g.node_count();
    if (nv == 0) return stats;

    // reverse adjacency for the distance prune
    std::vector<std::size_t> roff(nv + 1, 0);
    for (std::size_t v = 0; v < nv; ++v)
        for (std::uint32_t t : g.successors(v)) ++roff[t + 1];
    for (std::size_t v = 0; v < nv; ++v) roff[v + 1] += roff[v];
    std::vector<std::uint32_t> radj(roff[nv]);
    {
        std::vector<std::size_t> cursor(roff.begin(), roff.end() - 1);
        for (std::size_t v = 0; v < nv; ++v)
            for (std::uint32_t t : g.successors(v)) radj[cursor[t]++] = std::uint32_t(v);
    }

    std::atomic<std::int64_t> emitted{0}, walks{0};
    std::atomic<bool> flagged{false};
    const std::int64_t budget = opts.max_cycles;
    constexpr std::uint8_t kUnreach = 0xff;

    parallel_for(nv, opts.workers, [&](std::size_t su) {
        if (flagged.load(std::memory_order_relaxed)) return;
        const std::uint32_t u = std::uint32_t(su);
        // shortest path back to u through nodes >= u, capped at n
        std::vector<std::uint8_t> dist(nv, kUnreach);
        std::vector<std::uint32_t> frontier{u}, next;
        dist[u] = 0;
        for (int d = 1; d <= n && !frontier.empty(); ++d) {
            next.clear();
            for (std::uint32_t b : frontier)
                for (std::size_t e = roff[b]; e < roff[b + 1]; ++e) {
                    std::uint32_t a = radj[e];
                    if (a < u || dist[a] != kUnreach) continue;
                    dist[a] = std::uint8_t(d);
                    next.push_back(a);
                }
            frontier.swap(next);
        }

        std::vector<std::uint32_t> seq(static_cast<std::size_t>(n));
        seq[0] = u;
        CandidateCycle cand;

        auto emit = [&]() {
            if (!lex_min_rotation(seq, u)) return;
            std::int64_t id = emitted.fetch_add(1, std::memory_order_relaxed);
            if (budget >= 0 && id >= budget) {
                flagged.store(true, std::memory_order_relaxed);
                return;
            }
            walks.fetch_add(primitive_period(seq), std::memory_order_relaxed);
            cand.cells.resize(std::size_t(n));
            for (int t = 0; t < n; ++t) cand.cells[std::size_t(t)] = g.node(seq[std::size_t(t)]).i;
            sink(cand);
        };

        auto dfs = [&](auto&& self, std::uint32_t v, int depth) -> void {
            if (flagged.load(std::memory_order_relaxed)) return;
            if (depth == n) {
                auto row = g.successors(v);
                if (std::binary_search(row.begin(), row.end(), u)) emit();
                return;
            }
            for (std::uint32_t w : g.successors(v)) {
                if (w < u) continue;
                if (dist[w] == kUnreach || int(dist[w]) > n - depth) continue;
                seq[std::size_t(depth)] = w;
                self(self, w, depth + 1);
            }
        };
        dfs(dfs, u, 1);
    });

    stats.resource_limited = flagged.load();
    std::int64_t total = emitted.load();
    stats.canonical_count = budget >= 0 ? std::min(total, budget) : total;
    stats.closed_walks = walks.load();
    return stats;
}

} // namespace mapcert

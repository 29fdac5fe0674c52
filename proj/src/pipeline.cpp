#include "mapcert/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>

#include "mapcert/errors.hpp"
#include "mapcert/parallel.hpp"

namespace mapcert {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    const char* p = v.c_str();
    char* end = nullptr;
    double d = std::strtod(p, &end);
    if (end == p || *end != '\0' || std::isnan(d))
        throw ParseError(key + ": cannot read a number from \"" + v + "\"");
    return d;
}

long long parse_int(const std::string& key, const std::string& v) {
    const char* p = v.c_str();
    char* end = nullptr;
    long long n = std::strtoll(p, &end, 10);
    if (end == p || *end != '\0')
        throw ParseError(key + ": cannot read an integer from \"" + v + "\"");
    return n;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ParseError(key + ": expected true or false, got \"" + v + "\"");
}

} // namespace

void RunConfig::apply(const std::string& key, const std::string& value) {
    if (key == "map") map_file = value;
    else if (key == "domain_lo") domain_lo = parse_double(key, value);
    else if (key == "domain_hi") domain_hi = parse_double(key, value);
    else if (key == "y_lo") y_lo = parse_double(key, value);
    else if (key == "y_hi") y_hi = parse_double(key, value);
    else if (key == "nominal") nominal = int(parse_int(key, value));
    else if (key == "levels") levels = int(parse_int(key, value));
    else if (key == "max_period") max_period = int(parse_int(key, value));
    else if (key == "bootstrap") bootstrap = parse_bool(key, value);
    else if (key == "bootstrap_cells") bootstrap_cells = int(parse_int(key, value));
    else if (key == "bootstrap_rounds") bootstrap_rounds = int(parse_int(key, value));
    else if (key == "workers") workers = int(parse_int(key, value));
    else if (key == "max_cycles") max_cycles = parse_int(key, value);
    else if (key == "exact_filter_limit") exact_filter_limit = std::size_t(parse_int(key, value));
    else if (key == "max_splits") max_splits = int(parse_int(key, value));
    else if (key == "split_floor") split_floor = parse_double(key, value);
    else if (key == "newton_sweeps") newton_sweeps = int(parse_int(key, value));
    else if (key == "krawczyk_iters") krawczyk_iters = int(parse_int(key, value));
    else if (key == "output_dir") output_dir = value;
    else throw ParseError("unknown configuration key \"" + key + "\"");
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file " + path);
    RunConfig cfg;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected key=value");
        cfg.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

GeneratingFunction load_map(const RunConfig& cfg) {
    const std::string& m = cfg.map_file;
    if (m.rfind("henon:", 0) == 0)
        return GeneratingFunction::henon(parse_double("map", m.substr(6)));
    return GeneratingFunction::load(m);
}

MapContext make_context(const RunConfig& cfg) {
    double ylo = cfg.y_lo.value_or(cfg.domain_lo);
    double yhi = cfg.y_hi.value_or(cfg.domain_hi);
    return MapContext(load_map(cfg), Interval(ylo, yhi));
}

Interval bootstrap_domain(const MapContext& ctx, const Interval& domain, int cells,
                          int max_rounds, int workers) {
    Interval cur = domain;
    BuildOptions bo;
    bo.workers = workers;
    for (int round = 0; round < max_rounds; ++round) {
        Partition p = Partition::uniform(cur, cells);
        TransitionGraph g = reduce_graph(build_graph(ctx, p, bo));
        if (g.node_count() == 0) throw EmptyInvariantSet();
        std::vector<char> used(p.cells.size(), 0);
        for (const auto& nd : g.nodes()) used[nd.i] = 1;
        std::optional<Interval> h;
        for (std::size_t i = 0; i < used.size(); ++i)
            if (used[i]) h = h ? hull(*h, p.cells[i]) : p.cells[i];
        if (h->lo() == cur.lo() && h->hi() == cur.hi()) break;
        cur = *h;
    }
    return cur;
}

MeasureStudy run_measure_study(const MapContext& ctx, const RunConfig& cfg) {
    MeasureStudy out;
    Interval dom(cfg.domain_lo, cfg.domain_hi);
    if (cfg.bootstrap)
        dom = bootstrap_domain(ctx, dom, cfg.bootstrap_cells, cfg.bootstrap_rounds, cfg.workers);
    out.domain = dom;

    BuildOptions bo;
    bo.workers = cfg.workers;
    Partition part = Partition::uniform(dom, cfg.nominal);
    TransitionGraph red = reduce_graph(build_graph(ctx, part, bo));
    MeasureRow row;
    row.nominal = part.nominal;
    row.nodes = red.node_count();
    row.edges = red.edge_count();
    row.area = invariant_cover_area(ctx, red, part, cfg.workers);
    out.rows.push_back(row);

    for (int level = 0; level < cfg.levels; ++level) {
        if (red.node_count() == 0) break;
        auto next = refine(ctx, red, part, bo);
        red = std::move(next.first);
        part = std::move(next.second);
        MeasureRow r;
        r.nominal = part.nominal;
        r.nodes = red.node_count();
        r.edges = red.edge_count();
        r.area = invariant_cover_area(ctx, red, part, cfg.workers);
        r.improvement = r.area > 0.0 ? out.rows.back().area / r.area : 0.0;
        out.rows.push_back(r);
    }
    return out;
}

void write_measure_csv(std::ostream& os, const MeasureStudy& m) {
    os << "nominal,nodes,edges,area,improvement\n";
    char buf[160];
    for (std::size_t k = 0; k < m.rows.size(); ++k) {
        const MeasureRow& r = m.rows[k];
        if (k == 0)
            std::snprintf(buf, sizeof buf, "%ld,%zu,%zu,%.4g,-\n", r.nominal, r.nodes, r.edges,
                          r.area);
        else
            std::snprintf(buf, sizeof buf, "%ld,%zu,%zu,%.4g,%.2f\n", r.nominal, r.nodes, r.edges,
                          r.area, r.improvement);
        os << buf;
    }
}

std::size_t PeriodReport::hyperbolic_primitive() const {
    std::size_t c = 0;
    for (const auto& o : orbits)
        if (o.primitive && o.kind == Classification::ProvenHyperbolic) ++c;
    return c;
}

std::size_t PeriodReport::elliptic() const {
    std::size_t c = 0;
    for (const auto& o : orbits)
        if (o.kind == Classification::EllipticCandidate) ++c;
    return c;
}

std::size_t PeriodReport::inconclusive() const {
    std::size_t c = 0;
    for (const auto& o : orbits)
        if (o.kind == Classification::Inconclusive) ++c;
    return c;
}

bool CertificationReport::clean() const {
    for (const auto& p : periods)
        if (p.resource_limited || p.elliptic() > 0 || p.inconclusive() > 0) return false;
    return true;
}

int CertificationReport::largest_certified_period() const {
    int best = 0;
    for (const auto& p : periods) {
        if (p.resource_limited || p.elliptic() > 0 || p.inconclusive() > 0) break;
        best = p.period;
    }
    return best;
}

namespace {

// first rotation r with a[t] meeting b[(t+r) mod n] for every t, else -1
int aligning_rotation(const std::vector<Interval>& a, const std::vector<Interval>& b) {
    const int n = int(a.size());
    for (int r = 0; r < n; ++r) {
        bool ok = true;
        for (int t = 0; t < n && ok; ++t)
            ok = intersect(a[std::size_t(t)], b[std::size_t((t + r) % n)]).has_value();
        if (ok) return r;
    }
    return -1;
}

bool self_overlap_at(const std::vector<Interval>& a, int r) {
    const int n = int(a.size());
    for (int t = 0; t < n; ++t)
        if (!intersect(a[std::size_t(t)], a[std::size_t((t + r) % n)])) return false;
    return true;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int v) {
        while (parent[std::size_t(v)] != v) {
            parent[std::size_t(v)] = parent[std::size_t(parent[std::size_t(v)])];
            v = parent[std::size_t(v)];
        }
        return v;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::size_t(std::max(a, b))] = std::min(a, b);
    }
};

bool positions_less(const std::vector<Interval>& a, const std::vector<Interval>& b) {
    for (std::size_t t = 0; t < a.size() && t < b.size(); ++t) {
        if (a[t].lo() != b[t].lo()) return a[t].lo() < b[t].lo();
        if (a[t].hi() != b[t].hi()) return a[t].hi() < b[t].hi();
    }
    return a.size() < b.size();
}

} // namespace

CertificationReport run_certification(const MapContext& ctx, const RunConfig& cfg) {
    CertificationReport report;
    report.map_name = cfg.map_file;
    Interval dom(cfg.domain_lo, cfg.domain_hi);
    if (cfg.bootstrap)
        dom = bootstrap_domain(ctx, dom, cfg.bootstrap_cells, cfg.bootstrap_rounds, cfg.workers);
    report.domain = dom;

    BuildOptions bo;
    bo.workers = cfg.workers;
    Partition part = Partition::uniform(dom, cfg.nominal);
    TransitionGraph red = reduce_graph(build_graph(ctx, part, bo));
    report.nominal = part.nominal;
    report.nodes = red.node_count();
    report.edges = red.edge_count();

    RefineOptions ro;
    ro.newton_sweeps = cfg.newton_sweeps;
    ro.krawczyk_iters = cfg.krawczyk_iters;
    CertifyOptions co;
    co.max_splits = cfg.max_splits;
    co.split_floor = cfg.split_floor;
    co.refine = ro;

    for (int n = 1; n <= cfg.max_period; ++n) {
        PeriodReport pr;
        pr.period = n;
        TransitionGraph sub = period_subgraph(red, n, cfg.exact_filter_limit);
        pr.nodes = sub.node_count();
        pr.edges = sub.edge_count();

        std::vector<CandidateCycle> cands;
        std::mutex mx;
        EnumerateOptions eo;
        eo.workers = cfg.workers;
        eo.max_cycles = cfg.max_cycles;
        CycleStats stats = enumerate_cycles(
            sub, n,
            [&](const CandidateCycle& c) {
                std::lock_guard<std::mutex> lock(mx);
                cands.push_back(c);
            },
            eo);
        pr.closed_walks = stats.closed_walks;
        pr.candidates = stats.canonical_count;
        pr.resource_limited = stats.resource_limited;
        std::sort(cands.begin(), cands.end(),
                  [](const CandidateCycle& a, const CandidateCycle& b) { return a.cells < b.cells; });

        CycleSystem sys(ctx.s(), n);
        std::vector<OrbitEnclosure> encs(cands.size());
        parallel_for(cands.size(), cfg.workers, [&](std::size_t k) {
            std::vector<Interval> seed;
            seed.reserve(cands[k].cells.size());
            for (std::uint32_t cell : cands[k].cells) seed.push_back(part.cells[cell]);
            encs[k] = refine_orbit(sys, std::move(seed), ro);
        });

        std::vector<std::size_t> alive;
        for (std::size_t k = 0; k < encs.size(); ++k)
            if (!encs[k].discarded) alive.push_back(k);
        pr.surviving_candidates = std::int64_t(alive.size());

        // overlapping survivors describe the same orbit; group and hull them
        UnionFind uf(alive.size());
        for (std::size_t a = 0; a < alive.size(); ++a)
            for (std::size_t b = a + 1; b < alive.size(); ++b)
                if (aligning_rotation(encs[alive[a]].positions, encs[alive[b]].positions) >= 0)
                    uf.unite(int(a), int(b));
        std::vector<std::vector<Interval>> merged;
        {
            std::vector<int> root_slot(alive.size(), -1);
            for (std::size_t a = 0; a < alive.size(); ++a) {
                int r = uf.find(int(a));
                if (root_slot[std::size_t(r)] < 0) {
                    root_slot[std::size_t(r)] = int(merged.size());
                    merged.push_back(encs[alive[a]].positions);
                } else {
                    std::vector<Interval>& rep = merged[std::size_t(root_slot[std::size_t(r)])];
                    const std::vector<Interval>& add = encs[alive[a]].positions;
                    int rot = aligning_rotation(rep, add);
                    if (rot < 0) rot = 0;
                    for (int t = 0; t < n; ++t)
                        rep[std::size_t(t)] =
                            hull(rep[std::size_t(t)], add[std::size_t((t + rot) % n)]);
                }
            }
        }

        std::vector<std::optional<OrbitRecord>> recs(merged.size());
        parallel_for(merged.size(), cfg.workers, [&](std::size_t k) {
            OrbitEnclosure enc = refine_orbit(sys, merged[k], ro);
            if (enc.discarded) return;
            CycleVerdict v = certify_cycle(ctx, sys, enc.positions, co);
            if (v.discarded) return;
            OrbitRecord rec;
            rec.period = n;
            rec.positions = std::move(enc.positions);
            rec.kind = v.kind;
            rec.trace = v.trace;
            rec.splits_used = v.splits_used;
            rec.degenerate_split = v.degenerate_split;
            rec.unique = enc.unique;
            for (int d = 1; d < n; ++d) {
                if (n % d != 0) continue;
                if (self_overlap_at(rec.positions, d)) {
                    rec.primitive = false;
                    break;
                }
            }
            recs[k] = std::move(rec);
        });

        for (auto& r : recs)
            if (r) pr.orbits.push_back(std::move(*r));
        std::sort(pr.orbits.begin(), pr.orbits.end(),
                  [](const OrbitRecord& a, const OrbitRecord& b) {
                      return positions_less(a.positions, b.positions);
                  });
        for (std::size_t k = 0; k < pr.orbits.size(); ++k) pr.orbits[k].cycle_id = int(k);
        report.periods.push_back(std::move(pr));
    }
    return report;
}

void write_cycles_csv(std::ostream& os, const CertificationReport& r) {
    os << "period,nodes,edges,closed_walks,closed_walks_over_period,candidates,"
          "surviving_candidates,orbits,hyperbolic,elliptic,inconclusive,resource_limited\n";
    for (const auto& p : r.periods) {
        os << p.period << ',' << p.nodes << ',' << p.edges << ',' << p.closed_walks << ','
           << p.closed_walks / p.period << ',' << p.candidates << ',' << p.surviving_candidates
           << ',' << p.orbits.size() << ',' << p.hyperbolic_primitive() << ',' << p.elliptic()
           << ',' << p.inconclusive() << ',' << (p.resource_limited ? 1 : 0) << '\n';
    }
}

void write_verdicts_csv(std::ostream& os, const CertificationReport& r) {
    os << "period,cycle_id,classification,trace_lo,trace_hi,splits_used,primitive,unique\n";
    char buf[200];
    for (const auto& p : r.periods)
        for (const auto& o : p.orbits) {
            std::snprintf(buf, sizeof buf, "%d,%d,%s,%.17g,%.17g,%d,%d,%d\n", o.period, o.cycle_id,
                          to_string(o.kind), o.trace.lo(), o.trace.hi(), o.splits_used,
                          o.primitive ? 1 : 0, o.unique ? 1 : 0);
            os << buf;
        }
}

void write_summary(std::ostream& os, const CertificationReport& r) {
    char buf[256];
    os << "map: " << r.map_name << '\n';
    std::snprintf(buf, sizeof buf, "domain: [%.17g, %.17g]\n", r.domain.lo(), r.domain.hi());
    os << buf;
    os << "nominal discretization: " << r.nominal << '\n';
    os << "reduced cover: " << r.nodes << " nodes, " << r.edges << " edges\n";
    std::size_t elliptic = 0, open = 0;
    std::vector<int> limited;
    for (const auto& p : r.periods) {
        std::snprintf(buf, sizeof buf,
                      "period %d: %zu orbit enclosure(s), %zu hyperbolic primitive, %zu elliptic "
                      "candidate(s), %zu inconclusive%s\n",
                      p.period, p.orbits.size(), p.hyperbolic_primitive(), p.elliptic(),
                      p.inconclusive(), p.resource_limited ? " [cycle budget exceeded]" : "");
        os << buf;
        elliptic += p.elliptic();
        open += p.inconclusive();
        if (p.resource_limited) limited.push_back(p.period);
    }
    int certified = r.largest_certified_period();
    os << "largest fully certified period: " << certified << '\n';
    if (r.clean() && !r.periods.empty()) {
        os << "every periodic orbit of period at most " << certified
           << " inside the domain is hyperbolic\n";
    } else if (!r.periods.empty()) {
        os << "hyperbolicity NOT established through period "
           << r.periods.back().period << ":\n";
        if (elliptic > 0) os << "  elliptic candidates: " << elliptic << '\n';
        if (open > 0) os << "  inconclusive orbits: " << open << '\n';
        if (!limited.empty()) {
            os << "  cycle budget exceeded at period(s):";
            for (int n : limited) os << ' ' << n;
            os << '\n';
        }
    }
}

void write_cover_svg(std::ostream& os, const MapContext& ctx, const TransitionGraph& g,
                     const Partition& p, std::span<const IntervalBox> marks) {
    const double W = 900.0, H = 600.0, pad = 40.0;
    std::vector<IntervalBox> boxes;
    boxes.reserve(g.node_count());
    for (std::size_t v = 0; v < g.node_count(); ++v) {
        const auto& nd = g.node(v);
        Interval x = p.cells[nd.i];
        Interval u = Interval(0.0) - ctx.s().eval(p.cells[nd.j], x);
        boxes.push_back({x, u});
    }
    double xlo = p.domain.lo(), xhi = p.domain.hi();
    double ulo = 0.0, uhi = 0.0;
    bool have = false;
    for (const auto& b : boxes) {
        if (!have) {
            ulo = b.u.lo();
            uhi = b.u.hi();
            have = true;
        } else {
            ulo = std::min(ulo, b.u.lo());
            uhi = std::max(uhi, b.u.hi());
        }
    }
    for (const auto& m : marks) {
        xlo = std::min(xlo, m.x.lo());
        xhi = std::max(xhi, m.x.hi());
        if (!have) {
            ulo = m.u.lo();
            uhi = m.u.hi();
            have = true;
        } else {
            ulo = std::min(ulo, m.u.lo());
            uhi = std::max(uhi, m.u.hi());
        }
    }
    if (!have) {
        ulo = -1.0;
        uhi = 1.0;
    }
    if (xhi <= xlo) xhi = xlo + 1.0;
    if (uhi <= ulo) uhi = ulo + 1.0;
    double sx = (W - 2 * pad) / (xhi - xlo);
    double su = (H - 2 * pad) / (uhi - ulo);
    auto px = [&](double x) { return pad + (x - xlo) * sx; };
    auto pu = [&](double u) { return H - pad - (u - ulo) * su; };

    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
                  "viewBox=\"0 0 %g %g\">\n",
                  W, H, W, H);
    os << buf;
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<g fill=\"#9ec7e0\" fill-opacity=\"0.55\" stroke=\"#26567a\" stroke-width=\"0.3\">\n";
    for (const auto& b : boxes) {
        double x0 = px(b.x.lo()), x1 = px(b.x.hi());
        double y0 = pu(b.u.hi()), y1 = pu(b.u.lo());
        std::snprintf(buf, sizeof buf,
                      "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\"/>\n", x0, y0,
                      std::max(x1 - x0, 0.1), std::max(y1 - y0, 0.1));
        os << buf;
    }
    os << "</g>\n<g fill=\"#c0392b\" stroke=\"#7b241c\" stroke-width=\"0.5\">\n";
    for (const auto& m : marks) {
        double x0 = px(m.x.lo()), x1 = px(m.x.hi());
        double y0 = pu(m.u.hi()), y1 = pu(m.u.lo());
        double w = std::max(x1 - x0, 3.0), h = std::max(y1 - y0, 3.0);
        std::snprintf(buf, sizeof buf,
                      "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\"/>\n",
                      (x0 + x1 - w) / 2, (y0 + y1 - h) / 2, w, h);
        os << buf;
    }
    os << "</g>\n";
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" "
                  "stroke=\"#444\" stroke-width=\"1\"/>\n",
                  pad, pad, W - 2 * pad, H - 2 * pad);
    os << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" fill=\"#444\">x in [%.6g, %.6g],  "
                  "u in [%.6g, %.6g]</text>\n",
                  pad, H - pad / 3, xlo, xhi, ulo, uhi);
    os << buf;
    os << "</svg>\n";
}

} // namespace mapcert

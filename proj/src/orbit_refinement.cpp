#include "mapcert/orbit_refinement.hpp"

#include <cmath>
#include <cstdlib>
#include <optional>

#include "mapcert/errors.hpp"

namespace mapcert {

CycleSystem::CycleSystem(const GeneratingFunction& s, int n) : s_(&s), n_(n) {
    if (n < 1) throw InvariantViolation("cycle system needs a positive period");
}

std::vector<Interval> CycleSystem::residual(std::span<const Interval> x) const {
    const int n = n_;
    if (int(x.size()) != n) throw InvariantViolation("residual: wrong orbit length");
    std::vector<Interval> z;
    z.reserve(std::size_t(n));
    if (n == 1) {
        z.push_back(Interval(2.0) * s_->eval(x[0], x[0]));
        return z;
    }
    for (int i = 0; i < n; ++i) {
        const Interval& xm = x[std::size_t((i + n - 1) % n)];
        const Interval& xp = x[std::size_t((i + 1) % n)];
        z.push_back(s_->eval(xm, x[std::size_t(i)]) + s_->eval(xp, x[std::size_t(i)]));
    }
    return z;
}

std::vector<Interval> CycleSystem::jacobian(std::span<const Interval> x) const {
    const int n = n_;
    if (int(x.size()) != n) throw InvariantViolation("jacobian: wrong orbit length");
    std::vector<Interval> j(std::size_t(n) * std::size_t(n), Interval(0.0));
    auto at = [&](int r, int c) -> Interval& { return j[std::size_t(r) * std::size_t(n) + std::size_t(c)]; };
    for (int i = 0; i < n; ++i) {
        int im = (i + n - 1) % n, ip = (i + 1) % n;
        const Interval& xi = x[std::size_t(i)];
        at(i, i) = at(i, i) + s_->d2(x[std::size_t(im)], xi) + s_->d2(x[std::size_t(ip)], xi);
    }
    if (s_->d1_mirror_symmetric()) {
        // d1(a,b) and d1(b,a) enclose the same function; one evaluation feeds
        // the entry and its mirror
        for (int i = 0; i < n; ++i) {
            int im = (i + n - 1) % n;
            Interval e = s_->d1(x[std::size_t(im)], x[std::size_t(i)]);
            at(i, im) = at(i, im) + e;
            at(im, i) = at(im, i) + e;
        }
    } else {
        for (int i = 0; i < n; ++i) {
            int im = (i + n - 1) % n, ip = (i + 1) % n;
            const Interval& xi = x[std::size_t(i)];
            at(i, im) = at(i, im) + s_->d1(x[std::size_t(im)], xi);
            at(i, ip) = at(i, ip) + s_->d1(x[std::size_t(ip)], xi);
        }
    }
    return j;
}

namespace {

double total_width(const std::vector<Interval>& x) {
    double t = 0.0;
    for (const Interval& v : x) t += v.width();
    return t;
}

// Gauss-Jordan with partial pivoting; empty on singular or non-finite input
std::optional<std::vector<double>> invert(std::vector<double> a, int n) {
    for (double v : a)
        if (!std::isfinite(v)) return std::nullopt;
    std::vector<double> inv(std::size_t(n) * std::size_t(n), 0.0);
    for (int i = 0; i < n; ++i) inv[std::size_t(i) * std::size_t(n) + std::size_t(i)] = 1.0;
    auto row = [&](std::vector<double>& m, int r) { return m.data() + std::size_t(r) * std::size_t(n); };
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::fabs(row(a, r)[c]) > std::fabs(row(a, piv)[c])) piv = r;
        double p = row(a, piv)[c];
        if (!std::isfinite(p) || std::fabs(p) < 1e-300) return std::nullopt;
        if (piv != c)
            for (int k = 0; k < n; ++k) {
                std::swap(row(a, piv)[k], row(a, c)[k]);
                std::swap(row(inv, piv)[k], row(inv, c)[k]);
            }
        for (int k = 0; k < n; ++k) {
            row(a, c)[k] /= p;
            row(inv, c)[k] /= p;
        }
        for (int r = 0; r < n; ++r) {
            if (r == c) continue;
            double f = row(a, r)[c];
            if (f == 0.0) continue;
            for (int k = 0; k < n; ++k) {
                row(a, r)[k] -= f * row(a, c)[k];
                row(inv, r)[k] -= f * row(inv, c)[k];
            }
        }
    }
    for (double v : inv)
        if (!std::isfinite(v)) return std::nullopt;
    return inv;
}

} // namespace

bool newton_contract(const CycleSystem& sys, std::vector<Interval>& x, const RefineOptions& opt) {
    const int n = sys.period();
    if (int(x.size()) != n) throw InvariantViolation("newton_contract: wrong orbit length");
    const GeneratingFunction& s = sys.s();
    for (int pass = 0; pass < opt.newton_sweeps; ++pass) {
        double before = total_width(x);
        if (before == 0.0) break;
        for (int i = 0; i < n; ++i) {
            const Interval& xi = x[std::size_t(i)];
            Interval m(xi.mid());
            Interval num(0.0), den(0.0);
            if (n == 1) {
                num = s.eval(m, m);
                den = s.d1(xi, xi) + s.d2(xi, xi);
            } else {
                const Interval& xm = x[std::size_t((i + n - 1) % n)];
                const Interval& xp = x[std::size_t((i + 1) % n)];
                num = s.eval(xm, m) + s.eval(xp, m);
                den = s.d2(xm, xi) + s.d2(xp, xi);
            }
            if (den.contains(0.0)) continue;
            auto meet = intersect(xi, m - num / den);
            if (!meet) return false;
            x[std::size_t(i)] = *meet;
        }
        double after = total_width(x);
        if (before - after < opt.stall_ratio * before) break;
    }
    return true;
}

KrawczykStep krawczyk_step(const CycleSystem& sys, std::vector<Interval>& x,
                           std::vector<double>& preconditioner) {
    const int n = sys.period();
    if (int(x.size()) != n) throw InvariantViolation("krawczyk_step: wrong orbit length");
    const std::size_t nn = std::size_t(n);
    KrawczykStep out;

    std::vector<Interval> mid;
    mid.reserve(nn);
    for (const Interval& v : x) mid.push_back(Interval(v.mid()));
    std::vector<Interval> zm = sys.residual(mid);
    std::vector<Interval> jac = sys.jacobian(x);

    std::vector<double> jm(nn * nn);
    for (std::size_t k = 0; k < nn * nn; ++k) jm[k] = jac[k].mid();
    auto inv = invert(std::move(jm), n);
    if (inv) {
        preconditioner = *inv;
    } else {
        out.fallback = true;
        if (preconditioner.size() != nn * nn) {
            preconditioner.assign(nn * nn, 0.0);
            for (std::size_t i = 0; i < nn; ++i) preconditioner[i * nn + i] = 1.0;
        }
    }
    const std::vector<double>& c = preconditioner;

    // K = mid - C Z(mid) + (I - C J)(x - mid), coordinate by coordinate
    std::vector<Interval> dx;
    dx.reserve(nn);
    for (std::size_t i = 0; i < nn; ++i) dx.push_back(x[i] - mid[i]);

    bool strict = true;
    std::vector<Interval> next;
    next.reserve(nn);
    for (std::size_t i = 0; i < nn; ++i) {
        Interval acc = mid[i];
        for (std::size_t k = 0; k < nn; ++k) {
            Interval ck(c[i * nn + k]);
            acc = acc - ck * zm[k];
        }
        for (std::size_t jcol = 0; jcol < nn; ++jcol) {
            Interval r(i == jcol ? 1.0 : 0.0);
            for (std::size_t k = 0; k < nn; ++k)
                r = r - Interval(c[i * nn + k]) * jac[k * nn + jcol];
            acc = acc + r * dx[jcol];
        }
        if (!(acc.lo() > x[i].lo() && acc.hi() < x[i].hi())) strict = false;
        auto meet = intersect(x[i], acc);
        if (!meet) {
            out.empty = true;
            return out;
        }
        next.push_back(*meet);
    }
    out.contracted = strict;
    x = std::move(next);
    return out;
}

OrbitEnclosure refine_orbit(const CycleSystem& sys, std::vector<Interval> seed,
                            const RefineOptions& opt) {
    OrbitEnclosure out;
    out.positions = std::move(seed);
    if (!newton_contract(sys, out.positions, opt)) {
        out.discarded = true;
        return out;
    }
    std::vector<double> precond;
    for (int it = 0; it < opt.krawczyk_iters; ++it) {
        double before = total_width(out.positions);
        KrawczykStep st = krawczyk_step(sys, out.positions, precond);
        out.fallback_preconditioner = out.fallback_preconditioner || st.fallback;
        if (st.empty) {
            out.discarded = true;
            return out;
        }
        if (st.contracted) out.unique = true;
        double after = total_width(out.positions);
        if (before == 0.0 || before - after < opt.stall_ratio * before) break;
    }
    if (!out.unique) {
        // strict containment cannot trigger once the box sits at a couple of
        // ulps, so retry on a slightly inflated copy
        try {
            std::vector<Interval> inflated;
            inflated.reserve(out.positions.size());
            for (const Interval& v : out.positions)
                inflated.push_back(widened(v, 0.5 * v.width() + 1e-13));
            std::vector<double> pc;
            KrawczykStep st = krawczyk_step(sys, inflated, pc);
            if (st.empty) {
                out.discarded = true;
            } else if (st.contracted) {
                out.positions = std::move(inflated);
                out.unique = true;
            }
        } catch (const OutOfDomain&) {
            // inflation left the function's ball; keep the plain enclosure
        }
    }
    return out;
}

} // namespace mapcert

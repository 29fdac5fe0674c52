#ifndef MAPCERT_ORBIT_REFINEMENT_HPP
#define MAPCERT_ORBIT_REFINEMENT_HPP

/*
 * Tightening one periodic candidate.
 *
 * A period-n orbit is a solution of the cyclic stationarity system
 *
 *   Z_i(x) = s(x_{i-1}, x_i) + s(x_{i+1}, x_i) = 0,   indices mod n.
 *
 * Two contractions run in sequence.  Per-coordinate interval Newton sweeps
 * treat the neighbours as interval parameters and are cheap; a Krawczyk step
 * on the full system then squeezes the joint enclosure and, on strict
 * contraction, proves that the box holds exactly one orbit.  Both steps only
 * ever intersect with the current box, so enclosures never grow and an empty
 * intersection is a proof that no orbit was there.
 */

#include <span>
#include <vector>

#include "mapcert/generating_function.hpp"
#include "mapcert/interval.hpp"

namespace mapcert {

struct RefineOptions {
    int newton_sweeps = 50;
    int krawczyk_iters = 25;
    double stall_ratio = 0.01; // give up once a pass shrinks total width less than this
};

class CycleSystem {
public:
    CycleSystem(const GeneratingFunction& s, int n);

    int period() const { return n_; }
    const GeneratingFunction& s() const { return *s_; }

    std::vector<Interval> residual(std::span<const Interval> x) const;
    // row-major n*n; cyclic tridiagonal plus corners
    std::vector<Interval> jacobian(std::span<const Interval> x) const;

private:
    const GeneratingFunction* s_;
    int n_;
};

// Gauss-Seidel interval Newton sweeps on one coordinate at a time; updates x
// in place.  False means some coordinate emptied: the box holds no orbit.
bool newton_contract(const CycleSystem& sys, std::vector<Interval>& x,
                     const RefineOptions& opt = {});

struct KrawczykStep {
    bool empty = false;      // proved orbit-free
    bool contracted = false; // K(x) landed strictly inside x: exactly one orbit
    bool fallback = false;   // midpoint Jacobian not invertible in doubles
};

// One Krawczyk image intersected into x.  preconditioner carries the n*n
// floating inverse between calls; it is reused when the current midpoint
// Jacobian cannot be inverted and may start empty.
KrawczykStep krawczyk_step(const CycleSystem& sys, std::vector<Interval>& x,
                           std::vector<double>& preconditioner);

struct OrbitEnclosure {
    std::vector<Interval> positions;
    bool discarded = false; // proven free of orbits
    bool unique = false;    // some Krawczyk step contracted strictly
    bool fallback_preconditioner = false;
};

OrbitEnclosure refine_orbit(const CycleSystem& sys, std::vector<Interval> seed,
                            const RefineOptions& opt = {});

} // namespace mapcert

#endif

// Kepler orbit with e = 0.5 over 100 periods: compares the energy error of
// several eighth-order methods at equal cost (force evaluations per unit time).

#include <cstdio>

#include "rkn/rkn.hpp"

int main() {
  using namespace rkn;
  const ProblemInstance p = kepler(0.5);
  const double tf = 100 * *p.period;
  const double cost = 340;

  std::printf("%-8s %8s %12s %14s %14s\n", "method", "h", "force evals", "max |dH/H|", "final |dy|");
  for (const char* name : {"A17", "A18", "A19", "B17", "B18", "B19", "EXTRAP8"}) {
    const Method m = make_method(name);
    const double h = bench::commensurate_step(tf, cost, m.stages);
    EnergyErrorTracker energy(p.system);
    const IntegrationResult r = integrate(m, p.system, h, p.initial, tf, {energy.observer()});
    const State exact = kepler_exact(0.5, r.final_state.t);
    std::printf("%-8s %8.5f %12ld %14.3e %14.3e\n", name, h, r.stats.force_evaluations,
                energy.max_error(), (r.final_state.y - exact.y).cwiseAbs().maxCoeff());
  }
}

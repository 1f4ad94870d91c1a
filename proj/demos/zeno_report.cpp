// Prints the measurement spectrum, the projected drive, and the effective
// two-level model for both cavity layouts. Library-API walkthrough of the
// analysis pipeline: closed subspace -> eigenprojections -> projected drive
// -> second-order elimination.
#include <zenofuse/zeno.hpp>

#include <cstdio>

using namespace zenofuse;

static void report(ModelKind kind, const char* name) {
  ModelParams p;
  p.omega = 0.01;
  p.delta = 0.8;

  auto space = protocol_space(kind, /*with_flag=*/false);
  auto h = model_hamiltonian(p, space, kind);
  auto hm = coupling_hamiltonian(p, space, kind);
  auto ho = drive_hamiltonian(p, space, kind);

  std::vector<int> seed = {atom::g0, atom::g1};
  seed.insert(seed.end(), space->positions(FactorKind::mode).size(), 0);
  auto sub = closed_subspace(h, seed);
  auto dec = eigenprojections(hm, sub);

  std::printf("%s: subspace dim %zu, spectrum", name, sub.size());
  for (const auto& cl : dec.clusters)
    std::printf("  %+.6f (x%d)", cl.eigenvalue, cl.multiplicity());
  std::printf("\n");

  auto hz = zeno_hamiltonian(ho, dec);
  std::vector<int> a = {atom::g0, atom::g1};
  std::vector<int> b = {atom::g1, atom::g0};
  a.insert(a.end(), space->positions(FactorKind::mode).size(), 0);
  b.insert(b.end(), space->positions(FactorKind::mode).size(), 0);
  auto eff = adiabatic_eliminate(hz, dec, {a, b}, p);

  std::printf("  effective coupling |J| = %.6e  (Omega^2 / 2 Delta = %.6e)\n",
              std::abs(eff.raw(0, 1)), p.omega * p.omega / (2 * p.delta));
  std::printf("  compensated matrix:\n");
  for (int r = 0; r < eff.compensated.rows(); ++r) {
    std::printf("   ");
    for (int cidx = 0; cidx < eff.compensated.cols(); ++cidx)
      std::printf(" (%+.3e, %+.3e)", eff.compensated(r, cidx).real(),
                  eff.compensated(r, cidx).imag());
    std::printf("\n");
  }
  std::printf("  gate time pi Delta / (2 Omega^2) = %.6f\n\n", gate_time(p));
}

int main() {
  report(ModelKind::single_cavity, "single cavity");
  report(ModelKind::cavity_fiber, "cavity-fiber link");
  return 0;
}

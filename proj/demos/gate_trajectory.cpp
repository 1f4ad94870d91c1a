// Propagates the compensated gate from |g0 g1, vac> at the fast operating
// point and prints a coarse fidelity/population trace. Closed-system run;
// the CLI's gate-evolve scenario is the file-writing version of this.
#include <zenofuse/dynamics.hpp>
#include <zenofuse/fusion.hpp>
#include <zenofuse/zeno.hpp>

#include <cstdio>

using namespace zenofuse;

int main() {
  ModelParams p;
  p.omega = 0.05;
  p.delta = 0.8;
  const auto kind = ModelKind::single_cavity;

  auto space = protocol_space(kind, /*with_flag=*/false);
  auto h = model_hamiltonian(p, space, kind) + stark_compensation(p, space, kind);
  auto psi0 = ket(space, {atom::g0, atom::g1, 0});
  const double t = gate_time(p);

  PropagationOptions opt;
  opt.snapshots = 10;
  opt.store_states = true;
  opt.fidelity_target = apply_fusion(psi0, ideal_gate_map(space, kind));

  auto res = propagate_schrodinger(h, psi0, t, opt);
  std::printf("gate time %.4f, dt %.3f\n", t, opt.dt);
  std::printf("%10s %12s %12s %12s\n", "t", "fidelity", "P(g0 g1)", "P(g1 g0)");
  const int i01 = space->index_of({atom::g0, atom::g1, 0});
  const int i10 = space->index_of({atom::g1, atom::g0, 0});
  for (size_t k = 0; k < res.trajectory.points.size(); ++k) {
    const auto& pt = res.trajectory.points[k];
    const auto& psi = res.trajectory.pure_states[k];
    std::printf("%10.2f %12.6f %12.6f %12.6f\n", pt.t, pt.fidelity, std::norm(psi(i01)),
                std::norm(psi(i10)));
  }
  return 0;
}

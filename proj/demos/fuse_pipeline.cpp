// Runs the ideal fusion pipeline for one (n, m) pair: builds the joint branch
// state, applies the gate map, classifies the four detection outcomes, and
// checks each success branch against the fused target after phase correction.
// Ends with a short recycling Monte Carlo over a small pool.
#include <zenofuse/fusion.hpp>

#include <cstdio>
#include <cstdlib>

using namespace zenofuse;

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 5;
  const int m = argc > 2 ? std::atoi(argv[2]) : 5;
  const auto kind = ModelKind::single_cavity;

  auto probs = outcome_probabilities(n, m);
  std::printf("fusing W_%d with W_%d\n", n, m);
  std::printf("  failure  %lld/%lld\n", probs.failure.num, probs.failure.den);
  std::printf("  recycle  %lld/%lld\n", probs.recycle.num, probs.recycle.den);
  std::printf("  success  %lld/%lld total\n", probs.success_total.num, probs.success_total.den);

  auto state = ideal_target_state(n, m, kind);
  for (const auto& rec : fusion_branches(state)) {
    std::printf("  branch (%s, %s): p = %.6f  %s", rec.a0 == atom::g1 ? "g1" : "g0",
                rec.a1 == atom::g1 ? "g1" : "g0", rec.probability,
                to_string(rec.outcome));
    if (rec.outcome == FusionOutcome::success_10 || rec.outcome == FusionOutcome::success_01) {
      std::printf("  F(corrected, fused W) = %.12f",
                  fidelity(correct_phase(rec, kind), fused_flag_target(n, m, rec)));
    }
    std::printf("\n");
  }

  auto stats = simulate_network({n, m, n}, n + m - 2, 20000, 17);
  std::printf("network pool {%d, %d, %d} -> target %d: reached %.4f, mean attempts %.3f\n", n,
              m, n, n + m - 2, stats.reached_fraction, stats.mean_attempts);
  return 0;
}

// fusion.hpp -- the W-state fusion protocol: shared-excitation states, the
// flag-register branch decomposition, the ideal pair gate, projective
// measurement of the extracted atoms, conditional phase correction, exact
// outcome probabilities, and the greedy network scheduler.
#pragma once

#include <zenofuse/hamiltonian.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <numeric>

namespace zenofuse {

// ------------------------------------ rng -----------------------------------

// Deterministic 64-bit generator (splitmix64). Self-contained so runs
// reproduce byte-identically across platforms and standard-library versions.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform on [0, 1) with 53 random bits
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

// --------------------------------- W states ---------------------------------

// W_k on the first k of total_atoms three-level atoms (rest in g0), on a
// weight-capped atom-only space. W_1 is |g1>.
inline StateVector w_state(int k, int total_atoms = -1) {
  if (k < 1) throw std::invalid_argument("w_state needs k >= 1");
  const int total = total_atoms < 0 ? k : total_atoms;
  if (total < k) throw std::invalid_argument("total_atoms must be >= k");
  auto sp = build_space(std::vector<Factor>(static_cast<size_t>(total), Factor::make_atom()), 1);
  StateVector v = zero_state(sp);
  const double amp = 1.0 / std::sqrt(static_cast<double>(k));
  std::vector<int> label(static_cast<size_t>(total), atom::g0);
  for (int i = 0; i < k; ++i) {
    label[static_cast<size_t>(i)] = atom::g1;
    v.amps(sp->index_of(label)) = amp;
    label[static_cast<size_t>(i)] = atom::g0;
  }
  return v;
}

// ---------------------------- outcome probabilities --------------------------

struct Rational {
  long long num = 0;
  long long den = 1;

  Rational reduced() const {
    const long long g = std::gcd(num, den);
    return {num / (g ? g : 1), den / (g ? g : 1)};
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct OutcomeProbabilities {
  Rational failure;        // atoms (g1, g1): both excitations extracted, registers lost
  Rational recycle;        // atoms (g0, g0): both registers survive one size smaller
  Rational success_each;   // atoms (g1, g0) or (g0, g1), per branch
  Rational success_total;  // either success branch
};

inline OutcomeProbabilities outcome_probabilities(int n, int m) {
  if (n < 2 || m < 2) throw std::invalid_argument("fusion needs register sizes >= 2");
  const long long nm = static_cast<long long>(n) * m;
  OutcomeProbabilities p;
  p.failure = Rational{1, nm}.reduced();
  p.recycle = Rational{static_cast<long long>(n - 1) * (m - 1), nm}.reduced();
  p.success_total = Rational{n + m - 2, nm}.reduced();
  p.success_each = Rational{n + m - 2, 2 * nm}.reduced();
  return p;
}

inline Rational success_probability(int n, int m) {
  return outcome_probabilities(n, m).success_total;
}

// ------------------------------- branch states -------------------------------

// Flag labels pair each register's leftover with the extracted atom: letter T
// means the extracted atom took the register's excitation (leftover all
// ground), letter W means it stayed behind (leftover is a shrunken W state).
inline constexpr int flag_TT = 0;
inline constexpr int flag_TW = 1;
inline constexpr int flag_WT = 2;
inline constexpr int flag_WW = 3;

namespace detail {

inline void check_fusion_space(const SpacePtr& space) {
  if (space->positions(FactorKind::flag).size() != 1 ||
      space->factors()[static_cast<size_t>(space->positions(FactorKind::flag)[0])].dim != 4 ||
      space->positions(FactorKind::atom).size() != 2)
    throw std::invalid_argument("fusion states need one 4-way flag and two atoms");
}

}  // namespace detail

// Joint state of W_n (party A) and W_m (party B) after each extracts one
// atom, written on flag x atoms x modes. Atom g1 rides with flag letter T of
// its party; coefficients follow the Schmidt split of each W state.
inline StateVector initial_branch_state(int n, int m, ModelKind kind, int photon_cutoff = 2) {
  if (n < 2 || m < 2) throw std::invalid_argument("fusion needs register sizes >= 2");
  auto sp = protocol_space(kind, /*with_flag=*/true, photon_cutoff);
  const int n_modes = static_cast<int>(sp->positions(FactorKind::mode).size());
  auto lab = [&](int f, int a0, int a1) {
    std::vector<int> l = {f, a0, a1};
    l.insert(l.end(), static_cast<size_t>(n_modes), 0);
    return l;
  };
  const double root = std::sqrt(static_cast<double>(n) * m);
  StateVector v = zero_state(sp);
  v.amps(sp->index_of(lab(flag_TT, atom::g1, atom::g1))) = 1.0 / root;
  v.amps(sp->index_of(lab(flag_TW, atom::g1, atom::g0))) = std::sqrt(m - 1.0) / root;
  v.amps(sp->index_of(lab(flag_WT, atom::g0, atom::g1))) = std::sqrt(n - 1.0) / root;
  v.amps(sp->index_of(lab(flag_WW, atom::g0, atom::g0))) = std::sqrt((n - 1.0) * (m - 1.0)) / root;
  return v;
}

// ------------------------------ ideal pair gate ------------------------------

// Unitary the protected evolution realizes at the gate time, on the atom
// pair: |g0 g1> -> (|g0 g1> + s i |g1 g0>)/sqrt(2) and the mirror image,
// with s = -1 for the single cavity and s = +1 for the fiber link; |g0 g0>
// and |g1 g1> are fixed. Identity on every other factor.
inline OperatorMatrix ideal_gate_map(const SpacePtr& space, ModelKind kind) {
  const auto atoms = space->positions(FactorKind::atom);
  if (atoms.size() != 2) throw std::invalid_argument("pair gate needs exactly two atoms");
  const cx si = (kind == ModelKind::single_cavity) ? cx(0, -1) : cx(0, 1);
  const double rt = 1.0 / std::sqrt(2.0);

  std::vector<Eigen::Triplet<cx>> trips;
  for (int j = 0; j < space->dim(); ++j) {
    std::vector<int> l = space->label_of(j);
    const int a0 = l[static_cast<size_t>(atoms[0])];
    const int a1 = l[static_cast<size_t>(atoms[1])];
    const bool swap01 = (a0 == atom::g0 && a1 == atom::g1) || (a0 == atom::g1 && a1 == atom::g0);
    if (!swap01) {
      trips.emplace_back(j, j, cx(1, 0));
      continue;
    }
    trips.emplace_back(j, j, cx(rt, 0));
    std::swap(l[static_cast<size_t>(atoms[0])], l[static_cast<size_t>(atoms[1])]);
    trips.emplace_back(space->index_of(l), j, si * rt);
  }
  SparseMat m(space->dim(), space->dim());
  m.setFromTriplets(trips.begin(), trips.end());
  return {space, std::move(m), false};
}

// Applies the pair gate to a prepared branch state. The map is only the
// vacuum-sector limit of the dynamics, so photon population is rejected.
inline StateVector apply_fusion(const StateVector& state, const OperatorMatrix& map) {
  require_same_space(state.space, map.space);
  const double photons = expectation(photon_number_operator(state.space), state).real();
  if (photons > 1e-6)
    throw std::invalid_argument("fusion map applied to a state with photon population");
  return map * state;
}

// Prepared branch state pushed through the ideal gate: the reference the
// dissipative evolution is scored against.
inline StateVector ideal_target_state(int n, int m, ModelKind kind, int photon_cutoff = 2) {
  auto v = initial_branch_state(n, m, kind, photon_cutoff);
  return apply_fusion(v, ideal_gate_map(v.space, kind));
}

// -------------------------------- measurement --------------------------------

enum class FusionOutcome { failure, recycle, success_10, success_01 };

inline const char* to_string(FusionOutcome o) {
  switch (o) {
    case FusionOutcome::failure: return "failure";
    case FusionOutcome::recycle: return "recycle";
    case FusionOutcome::success_10: return "success_10";
    case FusionOutcome::success_01: return "success_01";
  }
  return "?";
}

struct MeasurementRecord {
  FusionOutcome outcome = FusionOutcome::failure;
  int a0 = 0, a1 = 0;      // measured atom levels
  double probability = 0;  // Born probability of this branch
  StateVector conditional;  // normalized post-measurement state (zero if p = 0)
};

namespace detail {

inline FusionOutcome classify(int a0, int a1) {
  if (a0 == atom::g1 && a1 == atom::g1) return FusionOutcome::failure;
  if (a0 == atom::g0 && a1 == atom::g0) return FusionOutcome::recycle;
  if (a0 == atom::g1 && a1 == atom::g0) return FusionOutcome::success_10;
  return FusionOutcome::success_01;
}

}  // namespace detail

// All four projective branches of measuring both atoms in {g0, g1}, ordered
// (g0,g0), (g0,g1), (g1,g0), (g1,g1). Excited-state population would be
// missed by this measurement and is rejected above 1e-6.
inline std::vector<MeasurementRecord> fusion_branches(const StateVector& state) {
  detail::check_fusion_space(state.space);
  const auto atoms = state.space->positions(FactorKind::atom);
  double p_e = 0;
  for (int i = 0; i < state.space->dim(); ++i) {
    const auto l = state.space->label_of(i);
    if (l[static_cast<size_t>(atoms[0])] == atom::e || l[static_cast<size_t>(atoms[1])] == atom::e)
      p_e += std::norm(state.amps(i));
  }
  if (p_e > 1e-6)
    throw std::invalid_argument("residual excited-state population blocks the readout");

  std::vector<MeasurementRecord> out;
  for (int a0 : {atom::g0, atom::g1}) {
    for (int a1 : {atom::g0, atom::g1}) {
      MeasurementRecord rec;
      rec.a0 = a0;
      rec.a1 = a1;
      rec.outcome = detail::classify(a0, a1);
      rec.conditional = zero_state(state.space);
      for (int i = 0; i < state.space->dim(); ++i) {
        const auto l = state.space->label_of(i);
        if (l[static_cast<size_t>(atoms[0])] == a0 && l[static_cast<size_t>(atoms[1])] == a1)
          rec.conditional.amps(i) = state.amps(i);
      }
      rec.probability = rec.conditional.amps.squaredNorm();
      if (rec.probability > 1e-30) rec.conditional = rec.conditional.normalized();
      out.push_back(std::move(rec));
    }
  }
  return out;
}

// Samples one branch with Born probabilities.
inline MeasurementRecord measure_atoms(const StateVector& state, SplitMix64& rng) {
  auto branches = fusion_branches(state);
  double total = 0;
  for (const auto& b : branches) total += b.probability;
  if (total < 1e-12) throw std::invalid_argument("state has no support on the readout basis");
  double u = rng.uniform() * total;
  MeasurementRecord* last = nullptr;
  for (auto& b : branches) {
    if (b.probability <= 0) continue;
    last = &b;
    u -= b.probability;
    if (u <= 0) return b;
  }
  return *last;
}

// ------------------------------ phase correction -----------------------------

// After a success branch one party rotates every atom it kept by g1 -> i g1,
// which at the flag level multiplies its W branches by i. Which party acts
// depends on the sign s of the gate: atoms (g1, g0) -> party A for the single
// cavity, party B for the fiber; atoms (g0, g1) the other way round.
inline StateVector correct_phase(const MeasurementRecord& rec, ModelKind kind) {
  if (rec.outcome == FusionOutcome::failure || rec.outcome == FusionOutcome::recycle)
    throw std::invalid_argument("phase correction only applies to success branches");
  const bool first = rec.outcome == FusionOutcome::success_10;
  const Party party = (kind == ModelKind::single_cavity) == first ? Party::A : Party::B;
  return phase_gate(rec.conditional.space, party) * rec.conditional;
}

// Flag-level target after a successful fusion and correction: the fused
// W_{n+m-2} written in the leftover split, riding on the measured atom pair.
inline StateVector fused_flag_target(int n, int m, const MeasurementRecord& rec) {
  if (rec.outcome != FusionOutcome::success_10 && rec.outcome != FusionOutcome::success_01)
    throw std::invalid_argument("fused target defined for success branches");
  auto sp = rec.conditional.space;
  detail::check_fusion_space(sp);
  const int n_modes = static_cast<int>(sp->positions(FactorKind::mode).size());
  auto lab = [&](int f) {
    std::vector<int> l = {f, rec.a0, rec.a1};
    l.insert(l.end(), static_cast<size_t>(n_modes), 0);
    return l;
  };
  const double norm = std::sqrt(static_cast<double>(n + m - 2));
  StateVector v = zero_state(sp);
  v.amps(sp->index_of(lab(flag_TW))) = std::sqrt(m - 1.0) / norm;
  v.amps(sp->index_of(lab(flag_WT))) = std::sqrt(n - 1.0) / norm;
  return v;
}

// ------------------------------ network scheduler ----------------------------

struct NetworkStats {
  int trials = 0;
  int target = 0;
  std::uint64_t master_seed = 0;
  int reached = 0;                  // trials that built a register >= target
  double reached_fraction = 0;
  double mean_attempts = 0;         // fusion attempts per trial
  std::array<long long, 4> outcome_totals{};  // failure, recycle, success_10, success_01
  std::map<int, long long> achieved_histogram;  // largest register per trial
};

// Greedy scheduler: repeatedly fuse the two largest registers. Success yields
// W_{n+m-2}; the recycle branch returns both registers one atom smaller;
// failure consumes both. Single-atom leftovers carry no shared excitation and
// are dropped. Per-trial streams are seeded with master_seed xor trial index.
inline NetworkStats simulate_network(const std::vector<int>& initial_pool, int target, int trials,
                                     std::uint64_t seed) {
  if (target < 2) throw std::invalid_argument("target register size must be >= 2");
  if (trials < 1) throw std::invalid_argument("need at least one trial");
  for (int s : initial_pool)
    if (s < 1) throw std::invalid_argument("register sizes must be >= 1");

  NetworkStats stats;
  stats.trials = trials;
  stats.target = target;
  stats.master_seed = seed;
  long long attempts_total = 0;

  for (int trial = 0; trial < trials; ++trial) {
    SplitMix64 rng(seed ^ static_cast<std::uint64_t>(trial));
    std::vector<int> pool;
    for (int s : initial_pool)
      if (s >= 2) pool.push_back(s);
    int achieved = pool.empty() ? 0 : *std::max_element(pool.begin(), pool.end());

    while (achieved < target && pool.size() >= 2) {
      std::sort(pool.begin(), pool.end(), std::greater<int>());
      const int n = pool[0];
      const int m = pool[1];
      pool.erase(pool.begin(), pool.begin() + 2);
      ++attempts_total;

      const auto p = outcome_probabilities(n, m);
      const double u = rng.uniform();
      if (u < p.failure.value()) {
        ++stats.outcome_totals[0];
      } else if (u < p.failure.value() + p.recycle.value()) {
        ++stats.outcome_totals[1];
        if (n - 1 >= 2) pool.push_back(n - 1);
        if (m - 1 >= 2) pool.push_back(m - 1);
      } else {
        ++stats.outcome_totals[rng.uniform() < 0.5 ? 2 : 3];
        pool.push_back(n + m - 2);
        achieved = std::max(achieved, n + m - 2);
      }
    }
    ++stats.achieved_histogram[achieved];
    if (achieved >= target) ++stats.reached;
  }
  stats.reached_fraction = static_cast<double>(stats.reached) / trials;
  stats.mean_attempts = static_cast<double>(attempts_total) / trials;
  return stats;
}

}  // namespace zenofuse

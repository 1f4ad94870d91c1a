// hamiltonian.hpp -- model parameters and operator builders for the
// single-cavity and cavity-fiber setups: strong coupling part, weak drive
// part, collapse operators, Stark compensation, flag-level phase gate.
#pragma once

#include <zenofuse/hilbert.hpp>

#include <cmath>
#include <vector>

namespace zenofuse {

enum class ModelKind { single_cavity, cavity_fiber };

// ------------------------------- parameters --------------------------------

// All rates in units of the atom-cavity coupling unless the caller
// renormalizes. The drive must stay weak against the coupling for the
// measurement picture to hold; validate() enforces omega/lambda <= ratio_limit
// unless enforce_ratio is cleared.
struct ModelParams {
  double lambda = 1.0;   // atom-cavity coupling
  double omega = 0.01;   // classical Raman drive
  double delta = 0.8;    // excited-state detuning
  double fiber_v = 1.0;  // cavity-fiber hopping (cavity_fiber only)
  double kappa = 0.0;    // cavity photon decay
  double kappa_f = 0.0;  // fiber photon decay (cavity_fiber only)
  double gamma = 0.0;    // excited-state spontaneous emission (total, split over g0/g1)

  double ratio_limit = 0.1;
  bool enforce_ratio = true;

  double zeno_ratio() const { return omega / lambda; }

  // require_delta: set when the caller will adiabatically eliminate.
  void validate(bool require_delta = false) const {
    if (!(lambda > 0)) throw std::invalid_argument("lambda must be > 0");
    if (!(omega >= 0)) throw std::invalid_argument("omega must be >= 0");
    if (fiber_v < 0) throw std::invalid_argument("fiber coupling must be >= 0");
    if (kappa < 0 || kappa_f < 0 || gamma < 0)
      throw std::invalid_argument("decay rates must be >= 0");
    if (require_delta && !(delta > 0))
      throw std::invalid_argument("delta must be > 0 for adiabatic elimination");
    if (delta < 0) throw std::invalid_argument("delta must be >= 0");
    if (enforce_ratio && omega / lambda > ratio_limit + 1e-12)
      throw std::invalid_argument("omega/lambda exceeds the weak-drive ratio limit");
  }
};

// ------------------------------ layout checks ------------------------------

namespace detail {

inline void check_layout(const SpacePtr& space, ModelKind kind) {
  const auto atoms = space->positions(FactorKind::atom);
  const auto modes = space->positions(FactorKind::mode);
  if (kind == ModelKind::single_cavity) {
    if (atoms.empty() || modes.size() != 1)
      throw std::invalid_argument("single-cavity layout needs >=1 atom and exactly 1 mode");
  } else {
    if (atoms.size() != 2 || modes.size() != 3)
      throw std::invalid_argument(
          "cavity-fiber layout needs exactly 2 atoms and 3 modes (cavity_A, fiber, cavity_B)");
  }
}

}  // namespace detail

// ---------------------------- hamiltonian parts ----------------------------

// Strong part. Single cavity: lambda * sum_i |e><g0|_i a + h.c. with every
// atom on the shared mode. Cavity-fiber: each atom on its own cavity plus
// v * b^dag (a_A + a_B) + h.c., mode order (cavity_A, fiber, cavity_B). This
// is the part that acts as the continuous measurement.
inline OperatorMatrix coupling_hamiltonian(const ModelParams& p, const SpacePtr& space,
                                           ModelKind kind) {
  p.validate();
  if (kind == ModelKind::cavity_fiber && !(p.fiber_v > 0))
    throw std::invalid_argument("fiber coupling must be > 0 for the cavity-fiber model");
  detail::check_layout(space, kind);
  const auto atoms = space->positions(FactorKind::atom);
  const auto modes = space->positions(FactorKind::mode);

  OperatorMatrix h = zero_operator(space);
  auto add_pair = [&](const OperatorMatrix& term) {
    h = h + term + term.adjoint();
  };
  if (kind == ModelKind::single_cavity) {
    auto a = mode_annihilator(space, modes[0]);
    for (int ai : atoms) add_pair(p.lambda * (atom_transition(space, ai, atom::e, atom::g0) * a));
  } else {
    auto a_A = mode_annihilator(space, modes[0]);
    auto b = mode_annihilator(space, modes[1]);
    auto a_B = mode_annihilator(space, modes[2]);
    add_pair(p.lambda * (atom_transition(space, atoms[0], atom::e, atom::g0) * a_A));
    add_pair(p.lambda * (atom_transition(space, atoms[1], atom::e, atom::g0) * a_B));
    add_pair(p.fiber_v * (b.adjoint() * a_A));
    add_pair(p.fiber_v * (b.adjoint() * a_B));
  }
  h.hermitian_hint = true;
  return h;
}

// Weak part: Omega * sum_i |e><g1|_i + h.c. plus Delta * sum_i |e><e|_i.
// This is the observed system evolving inside the measurement-protected
// subspaces.
inline OperatorMatrix drive_hamiltonian(const ModelParams& p, const SpacePtr& space,
                                        ModelKind kind) {
  p.validate();
  detail::check_layout(space, kind);
  OperatorMatrix h = zero_operator(space);
  for (int ai : space->positions(FactorKind::atom)) {
    auto up = atom_transition(space, ai, atom::e, atom::g1);
    h = h + p.omega * up + p.omega * up.adjoint() +
        p.delta * atom_transition(space, ai, atom::e, atom::e);
  }
  h.hermitian_hint = true;
  return h;
}

inline OperatorMatrix single_cavity_hamiltonian(const ModelParams& p, const SpacePtr& space) {
  return coupling_hamiltonian(p, space, ModelKind::single_cavity) +
         drive_hamiltonian(p, space, ModelKind::single_cavity);
}

inline OperatorMatrix cavity_fiber_hamiltonian(const ModelParams& p, const SpacePtr& space) {
  return coupling_hamiltonian(p, space, ModelKind::cavity_fiber) +
         drive_hamiltonian(p, space, ModelKind::cavity_fiber);
}

inline OperatorMatrix model_hamiltonian(const ModelParams& p, const SpacePtr& space,
                                        ModelKind kind) {
  return kind == ModelKind::single_cavity ? single_cavity_hamiltonian(p, space)
                                          : cavity_fiber_hamiltonian(p, space);
}

// ------------------------------ collapse ops -------------------------------

// Lindblad collapse operators, fixed order:
//   single_cavity: sqrt(kappa) a,
//                  sqrt(gamma/2) |g0><e|_i, sqrt(gamma/2) |g1><e|_i per atom.
//   cavity_fiber:  sqrt(kappa) a_A, sqrt(kappa) a_B, sqrt(kappa_f) b,
//                  then the same atomic ops.
// Zero-rate entries are kept so the list shape is model-determined.
inline std::vector<OperatorMatrix> collapse_operators(const ModelParams& p, const SpacePtr& space,
                                                      ModelKind kind) {
  p.validate();
  detail::check_layout(space, kind);
  const auto atoms = space->positions(FactorKind::atom);
  const auto modes = space->positions(FactorKind::mode);

  std::vector<OperatorMatrix> out;
  if (kind == ModelKind::single_cavity) {
    out.push_back(std::sqrt(p.kappa) * mode_annihilator(space, modes[0]));
  } else {
    out.push_back(std::sqrt(p.kappa) * mode_annihilator(space, modes[0]));
    out.push_back(std::sqrt(p.kappa) * mode_annihilator(space, modes[2]));
    out.push_back(std::sqrt(p.kappa_f) * mode_annihilator(space, modes[1]));
  }
  const double g = std::sqrt(p.gamma / 2.0);
  for (int ai : atoms) {
    out.push_back(g * atom_transition(space, ai, atom::g0, atom::e));
    out.push_back(g * atom_transition(space, ai, atom::g1, atom::e));
  }
  return out;
}

// --------------------------- Stark compensation ----------------------------

// The second-order drive shift pushes |g0 g1> and |g1 g0> (vacuum modes) down
// by omega^2/(2*delta) in both models; adding this operator cancels the shift
// so only the exchange term rotates the pair. Identity on flag factors.
inline OperatorMatrix stark_compensation(const ModelParams& p, const SpacePtr& space,
                                         ModelKind kind) {
  p.validate(/*require_delta=*/true);
  detail::check_layout(space, kind);
  const auto atoms = space->positions(FactorKind::atom);
  const auto modes = space->positions(FactorKind::mode);
  if (atoms.size() != 2)
    throw std::invalid_argument("Stark compensation targets the two-atom gate pair");
  const double shift = p.omega * p.omega / (2.0 * p.delta);
  return diagonal_operator(space, [&](const std::vector<int>& l) {
    for (int mk : modes)
      if (l[static_cast<size_t>(mk)] != 0) return 0.0;
    const int a0 = l[static_cast<size_t>(atoms[0])];
    const int a1 = l[static_cast<size_t>(atoms[1])];
    const bool gate_pair = (a0 == atom::g0 && a1 == atom::g1) ||
                           (a0 == atom::g1 && a1 == atom::g0);
    return gate_pair ? shift : 0.0;
  });
}

// ------------------------------- phase gate --------------------------------

// Correction applied by one party after a successful fusion measurement:
// every atom of that party's leftover register picks up g1 -> i*g1. At the
// flag level the leftover is either all-ground (T, phase 1) or a single-
// excitation shared state (W, phase i), so the gate multiplies the party's
// W-flagged branches by i. Flag order contract: (TT, TW, WT, WW) with the
// first letter party A.
enum class Party { A, B };

inline OperatorMatrix phase_gate(const SpacePtr& space, Party party) {
  const auto flags = space->positions(FactorKind::flag);
  if (flags.size() != 1 || space->factors()[static_cast<size_t>(flags[0])].dim != 4)
    throw std::invalid_argument("phase gate needs one flag factor of dimension 4");
  const int fk = flags[0];
  std::vector<Eigen::Triplet<cx>> trips;
  for (int i = 0; i < space->dim(); ++i) {
    const int f = space->label_of(i)[static_cast<size_t>(fk)];
    const bool w_side = (party == Party::A) ? (f == 2 || f == 3) : (f == 1 || f == 3);
    trips.emplace_back(i, i, w_side ? cx(0, 1) : cx(1, 0));
  }
  SparseMat m(space->dim(), space->dim());
  m.setFromTriplets(trips.begin(), trips.end());
  return {space, std::move(m), false};
}

// ------------------------------ common spaces ------------------------------

// Default simulation spaces: photon cutoff 2 and excitation cap 2 cover the
// full protocol exactly (the initial branch states carry at most two
// excitations and the dynamics never raises the weight).
inline SpacePtr protocol_space(ModelKind kind, bool with_flag, int photon_cutoff = 2,
                               int sector_cap = 2) {
  std::vector<Factor> fs;
  if (with_flag) fs.push_back(Factor::flag(4));
  fs.push_back(Factor::make_atom());
  fs.push_back(Factor::make_atom());
  const int n_modes = (kind == ModelKind::single_cavity) ? 1 : 3;
  for (int k = 0; k < n_modes; ++k) fs.push_back(Factor::mode(photon_cutoff));
  return build_space(std::move(fs), sector_cap);
}

}  // namespace zenofuse

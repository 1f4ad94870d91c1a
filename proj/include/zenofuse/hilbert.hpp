// hilbert.hpp -- composite Hilbert spaces: factor layout, sector-capped basis
// enumeration, kets, density operators, sparse operators, fidelity.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include <algorithm>
#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace zenofuse {

using cx = std::complex<double>;
using SparseMat = Eigen::SparseMatrix<cx>;

// Atom level labels. Order (g0, g1, e) is part of the basis contract.
namespace atom {
inline constexpr int g0 = 0;
inline constexpr int g1 = 1;
inline constexpr int e = 2;
}  // namespace atom

// --------------------------------- factors ---------------------------------

enum class FactorKind { atom, mode, flag };

// One tensor factor: a 3-level atom, a photon mode truncated at n_max, or a
// flag register of d orthonormal abstract labels (zero excitation weight).
struct Factor {
  FactorKind kind = FactorKind::atom;
  int dim = 3;

  static Factor make_atom() { return {FactorKind::atom, 3}; }
  static Factor mode(int n_max) {
    if (n_max < 0) throw std::invalid_argument("mode cutoff must be >= 0");
    return {FactorKind::mode, n_max + 1};
  }
  static Factor flag(int d) {
    if (d < 1) throw std::invalid_argument("flag dimension must be >= 1");
    return {FactorKind::flag, d};
  }
};

// --------------------------------- space -----------------------------------

// Basis layout of a tensor-product space. Labels enumerate lexicographically
// with factor 0 most significant; atoms order (g0, g1, e), modes (0..n_max).
// With sector_cap = N only labels of excitation weight w <= N are kept, where
// w = (#atoms in g1) + (#atoms in e) + (total photons). Both model
// Hamiltonians conserve w, so capped spaces are exact for the protocol.
class SpaceDescriptor {
 public:
  SpaceDescriptor(std::vector<Factor> factors, std::optional<int> sector_cap)
      : factors_(std::move(factors)), cap_(sector_cap) {
    if (factors_.empty()) throw std::invalid_argument("empty factor list");
    if (cap_ && *cap_ < 0) throw std::invalid_argument("sector_cap must be >= 0");
    strides_.assign(factors_.size(), 1);
    full_dim_ = 1;
    for (int k = static_cast<int>(factors_.size()) - 1; k >= 0; --k) {
      strides_[k] = full_dim_;
      full_dim_ *= factors_[k].dim;
    }
    codes_.reserve(static_cast<size_t>(cap_ ? 0 : full_dim_));
    std::vector<int> label(factors_.size(), 0);
    for (std::int64_t c = 0; c < full_dim_; ++c) {
      decode(c, label);
      if (!cap_ || weight(label) <= *cap_) codes_.push_back(c);
    }
  }

  int dim() const { return static_cast<int>(codes_.size()); }
  std::int64_t full_dim() const { return full_dim_; }
  const std::vector<Factor>& factors() const { return factors_; }
  std::optional<int> sector_cap() const { return cap_; }

  // Excitation weight of a label tuple.
  int weight(const std::vector<int>& label) const {
    int w = 0;
    for (size_t k = 0; k < factors_.size(); ++k) {
      switch (factors_[k].kind) {
        case FactorKind::atom: w += (label[k] != atom::g0) ? 1 : 0; break;
        case FactorKind::mode: w += label[k]; break;
        case FactorKind::flag: break;
      }
    }
    return w;
  }

  std::vector<int> label_of(int index) const {
    if (index < 0 || index >= dim()) throw std::invalid_argument("basis index out of range");
    std::vector<int> label(factors_.size());
    decode(codes_[static_cast<size_t>(index)], label);
    return label;
  }

  std::optional<int> try_index(const std::vector<int>& label) const {
    if (label.size() != factors_.size()) return std::nullopt;
    std::int64_t c = 0;
    for (size_t k = 0; k < factors_.size(); ++k) {
      if (label[k] < 0 || label[k] >= factors_[k].dim) return std::nullopt;
      c += label[k] * strides_[k];
    }
    auto it = std::lower_bound(codes_.begin(), codes_.end(), c);
    if (it == codes_.end() || *it != c) return std::nullopt;
    return static_cast<int>(it - codes_.begin());
  }

  int index_of(const std::vector<int>& label) const {
    auto i = try_index(label);
    if (!i) throw std::invalid_argument("label invalid or outside sector: " + format_label(label));
    return *i;
  }

  // Positions of factors of a given kind, in declared order.
  std::vector<int> positions(FactorKind kind) const {
    std::vector<int> p;
    for (size_t k = 0; k < factors_.size(); ++k)
      if (factors_[k].kind == kind) p.push_back(static_cast<int>(k));
    return p;
  }

  // Human-readable label, e.g. "g0 g1 | 0" or "F2 . g1 g0 | 0 0 0".
  std::string format_label(const std::vector<int>& label) const {
    static const char* lv[] = {"g0", "g1", "e"};
    std::string atoms, modes, flags;
    for (size_t k = 0; k < factors_.size() && k < label.size(); ++k) {
      switch (factors_[k].kind) {
        case FactorKind::atom:
          if (!atoms.empty()) atoms += ' ';
          atoms += (label[k] >= 0 && label[k] < 3) ? lv[label[k]] : "?";
          break;
        case FactorKind::mode:
          if (!modes.empty()) modes += ' ';
          modes += std::to_string(label[k]);
          break;
        case FactorKind::flag:
          flags += 'F' + std::to_string(label[k]);
          break;
      }
    }
    std::string s;
    if (!flags.empty()) s += flags + " . ";
    s += atoms;
    if (!modes.empty()) s += " | " + modes;
    return s;
  }

  bool same_as(const SpaceDescriptor& o) const {
    if (full_dim_ != o.full_dim_ || codes_.size() != o.codes_.size()) return false;
    if (factors_.size() != o.factors_.size()) return false;
    for (size_t k = 0; k < factors_.size(); ++k)
      if (factors_[k].kind != o.factors_[k].kind || factors_[k].dim != o.factors_[k].dim) return false;
    return codes_ == o.codes_;
  }

 private:
  void decode(std::int64_t code, std::vector<int>& label) const {
    for (size_t k = 0; k < factors_.size(); ++k) {
      label[k] = static_cast<int>(code / strides_[k]);
      code %= strides_[k];
    }
  }

  std::vector<Factor> factors_;
  std::optional<int> cap_;
  std::vector<std::int64_t> strides_;
  std::int64_t full_dim_ = 0;
  std::vector<std::int64_t> codes_;  // sorted ascending = lexicographic order
};

using SpacePtr = std::shared_ptr<const SpaceDescriptor>;

inline SpacePtr build_space(std::vector<Factor> factors, std::optional<int> sector_cap = std::nullopt) {
  return std::make_shared<const SpaceDescriptor>(std::move(factors), sector_cap);
}

inline void require_same_space(const SpacePtr& a, const SpacePtr& b) {
  if (a == b) return;
  if (!a || !b || !a->same_as(*b)) throw std::invalid_argument("operands live on different spaces");
}

// --------------------------------- states ----------------------------------

struct StateVector {
  SpacePtr space;
  Eigen::VectorXcd amps;

  double norm() const { return amps.norm(); }

  StateVector normalized() const {
    double n = norm();
    if (n < 1e-14) throw std::invalid_argument("cannot normalize zero-norm state");
    return {space, amps / n};
  }
};

inline StateVector zero_state(const SpacePtr& space) {
  return {space, Eigen::VectorXcd::Zero(space->dim())};
}

inline StateVector ket(const SpacePtr& space, const std::vector<int>& label) {
  StateVector v = zero_state(space);
  v.amps(space->index_of(label)) = 1.0;
  return v;
}

// Normalized linear combination. All terms must share one space.
inline StateVector superpose(const std::vector<std::pair<cx, StateVector>>& terms) {
  if (terms.empty()) throw std::invalid_argument("superpose: no terms");
  StateVector out = zero_state(terms.front().second.space);
  for (const auto& [c, v] : terms) {
    require_same_space(out.space, v.space);
    out.amps += c * v.amps;
  }
  return out.normalized();
}

struct DensityOperator {
  SpacePtr space;
  Eigen::MatrixXcd mat;

  static DensityOperator from_pure(const StateVector& psi) {
    return {psi.space, psi.amps * psi.amps.adjoint()};
  }

  double trace() const { return mat.trace().real(); }

  double hermiticity_error() const { return (mat - mat.adjoint()).cwiseAbs().maxCoeff(); }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (mat + mat.adjoint()),
                                                       Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }
};

// -------------------------------- operators --------------------------------

struct OperatorMatrix {
  SpacePtr space;
  SparseMat mat;
  bool hermitian_hint = false;

  OperatorMatrix adjoint() const { return {space, SparseMat(mat.adjoint()), hermitian_hint}; }

  double hermiticity_error() const {
    SparseMat d = mat - SparseMat(mat.adjoint());
    double m = 0.0;
    for (int k = 0; k < d.outerSize(); ++k)
      for (SparseMat::InnerIterator it(d, k); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
  }
};

inline OperatorMatrix zero_operator(const SpacePtr& space) {
  return {space, SparseMat(space->dim(), space->dim()), true};
}

inline OperatorMatrix identity_operator(const SpacePtr& space) {
  SparseMat m(space->dim(), space->dim());
  m.setIdentity();
  return {space, std::move(m), true};
}

inline OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_space(a.space, b.space);
  return {a.space, SparseMat(a.mat + b.mat), a.hermitian_hint && b.hermitian_hint};
}

inline OperatorMatrix operator*(cx s, const OperatorMatrix& a) {
  return {a.space, SparseMat(s * a.mat), a.hermitian_hint && s.imag() == 0.0};
}

inline OperatorMatrix operator*(double s, const OperatorMatrix& a) { return cx(s, 0) * a; }

inline OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_space(a.space, b.space);
  return {a.space, SparseMat(a.mat * b.mat), false};
}

inline StateVector operator*(const OperatorMatrix& a, const StateVector& v) {
  require_same_space(a.space, v.space);
  return {v.space, a.mat * v.amps};
}

// Embed a small matrix acting on one factor into the full (possibly capped)
// space. Matrix elements whose target label falls outside the space (photon
// above cutoff, weight above cap) are dropped; this is the truncation rule,
// and it keeps adjoint pairs consistent: local(A)^dag = local(A^dag).
inline OperatorMatrix local_operator(const SpacePtr& space, int factor_index,
                                     const Eigen::MatrixXcd& small) {
  const auto& fs = space->factors();
  if (factor_index < 0 || factor_index >= static_cast<int>(fs.size()))
    throw std::invalid_argument("factor index out of range");
  const int fd = fs[static_cast<size_t>(factor_index)].dim;
  if (small.rows() != fd || small.cols() != fd)
    throw std::invalid_argument("local matrix does not match factor dimension");

  std::vector<Eigen::Triplet<cx>> trips;
  for (int j = 0; j < space->dim(); ++j) {
    std::vector<int> label = space->label_of(j);
    const int col = label[static_cast<size_t>(factor_index)];
    for (int row = 0; row < fd; ++row) {
      const cx v = small(row, col);
      if (v == cx(0, 0)) continue;
      label[static_cast<size_t>(factor_index)] = row;
      if (auto i = space->try_index(label)) trips.emplace_back(*i, j, v);
      label[static_cast<size_t>(factor_index)] = col;
    }
  }
  SparseMat m(space->dim(), space->dim());
  m.setFromTriplets(trips.begin(), trips.end());
  return {space, std::move(m), false};
}

// Diagonal operator from a label function.
template <typename Fn>
inline OperatorMatrix diagonal_operator(const SpacePtr& space, Fn&& value_of_label) {
  std::vector<Eigen::Triplet<cx>> trips;
  for (int i = 0; i < space->dim(); ++i) {
    const double v = value_of_label(space->label_of(i));
    if (v != 0.0) trips.emplace_back(i, i, cx(v, 0));
  }
  SparseMat m(space->dim(), space->dim());
  m.setFromTriplets(trips.begin(), trips.end());
  return {space, std::move(m), true};
}

// Truncated annihilation operator on one mode factor.
inline OperatorMatrix mode_annihilator(const SpacePtr& space, int mode_factor) {
  const auto& fs = space->factors();
  if (mode_factor < 0 || mode_factor >= static_cast<int>(fs.size()) ||
      fs[static_cast<size_t>(mode_factor)].kind != FactorKind::mode)
    throw std::invalid_argument("not a mode factor");
  const int d = fs[static_cast<size_t>(mode_factor)].dim;
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(d, d);
  for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return local_operator(space, mode_factor, a);
}

// Atom transition |to><from| on one atom factor.
inline OperatorMatrix atom_transition(const SpacePtr& space, int atom_factor, int to, int from) {
  const auto& fs = space->factors();
  if (atom_factor < 0 || atom_factor >= static_cast<int>(fs.size()) ||
      fs[static_cast<size_t>(atom_factor)].kind != FactorKind::atom)
    throw std::invalid_argument("not an atom factor");
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(3, 3);
  m(to, from) = 1.0;
  return local_operator(space, atom_factor, m);
}

// Excitation-number operator: w = (#g1) + (#e) + (total photons).
inline OperatorMatrix excitation_number_operator(const SpacePtr& space) {
  return diagonal_operator(space, [&](const std::vector<int>& l) {
    return static_cast<double>(space->weight(l));
  });
}

// Total photon number across all mode factors.
inline OperatorMatrix photon_number_operator(const SpacePtr& space) {
  auto modes = space->positions(FactorKind::mode);
  return diagonal_operator(space, [&](const std::vector<int>& l) {
    double n = 0;
    for (int k : modes) n += l[static_cast<size_t>(k)];
    return n;
  });
}

// ------------------------------- observables -------------------------------

inline cx expectation(const OperatorMatrix& op, const StateVector& psi) {
  require_same_space(op.space, psi.space);
  return psi.amps.dot(op.mat * psi.amps);  // Eigen dot conjugates the left side
}

inline cx expectation(const OperatorMatrix& op, const DensityOperator& rho) {
  require_same_space(op.space, rho.space);
  return (op.mat * rho.mat).eval().trace();
}

// <psi|rho|psi>, real part; rejects imaginary residue above 1e-10.
inline double fidelity(const DensityOperator& rho, const StateVector& psi) {
  require_same_space(rho.space, psi.space);
  const cx f = psi.amps.dot(rho.mat * psi.amps);
  if (std::abs(f.imag()) > 1e-10)
    throw std::runtime_error("fidelity has non-negligible imaginary part");
  return f.real();
}

// |<target|psi>|^2 for pure states.
inline double fidelity(const StateVector& psi, const StateVector& target) {
  require_same_space(psi.space, target.space);
  return std::norm(target.amps.dot(psi.amps));
}

// ------------------------- embedding / restriction -------------------------

// Map a state into another space over the same factor list (e.g. capped ->
// uncapped). Amplitudes on labels missing from the target are dropped.
inline StateVector embed_state(const StateVector& v, const SpacePtr& target) {
  const auto& fa = v.space->factors();
  const auto& fb = target->factors();
  if (fa.size() != fb.size()) throw std::invalid_argument("factor lists differ");
  for (size_t k = 0; k < fa.size(); ++k)
    if (fa[k].kind != fb[k].kind || fa[k].dim != fb[k].dim)
      throw std::invalid_argument("factor lists differ");
  StateVector out = zero_state(target);
  for (int i = 0; i < v.space->dim(); ++i) {
    if (v.amps(i) == cx(0, 0)) continue;
    if (auto j = target->try_index(v.space->label_of(i))) out.amps(*j) = v.amps(i);
  }
  return out;
}

}  // namespace zenofuse

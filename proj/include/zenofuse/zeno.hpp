// zeno.hpp -- dynamics protected by a strong coupling: closed subspaces,
// clustered spectral decompositions, the projected (measurement) Hamiltonian,
// the finite-coupling propagator error, and second-order elimination of the
// detuned intermediate states.
#pragma once

#include <zenofuse/hamiltonian.hpp>

#include <cmath>
#include <numbers>
#include <queue>
#include <string>

namespace zenofuse {

// ------------------------------ closed subspace -----------------------------

// Basis indices reachable from the seed label through nonzero elements of h,
// ascending. Elements below coupling_tol count as zero.
inline std::vector<int> closed_subspace(const OperatorMatrix& h, const std::vector<int>& seed,
                                        double coupling_tol = 1e-12) {
  const int start = h.space->index_of(seed);
  std::vector<char> seen(static_cast<size_t>(h.space->dim()), 0);
  std::queue<int> frontier;
  seen[static_cast<size_t>(start)] = 1;
  frontier.push(start);
  while (!frontier.empty()) {
    const int j = frontier.front();
    frontier.pop();
    for (SparseMat::InnerIterator it(h.mat, j); it; ++it) {
      if (std::abs(it.value()) <= coupling_tol) continue;
      const int i = static_cast<int>(it.row());
      if (!seen[static_cast<size_t>(i)]) {
        seen[static_cast<size_t>(i)] = 1;
        frontier.push(i);
      }
    }
  }
  std::vector<int> out;
  for (int i = 0; i < h.space->dim(); ++i)
    if (seen[static_cast<size_t>(i)]) out.push_back(i);
  return out;
}

// Dense restriction of an operator to a subspace (basis indices, ascending).
inline Eigen::MatrixXcd restrict_dense(const OperatorMatrix& op, const std::vector<int>& sub) {
  const int n = static_cast<int>(sub.size());
  Eigen::MatrixXcd m(n, n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) m(r, c) = op.mat.coeff(sub[static_cast<size_t>(r)], sub[static_cast<size_t>(c)]);
  return m;
}

// --------------------------- spectral decomposition -------------------------

// One degenerate cluster of the measured Hamiltonian: eigenvalue and an
// orthonormal basis of its eigenspace (columns, in subspace coordinates).
struct SpectralCluster {
  double eigenvalue = 0;
  Eigen::MatrixXcd basis;

  int multiplicity() const { return static_cast<int>(basis.cols()); }
};

struct SpectralDecomposition {
  SpacePtr space;
  std::vector<int> subspace;              // global basis indices, ascending
  std::vector<SpectralCluster> clusters;  // ascending eigenvalue
};

// Clustered eigendecomposition of h_meas restricted to the subspace. Two
// eigenvalues closer than degeneracy_tol land in one cluster; the default tol
// is 1e-8 times the spectral radius (absolute 1e-12 floor for zero operators).
inline SpectralDecomposition eigenprojections(const OperatorMatrix& h_meas,
                                              const std::vector<int>& subspace,
                                              double degeneracy_tol = -1.0) {
  if (h_meas.hermiticity_error() > 1e-10)
    throw std::invalid_argument("measured Hamiltonian must be Hermitian");
  if (subspace.empty()) throw std::invalid_argument("empty subspace");
  Eigen::MatrixXcd m = restrict_dense(h_meas, subspace);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  const Eigen::VectorXd w = es.eigenvalues();
  const double radius = std::max(std::abs(w(0)), std::abs(w(w.size() - 1)));
  const double tol = degeneracy_tol >= 0 ? degeneracy_tol : std::max(1e-8 * radius, 1e-12);

  SpectralDecomposition dec{h_meas.space, subspace, {}};
  int lo = 0;
  for (int i = 1; i <= w.size(); ++i) {
    if (i < w.size() && w(i) - w(i - 1) <= tol) continue;
    SpectralCluster c;
    c.basis = es.eigenvectors().middleCols(lo, i - lo);
    c.eigenvalue = w.segment(lo, i - lo).mean();
    dec.clusters.push_back(std::move(c));
    lo = i;
  }
  return dec;
}

// ---------------------------- projected Hamiltonian --------------------------

// H_Z = sum_P P H_obs P over the measurement eigenprojections, returned dense
// in subspace coordinates. The strong coupling freezes transitions between
// clusters; what remains is the observed drive inside each cluster.
inline Eigen::MatrixXcd zeno_hamiltonian(const OperatorMatrix& h_obs,
                                         const SpectralDecomposition& dec) {
  require_same_space(h_obs.space, dec.space);
  Eigen::MatrixXcd ho = restrict_dense(h_obs, dec.subspace);
  Eigen::MatrixXcd hz = Eigen::MatrixXcd::Zero(ho.rows(), ho.cols());
  for (const auto& c : dec.clusters) hz += c.basis * (c.basis.adjoint() * ho * c.basis) * c.basis.adjoint();
  return hz;
}

// ------------------------- finite-coupling error bound ----------------------

namespace detail {

inline Eigen::MatrixXcd hermitian_propagator(const Eigen::MatrixXcd& h, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  Eigen::VectorXcd phases = (cx(0, -t) * es.eigenvalues().cast<cx>().array()).exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

// Max-norm distance between exp(-i (K*h_meas + h_obs) t) and its projected
// limit exp(-i K h_meas t) * exp(-i H_Z t). Shrinks like 1/K once the
// coupling dominates. Dense inputs (restrict first); dimension capped at 50.
inline double limiting_propagator_error(const Eigen::MatrixXcd& h_obs,
                                        const Eigen::MatrixXcd& h_meas, double K, double t) {
  const int n = static_cast<int>(h_obs.rows());
  if (n != h_obs.cols() || n != h_meas.rows() || n != h_meas.cols())
    throw std::invalid_argument("operator dimensions disagree");
  if (n > 50) throw std::invalid_argument("limiting propagator check capped at dimension 50");
  if (!(K > 0) || !(t >= 0)) throw std::invalid_argument("need K > 0 and t >= 0");
  if ((h_obs - h_obs.adjoint()).cwiseAbs().maxCoeff() > 1e-10 ||
      (h_meas - h_meas.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("operators must be Hermitian");

  const Eigen::MatrixXcd u_full = detail::hermitian_propagator(K * h_meas + h_obs, t);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h_meas);
  const Eigen::VectorXd w = es.eigenvalues();
  const double radius = std::max(std::abs(w(0)), std::abs(w(n - 1)));
  const double tol = std::max(1e-8 * radius, 1e-12);

  Eigen::MatrixXcd hz = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd dephase = Eigen::MatrixXcd::Zero(n, n);
  int lo = 0;
  for (int i = 1; i <= n; ++i) {
    if (i < n && w(i) - w(i - 1) <= tol) continue;
    const Eigen::MatrixXcd b = es.eigenvectors().middleCols(lo, i - lo);
    hz += b * (b.adjoint() * h_obs * b) * b.adjoint();
    dephase += std::exp(cx(0, -K * w.segment(lo, i - lo).mean() * t)) * (b * b.adjoint());
    lo = i;
  }
  const Eigen::MatrixXcd u_zeno = dephase * detail::hermitian_propagator(hz, t);
  return (u_full - u_zeno).cwiseAbs().maxCoeff();
}

// --------------------------- adiabatic elimination ---------------------------

// Effective two-level (or few-level) model after removing the detuned states
// at second order in the drive.
struct EffectiveModel {
  std::vector<int> retained;                    // global basis indices
  std::vector<std::string> retained_labels;
  std::vector<std::string> eliminated_labels;   // coupled, removed at 2nd order
  Eigen::MatrixXcd raw;                         // includes the induced diagonal shift
  Eigen::MatrixXcd compensated;                 // diagonal reset to its pre-elimination value
  double omega_over_lambda = 0;
  double omega_over_delta = 0;
};

// Second-order elimination of every subspace state outside `retained_labels`
// from the projected Hamiltonian h_zeno (subspace coordinates, as produced by
// zeno_hamiltonian). The eliminated block is diagonalized first, so the usual
// sum over intermediate states runs over its eigenmodes: raw = A - sum_k
// (V w_k)(V w_k)^dag / (b_k - E_ret). Coupled modes whose gap to the retained
// manifold falls below energy_tol make the expansion meaningless and raise an
// error; eliminated_labels lists the bare states supporting the coupled modes.
inline EffectiveModel adiabatic_eliminate(const Eigen::MatrixXcd& h_zeno,
                                          const SpectralDecomposition& dec,
                                          const std::vector<std::vector<int>>& retained_labels,
                                          const ModelParams& params,
                                          double energy_tol = 1e-9) {
  params.validate(/*require_delta=*/true);
  const int n = static_cast<int>(dec.subspace.size());
  if (h_zeno.rows() != n || h_zeno.cols() != n)
    throw std::invalid_argument("h_zeno does not match the decomposition subspace");
  if (retained_labels.empty()) throw std::invalid_argument("nothing retained");
  if ((h_zeno - h_zeno.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("projected Hamiltonian must be Hermitian");

  std::vector<int> rpos;
  for (const auto& lab : retained_labels) {
    const int gi = dec.space->index_of(lab);
    auto it = std::lower_bound(dec.subspace.begin(), dec.subspace.end(), gi);
    if (it == dec.subspace.end() || *it != gi)
      throw std::invalid_argument("retained state outside the closed subspace: " +
                                  dec.space->format_label(lab));
    rpos.push_back(static_cast<int>(it - dec.subspace.begin()));
  }
  std::vector<int> xpos;
  {
    std::vector<char> is_ret(static_cast<size_t>(n), 0);
    for (int r : rpos) is_ret[static_cast<size_t>(r)] = 1;
    for (int x = 0; x < n; ++x)
      if (!is_ret[static_cast<size_t>(x)]) xpos.push_back(x);
  }

  const int nr = static_cast<int>(rpos.size());
  const int nx = static_cast<int>(xpos.size());
  Eigen::MatrixXcd A(nr, nr), V(nr, nx), B(nx, nx);
  for (int a = 0; a < nr; ++a) {
    for (int b = 0; b < nr; ++b) A(a, b) = h_zeno(rpos[static_cast<size_t>(a)], rpos[static_cast<size_t>(b)]);
    for (int x = 0; x < nx; ++x) V(a, x) = h_zeno(rpos[static_cast<size_t>(a)], xpos[static_cast<size_t>(x)]);
  }
  for (int x = 0; x < nx; ++x)
    for (int y = 0; y < nx; ++y) B(x, y) = h_zeno(xpos[static_cast<size_t>(x)], xpos[static_cast<size_t>(y)]);

  const double e_ret = A.diagonal().real().mean();
  const double vscale = std::max(V.cwiseAbs().maxCoeff(), 1e-30);

  EffectiveModel out;
  out.omega_over_lambda = params.omega / params.lambda;
  out.omega_over_delta = params.omega / params.delta;
  out.raw = A;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(B);
  std::vector<char> supports(static_cast<size_t>(nx), 0);
  for (int k = 0; k < nx; ++k) {
    const Eigen::VectorXcd vk = V * es.eigenvectors().col(k);
    if (vk.cwiseAbs().maxCoeff() <= 1e-12 * vscale) continue;  // decoupled mode
    const double gap = es.eigenvalues()(k) - e_ret;
    if (std::abs(gap) < energy_tol)
      throw std::invalid_argument("eliminated state is degenerate with the retained manifold");
    out.raw -= vk * vk.adjoint() / gap;
    for (int x = 0; x < nx; ++x)
      if (std::norm(es.eigenvectors()(x, k)) > 1e-12) supports[static_cast<size_t>(x)] = 1;
  }
  for (int x = 0; x < nx; ++x)
    if (supports[static_cast<size_t>(x)])
      out.eliminated_labels.push_back(
          dec.space->format_label(dec.space->label_of(dec.subspace[static_cast<size_t>(xpos[static_cast<size_t>(x)])])));

  out.compensated = out.raw;
  for (int a = 0; a < nr; ++a) out.compensated(a, a) = A(a, a);
  for (int r : rpos) {
    out.retained.push_back(dec.subspace[static_cast<size_t>(r)]);
    out.retained_labels.push_back(
        dec.space->format_label(dec.space->label_of(dec.subspace[static_cast<size_t>(r)])));
  }
  return out;
}

// --------------------------------- gate time --------------------------------

// Time for the compensated exchange to rotate the gate pair by pi/4 in each
// branch: t = pi * delta / (2 * omega^2).
inline double gate_time(const ModelParams& p) {
  p.validate(/*require_delta=*/true);
  if (p.omega <= 0) throw std::invalid_argument("gate time undefined for omega = 0");
  return std::numbers::pi * p.delta / (2.0 * p.omega * p.omega);
}

}  // namespace zenofuse

// dynamics.hpp -- fixed-step RK4 propagation for Schrodinger and Lindblad
// dynamics, with trajectory recording, conservation guards, and an exact
// eigensolver path for small closed systems.
#pragma once

#include <zenofuse/hilbert.hpp>

#include <cmath>
#include <string>
#include <vector>

namespace zenofuse {

// Thrown when the integration itself goes bad (norm drift, trace drift,
// positivity loss). Distinct from std::invalid_argument so callers can map
// configuration mistakes and numerical breakdowns to different exit paths.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --------------------------------- options ---------------------------------

enum class IntegratorKind { rk4, expm };

struct Probe {
  std::string name;
  OperatorMatrix op;
};

// dt is in units of the inverse strong coupling; steps above 0.05 are outside
// the validated regime and rejected. snapshots is the number of recorded
// intervals (0 records only the endpoints when a trajectory is requested).
struct PropagationOptions {
  double dt = 0.02;
  IntegratorKind method = IntegratorKind::rk4;
  int snapshots = 200;
  bool store_states = false;
  std::optional<StateVector> fidelity_target;
  std::vector<Probe> probes;
  double norm_tol = 1e-6;        // pure-state norm drift abort threshold
  double trace_tol = 1e-6;       // density-matrix trace drift abort threshold
  double positivity_tol = 1e-6;  // allowed negative eigenvalue magnitude
};

// -------------------------------- trajectory --------------------------------

struct TrajectoryPoint {
  double t = 0;
  double fidelity = 0;      // vs options.fidelity_target; 0 when no target
  double trace = 0;         // norm^2 for pure states, tr(rho) for mixed
  double n_excitation = 0;  // <w>
  std::vector<double> probe_values;
};

struct Trajectory {
  std::vector<std::string> probe_names;
  std::vector<TrajectoryPoint> points;
  double min_eigenvalue_seen = 0;  // most negative eigenvalue met at checks
  std::vector<Eigen::VectorXcd> pure_states;   // filled when store_states
  std::vector<Eigen::MatrixXcd> mixed_states;  // filled when store_states
};

// (t, fidelity) pairs recomputed against an explicit target; needs stored
// states.
inline std::vector<std::pair<double, double>> fidelity_curve(const Trajectory& traj,
                                                             const StateVector& target) {
  std::vector<std::pair<double, double>> out;
  if (!traj.pure_states.empty()) {
    if (traj.pure_states.size() != traj.points.size())
      throw std::invalid_argument("trajectory state record is inconsistent");
    for (size_t k = 0; k < traj.points.size(); ++k)
      out.emplace_back(traj.points[k].t, std::norm(target.amps.dot(traj.pure_states[k])));
  } else if (!traj.mixed_states.empty()) {
    if (traj.mixed_states.size() != traj.points.size())
      throw std::invalid_argument("trajectory state record is inconsistent");
    for (size_t k = 0; k < traj.points.size(); ++k) {
      const cx f = target.amps.dot(traj.mixed_states[k] * target.amps);
      out.emplace_back(traj.points[k].t, f.real());
    }
  } else {
    throw std::invalid_argument("fidelity_curve needs store_states");
  }
  return out;
}

// --------------------------------- internals --------------------------------

namespace detail {

inline void check_options(const PropagationOptions& opt, double t) {
  if (!(t >= 0)) throw std::invalid_argument("propagation time must be >= 0");
  if (!(opt.dt > 0) || opt.dt > 0.05 + 1e-15)
    throw std::invalid_argument("dt must lie in (0, 0.05] inverse couplings");
  if (opt.snapshots < 0) throw std::invalid_argument("snapshots must be >= 0");
}

struct SnapshotPlan {
  double t_total;
  int count;  // recorded intervals
  int next = 0;

  bool due(double t_now) {
    if (count <= 0) return false;
    return t_now + 1e-12 >= t_total * next / count;
  }
  void advance(double t_now) {
    while (count > 0 && t_now + 1e-12 >= t_total * next / count) ++next;
  }
};

using RowMat = Eigen::Matrix<cx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// out = S * x for row-major dense x: entries grouped by source column so each
// touch is a contiguous row axpy. Faster than the library product at the tiny
// sparse sizes used here.
struct LeftKernel {
  struct Ent {
    int i, j;
    cx v;
  };
  std::vector<Ent> ents;

  static LeftKernel from(const SparseMat& s) {
    LeftKernel k;
    for (int c = 0; c < s.outerSize(); ++c)
      for (SparseMat::InnerIterator it(s, c); it; ++it)
        k.ents.push_back({static_cast<int>(it.row()), c, it.value()});
    return k;
  }

  void mul(const RowMat& x, RowMat& out) const {
    out.setZero();
    for (const auto& e : ents) out.row(e.i) += e.v * x.row(e.j);
  }
};

// out += L rho L^dag unrolled over nonzero pairs:
// out(i,k) += u * conj(w) * rho(j,m) for L(i,j) = u, L(k,m) = w. Worth it only
// while nnz(L)^2 stays small; protocol collapse operators have a few dozen
// entries each.
struct JumpKernel {
  struct Pair {
    int i, k, j, m;
    cx uw;
  };
  std::vector<Pair> pairs;

  static JumpKernel from(const SparseMat& l) {
    std::vector<std::tuple<int, int, cx>> nz;
    for (int c = 0; c < l.outerSize(); ++c)
      for (SparseMat::InnerIterator it(l, c); it; ++it)
        nz.emplace_back(static_cast<int>(it.row()), c, it.value());
    JumpKernel k;
    k.pairs.reserve(nz.size() * nz.size());
    for (const auto& [i, j, u] : nz)
      for (const auto& [kk, m, w] : nz) k.pairs.push_back({i, kk, j, m, u * std::conj(w)});
    return k;
  }

  void add(const RowMat& rho, RowMat& out) const {
    for (const auto& p : pairs) out(p.i, p.k) += p.uw * rho(p.j, p.m);
  }
};

}  // namespace detail

// ------------------------------- Schrodinger --------------------------------

struct SchrodingerResult {
  StateVector state;
  Trajectory trajectory;
};

// Integrate i d|psi>/dt = H |psi| from 0 to t. RK4 uses fixed steps of opt.dt
// (last step shortened); the expm path diagonalizes H once (Hermitian, dim <=
// 64) and is exact at every snapshot. Aborts with NumericalError if the norm
// drifts more than opt.norm_tol from 1.
inline SchrodingerResult propagate_schrodinger(const OperatorMatrix& h, const StateVector& psi0,
                                               double t, const PropagationOptions& opt = {}) {
  require_same_space(h.space, psi0.space);
  detail::check_options(opt, t);
  if (opt.fidelity_target) require_same_space(psi0.space, opt.fidelity_target->space);
  for (const auto& p : opt.probes) require_same_space(psi0.space, p.op.space);

  const OperatorMatrix wop = excitation_number_operator(psi0.space);
  SchrodingerResult res;
  res.trajectory.min_eigenvalue_seen = 0;
  for (const auto& p : opt.probes) res.trajectory.probe_names.push_back(p.name);

  Eigen::VectorXcd psi = psi0.amps;
  const double norm0 = psi.norm();

  auto record = [&](double tn, const Eigen::VectorXcd& v) {
    TrajectoryPoint pt;
    pt.t = tn;
    pt.trace = v.squaredNorm();
    pt.n_excitation = v.dot(wop.mat * v).real();
    pt.fidelity = opt.fidelity_target ? std::norm(opt.fidelity_target->amps.dot(v)) : 0.0;
    for (const auto& p : opt.probes) pt.probe_values.push_back(v.dot(p.op.mat * v).real());
    res.trajectory.points.push_back(std::move(pt));
    if (opt.store_states) res.trajectory.pure_states.push_back(v);
  };
  auto check_norm = [&](const Eigen::VectorXcd& v, double tn) {
    if (std::abs(v.norm() - norm0) > opt.norm_tol)
      throw NumericalError("norm drift exceeded tolerance at t = " + std::to_string(tn));
  };

  detail::SnapshotPlan plan{t, opt.snapshots};
  record(0.0, psi);
  plan.advance(0.0);

  if (t > 0 && opt.method == IntegratorKind::expm) {
    if (h.space->dim() > 64)
      throw std::invalid_argument("expm integrator capped at dimension 64");
    if (h.hermiticity_error() > 1e-10)
      throw std::invalid_argument("expm integrator requires a Hermitian Hamiltonian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(h.mat));
    auto at_time = [&](double tn) {
      Eigen::VectorXcd phases =
          (cx(0, -tn) * es.eigenvalues().cast<cx>().array()).exp();
      return (es.eigenvectors() *
              (phases.asDiagonal() * (es.eigenvectors().adjoint() * psi0.amps)))
          .eval();
    };
    const int snaps = std::max(opt.snapshots, 1);
    for (int k = 1; k <= snaps; ++k) {
      const double tn = t * k / snaps;
      psi = at_time(tn);
      check_norm(psi, tn);
      record(tn, psi);
    }
    res.state = {psi0.space, psi};
    return res;
  }

  const SparseMat& hm = h.mat;
  const cx mi(0, -1);
  double now = 0;
  Eigen::VectorXcd k1, k2, k3, k4, tmp;
  while (now < t - 1e-12) {
    const double step = std::min(opt.dt, t - now);
    k1 = mi * (hm * psi);
    tmp = psi + (step / 2) * k1;
    k2 = mi * (hm * tmp);
    tmp = psi + (step / 2) * k2;
    k3 = mi * (hm * tmp);
    tmp = psi + step * k3;
    k4 = mi * (hm * tmp);
    psi += (step / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    now += step;
    check_norm(psi, now);
    if (plan.due(now)) {
      record(now, psi);
      plan.advance(now);
    }
  }
  if (t > 0 && res.trajectory.points.back().t < t - 1e-12) record(t, psi);
  res.state = {psi0.space, psi};
  return res;
}

// --------------------------------- Lindblad ---------------------------------

struct LindbladResult {
  DensityOperator state;
  Trajectory trajectory;
};

// Integrate the master equation
//   d rho/dt = -i[H, rho] + sum_k L_k rho L_k^dag - {L_k^dag L_k, rho}/2
// with fixed-step RK4. rho is re-symmetrized after every step; trace drift
// beyond opt.trace_tol and negative eigenvalues beyond opt.positivity_tol
// (checked at snapshots) abort with NumericalError. Zero collapse operators
// are skipped.
inline LindbladResult propagate_lindblad(const OperatorMatrix& h,
                                         const std::vector<OperatorMatrix>& collapse,
                                         const DensityOperator& rho0, double t,
                                         const PropagationOptions& opt = {}) {
  require_same_space(h.space, rho0.space);
  detail::check_options(opt, t);
  if (opt.method == IntegratorKind::expm)
    throw std::invalid_argument("the open-system propagator is RK4 only");
  if (opt.fidelity_target) require_same_space(rho0.space, opt.fidelity_target->space);
  for (const auto& p : opt.probes) require_same_space(rho0.space, p.op.space);
  if (rho0.hermiticity_error() > 1e-10)
    throw std::invalid_argument("initial density matrix must be Hermitian");

  std::vector<SparseMat> ls;
  for (const auto& l : collapse) {
    require_same_space(h.space, l.space);
    if (l.mat.norm() > 0) ls.push_back(l.mat);
  }

  // Non-Hermitian drift collects H and the anticommutator halves:
  // d rho = -i (H_nh rho - rho H_nh^dag) + sum L rho L^dag, and for Hermitian
  // rho the first bracket is M - M^dag with M = H_nh rho (one product).
  SparseMat hnh = h.mat;
  for (const auto& l : ls) hnh += cx(0, -0.5) * SparseMat(SparseMat(l.adjoint()) * l);

  const detail::LeftKernel drift = detail::LeftKernel::from(hnh);
  std::vector<detail::JumpKernel> jumps;
  for (const auto& l : ls) jumps.push_back(detail::JumpKernel::from(l));

  const OperatorMatrix wop = excitation_number_operator(rho0.space);
  LindbladResult res;
  for (const auto& p : opt.probes) res.trajectory.probe_names.push_back(p.name);
  res.trajectory.min_eigenvalue_seen = 0;

  const int n = rho0.space->dim();
  detail::RowMat rho = 0.5 * (rho0.mat + rho0.mat.adjoint());
  const double trace0 = rho.trace().real();

  detail::RowMat m(n, n);
  auto rhs = [&](const detail::RowMat& r, detail::RowMat& out) {
    // out = -i M + (-i M)^dag + sum_k L_k r L_k^dag, exact for Hermitian r
    drift.mul(r, m);
    for (int i = 0; i < n; ++i) {
      out(i, i) = cx(0, -1) * m(i, i) + std::conj(cx(0, -1) * m(i, i));
      for (int j = i + 1; j < n; ++j) {
        const cx a = cx(0, -1) * m(i, j);
        const cx b = cx(0, -1) * m(j, i);
        out(i, j) = a + std::conj(b);
        out(j, i) = b + std::conj(a);
      }
    }
    for (const auto& jk : jumps) jk.add(r, out);
  };

  auto record = [&](double tn, const detail::RowMat& r) {
    TrajectoryPoint pt;
    pt.t = tn;
    pt.trace = r.trace().real();
    Eigen::MatrixXcd rc = r;
    pt.n_excitation = (wop.mat * rc).eval().trace().real();
    if (opt.fidelity_target) {
      const auto& tv = opt.fidelity_target->amps;
      pt.fidelity = tv.dot(rc * tv).real();
    }
    for (const auto& p : opt.probes)
      pt.probe_values.push_back((p.op.mat * rc).eval().trace().real());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rc, Eigen::EigenvaluesOnly);
    const double mineig = es.eigenvalues().minCoeff();
    res.trajectory.min_eigenvalue_seen = std::min(res.trajectory.min_eigenvalue_seen, mineig);
    if (mineig < -opt.positivity_tol)
      throw NumericalError("density matrix lost positivity at t = " + std::to_string(tn));
    res.trajectory.points.push_back(std::move(pt));
    if (opt.store_states) res.trajectory.mixed_states.push_back(rc);
  };

  detail::SnapshotPlan plan{t, opt.snapshots};
  record(0.0, rho);
  plan.advance(0.0);

  detail::RowMat k1(n, n), k2(n, n), k3(n, n), k4(n, n), stage(n, n);
  double now = 0;
  while (now < t - 1e-12) {
    const double step = std::min(opt.dt, t - now);
    rhs(rho, k1);
    stage = rho + (step / 2) * k1;
    rhs(stage, k2);
    stage = rho + (step / 2) * k2;
    rhs(stage, k3);
    stage = rho + step * k3;
    rhs(stage, k4);
    rho += (step / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    rho = 0.5 * (rho + rho.adjoint().eval());
    now += step;
    if (std::abs(rho.trace().real() - trace0) > opt.trace_tol)
      throw NumericalError("trace drift exceeded tolerance at t = " + std::to_string(now));
    if (plan.due(now)) {
      record(now, rho);
      plan.advance(now);
    }
  }
  if (t > 0 && res.trajectory.points.back().t < t - 1e-12) record(t, rho);
  res.state = {rho0.space, Eigen::MatrixXcd(rho)};
  return res;
}

}  // namespace zenofuse

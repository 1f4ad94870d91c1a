#include <catch2/catch_amalgamated.hpp>

#include <zenofuse/dynamics.hpp>
#include <zenofuse/hamiltonian.hpp>
#include <zenofuse/zeno.hpp>

using namespace zenofuse;
using Catch::Approx;

TEST_CASE("Rabi oscillation against the analytic solution", "[dynamics]") {
  auto sp = build_space({Factor::make_atom()});
  const double om = 0.3;
  auto up = atom_transition(sp, 0, atom::e, atom::g1);
  auto h = om * up + om * up.adjoint();
  h.hermitian_hint = true;
  auto psi0 = ket(sp, {atom::g1});

  PropagationOptions opt;
  opt.dt = 0.01;
  opt.snapshots = 0;
  const double t = 3.7;
  auto rk = propagate_schrodinger(h, psi0, t, opt);
  const double pe = std::norm(rk.state.amps(sp->index_of({atom::e})));
  CHECK(pe == Approx(std::pow(std::sin(om * t), 2)).margin(1e-8));

  PropagationOptions eopt = opt;
  eopt.method = IntegratorKind::expm;
  auto ex = propagate_schrodinger(h, psi0, t, eopt);
  CHECK((ex.state.amps - rk.state.amps).norm() < 1e-7);
  CHECK(ex.state.norm() == Approx(1.0).margin(1e-12));
}

TEST_CASE("gate rotation of the two-atom pair at the working point", "[dynamics]") {
  ModelParams p;
  p.omega = 0.01;
  p.delta = 0.8;
  auto sp = protocol_space(ModelKind::single_cavity, false);
  auto h = single_cavity_hamiltonian(p, sp) +
           stark_compensation(p, sp, ModelKind::single_cavity);
  auto psi0 = ket(sp, {atom::g0, atom::g1, 0});

  PropagationOptions opt;
  opt.snapshots = 0;
  auto res = propagate_schrodinger(h, psi0, gate_time(p), opt);

  const cx a01 = res.state.amps(sp->index_of({atom::g0, atom::g1, 0}));
  const cx a10 = res.state.amps(sp->index_of({atom::g1, atom::g0, 0}));
  CHECK(std::norm(a01) == Approx(0.5).margin(0.01));
  CHECK(std::norm(a10) == Approx(0.5).margin(0.01));

  // the transferred amplitude lags the kept one by pi/2
  const cx ratio = a10 / a01;
  CHECK(ratio.real() == Approx(0.0).margin(0.01));
  CHECK(ratio.imag() == Approx(-1.0).margin(0.01));

  // photon leakage stays tiny through the whole rotation
  const double leak =
      expectation(photon_number_operator(sp), res.state).real();
  CHECK(leak < 1e-3);

  // the double-excited register only picks up phase
  auto res11 = propagate_schrodinger(h, ket(sp, {atom::g1, atom::g1, 0}), gate_time(p), opt);
  CHECK(std::norm(res11.state.amps(sp->index_of({atom::g1, atom::g1, 0}))) >= 0.99);
  // the empty register is exactly dark
  auto res00 = propagate_schrodinger(h, ket(sp, {atom::g0, atom::g0, 0}), gate_time(p), opt);
  CHECK(std::norm(res00.state.amps(sp->index_of({atom::g0, atom::g0, 0}))) ==
        Approx(1.0).margin(1e-9));
}

TEST_CASE("damped cavity decays at the analytic rate", "[dynamics]") {
  auto sp = build_space({Factor::mode(2)});
  ModelParams p;  // only used for rates here
  const double kappa = 0.1;
  auto a = mode_annihilator(sp, 0);
  std::vector<OperatorMatrix> ls = {std::sqrt(kappa) * a};
  auto rho0 = DensityOperator::from_pure(ket(sp, {1}));

  PropagationOptions opt;
  opt.snapshots = 100;
  auto res = propagate_lindblad(zero_operator(sp), ls, rho0, 10.0, opt);

  REQUIRE(res.trajectory.points.size() >= 100);
  for (const auto& pt : res.trajectory.points) {
    CHECK(std::abs(pt.n_excitation - std::exp(-kappa * pt.t)) < 1e-4);
    CHECK(std::abs(pt.trace - 1.0) < 1e-9);
  }
  CHECK(res.trajectory.min_eigenvalue_seen > -1e-9);
  CHECK(res.state.hermiticity_error() < 1e-12);

  // fourth-order convergence: halving dt moves the endpoint far below 1e-6
  auto tgt = ket(sp, {0});
  PropagationOptions fine = opt;
  fine.dt = 0.01;
  auto res2 = propagate_lindblad(zero_operator(sp), ls, rho0, 10.0, fine);
  CHECK(std::abs(fidelity(res.state, tgt) - fidelity(res2.state, tgt)) < 1e-6);
}

TEST_CASE("lossless open-system run matches the closed propagator", "[dynamics]") {
  ModelParams p;
  p.omega = 0.05;
  p.delta = 0.8;
  auto sp = protocol_space(ModelKind::single_cavity, false);
  auto h = single_cavity_hamiltonian(p, sp);
  auto ls = collapse_operators(p, sp, ModelKind::single_cavity);  // all rates zero
  auto psi0 = superpose({{cx(1, 0), ket(sp, {atom::g0, atom::g1, 0})},
                         {cx(0, 1), ket(sp, {atom::g1, atom::g0, 0})}});

  PropagationOptions opt;
  opt.snapshots = 0;
  const double t = 50.0;
  auto closed = propagate_schrodinger(h, psi0, t, opt);
  auto open = propagate_lindblad(h, ls, DensityOperator::from_pure(psi0), t, opt);
  CHECK(fidelity(open.state, closed.state) == Approx(1.0).margin(1e-8));
}

TEST_CASE("trajectory recording shape and probes", "[dynamics]") {
  auto sp = build_space({Factor::mode(2)});
  auto a = mode_annihilator(sp, 0);
  std::vector<OperatorMatrix> ls = {std::sqrt(0.2) * a};

  PropagationOptions opt;
  opt.snapshots = 50;
  opt.fidelity_target = ket(sp, {0});
  opt.probes.push_back({"n_mode", photon_number_operator(sp)});
  auto res = propagate_lindblad(zero_operator(sp), ls, DensityOperator::from_pure(ket(sp, {1})),
                                5.0, opt);

  REQUIRE(res.trajectory.probe_names == std::vector<std::string>{"n_mode"});
  REQUIRE(res.trajectory.points.size() >= 51);
  double prev = -1;
  for (const auto& pt : res.trajectory.points) {
    CHECK(pt.t > prev);
    prev = pt.t;
    REQUIRE(pt.probe_values.size() == 1);
    CHECK(pt.probe_values[0] == Approx(pt.n_excitation).margin(1e-12));
  }
  CHECK(res.trajectory.points.front().t == 0.0);
  CHECK(res.trajectory.points.back().t == Approx(5.0));
  // fidelity against vacuum grows monotonically under pure decay
  CHECK(res.trajectory.points.back().fidelity > res.trajectory.points.front().fidelity);
}

TEST_CASE("fidelity_curve recomputes from stored states", "[dynamics]") {
  auto sp = build_space({Factor::make_atom()});
  auto up = atom_transition(sp, 0, atom::e, atom::g1);
  auto h = 0.3 * up + 0.3 * up.adjoint();
  PropagationOptions opt;
  opt.dt = 0.01;
  opt.snapshots = 20;
  opt.store_states = true;
  opt.fidelity_target = ket(sp, {atom::g1});
  auto res = propagate_schrodinger(h, ket(sp, {atom::g1}), 2.0, opt);

  auto curve = fidelity_curve(res.trajectory, ket(sp, {atom::g1}));
  REQUIRE(curve.size() == res.trajectory.points.size());
  for (size_t k = 0; k < curve.size(); ++k) {
    CHECK(curve[k].first == Approx(res.trajectory.points[k].t));
    CHECK(curve[k].second == Approx(res.trajectory.points[k].fidelity).margin(1e-12));
  }

  PropagationOptions nostore = opt;
  nostore.store_states = false;
  auto res2 = propagate_schrodinger(h, ket(sp, {atom::g1}), 2.0, nostore);
  CHECK_THROWS_AS(fidelity_curve(res2.trajectory, ket(sp, {atom::g1})), std::invalid_argument);
}

TEST_CASE("integration guards", "[dynamics]") {
  auto sp = build_space({Factor::make_atom()});
  auto up = atom_transition(sp, 0, atom::e, atom::g1);
  auto h = 40.0 * up + 40.0 * up.adjoint();
  auto psi0 = ket(sp, {atom::g1});

  PropagationOptions opt;
  opt.snapshots = 0;
  opt.dt = 0.05;
  CHECK_THROWS_AS(propagate_schrodinger(h, psi0, 10.0, opt), NumericalError);

  PropagationOptions bad;
  bad.dt = 0.06;
  CHECK_THROWS_AS(propagate_schrodinger(h, psi0, 1.0, bad), std::invalid_argument);
  bad.dt = 0.0;
  CHECK_THROWS_AS(propagate_schrodinger(h, psi0, 1.0, bad), std::invalid_argument);
  CHECK_THROWS_AS(propagate_schrodinger(h, psi0, -1.0, PropagationOptions{}),
                  std::invalid_argument);

  // open-system guards
  auto msp = build_space({Factor::mode(2)});
  auto a = mode_annihilator(msp, 0);
  auto rho0 = DensityOperator::from_pure(ket(msp, {1}));
  std::vector<OperatorMatrix> hot = {std::sqrt(400.0) * a};
  PropagationOptions wide;
  wide.snapshots = 0;
  wide.dt = 0.05;
  CHECK_THROWS_AS(propagate_lindblad(zero_operator(msp), hot, rho0, 2.0, wide), NumericalError);

  PropagationOptions ex;
  ex.method = IntegratorKind::expm;
  CHECK_THROWS_AS(propagate_lindblad(zero_operator(msp), hot, rho0, 1.0, ex),
                  std::invalid_argument);

  // a slightly negative initial matrix trips the positivity check immediately
  DensityOperator dented = rho0;
  dented.mat(0, 0) = -2e-5;
  CHECK_THROWS_AS(
      propagate_lindblad(zero_operator(msp), {std::sqrt(0.1) * a}, dented, 1.0,
                         PropagationOptions{}),
      NumericalError);

  // expm needs a Hermitian generator and a small space
  auto big = build_space({Factor::mode(70)});
  PropagationOptions ex2;
  ex2.method = IntegratorKind::expm;
  ex2.snapshots = 0;
  CHECK_THROWS_AS(
      propagate_schrodinger(zero_operator(big), ket(big, {0}), 1.0, ex2),
      std::invalid_argument);
}

#include <catch2/catch_amalgamated.hpp>

#include <zenofuse/hamiltonian.hpp>

using namespace zenofuse;
using Catch::Approx;

namespace {

cx element(const OperatorMatrix& h, const std::vector<int>& bra, const std::vector<int>& ket) {
  return h.mat.coeff(h.space->index_of(bra), h.space->index_of(ket));
}

double commutator_norm(const OperatorMatrix& a, const OperatorMatrix& b) {
  SparseMat c = a.mat * b.mat - b.mat * a.mat;
  double m = 0;
  for (int k = 0; k < c.outerSize(); ++k)
    for (SparseMat::InnerIterator it(c, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

}  // namespace

TEST_CASE("parameter validation", "[hamiltonian]") {
  ModelParams p;
  REQUIRE_NOTHROW(p.validate());

  ModelParams bad = p;
  bad.lambda = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.omega = -0.1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.kappa = -1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.delta = 0;
  REQUIRE_NOTHROW(bad.validate());
  CHECK_THROWS_AS(bad.validate(/*require_delta=*/true), std::invalid_argument);

  // weak-drive guard: omega/lambda above the limit is rejected unless overridden
  bad = p;
  bad.omega = 0.2;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.enforce_ratio = false;
  REQUIRE_NOTHROW(bad.validate());
  bad.enforce_ratio = true;
  bad.ratio_limit = 0.25;
  REQUIRE_NOTHROW(bad.validate());
}

TEST_CASE("protocol spaces have the expected dimensions", "[hamiltonian]") {
  CHECK(protocol_space(ModelKind::single_cavity, false)->dim() == 15);
  CHECK(protocol_space(ModelKind::cavity_fiber, false)->dim() == 30);
  CHECK(protocol_space(ModelKind::single_cavity, true)->dim() == 60);
  CHECK(protocol_space(ModelKind::cavity_fiber, true)->dim() == 120);
}

TEST_CASE("single-cavity Hamiltonian structure", "[hamiltonian]") {
  ModelParams p;
  p.lambda = 1.3;
  p.omega = 0.07;
  p.delta = 0.8;
  auto sp = protocol_space(ModelKind::single_cavity, false);
  auto h = single_cavity_hamiltonian(p, sp);

  CHECK(h.hermiticity_error() < 1e-14);
  CHECK(commutator_norm(h, excitation_number_operator(sp)) < 1e-13);

  using std::vector;
  CHECK(element(h, {atom::e, atom::g1, 0}, {atom::g0, atom::g1, 1}).real() == Approx(p.lambda));
  CHECK(element(h, {atom::g1, atom::e, 0}, {atom::g1, atom::g0, 1}).real() == Approx(p.lambda));
  CHECK(element(h, {atom::e, atom::g1, 0}, {atom::g1, atom::g1, 0}).real() == Approx(p.omega));
  CHECK(element(h, {atom::e, atom::g1, 0}, {atom::e, atom::g1, 0}).real() == Approx(p.delta));
  CHECK(element(h, {atom::e, atom::e, 0}, {atom::e, atom::e, 0}).real() == Approx(2 * p.delta));
  CHECK(std::abs(element(h, {atom::g0, atom::g0, 0}, {atom::g0, atom::g0, 0})) < 1e-15);
  // drive never moves the photon
  CHECK(std::abs(element(h, {atom::g0, atom::g0, 1}, {atom::g0, atom::g1, 0})) < 1e-15);
}

TEST_CASE("coupling part annihilates its dark states and pins the bright pair",
          "[hamiltonian]") {
  ModelParams p;
  p.lambda = 0.9;
  auto sp = protocol_space(ModelKind::single_cavity, false);
  auto hc = coupling_hamiltonian(p, sp, ModelKind::single_cavity);

  // |g0 g1, 0> carries no convertible excitation for the coupling alone
  auto dark = ket(sp, {atom::g0, atom::g1, 0});
  CHECK((hc * dark).norm() < 1e-15);

  // (|g0 e,0> - sqrt(2)|g0 g0,1> + |e g0,0>)/2 is the -sqrt(2)*lambda line
  auto psi2 = superpose({{cx(1, 0), ket(sp, {atom::g0, atom::e, 0})},
                         {cx(-std::sqrt(2.0), 0), ket(sp, {atom::g0, atom::g0, 1})},
                         {cx(1, 0), ket(sp, {atom::e, atom::g0, 0})}});
  auto hv = hc * psi2;
  CHECK((hv.amps + std::sqrt(2.0) * p.lambda * psi2.amps).norm() < 1e-13);
}

TEST_CASE("cavity-fiber Hamiltonian structure", "[hamiltonian]") {
  ModelParams p;
  p.lambda = 1.0;
  p.omega = 0.05;
  p.delta = 0.8;
  p.fiber_v = 1.7;
  auto sp = protocol_space(ModelKind::cavity_fiber, false);
  auto h = cavity_fiber_hamiltonian(p, sp);

  CHECK(h.hermiticity_error() < 1e-14);
  CHECK(commutator_norm(h, excitation_number_operator(sp)) < 1e-13);

  // atom 0 talks to cavity_A (mode 0), atom 1 to cavity_B (mode 2)
  CHECK(element(h, {atom::e, atom::g1, 0, 0, 0}, {atom::g0, atom::g1, 1, 0, 0}).real() ==
        Approx(p.lambda));
  CHECK(element(h, {atom::g0, atom::e, 0, 0, 0}, {atom::g0, atom::g0, 0, 0, 1}).real() ==
        Approx(p.lambda));
  CHECK(std::abs(element(h, {atom::e, atom::g1, 0, 0, 0}, {atom::g0, atom::g1, 0, 0, 1})) <
        1e-15);
  // fiber hops to both cavities
  CHECK(element(h, {atom::g0, atom::g1, 0, 1, 0}, {atom::g0, atom::g1, 1, 0, 0}).real() ==
        Approx(p.fiber_v));
  CHECK(element(h, {atom::g0, atom::g1, 0, 1, 0}, {atom::g0, atom::g1, 0, 0, 1}).real() ==
        Approx(p.fiber_v));

  CHECK_THROWS_AS(cavity_fiber_hamiltonian(p, protocol_space(ModelKind::single_cavity, false)),
                  std::invalid_argument);
  ModelParams noweld = p;
  noweld.fiber_v = 0;
  CHECK_THROWS_AS(cavity_fiber_hamiltonian(noweld, sp), std::invalid_argument);
}

TEST_CASE("flag factors ride along as identity", "[hamiltonian]") {
  ModelParams p;
  auto flat = protocol_space(ModelKind::single_cavity, false);
  auto flagged = protocol_space(ModelKind::single_cavity, true);
  auto h = single_cavity_hamiltonian(p, flagged);

  // every flag block equals the unflagged Hamiltonian; no cross-flag terms
  auto h0 = single_cavity_hamiltonian(p, flat);
  for (int f = 0; f < 4; ++f) {
    for (int i = 0; i < flat->dim(); ++i) {
      auto li = flat->label_of(i);
      std::vector<int> fi = {f};
      fi.insert(fi.end(), li.begin(), li.end());
      for (int j = 0; j < flat->dim(); ++j) {
        auto lj = flat->label_of(j);
        std::vector<int> fj = {f};
        fj.insert(fj.end(), lj.begin(), lj.end());
        if (std::abs(element(h, fi, fj) - h0.mat.coeff(i, j)) > 1e-15) {
          FAIL("flag block mismatch at f=" << f);
        }
      }
    }
  }
  // one representative cross-flag element vanishes
  CHECK(std::abs(element(h, {0, atom::e, atom::g1, 0}, {1, atom::g1, atom::g1, 0})) < 1e-15);
}

TEST_CASE("collapse operator lists", "[hamiltonian]") {
  ModelParams p;
  p.kappa = 0.04;
  p.gamma = 0.08;
  p.kappa_f = 0.09;
  auto sp1 = protocol_space(ModelKind::single_cavity, false);
  auto ops1 = collapse_operators(p, sp1, ModelKind::single_cavity);
  REQUIRE(ops1.size() == 5);
  CHECK(ops1[0].mat.coeff(sp1->index_of({atom::g0, atom::g0, 0}),
                          sp1->index_of({atom::g0, atom::g0, 1}))
            .real() == Approx(std::sqrt(p.kappa)));
  CHECK(ops1[1].mat.coeff(sp1->index_of({atom::g0, atom::g1, 0}),
                          sp1->index_of({atom::e, atom::g1, 0}))
            .real() == Approx(std::sqrt(p.gamma / 2)));
  CHECK(ops1[4].mat.coeff(sp1->index_of({atom::g0, atom::g1, 0}),
                          sp1->index_of({atom::g0, atom::e, 0}))
            .real() == Approx(std::sqrt(p.gamma / 2)));

  auto sp2 = protocol_space(ModelKind::cavity_fiber, false);
  auto ops2 = collapse_operators(p, sp2, ModelKind::cavity_fiber);
  REQUIRE(ops2.size() == 7);
  // order: cavity_A, cavity_B, fiber, then atomic
  CHECK(ops2[2].mat.coeff(sp2->index_of({atom::g0, atom::g0, 0, 0, 0}),
                          sp2->index_of({atom::g0, atom::g0, 0, 1, 0}))
            .real() == Approx(std::sqrt(p.kappa_f)));

  // zero rates keep the shape but produce zero matrices
  ModelParams lossless;
  auto z = collapse_operators(lossless, sp1, ModelKind::single_cavity);
  REQUIRE(z.size() == 5);
  for (const auto& l : z) CHECK(l.mat.norm() == 0.0);
}

TEST_CASE("Stark compensation matches the second-order shift", "[hamiltonian]") {
  ModelParams p;
  p.omega = 0.05;
  p.delta = 0.8;
  const double shift = p.omega * p.omega / (2 * p.delta);

  for (auto kind : {ModelKind::single_cavity, ModelKind::cavity_fiber}) {
    auto sp = protocol_space(kind, false);
    auto c = stark_compensation(p, sp, kind);
    CHECK(c.hermiticity_error() < 1e-15);
    std::vector<int> vac(sp->factors().size() - 2, 0);
    auto lab = [&](int a0, int a1) {
      std::vector<int> l = {a0, a1};
      l.insert(l.end(), vac.begin(), vac.end());
      return l;
    };
    CHECK(element(c, lab(atom::g0, atom::g1), lab(atom::g0, atom::g1)).real() == Approx(shift));
    CHECK(element(c, lab(atom::g1, atom::g0), lab(atom::g1, atom::g0)).real() == Approx(shift));
    CHECK(std::abs(element(c, lab(atom::g0, atom::g0), lab(atom::g0, atom::g0)))  < 1e-15);
    CHECK(std::abs(element(c, lab(atom::g1, atom::g1), lab(atom::g1, atom::g1)))  < 1e-15);
    // photon-excited pair states are not compensated
    std::vector<int> l1 = lab(atom::g0, atom::g1);
    l1.back() = 1;
    CHECK(std::abs(element(c, l1, l1)) < 1e-15);
  }

  ModelParams nodelta = p;
  nodelta.delta = 0;
  CHECK_THROWS_AS(
      stark_compensation(nodelta, protocol_space(ModelKind::single_cavity, false),
                         ModelKind::single_cavity),
      std::invalid_argument);
}

TEST_CASE("phase gate marks the correcting party's W branches", "[hamiltonian]") {
  auto sp = protocol_space(ModelKind::single_cavity, true);
  auto ga = phase_gate(sp, Party::A);
  auto gb = phase_gate(sp, Party::B);

  auto probe = [&](const OperatorMatrix& g, int flag) {
    auto v = g * ket(sp, {flag, atom::g0, atom::g1, 0});
    return v.amps(sp->index_of({flag, atom::g0, atom::g1, 0}));
  };
  CHECK(probe(ga, 0) == cx(1, 0));   // TT
  CHECK(probe(ga, 1) == cx(1, 0));   // TW: A side is T
  CHECK(probe(ga, 2) == cx(0, 1));   // WT: A side is W
  CHECK(probe(ga, 3) == cx(0, 1));   // WW
  CHECK(probe(gb, 1) == cx(0, 1));
  CHECK(probe(gb, 2) == cx(1, 0));
  CHECK(probe(gb, 3) == cx(0, 1));

  // unitary, and the A/B gates commute
  SparseMat u = ga.mat * SparseMat(ga.mat.adjoint());
  SparseMat id(sp->dim(), sp->dim());
  id.setIdentity();
  CHECK((u - id).norm() < 1e-15);
  CHECK((ga.mat * gb.mat - gb.mat * ga.mat).norm() < 1e-15);

  CHECK_THROWS_AS(phase_gate(protocol_space(ModelKind::single_cavity, false), Party::A),
                  std::invalid_argument);
}

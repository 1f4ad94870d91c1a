#include <catch2/catch_amalgamated.hpp>

#include <zenofuse/hilbert.hpp>

using namespace zenofuse;
using Catch::Approx;

namespace {

// Brute-force enumeration over the full product, used as an order oracle.
std::vector<std::vector<int>> enumerate_naive(const std::vector<Factor>& fs,
                                              std::optional<int> cap) {
  std::vector<std::vector<int>> out;
  std::vector<int> label(fs.size(), 0);
  while (true) {
    int w = 0;
    for (size_t k = 0; k < fs.size(); ++k) {
      if (fs[k].kind == FactorKind::atom) w += (label[k] != atom::g0);
      if (fs[k].kind == FactorKind::mode) w += label[k];
    }
    if (!cap || w <= *cap) out.push_back(label);
    int k = static_cast<int>(fs.size()) - 1;
    for (; k >= 0; --k) {
      if (++label[static_cast<size_t>(k)] < fs[static_cast<size_t>(k)].dim) break;
      label[static_cast<size_t>(k)] = 0;
    }
    if (k < 0) break;
  }
  return out;
}

SpacePtr two_atoms_one_mode() {
  return build_space({Factor::make_atom(), Factor::make_atom(), Factor::mode(2)}, 2);
}

}  // namespace

TEST_CASE("sector-capped dimensions", "[hilbert]") {
  CHECK(two_atoms_one_mode()->dim() == 15);
  CHECK(build_space({Factor::make_atom(), Factor::make_atom(), Factor::mode(2),
                     Factor::mode(2), Factor::mode(2)},
                    2)
            ->dim() == 30);
  CHECK(build_space({Factor::flag(4), Factor::make_atom(), Factor::make_atom(), Factor::mode(2)}, 2)
            ->dim() == 60);
  CHECK(build_space({Factor::flag(4), Factor::make_atom(), Factor::make_atom(), Factor::mode(2),
                     Factor::mode(2), Factor::mode(2)},
                    2)
            ->dim() == 120);
}

TEST_CASE("enumeration is lexicographic and matches naive filter", "[hilbert]") {
  std::vector<Factor> fs = {Factor::flag(4), Factor::make_atom(), Factor::make_atom(),
                            Factor::mode(2)};
  for (auto cap : {std::optional<int>{}, std::optional<int>{2}, std::optional<int>{0}}) {
    auto sp = build_space(fs, cap);
    auto naive = enumerate_naive(fs, cap);
    REQUIRE(sp->dim() == static_cast<int>(naive.size()));
    for (int i = 0; i < sp->dim(); ++i) CHECK(sp->label_of(i) == naive[static_cast<size_t>(i)]);
  }
}

TEST_CASE("label/index round trip", "[hilbert]") {
  auto sp = build_space({Factor::make_atom(), Factor::make_atom(), Factor::mode(2),
                         Factor::mode(2), Factor::mode(2)},
                        2);
  for (int i = 0; i < sp->dim(); ++i) CHECK(sp->index_of(sp->label_of(i)) == i);
}

TEST_CASE("weight counts g1, e and photons", "[hilbert]") {
  auto sp = two_atoms_one_mode();
  CHECK(sp->weight({atom::g0, atom::g0, 0}) == 0);
  CHECK(sp->weight({atom::g0, atom::g1, 0}) == 1);
  CHECK(sp->weight({atom::e, atom::g1, 0}) == 2);
  CHECK(sp->weight({atom::g0, atom::g0, 2}) == 2);
  auto flagged = build_space({Factor::flag(4), Factor::make_atom(), Factor::make_atom(),
                              Factor::mode(2)},
                             2);
  CHECK(flagged->weight({3, atom::g0, atom::g1, 1}) == 2);  // flag carries no weight
}

TEST_CASE("labels outside the sector are rejected", "[hilbert]") {
  auto sp = two_atoms_one_mode();
  CHECK(sp->try_index({atom::e, atom::e, 0}).has_value());        // w = 2, inside
  CHECK_FALSE(sp->try_index({atom::e, atom::e, 1}).has_value());  // w = 3, outside
  CHECK_THROWS_AS(sp->index_of({atom::e, atom::e, 1}), std::invalid_argument);
  CHECK_THROWS_AS(sp->index_of({atom::g0, atom::g0, 3}), std::invalid_argument);
  CHECK_THROWS_AS(sp->index_of({atom::g0, atom::g0}), std::invalid_argument);
}

TEST_CASE("constructor rejects bad factor lists", "[hilbert]") {
  CHECK_THROWS_AS(build_space({}, std::nullopt), std::invalid_argument);
  CHECK_THROWS_AS(Factor::mode(-1), std::invalid_argument);
  CHECK_THROWS_AS(Factor::flag(0), std::invalid_argument);
  CHECK_THROWS_AS(build_space({Factor::make_atom()}, -1), std::invalid_argument);
}

TEST_CASE("ket and superpose", "[hilbert]") {
  auto sp = two_atoms_one_mode();
  auto psi1 = superpose({{cx(-1, 0), ket(sp, {atom::g0, atom::e, 0})},
                         {cx(1, 0), ket(sp, {atom::e, atom::g0, 0})}});
  CHECK(psi1.norm() == Approx(1.0));
  CHECK(std::abs(psi1.amps(sp->index_of({atom::g0, atom::e, 0})) + 1.0 / std::sqrt(2.0)) < 1e-15);

  // |psi2> = (|g0 e,0> - sqrt(2)|g0 g0,1> + |e g0,0>)/2 holds half a photon.
  auto psi2 = superpose({{cx(1, 0), ket(sp, {atom::g0, atom::e, 0})},
                         {cx(-std::sqrt(2.0), 0), ket(sp, {atom::g0, atom::g0, 1})},
                         {cx(1, 0), ket(sp, {atom::e, atom::g0, 0})}});
  CHECK(expectation(photon_number_operator(sp), psi2).real() == Approx(0.5));
  CHECK(expectation(excitation_number_operator(sp), psi2).real() == Approx(1.0));

  CHECK_THROWS_AS(superpose({}), std::invalid_argument);
  CHECK_THROWS_AS(superpose({{cx(1, 0), psi1}, {cx(-1, 0), psi1}}), std::invalid_argument);
  auto other = build_space({Factor::make_atom(), Factor::make_atom(), Factor::mode(2)});
  CHECK_THROWS_AS(superpose({{cx(1, 0), psi1}, {cx(1, 0), ket(other, {0, 0, 0})}}),
                  std::invalid_argument);
}

TEST_CASE("fidelity basics", "[hilbert]") {
  auto sp = two_atoms_one_mode();
  auto a = ket(sp, {atom::g0, atom::g1, 0});
  auto b = ket(sp, {atom::g1, atom::g0, 0});
  CHECK(fidelity(DensityOperator::from_pure(a), a) == Approx(1.0));
  CHECK(fidelity(DensityOperator::from_pure(a), b) == Approx(0.0).margin(1e-15));
  CHECK(fidelity(a, b) == Approx(0.0).margin(1e-15));
  auto plus = superpose({{cx(1, 0), a}, {cx(0, 1), b}});
  CHECK(fidelity(plus, a) == Approx(0.5));

  DensityOperator rho = DensityOperator::from_pure(plus);
  CHECK(rho.trace() == Approx(1.0));
  CHECK(rho.hermiticity_error() < 1e-15);
  CHECK(rho.min_eigenvalue() > -1e-12);
}

TEST_CASE("local operators respect the truncation rule", "[hilbert]") {
  auto sp = two_atoms_one_mode();
  auto a = mode_annihilator(sp, 2);
  auto adag = a.adjoint();

  // a|g0 g0, 2> = sqrt(2)|g0 g0, 1>
  auto v = a * ket(sp, {atom::g0, atom::g0, 2});
  CHECK(std::abs(v.amps(sp->index_of({atom::g0, atom::g0, 1})) - std::sqrt(2.0)) < 1e-15);

  // creation out of the sector cap truncates to zero
  auto w = adag * ket(sp, {atom::g1, atom::g1, 0});
  CHECK(w.norm() == Approx(0.0).margin(1e-15));

  // adjoint of the embedded operator equals the embedded adjoint
  Eigen::MatrixXcd am = Eigen::MatrixXcd::Zero(3, 3);
  am(0, 1) = 1.0;
  am(1, 2) = std::sqrt(2.0);
  auto direct = local_operator(sp, 2, Eigen::MatrixXcd(am.adjoint()));
  CHECK((direct.mat - adag.mat).cwiseAbs().sum() < 1e-15);

  auto sig = atom_transition(sp, 0, atom::e, atom::g0);
  auto u = sig * ket(sp, {atom::g0, atom::g1, 0});
  CHECK(std::abs(u.amps(sp->index_of({atom::e, atom::g1, 0})) - 1.0) < 1e-15);

  CHECK_THROWS_AS(mode_annihilator(sp, 0), std::invalid_argument);
  CHECK_THROWS_AS(atom_transition(sp, 2, atom::e, atom::g0), std::invalid_argument);
  CHECK_THROWS_AS(local_operator(sp, 0, Eigen::MatrixXcd::Zero(2, 2)), std::invalid_argument);
}

TEST_CASE("embedding into the uncapped space and back is lossless", "[hilbert]") {
  auto capped = two_atoms_one_mode();
  auto full = build_space({Factor::make_atom(), Factor::make_atom(), Factor::mode(2)});
  REQUIRE(full->dim() == 27);

  auto psi = superpose({{cx(0.3, 0.1), ket(capped, {atom::g0, atom::g1, 0})},
                        {cx(-0.2, 0.7), ket(capped, {atom::e, atom::g0, 1})},
                        {cx(0.5, 0), ket(capped, {atom::g0, atom::g0, 2})}});
  auto up = embed_state(psi, full);
  auto back = embed_state(up, capped);
  CHECK((back.amps - psi.amps).norm() < 1e-15);
  CHECK(up.norm() == Approx(psi.norm()));
}

TEST_CASE("label formatting", "[hilbert]") {
  auto sp = build_space({Factor::flag(4), Factor::make_atom(), Factor::make_atom(),
                         Factor::mode(2)},
                        2);
  CHECK(sp->format_label({2, atom::g1, atom::g0, 1}) == "F2 . g1 g0 | 1");
  auto plain = two_atoms_one_mode();
  CHECK(plain->format_label({atom::g0, atom::e, 0}) == "g0 e | 0");
}

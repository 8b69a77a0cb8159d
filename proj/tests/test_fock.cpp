#include "fsrg/fock.hpp"
#include "fsrg/config.hpp"
#include "reference.hpp"

#include <doctest.h>

#include <cmath>

using namespace fsrg;

TEST_CASE("mode grid shells") {
  const ModeGrid g = ModeGrid::geometric(0.5, 4);
  REQUIRE(g.energies.size() == 4);
  CHECK(g.energies[0] == 1.0);
  CHECK(g.energies[3] == 0.125);
  CHECK(g.coarsened().levels == 3);
  CHECK_THROWS_AS(ModeGrid::geometric(1.5, 3), Error);
}

TEST_CASE("basis matches an independent enumeration") {
  const ModelSpec m = load_model(ref::fixture("models/m_triv.json"));
  for (int modes : {3, 6, 8}) {
    const FockBasis b(ModeGrid::geometric(0.5, modes), 2, 2.0);
    const auto t = ref::hamiltonian(m, 0.0, 0.0, modes, 2, 2.0);
    CHECK(b.size() == static_cast<Index>(t.states.size()));
    for (const auto& occ : t.states) CHECK(b.index_of(occ).has_value());
  }
  // Counted by the reference builder.
  CHECK(FockBasis(ModeGrid::geometric(0.5, 6), 2, 2.0).size() == 28);
  CHECK(FockBasis(ModeGrid::geometric(0.5, 8), 2, 2.0).size() == 45);
}

TEST_CASE("index_of round trip and photon counts") {
  const FockBasis b(ModeGrid::geometric(0.5, 5), 3, 1.5, 2);
  CHECK(b.dim() == 2 * b.size());
  for (Index i = 0; i < b.size(); ++i) {
    CHECK(*b.index_of(b.state(i)) == i);
    int n = 0;
    for (int x : b.state(i)) n += x;
    CHECK(b.photons(i) == n);
    CHECK(b.energy(i) <= 1.5 + 1e-12);
  }
  CHECK_FALSE(b.index_of(Occupation{4, 0, 0, 0, 0}).has_value());
}

TEST_CASE("canonical commutation below the cap") {
  const FockBasis b(ModeGrid::geometric(0.5, 3), 3, 10.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const Matrix ai = ladder(b, i), aj = ladder(b, j);
      const Matrix c = ai * aj.adjoint() - aj.adjoint() * ai;
      for (Index k = 0; k < b.size(); ++k) {
        if (b.photons(k) >= 3) continue;
        CHECK(std::abs(c(k, k) - (i == j ? 1.0 : 0.0)) < 1e-14);
      }
    }
}

TEST_CASE("pull-through residuals") {
  const FockBasis b(ModeGrid::geometric(0.5, 6), 2, 2.0);
  for (int j = 0; j < 6; ++j) {
    CHECK(verify_pull_through(b, [](double x) { return 1.0 / (1.0 + x); }, j) < 1e-12);
    CHECK(verify_pull_through(b, [](double x) { return std::exp(-x); }, j) < 1e-12);
  }
}

TEST_CASE("dilation is an isometry and scales H_f") {
  const double rho = 0.5;
  const FockBasis src(ModeGrid::geometric(rho, 6), 2, 1.0, 2);
  const FockBasis dst(ModeGrid::geometric(rho, 5), 2, 1.0, 2);
  const Dilation d(src, dst, rho);
  const Matrix& g = d.matrix();
  CHECK(op_norm(Matrix(g * g.adjoint() - Matrix::Identity(dst.dim(), dst.dim()))) < 1e-12);
  CHECK(op_norm(Matrix(field_energy(dst) * g - g * field_energy(src) / rho)) < 1e-12);
  // Every image state is the top mode dropped.
  for (std::size_t k = 0; k < d.sector().size(); ++k) {
    const Occupation& a = src.state(d.sector()[k]);
    const Occupation& b = dst.state(d.image()[k]);
    CHECK(a[0] == 0);
    CHECK(Occupation(a.begin() + 1, a.end()) == b);
  }
  Vector outside = Vector::Zero(src.dim());
  outside(src.dim() - 1) = 1;  // last state has a photon in the top shell
  CHECK_THROWS(d.apply(outside));
}

TEST_CASE("relative bounds hold on random vectors") {
  const ModelSpec m = load_model(ref::fixture("models/m_pauli.json"));
  const FockBasis b(ModeGrid::geometric(0.5, 6), 2, 2.0, 3);
  const auto c = shell_couplings(m.coupling1, m.profile, b.grid(), 0.1, 1.0);
  const RelativeBoundReport r = relative_bound_check(b, c, 100, 7);
  CHECK(r.samples == 100);
  CHECK(r.violations == 0);
  CHECK(r.max_ratio_annihilation <= 1.0);
  CHECK(r.max_ratio_creation <= 1.0);
}

TEST_CASE("field energy against the reference") {
  const ModelSpec m = load_model(ref::fixture("models/m_triv.json"));
  const FockBasis b(ModeGrid::geometric(0.5, 5), 2, 2.0);
  const auto t = ref::hamiltonian(m, 0.0, 0.0, 5, 2, 2.0);
  const Matrix hf = field_energy(b);
  for (std::size_t k = 0; k < t.states.size(); ++k) {
    const Index i = *b.index_of(t.states[k]);
    CHECK(std::abs(hf(i, i) - t.h(k, k)) < 1e-15);
  }
}

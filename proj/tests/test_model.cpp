#include "fsrg/model.hpp"
#include "fsrg/config.hpp"
#include "reference.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace fsrg;

namespace {

const char* kFixtures[] = {"m_triv", "m_exact", "m_pauli", "m_kramers", "m_rot"};

ModelSpec model(const std::string& name) { return load_model(ref::fixture("models/" + name + ".json")); }

}  // namespace

TEST_CASE("Hamiltonian agrees with the reference construction") {
  for (const char* name : kFixtures) {
    const ModelSpec m = model(name);
    for (Complex s : {Complex(0), Complex(0.1, 0), Complex(0.05, -0.12)}) {
      const FockBasis b(ModeGrid::geometric(0.5, 5), 2, 2.0, m.atomic_dim);
      const Matrix h = build_hamiltonian(m, s, 0.1, b);
      const auto t = ref::hamiltonian(m, s, 0.1, 5, 2, 2.0);
      REQUIRE(h.rows() == t.h.rows());
      // Same states, possibly in another order: compare by permutation.
      Matrix perm = Matrix::Zero(b.size(), b.size());
      for (std::size_t k = 0; k < t.states.size(); ++k) perm(*b.index_of(t.states[k]), k) = 1;
      const Matrix p = kron(perm, Matrix::Identity(m.atomic_dim, m.atomic_dim));
      CHECK(op_norm(Matrix(p.adjoint() * h * p - t.h)) < 1e-13);
    }
  }
}

TEST_CASE("self-adjoint at real s, reflection at conjugate s") {
  for (const char* name : kFixtures) {
    const ModelSpec m = model(name);
    const FockBasis b(ModeGrid::geometric(0.5, 4), 2, 2.0, m.atomic_dim);
    CHECK(hermiticity_residual(build_hamiltonian(m, 0.1, 0.1, b)) < 1e-14);
    if (m.reflection_symmetric) {
      const Complex s(0.05, 0.1);
      CHECK(op_norm(Matrix(build_hamiltonian(m, std::conj(s), 0.1, b) -
                           build_hamiltonian(m, s, 0.1, b).adjoint())) < 1e-14);
    }
  }
}

TEST_CASE("coupling norm") {
  RadialProfile p;
  p.exponent = 1.0;
  // 4 pi int_0^1 r^2 r^2 r^{-3} dr = 2 pi.
  CHECK(std::abs(coupling_norm_mu(p, 0.5) - std::sqrt(2 * std::numbers::pi)) < 1e-10);
  CHECK(std::abs(coupling_norm_mu(p, 0.5, 2.0) - std::sqrt(4 * std::numbers::pi)) < 1e-10);
  p.exponent = -1.0;
  CHECK_THROWS_AS(coupling_norm_mu(p, 0.5), InfraredDivergence);
  p.exponent = 0.0;
  CHECK_THROWS_AS(coupling_norm_mu(p, 0.5), InfraredDivergence);
  CHECK_NOTHROW(coupling_norm_mu(p, 0.25));
}

TEST_CASE("shell weights sum to the full integral") {
  RadialProfile p;
  p.exponent = 1.0;
  const ModeGrid g = ModeGrid::geometric(0.5, 30);
  double sum = 0;
  for (int j = 0; j < g.levels; ++j) sum += shell_weight(p, g, j);
  // 4 pi int_0^1 r^4 dr
  CHECK(std::abs(sum - 4 * std::numbers::pi / 5) < 1e-12);
}

TEST_CASE("hypotheses on shipped fixtures") {
  for (const char* name : kFixtures) {
    const HypothesisReport r = verify_hypotheses(model(name));
    for (const auto& e : r.entries) {
      INFO(name << " " << e.name << " " << e.note);
      CHECK((!e.applicable || e.pass));
    }
  }
  const HypothesisReport broken = verify_hypotheses(model("m_pauli_broken"));
  bool symmetry_failed = false;
  for (const auto& e : broken.entries)
    if (e.name == "symmetry") symmetry_failed = !e.pass;
  CHECK(symmetry_failed);
}

TEST_CASE("atomic data and frame") {
  const ModelSpec m = model("m_rot");
  const Matrix p0 = atomic_data(m, 0.0).projection;
  for (Complex s : {Complex(0.1, 0), Complex(0.05, 0.1), Complex(-0.2, 0)}) {
    const AtomicData at = atomic_data(m, s);
    CHECK(op_norm(Matrix(at.projection * at.projection - at.projection)) < 1e-10);
    const Matrix u = atomic_frame(m, s);
    CHECK(op_norm(Matrix(u * p0 * u.inverse() - at.projection)) < 1e-8);
  }
  CHECK_FALSE(projection_constant(m));
  CHECK(projection_constant(model("m_pauli")));
  CHECK(op_norm(Matrix(atomic_frame(model("m_pauli"), 0.1) - Matrix::Identity(3, 3))) == 0);
}

TEST_CASE("spectral projection") {
  Matrix h = Matrix::Zero(3, 3);
  h.diagonal() << 0.0, 0.0, 1.0;
  h(0, 2) = 0.2;
  const Matrix p = spectral_projection(h, 0.0, 0.4);
  CHECK(op_norm(Matrix(p * p - p)) < 1e-12);
  CHECK(std::abs(p.trace() - 2.0) < 1e-12);
  CHECK(op_norm(Matrix(h * p - p * h)) < 1e-12);
  CHECK_THROWS(spectral_projection(h, 0.0, 1.0));
}

TEST_CASE("region checks") {
  const ModelSpec m = model("m_triv");
  CHECK_NOTHROW(check_region(m, Complex(0.2, 0)));
  CHECK_THROWS_AS(check_region(m, Complex(0.3, 0)), WindowError);
}

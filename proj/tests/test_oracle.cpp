#include "fsrg/oracle.hpp"
#include "fsrg/config.hpp"
#include "reference.hpp"

#include <doctest.h>

#include <cmath>

using namespace fsrg;

TEST_CASE("Hermitian spectrum, clusters and gap") {
  Matrix h = Matrix::Zero(4, 4);
  h.diagonal() << 3, 1, 1, 2;
  const OracleReport o = dense_spectrum(h, true);
  CHECK(std::abs(o.lowest - 1.0) < 1e-15);
  CHECK(o.multiplicity == 2);
  CHECK(std::abs(o.gap - 1.0) < 1e-14);
  CHECK(o.max_residual < 1e-15);
  CHECK(o.cluster_around(2.0).size() == 1);
  CHECK(std::abs(o.cluster_tol - 1e-8) < 1e-22);
}

TEST_CASE("non-normal spectrum") {
  Matrix h(3, 3);
  h << Complex(0, 1), 5, 0, 0, Complex(0, -1), 2, 0, 0, 0.5;
  const OracleReport o = dense_spectrum(h);
  REQUIRE(o.spectrum.size() == 3);
  // Sorted by real part, then imaginary part.
  CHECK(std::abs(o.spectrum[0] - Complex(0, -1)) < 1e-14);
  CHECK(std::abs(o.spectrum[1] - Complex(0, 1)) < 1e-14);
  CHECK(std::abs(o.spectrum[2] - 0.5) < 1e-14);
  CHECK(o.max_residual < 1e-14);
}

TEST_CASE("comparison measures") {
  Matrix h = Matrix::Zero(3, 3);
  h.diagonal() << -1, -1, 2;
  const OracleReport o = dense_spectrum(h, true);
  Matrix psi = Matrix::Zero(3, 2);
  psi(0, 0) = 1;
  psi(1, 1) = 1;
  psi(2, 1) = 1e-3;
  const Comparison c = compare(-1.0 + 1e-9, psi, o, true);
  CHECK(std::abs(c.eigenvalue_error - 1e-9) < 1e-15);
  CHECK(std::abs(c.subspace_sine - 1e-3 / std::sqrt(1 + 1e-6)) < 1e-12);
  CHECK(c.ground_state_checked);
  CHECK(std::abs(c.ground_state_error - 1e-9) < 1e-15);
}

TEST_CASE("matches the reference dense solve") {
  const ModelSpec m = load_model(ref::fixture("models/m_kramers.json"));
  const FockBasis b(ModeGrid::geometric(0.5, 6), 2, 2.0, 2);
  const OracleReport o = dense_spectrum(build_hamiltonian(m, 0.0, 0.1, b), true);
  const auto t = ref::hamiltonian(m, 0.0, 0.1, 6, 2, 2.0);
  const auto sp = ref::spectrum(t.h);
  REQUIRE(sp.size() == o.spectrum.size());
  for (std::size_t k = 0; k < sp.size(); ++k) CHECK(std::abs(sp[k] - o.spectrum[k]) < 1e-12);
  CHECK(o.multiplicity == 2);
  CHECK(o.gap > 10 * o.cluster_tol);
}

TEST_CASE("perturbative scaling in g") {
  Truncation tr;
  tr.levels = 6;
  const std::vector<double> g{0.02, 0.04, 0.08, 0.16};
  for (const char* name : {"m_exact", "m_pauli"}) {
    const ModelSpec m = load_model(ref::fixture(std::string("models/") + name + ".json"));
    const ScalingReport r = perturbation_scaling(m, 0.0, g, tr);
    INFO(name);
    CHECK(r.exponent >= 1.9);
    CHECK(r.exponent <= 2.1);
    CHECK(r.monotone);
  }
  const ModelSpec m = load_model(ref::fixture("models/m_triv.json"));
  CHECK_THROWS(perturbation_scaling(m, 0.0, {0.01, 0.02, 0.05, 0.1}, tr));
  CHECK_THROWS(perturbation_scaling(m, 0.0, {0.01, 0.02}, tr));
}

TEST_CASE("spectrum dump") {
  Matrix h = Matrix::Zero(2, 2);
  h.diagonal() << 0.5, -0.25;
  CHECK(dump_spectrum(dense_spectrum(h, true)) == "0 -0.25 0\n1 0.5 0\n");
}

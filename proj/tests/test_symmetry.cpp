#include "fsrg/symmetry.hpp"
#include "fsrg/config.hpp"
#include "reference.hpp"

#include <doctest.h>

#include <cmath>

using namespace fsrg;

namespace {

Matrix sx() { return (Matrix(2, 2) << 0, 1, 1, 0).finished(); }
Matrix sz() { return (Matrix(2, 2) << 1, 0, 0, -1).finished(); }
Matrix kramers() { return (Matrix(2, 2) << 0, 1, -1, 0).finished(); }

// Rank-one projection onto (cos s, sin s); analytic in s, idempotent for complex s.
Matrix rotating(Complex s) {
  const Complex c = std::cos(s), n = std::sin(s);
  return (Matrix(2, 2) << c * c, c * n, c * n, n * n).finished();
}

// Rank-two projection in C^3 built from a non-orthogonal analytic frame.
Matrix rank_two(Complex s) {
  Matrix a(3, 2);
  a << 1, 0, s, 1, 0.5 * s * s, -s;
  Matrix b = a;
  b.col(0) += Complex(0.3) * s * Vector::Unit(3, 2);
  // Oblique projection A (B^T A)^{-1} B^T, analytic in s.
  return a * (b.transpose() * a).inverse() * b.transpose();
}

}  // namespace

TEST_CASE("group closure orders") {
  CHECK(SymmetryGroup({SymmetryOp(sx()), SymmetryOp(sz())}).elements().size() == 8);
  CHECK(SymmetryGroup({SymmetryOp(kramers(), true)}).elements().size() == 4);
  CHECK(SymmetryGroup({SymmetryOp(sz())}).elements().size() == 2);
}

TEST_CASE("irreducibility and commutants") {
  CHECK(is_irreducible({SymmetryOp(sx()), SymmetryOp(sz())}));
  CHECK_FALSE(is_irreducible({SymmetryOp(sz())}));
  CHECK(commutant_dimension({SymmetryOp(sz())}) == 2);
  CHECK(commutant_dimension({SymmetryOp(kramers(), true)}) == 1);
}

TEST_CASE("symmetry residuals") {
  const Matrix h = Matrix::Identity(2, 2) * 0.3;
  CHECK(is_symmetry_of(SymmetryOp(sx()), h).ok);
  CHECK_FALSE(is_symmetry_of(SymmetryOp(sx()), sz()).ok);
  // Antiunitary J: J conj(T) J^{-1} = T^*, which on C^2 forces a multiple of 1.
  const SymmetryOp j(kramers(), true);
  CHECK(is_symmetry_of(j, Matrix(Matrix::Identity(2, 2) * Complex(0.2, 0.1))).ok);
  const Matrix split = (Matrix(2, 2) << 0.1, 0, 0, 0.3).finished();
  CHECK(std::abs(is_symmetry_of(j, split).residual - 0.2) < 1e-15);
}

TEST_CASE("restriction to an invariant subspace") {
  FactoredSymmetry f{"sx+1", Matrix::Identity(3, 3), FockAction::identity, false};
  f.atomic.topLeftCorner(2, 2) = sx();
  Matrix v = Matrix::Zero(3, 2);
  v(0, 0) = v(1, 1) = 1;
  CHECK(op_norm(Matrix(restrict_atomic(f, v).atomic - sx())) < 1e-15);
  Matrix w = Matrix::Zero(3, 1);
  w(0, 0) = 1;
  CHECK_THROWS(restrict_atomic(f, w));
}

TEST_CASE("Schur scalar of the vacuum block") {
  Matrix t = Matrix::Random(8, 8);
  t.topLeftCorner(2, 2) = Complex(0.7, -0.1) * Matrix::Identity(2, 2);
  const SchurScalar sc = schur_scalar(t, 2);
  CHECK(std::abs(sc.c - Complex(0.7, -0.1)) < 1e-15);
  CHECK(sc.deviation < 1e-15);
  t(0, 1) = 0.01;
  CHECK(schur_scalar(t, 2).deviation > 1e-3);
}

TEST_CASE("lifted symmetries commute with the dilation") {
  const FockBasis b(ModeGrid::geometric(0.5, 5), 2, 1.0, 2);
  for (FockAction a : {FockAction::identity, FockAction::parity}) {
    FactoredSymmetry f{"sx", sx(), a, false};
    CHECK(dilation_commutation_residual(f, b, 0.5) < 1e-12);
  }
}

TEST_CASE("model symmetries on the full Hamiltonian") {
  for (const char* name : {"m_exact", "m_pauli", "m_kramers"}) {
    const ModelSpec m = load_model(ref::fixture(std::string("models/") + name + ".json"));
    const FockBasis b(ModeGrid::geometric(0.5, 6), 2, 2.0, m.atomic_dim);
    const Matrix h = build_hamiltonian(m, 0.0, 0.1, b);
    std::vector<SymmetryOp> gens;
    for (const auto& f : m.symmetries) gens.push_back(lift(f, b));
    const SymmetryGroup group(gens);
    for (const auto& e : group.elements()) CHECK(is_symmetry_of(e, h).residual < 1e-12);
  }
  const ModelSpec broken = load_model(ref::fixture("models/m_pauli_broken.json"));
  const FockBasis b(ModeGrid::geometric(0.5, 4), 2, 2.0, 3);
  const Matrix h = build_hamiltonian(broken, 0.0, 0.1, b);
  CHECK(is_symmetry_of(lift(broken.symmetries[0], b), h).residual > 1e-3);
}

TEST_CASE("transformation function transports projections") {
  // Two test projections, a rotating rank-one family and an oblique rank-two one.
  for (auto p : {std::function<Matrix(Complex)>(rotating), std::function<Matrix(Complex)>(rank_two)}) {
    const Complex s0 = 0.0;
    for (Complex s1 : {Complex(0.3, 0), Complex(0.1, 0.2)}) {
      const int steps = static_cast<int>(std::ceil(std::abs(s1 - s0) / 1e-3));
      const TransformationPath path = transformation_function(p, s0, s1, steps);
      const Matrix p0 = p(s0);
      for (std::size_t k = 0; k < path.u.size(); k += 50) {
        CHECK(transport_residual(path.u[k], p0, p(path.s[k])) < 1e-8);
        const Index n = p0.rows();
        CHECK(op_norm(Matrix(path.v[k] * path.u[k] - Matrix::Identity(n, n))) < 1e-8);
      }
    }
  }
  // Real section of an orthogonal family: U is unitary.
  const TransformationPath path = transformation_function(rotating, 0.0, 0.4, 400);
  for (const Matrix& u : path.u) CHECK(op_norm(Matrix(u.adjoint() * u - Matrix::Identity(2, 2))) < 1e-8);
}

TEST_CASE("transformation function from samples") {
  const Complex h = Complex(1e-3, 0);
  std::vector<Matrix> samples;
  for (int k = 0; k <= 200; ++k) samples.push_back(rotating(Complex(k) * h));
  const TransformationPath path = transformation_function(samples, 0.0, h);
  REQUIRE(path.u.size() == 101);
  for (std::size_t k = 0; k < path.u.size(); ++k)
    CHECK(transport_residual(path.u[k], samples[0], rotating(path.s[k])) < 1e-8);
}

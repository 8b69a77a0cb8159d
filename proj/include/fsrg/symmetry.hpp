#pragma once

#include "fsrg/fock.hpp"

#include <functional>
#include <string>
#include <vector>

namespace fsrg {

// psi -> U psi (unitary) or psi -> U conj(psi) (antiunitary).
class SymmetryOp {
 public:
  SymmetryOp(Matrix u, bool antiunitary = false, double tol = 1e-12);
  static SymmetryOp identity(Index n) { return SymmetryOp(Matrix::Identity(n, n)); }

  const Matrix& matrix() const { return u_; }
  bool antiunitary() const { return anti_; }
  Index dim() const { return u_.rows(); }

  Matrix apply(const Matrix& columns) const;

 private:
  Matrix u_;
  bool anti_;
};

SymmetryOp compose(const SymmetryOp& a, const SymmetryOp& b);  // a after b
SymmetryOp inverse(const SymmetryOp& s);

// S T S^{-1}: U T U^* for unitary S, U conj(T) U^* for antiunitary S.
Matrix conjugate(const SymmetryOp& s, const Matrix& t);

struct SymmetryCheck {
  bool ok = false;
  double residual = 0;
};

// Compares conjugate(S, T) with T (unitary) or T^* (antiunitary).
SymmetryCheck is_symmetry_of(const SymmetryOp& s, const Matrix& t, double tol = 1e-10);

enum class FockAction { identity, parity };

// S_1 (x) S_2 with S_2 acting diagonally in the occupation basis.
struct FactoredSymmetry {
  std::string name;
  Matrix atomic;
  FockAction fock = FockAction::identity;
  bool antiunitary = false;
};

SymmetryOp atomic_part(const FactoredSymmetry& f);
SymmetryOp lift(const FactoredSymmetry& f, const FockBasis& basis);

// Action on span(V) for orthonormal V: V^* U V, or V^* U conj(V) when antiunitary.
// Throws if span(V) is not invariant.
FactoredSymmetry restrict_atomic(const FactoredSymmetry& f, const Matrix& v, double tol = 1e-9);

// Residual of S Gamma_rho = Gamma_rho S on the low sector.
double dilation_commutation_residual(const FactoredSymmetry& f, const FockBasis& basis, double rho);

class SymmetryGroup {
 public:
  explicit SymmetryGroup(std::vector<SymmetryOp> generators, int cap = 64, double tol = 1e-10);

  const std::vector<SymmetryOp>& generators() const { return generators_; }
  const std::vector<SymmetryOp>& elements() const { return elements_; }

 private:
  std::vector<SymmetryOp> generators_;
  std::vector<SymmetryOp> elements_;
};

// True iff the only Hermitian M with S M S^{-1} = M for every generator is a
// real multiple of the identity.
bool is_irreducible(const std::vector<SymmetryOp>& generators, double tol = 1e-9);
int commutant_dimension(const std::vector<SymmetryOp>& generators, double tol = 1e-9);

// d x d block between e_a (x) Omega and e_b (x) Omega.
Matrix vacuum_expectation(const Matrix& t, int d);

struct SchurScalar {
  Complex c;
  double deviation = 0;
};

SchurScalar schur_scalar(const Matrix& t, int d);

struct TransformationPath {
  std::vector<Complex> s;
  std::vector<Matrix> u;  // U(s), U(s0) = 1
  std::vector<Matrix> v;  // V(s) with V' = -V Q, so V U = 1
};

// Integrates U' = Q U, Q = P'P - PP' along the segment s0 -> s1 with RK4.
TransformationPath transformation_function(const std::function<Matrix(Complex)>& p, Complex s0,
                                           Complex s1, int steps);

// Same ODE from projections sampled at s0 + k h (odd count). RK4 uses step 2h,
// so output lives at even sample indices.
TransformationPath transformation_function(const std::vector<Matrix>& samples, Complex s0,
                                           Complex h);

double transport_residual(const Matrix& u, const Matrix& p0, const Matrix& p);

}  // namespace fsrg

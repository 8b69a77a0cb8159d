#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsrg {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
  using Error::Error;
};

template <typename Derived>
RealVector singular_values(const Eigen::MatrixBase<Derived>& m) {
  using Plain = typename Derived::PlainObject;
  if (m.size() == 0) return RealVector();
  Eigen::BDCSVD<Plain> svd(m.eval());
  return svd.singularValues();
}

// Spectral norm (largest singular value).
template <typename Derived>
double op_norm(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0.0;
  if (m.cols() == 1) return m.norm();
  return singular_values(m)(0);
}

template <typename Derived>
double min_singular_value(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0.0;
  RealVector sv = singular_values(m);
  return sv(sv.size() - 1);
}

template <typename A, typename B>
auto kron(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  using Scalar = typename A::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(),
                                                             a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

struct RangeBasis {
  Matrix basis;             // orthonormal columns
  double smallest_kept = 0; // relative to the largest singular value
  double largest_dropped = 0;
};

// Orthonormal basis of the column space, cut at rel_tol relative to the
// largest singular value.
inline RangeBasis range_basis(const Matrix& m, double rel_tol = 1e-10) {
  RangeBasis out;
  if (m.size() == 0) {
    out.basis = Matrix(m.rows(), 0);
    return out;
  }
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU);
  const RealVector& s = svd.singularValues();
  const double top = s(0);
  Index k = 0;
  if (top > 0)
    while (k < s.size() && s(k) > rel_tol * top) ++k;
  out.basis = svd.matrixU().leftCols(k);
  out.smallest_kept = k > 0 ? s(k - 1) / top : 0.0;
  out.largest_dropped = (k < s.size() && top > 0) ? s(k) / top : 0.0;
  return out;
}

// Orthonormal basis of the kernel: right singular vectors with sigma <= abs_tol.
inline Matrix null_space(const Matrix& m, double abs_tol) {
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const RealVector& s = svd.singularValues();
  Index rank = 0;
  while (rank < s.size() && s(rank) > abs_tol) ++rank;
  return svd.matrixV().rightCols(m.cols() - rank);
}

inline Index nullity(const Matrix& m, double abs_tol) {
  RealVector s = singular_values(m);
  Index rank = 0;
  while (rank < s.size() && s(rank) > abs_tol) ++rank;
  return m.cols() - rank;
}

// Sine of the largest principal angle between span(a) and span(b).
inline double max_principal_sine(const Matrix& a, const Matrix& b) {
  Matrix qa = range_basis(a, 1e-12).basis;
  Matrix qb = range_basis(b, 1e-12).basis;
  if (qa.cols() != qb.cols())
    return 1.0;
  Matrix residual = qa - qb * (qb.adjoint() * qa);
  return std::min(1.0, op_norm(residual));
}

inline double hermiticity_residual(const Matrix& m) {
  return (m - m.adjoint()).norm();
}

// Entrywise monotone cubic (Fritsch-Carlson with three-point end slopes)
// interpolation of matrix-valued data; real and imaginary parts separately.
class Pchip {
 public:
  Pchip() = default;
  Pchip(std::vector<double> nodes, std::vector<Matrix> values);

  Matrix operator()(double x) const;
  Matrix derivative(double x) const;

  const std::vector<double>& nodes() const { return x_; }
  const std::vector<Matrix>& values() const { return y_; }

 private:
  Index locate(double x) const;
  std::vector<double> x_;
  std::vector<Matrix> y_;
  std::vector<Matrix> slope_;
};

}  // namespace fsrg

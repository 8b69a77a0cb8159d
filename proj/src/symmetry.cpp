#include "fsrg/symmetry.hpp"

#include <cmath>

namespace fsrg {

SymmetryOp::SymmetryOp(Matrix u, bool antiunitary, double tol)
    : u_(std::move(u)), anti_(antiunitary) {
  if (u_.rows() != u_.cols()) throw DimensionError("symmetry: matrix must be square");
  const Matrix id = Matrix::Identity(u_.rows(), u_.cols());
  if ((u_.adjoint() * u_ - id).norm() > tol * std::max<double>(1.0, u_.rows()))
    throw Error("symmetry: matrix part is not unitary");
}

Matrix SymmetryOp::apply(const Matrix& columns) const {
  if (columns.rows() != dim()) throw DimensionError("symmetry: vector size mismatch");
  return anti_ ? Matrix(u_ * columns.conjugate()) : Matrix(u_ * columns);
}

SymmetryOp compose(const SymmetryOp& a, const SymmetryOp& b) {
  if (a.dim() != b.dim()) throw DimensionError("compose: dimension mismatch");
  Matrix m = a.antiunitary() ? Matrix(a.matrix() * b.matrix().conjugate())
                             : Matrix(a.matrix() * b.matrix());
  return SymmetryOp(std::move(m), a.antiunitary() != b.antiunitary(), 1e-10);
}

SymmetryOp inverse(const SymmetryOp& s) {
  if (s.antiunitary()) return SymmetryOp(s.matrix().transpose(), true, 1e-10);
  return SymmetryOp(s.matrix().adjoint(), false, 1e-10);
}

Matrix conjugate(const SymmetryOp& s, const Matrix& t) {
  if (t.rows() != s.dim() || t.cols() != s.dim())
    throw DimensionError("conjugate: dimension mismatch");
  const Matrix& u = s.matrix();
  if (s.antiunitary()) return u * t.conjugate() * u.adjoint();
  return u * t * u.adjoint();
}

SymmetryCheck is_symmetry_of(const SymmetryOp& s, const Matrix& t, double tol) {
  Matrix c = conjugate(s, t);
  const double scale = std::max(1.0, op_norm(t));
  SymmetryCheck out;
  out.residual = (s.antiunitary() ? op_norm(c - t.adjoint()) : op_norm(c - t)) / scale;
  out.ok = out.residual <= tol;
  return out;
}

SymmetryOp atomic_part(const FactoredSymmetry& f) { return SymmetryOp(f.atomic, f.antiunitary); }

SymmetryOp lift(const FactoredSymmetry& f, const FockBasis& basis) {
  if (f.atomic.rows() != basis.atomic_dim())
    throw DimensionError("lift: atomic part does not match the basis");
  Vector diag(basis.size());
  for (Index i = 0; i < basis.size(); ++i)
    diag(i) = (f.fock == FockAction::parity && basis.photons(i) % 2) ? -1.0 : 1.0;
  Matrix fock = diag.asDiagonal();
  return SymmetryOp(kron(fock, f.atomic), f.antiunitary);
}

FactoredSymmetry restrict_atomic(const FactoredSymmetry& f, const Matrix& v, double tol) {
  const Matrix image = f.antiunitary ? Matrix(f.atomic * v.conjugate()) : Matrix(f.atomic * v);
  const Matrix r = v.adjoint() * image;
  if ((image - v * r).norm() > tol * std::max(1.0, image.norm()))
    throw Error("symmetry '" + f.name + "' does not leave the eigenspace invariant");
  FactoredSymmetry out = f;
  out.atomic = r;
  return out;
}

double dilation_commutation_residual(const FactoredSymmetry& f, const FockBasis& basis,
                                     double rho) {
  Dilation gam = dilation(basis, rho);
  SymmetryOp s = lift(f, basis);
  // Gamma is real, so the conjugation in an antiunitary S passes through it.
  Matrix lhs = s.matrix() * gam.matrix();
  Matrix rhs = gam.matrix() * s.matrix();
  // Compare on the sector only.
  double res = 0;
  const int d = basis.atomic_dim();
  for (Index i : gam.sector()) {
    res = std::max(res, (lhs.middleCols(i * d, d) - rhs.middleCols(i * d, d)).norm());
  }
  return res;
}

SymmetryGroup::SymmetryGroup(std::vector<SymmetryOp> generators, int cap, double tol)
    : generators_(std::move(generators)) {
  if (generators_.empty()) throw Error("symmetry group: no generators");
  const Index n = generators_.front().dim();
  elements_.push_back(SymmetryOp::identity(n));
  auto known = [&](const SymmetryOp& x) {
    for (const auto& e : elements_)
      if (e.antiunitary() == x.antiunitary() && (e.matrix() - x.matrix()).norm() <= tol) return true;
    return false;
  };
  for (std::size_t k = 0; k < elements_.size(); ++k) {
    for (const auto& g : generators_) {
      SymmetryOp next = compose(elements_[k], g);
      if (known(next)) continue;
      if (static_cast<int>(elements_.size()) >= cap)
        throw Error("symmetry group: closure exceeds the element cap");
      elements_.push_back(std::move(next));
    }
  }
}

int commutant_dimension(const std::vector<SymmetryOp>& generators, double tol) {
  if (generators.empty()) throw Error("commutant: no generators");
  const Index n = generators.front().dim();
  // Real basis of Hermitian n x n matrices.
  std::vector<Matrix> herm;
  for (Index i = 0; i < n; ++i) {
    Matrix e = Matrix::Zero(n, n);
    e(i, i) = 1;
    herm.push_back(e);
    for (Index j = i + 1; j < n; ++j) {
      Matrix a = Matrix::Zero(n, n), b = Matrix::Zero(n, n);
      a(i, j) = a(j, i) = 1;
      b(i, j) = Complex(0, 1);
      b(j, i) = Complex(0, -1);
      herm.push_back(a);
      herm.push_back(b);
    }
  }
  const Index rows_per = 2 * n * n;
  Eigen::MatrixXd sys(rows_per * static_cast<Index>(generators.size()),
                      static_cast<Index>(herm.size()));
  for (std::size_t g = 0; g < generators.size(); ++g) {
    for (std::size_t k = 0; k < herm.size(); ++k) {
      Matrix r = conjugate(generators[g], herm[k]) - herm[k];
      Eigen::Map<Eigen::VectorXcd> flat(r.data(), r.size());
      sys.block(g * rows_per, k, n * n, 1) = flat.real();
      sys.block(g * rows_per + n * n, k, n * n, 1) = flat.imag();
    }
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(sys);
  const RealVector& s = svd.singularValues();
  const double scale = std::max(1.0, s.size() ? s(0) : 0.0);
  int rank = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > tol * scale) ++rank;
  return static_cast<int>(herm.size()) - rank;
}

bool is_irreducible(const std::vector<SymmetryOp>& generators, double tol) {
  return commutant_dimension(generators, tol) == 1;
}

Matrix vacuum_expectation(const Matrix& t, int d) {
  if (t.rows() < d || t.cols() < d) throw DimensionError("vacuum_expectation: too small");
  return t.topLeftCorner(d, d);
}

SchurScalar schur_scalar(const Matrix& t, int d) {
  Matrix v = vacuum_expectation(t, d);
  SchurScalar out;
  out.c = v.trace() / static_cast<double>(d);
  out.deviation = op_norm(v - out.c * Matrix::Identity(d, d));
  return out;
}

namespace {

void check_projection(const Matrix& p) {
  if ((p * p - p).norm() > 1e-8 * std::max(1.0, p.norm()))
    throw Error("transformation_function: input is not a projection");
}

Matrix generator(const Matrix& p, const Matrix& dp) { return dp * p - p * dp; }

void check_invertible(const Matrix& u) {
  RealVector sv = singular_values(u);
  if (sv(sv.size() - 1) < 1e-12 * sv(0))
    throw Error("transformation_function: U became singular");
}

}  // namespace

TransformationPath transformation_function(const std::function<Matrix(Complex)>& p, Complex s0,
                                           Complex s1, int steps) {
  if (steps < 1) throw Error("transformation_function: need at least one step");
  const Complex delta = s1 - s0;
  const double h = 1.0 / steps;
  const double fd = 1e-3;
  // dP/dt along s(t) = s0 + t delta.
  auto q_at = [&](double t) {
    const Complex s = s0 + t * delta;
    Matrix pt = p(s);
    check_projection(pt);
    Matrix dp = (-p(s + 2 * fd * delta) + 8.0 * p(s + fd * delta) - 8.0 * p(s - fd * delta) +
                 p(s - 2 * fd * delta)) /
                (12 * fd);
    return generator(pt, dp);
  };
  TransformationPath out;
  const Index n = p(s0).rows();
  Matrix u = Matrix::Identity(n, n), v = u;
  out.s.push_back(s0);
  out.u.push_back(u);
  out.v.push_back(v);
  for (int k = 0; k < steps; ++k) {
    const double t = k * h;
    Matrix q0 = q_at(t), qm = q_at(t + h / 2), q1 = q_at(t + h);
    Matrix k1 = q0 * u, l1 = -v * q0;
    Matrix k2 = qm * (u + h / 2 * k1), l2 = -(v + h / 2 * l1) * qm;
    Matrix k3 = qm * (u + h / 2 * k2), l3 = -(v + h / 2 * l2) * qm;
    Matrix k4 = q1 * (u + h * k3), l4 = -(v + h * l3) * q1;
    u += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    v += h / 6 * (l1 + 2 * l2 + 2 * l3 + l4);
    check_invertible(u);
    out.s.push_back(s0 + (t + h) * delta);
    out.u.push_back(u);
    out.v.push_back(v);
  }
  return out;
}

TransformationPath transformation_function(const std::vector<Matrix>& samples, Complex s0,
                                           Complex h) {
  const int m = static_cast<int>(samples.size());
  if (m < 5 || m % 2 == 0)
    throw Error("transformation_function: need an odd number (>= 5) of samples");
  for (const auto& p : samples) check_projection(p);
  // Fourth-order differences in the parameter, one-sided at the ends.
  std::vector<Matrix> q(m);
  for (int k = 0; k < m; ++k) {
    Matrix dp;
    if (k >= 2 && k + 2 < m) {
      dp = (-samples[k + 2] + 8.0 * samples[k + 1] - 8.0 * samples[k - 1] + samples[k - 2]) /
           (12.0 * h);
    } else if (k < 2) {
      dp = (-25.0 * samples[k] + 48.0 * samples[k + 1] - 36.0 * samples[k + 2] +
            16.0 * samples[k + 3] - 3.0 * samples[k + 4]) /
           (12.0 * h);
    } else {
      dp = (25.0 * samples[k] - 48.0 * samples[k - 1] + 36.0 * samples[k - 2] -
            16.0 * samples[k - 3] + 3.0 * samples[k - 4]) /
           (12.0 * h);
    }
    q[k] = generator(samples[k], dp);
  }
  TransformationPath out;
  const Index n = samples[0].rows();
  Matrix u = Matrix::Identity(n, n), v = u;
  out.s.push_back(s0);
  out.u.push_back(u);
  out.v.push_back(v);
  const Complex step = 2.0 * h;
  for (int k = 0; k + 2 < m; k += 2) {
    const Matrix &q0 = q[k], &qm = q[k + 1], &q1 = q[k + 2];
    Matrix k1 = q0 * u, l1 = -v * q0;
    Matrix k2 = qm * (u + step / 2.0 * k1), l2 = -(v + step / 2.0 * l1) * qm;
    Matrix k3 = qm * (u + step / 2.0 * k2), l3 = -(v + step / 2.0 * l2) * qm;
    Matrix k4 = q1 * (u + step * k3), l4 = -(v + step * l3) * q1;
    u += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    v += step / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
    check_invertible(u);
    out.s.push_back(s0 + static_cast<double>(k + 2) * h);
    out.u.push_back(u);
    out.v.push_back(v);
  }
  return out;
}

double transport_residual(const Matrix& u, const Matrix& p0, const Matrix& p) {
  return op_norm(u * p0 * u.inverse() - p);
}

}  // namespace fsrg

#include "fsrg/fock.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace fsrg {

ModeGrid ModeGrid::geometric(double ratio, int levels) {
  if (!(ratio > 0 && ratio < 1)) throw Error("mode grid: ratio must lie in (0,1)");
  if (levels < 0) throw Error("mode grid: negative shell count");
  ModeGrid g;
  g.ratio = ratio;
  g.levels = levels;
  double w = 1.0;
  for (int j = 0; j < levels; ++j) {
    g.energies.push_back(w);
    const double lo = w * ratio;
    g.shell_volumes.push_back(4.0 * std::numbers::pi / 3.0 * (w * w * w - lo * lo * lo));
    w = lo;
  }
  return g;
}

ModeGrid ModeGrid::coarsened() const {
  if (levels < 1) throw Error("mode grid: no shell left to drop");
  return geometric(ratio, levels - 1);
}

namespace {

void enumerate(const ModeGrid& grid, int max_photons, double cutoff, Occupation& cur, int mode,
               int photons, double energy, std::vector<Occupation>& out) {
  if (mode == grid.levels) {
    out.push_back(cur);
    return;
  }
  for (int n = 0;; ++n) {
    const double e = energy + n * grid.energies[mode];
    if (photons + n > max_photons || e > cutoff + kEnergySlack) break;
    cur[mode] = n;
    enumerate(grid, max_photons, cutoff, cur, mode + 1, photons + n, e, out);
  }
  cur[mode] = 0;
}

}  // namespace

FockBasis::FockBasis(ModeGrid grid, int max_photons, double energy_cutoff, int atomic_dim)
    : grid_(std::move(grid)),
      max_photons_(max_photons),
      energy_cutoff_(energy_cutoff),
      atomic_dim_(atomic_dim) {
  if (grid_.levels < 1) throw Error("fock basis: J must be at least 1");
  if (max_photons < 0) throw Error("fock basis: negative photon cap");
  if (!(energy_cutoff > 0)) throw Error("fock basis: energy cutoff must be positive");
  if (atomic_dim < 1) throw Error("fock basis: atomic dimension must be at least 1");
  Occupation cur(grid_.levels, 0);
  enumerate(grid_, max_photons, energy_cutoff, cur, 0, 0, 0.0, states_);
  if (states_.empty()) throw Error("fock basis: truncation leaves no states");
  index_states();
}

FockBasis::FockBasis(TerminalTag, double ratio, int atomic_dim)
    : grid_(ModeGrid::geometric(ratio, 0)),
      max_photons_(0),
      energy_cutoff_(1.0),
      atomic_dim_(atomic_dim) {
  states_.push_back(Occupation{});
  index_states();
}

FockBasis FockBasis::terminal(double ratio, int atomic_dim) {
  return FockBasis(TerminalTag{}, ratio, atomic_dim);
}

void FockBasis::index_states() {
  energy_vector_.resize(size());
  for (Index i = 0; i < size(); ++i) {
    double e = 0;
    int n = 0;
    for (int j = 0; j < grid_.levels; ++j) {
      e += states_[i][j] * grid_.energies[j];
      n += states_[i][j];
    }
    energies_.push_back(e);
    photons_.push_back(n);
    energy_vector_(i) = e;
    lookup_.emplace(states_[i], i);
  }
}

std::optional<Index> FockBasis::index_of(const Occupation& n) const {
  auto it = lookup_.find(n);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

FockBasis FockBasis::with_atomic_dim(int d) const {
  if (grid_.levels == 0) return terminal(grid_.ratio, d);
  return FockBasis(grid_, max_photons_, energy_cutoff_, d);
}

OperatorMatrix::OperatorMatrix(std::shared_ptr<const FockBasis> basis, Matrix m,
                               bool self_adjoint)
    : basis_(std::move(basis)), m_(std::move(m)), self_adjoint_(self_adjoint) {
  if (!basis_) throw DimensionError("operator matrix: missing basis");
  if (m_.rows() != basis_->dim() || m_.cols() != basis_->dim())
    throw DimensionError("operator matrix: size does not match basis");
  if (self_adjoint_ && hermiticity_residual(m_) > 1e-12 * std::max(1.0, m_.norm()))
    throw Error("operator matrix: flagged self-adjoint but is not");
}

Matrix ladder(const FockBasis& basis, int mode) {
  if (mode < 0 || mode >= basis.modes()) throw DimensionError("ladder: mode out of range");
  Matrix a = Matrix::Zero(basis.size(), basis.size());
  for (Index i = 0; i < basis.size(); ++i) {
    Occupation n = basis.state(i);
    if (n[mode] == 0) continue;
    const double amp = std::sqrt(static_cast<double>(n[mode]));
    --n[mode];
    if (auto k = basis.index_of(n)) a(*k, i) = amp;
  }
  return a;
}

Matrix creation_op(const FockBasis& basis, const std::vector<Matrix>& coeffs) {
  if (static_cast<int>(coeffs.size()) != basis.modes())
    throw DimensionError("creation_op: one coefficient per mode required");
  const int d = basis.atomic_dim();
  Matrix out = Matrix::Zero(basis.dim(), basis.dim());
  for (int j = 0; j < basis.modes(); ++j) {
    if (coeffs[j].rows() != d || coeffs[j].cols() != d)
      throw DimensionError("creation_op: coefficient size mismatch");
    for (Index i = 0; i < basis.size(); ++i) {
      Occupation n = basis.state(i);
      ++n[j];
      auto k = basis.index_of(n);
      if (!k) continue;
      out.block(*k * d, i * d, d, d) += std::sqrt(static_cast<double>(n[j])) * coeffs[j];
    }
  }
  return out;
}

Matrix annihilation_op(const FockBasis& basis, const std::vector<Matrix>& coeffs) {
  return creation_op(basis, coeffs).adjoint();
}

Matrix fock_function(const FockBasis& basis, const std::function<Complex(double)>& f) {
  const int d = basis.atomic_dim();
  Vector diag(basis.dim());
  for (Index i = 0; i < basis.size(); ++i) diag.segment(i * d, d).setConstant(f(basis.energy(i)));
  return diag.asDiagonal();
}

Matrix field_energy(const FockBasis& basis) {
  return fock_function(basis, [](double e) { return Complex(e); });
}

Matrix number_op(const FockBasis& basis) {
  const int d = basis.atomic_dim();
  Vector diag(basis.dim());
  for (Index i = 0; i < basis.size(); ++i)
    diag.segment(i * d, d).setConstant(static_cast<double>(basis.photons(i)));
  return diag.asDiagonal();
}

Matrix lift_atomic(const FockBasis& basis, const Matrix& a) {
  if (a.rows() != basis.atomic_dim() || a.cols() != basis.atomic_dim())
    throw DimensionError("lift_atomic: size mismatch");
  return kron(Matrix::Identity(basis.size(), basis.size()), a);
}

Dilation::Dilation(const FockBasis& source, const FockBasis& target, double rho)
    : source_dim_(source.dim()), atomic_dim_(source.atomic_dim()) {
  if (std::abs(rho - source.grid().ratio) > 1e-12 || std::abs(rho - target.grid().ratio) > 1e-12)
    throw Error("dilation: rho differs from the grid ratio");
  if (target.atomic_dim() != source.atomic_dim())
    throw DimensionError("dilation: atomic dimensions differ");
  const int d = atomic_dim_;
  in_sector_.assign(source.size(), 0);
  matrix_ = Matrix::Zero(target.dim(), source.dim());
  for (Index i = 0; i < source.size(); ++i) {
    if (source.energy(i) > rho + kEnergySlack) continue;
    const Occupation& n = source.state(i);
    // Mode 0 has energy 1 > rho, so it is empty here; shift j -> j-1.
    Occupation shifted(target.modes(), 0);
    for (int j = 1; j < source.modes(); ++j) {
      if (n[j] == 0) continue;
      if (j - 1 >= target.modes()) throw DimensionError("dilation: target grid too short");
      shifted[j - 1] = n[j];
    }
    auto k = target.index_of(shifted);
    if (!k) throw DimensionError("dilation: image state missing from target basis");
    sector_.push_back(i);
    image_.push_back(*k);
    in_sector_[i] = 1;
    matrix_.block(*k * d, i * d, d, d).setIdentity();
  }
}

Vector Dilation::apply(const Vector& psi, double tol) const {
  if (psi.size() != source_dim_) throw DimensionError("dilation: vector size mismatch");
  double outside = 0;
  for (Index i = 0; i < static_cast<Index>(in_sector_.size()); ++i)
    if (!in_sector_[i]) outside += psi.segment(i * atomic_dim_, atomic_dim_).squaredNorm();
  if (std::sqrt(outside) > tol * std::max(1.0, psi.norm()))
    throw Error("dilation: state outside the H_f <= rho sector");
  return matrix_ * psi;
}

Dilation dilation(const FockBasis& basis, double rho) { return Dilation(basis, basis, rho); }

double verify_pull_through(const FockBasis& basis, const std::function<double(double)>& f,
                           int mode) {
  Matrix a = ladder(basis, mode);
  const double w = basis.grid().energies[mode];
  Vector lhs_diag(basis.size()), rhs_diag(basis.size());
  for (Index i = 0; i < basis.size(); ++i) {
    lhs_diag(i) = f(basis.energy(i));
    rhs_diag(i) = f(basis.energy(i) + w);
  }
  Matrix diff = a * lhs_diag.asDiagonal();
  diff -= rhs_diag.asDiagonal() * a;
  return diff.colwise().norm().maxCoeff();
}

RelativeBoundReport relative_bound_check(const FockBasis& basis, const std::vector<Matrix>& coeffs,
                                         int samples, std::uint64_t seed) {
  Matrix ann = annihilation_op(basis, coeffs);
  Matrix cre = creation_op(basis, coeffs);
  double ca = 0, cc = 0;
  for (int j = 0; j < basis.modes(); ++j) {
    const double n2 = std::pow(op_norm(coeffs[j]), 2);
    const double w = basis.grid().energies[j];
    ca += n2 / w;
    cc += n2 * (1.0 / w + 1.0);
  }
  ca = std::sqrt(ca);
  cc = std::sqrt(cc);
  const int d = basis.atomic_dim();
  RealVector hf(basis.dim());
  for (Index i = 0; i < basis.size(); ++i) hf.segment(i * d, d).setConstant(basis.energy(i));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  RelativeBoundReport rep;
  rep.samples = samples;
  for (int k = 0; k < samples; ++k) {
    Vector psi(basis.dim());
    for (Index i = 0; i < psi.size(); ++i) psi(i) = Complex(normal(rng), normal(rng));
    const double lhs_a = (ann * psi).norm();
    const double lhs_c = (cre * psi).norm();
    const double rhs_a = ca * (hf.array().sqrt().matrix().cast<Complex>().asDiagonal() * psi).norm();
    const double rhs_c =
        cc * ((hf.array() + 1.0).sqrt().matrix().cast<Complex>().asDiagonal() * psi).norm();
    if (rhs_a > 0) rep.max_ratio_annihilation = std::max(rep.max_ratio_annihilation, lhs_a / rhs_a);
    if (rhs_c > 0) rep.max_ratio_creation = std::max(rep.max_ratio_creation, lhs_c / rhs_c);
    if (lhs_a > rhs_a * (1 + 1e-12) + 1e-300) ++rep.violations;
    if (lhs_c > rhs_c * (1 + 1e-12) + 1e-300) ++rep.violations;
  }
  return rep;
}

}  // namespace fsrg

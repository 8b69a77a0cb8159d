#include "fsrg/feshbach.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace fsrg {

double smooth_cutoff(double r) {
  if (r <= 0.75) return 1.0;
  if (r >= 1.0) return 0.0;
  const double t = 4 * r - 3;
  const double sigma = t * t * t * (10 - 15 * t + 6 * t * t);
  return std::cos(std::numbers::pi / 2 * sigma);
}

double Cutoff::chibar(double r) const {
  const double c = chi(r);
  return std::sqrt(std::max(0.0, 1 - c * c));
}

Matrix cutoff_matrix(const FockBasis& basis, const Cutoff& c, bool bar) {
  return fock_function(basis, [&](double e) { return Complex(bar ? c.chibar(e) : c.chi(e)); });
}

namespace {

bool is_diagonal(const Matrix& m) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (i != j && m(i, j) != Complex(0)) return false;
  return true;
}

}  // namespace

FeshbachPair::FeshbachPair(Matrix h, Matrix t, Matrix chi, Matrix chibar, double tol)
    : h_(std::move(h)), t_(std::move(t)), chi_(std::move(chi)), chibar_(std::move(chibar)) {
  PairOptions opt;
  opt.tol = tol;
  init(opt, nullptr);
}

FeshbachPair::FeshbachPair(Matrix h, Matrix t, Matrix chi, Matrix chibar, const PairOptions& opt,
                           const Matrix* range)
    : h_(std::move(h)), t_(std::move(t)), chi_(std::move(chi)), chibar_(std::move(chibar)) {
  init(opt, range);
}

Matrix FeshbachPair::chi_left(const Matrix& x) const {
  if (diagonal_) return chi_diag_.asDiagonal() * x;
  return chi_ * x;
}

Matrix FeshbachPair::chibar_left(const Matrix& x) const {
  if (diagonal_) return chibar_diag_.asDiagonal() * x;
  return chibar_ * x;
}

Matrix FeshbachPair::to_range(const Matrix& x) const {
  if (!diagonal_) return range_.adjoint() * x;
  Matrix out(range_dim_, x.cols());
  for (Index k = 0; k < range_dim_; ++k) out.row(k) = x.row(selection_[k]);
  return out;
}

Matrix FeshbachPair::from_range(const Matrix& y) const {
  if (!diagonal_) return range_ * y;
  Matrix out = Matrix::Zero(h_.rows(), y.cols());
  for (Index k = 0; k < range_dim_; ++k) out.row(selection_[k]) = y.row(k);
  return out;
}

void FeshbachPair::init(const PairOptions& opt, const Matrix* range) {
  const Index n = h_.rows();
  for (const Matrix* m : {&h_, &t_, &chi_, &chibar_})
    if (m->rows() != n || m->cols() != n) throw DimensionError("feshbach: dimension mismatch");

  const double tscale = std::max(1.0, t_.cwiseAbs().rowwise().sum().maxCoeff());
  diagonal_ = is_diagonal(chi_) && is_diagonal(chibar_) && !range;
  if (diagonal_) {
    chi_diag_ = chi_.diagonal();
    chibar_diag_ = chibar_.diagonal();
  }
  bool commute = true;
  if (opt.check_commutation) {
    report_.commutation_chi = (chi_left(t_) - t_ * chi_).norm();
    report_.commutation_chibar = (chibar_left(t_) - t_ * chibar_).norm();
    commute = report_.commutation_chi <= opt.tol * tscale &&
              report_.commutation_chibar <= opt.tol * tscale;
  }

  if (diagonal_) {
    const double top = chibar_diag_.cwiseAbs().maxCoeff();
    double kept = top;
    for (Index i = 0; i < n; ++i)
      if (top > 0 && std::abs(chibar_diag_(i)) > 1e-10 * top) {
        selection_.push_back(i);
        kept = std::min(kept, std::abs(chibar_diag_(i)));
      }
    range_dim_ = static_cast<Index>(selection_.size());
    report_.range_conditioning = top > 0 ? kept / top : 1;
  } else if (range) {
    range_ = *range;
    range_dim_ = range_.cols();
  } else {
    RangeBasis rb = range_basis(chibar_, 1e-10);
    range_ = rb.basis;
    range_dim_ = range_.cols();
    report_.range_conditioning = rb.smallest_kept;
  }
  report_.conditioning_warning = range_dim_ > 0 && report_.range_conditioning < 1e-6;

  if (range_dim_ == 0) {
    report_.invertibility_margin = std::numeric_limits<double>::infinity();
    report_.condition_number = 1;
    report_.pass = commute;
    return;
  }
  const Matrix w = h_ - t_;
  auto compress = [&](const Matrix& x) {  // Q^* x Q
    return to_range(Matrix(to_range(Matrix(x.adjoint())).adjoint()));
  };
  const Matrix tq = compress(t_);
  // Q^* chibar W chibar Q, chibar self-adjoint
  const Matrix a = compress(chibar_left(Matrix(chibar_left(Matrix(w.adjoint())).adjoint())));
  const Matrix hq = tq + a;
  lu_t_.compute(tq);
  lu_h_.compute(hq);
  bool t_ok, h_ok;
  if (opt.diagnostics) {
    RealVector st = singular_values(tq);
    report_.invertibility_margin = st(st.size() - 1);
    RealVector sh = singular_values(hq);
    report_.condition_number = sh(sh.size() - 1) > 0 ? sh(0) / sh(sh.size() - 1)
                                                     : std::numeric_limits<double>::infinity();
    t_ok = report_.invertibility_margin > 1e-12 * tscale;
    h_ok = report_.condition_number < 1e14;
    if (t_ok) {
      // T^{-1} chibar W chibar and chibar W chibar T^{-1}, in Ran chibar coordinates.
      report_.contraction_left = op_norm(Matrix(lu_t_.solve(a)));
      report_.contraction_right = op_norm(Matrix(lu_t_.solve(Matrix(a.adjoint())).adjoint()));
    } else {
      report_.contraction_left = report_.contraction_right = std::numeric_limits<double>::infinity();
    }
  } else {
    t_ok = lu_t_.rcond() > 1e-14;
    h_ok = lu_h_.rcond() > 1e-14;
    report_.invertibility_margin = std::numeric_limits<double>::quiet_NaN();
    report_.condition_number = std::numeric_limits<double>::quiet_NaN();
    report_.contraction_left = report_.contraction_right = std::numeric_limits<double>::quiet_NaN();
  }
  report_.pass = commute && t_ok && h_ok &&
                 (!opt.diagnostics ||
                  (report_.contraction_left < 1 && report_.contraction_right < 1));
}

void FeshbachPair::require_pass() const {
  if (!report_.pass)
    throw PairFailure("feshbach pair conditions fail (contractions " +
                      std::to_string(report_.contraction_left) + ", " +
                      std::to_string(report_.contraction_right) + "; margin " +
                      std::to_string(report_.invertibility_margin) + ")");
}

Matrix FeshbachPair::reduced_resolvent() const {
  require_pass();
  if (range_dim_ == 0) return Matrix::Zero(h_.rows(), h_.cols());
  const Matrix inner = lu_h_.solve(to_range(chibar_));
  return chibar_left(from_range(inner));
}

Matrix FeshbachPair::free_resolvent() const {
  require_pass();
  if (range_dim_ == 0) return Matrix::Zero(h_.rows(), h_.cols());
  const Matrix inner = lu_t_.solve(to_range(chibar_));
  return chibar_left(from_range(inner));
}

Matrix FeshbachPair::map_between(const Matrix& l, const Matrix& r) const {
  require_pass();
  const Matrix w = h_ - t_;
  const Matrix cr = chi_left(r);
  const Matrix wr = w * cr;
  const Matrix cl = chi_left(l);
  Matrix out = l.adjoint() * (t_ * r) + cl.adjoint() * wr;
  if (range_dim_ == 0) return out;
  const Matrix y = lu_h_.solve(to_range(chibar_left(wr)));
  const Matrix c = to_range(chibar_left(Matrix(w.adjoint() * cl)));
  out -= c.adjoint() * y;
  return out;
}

Matrix FeshbachPair::q_times(const Matrix& v) const {
  require_pass();
  const Matrix cv = chi_left(v);
  if (range_dim_ == 0) return cv;
  const Matrix y = lu_h_.solve(to_range(chibar_left(Matrix(w() * cv))));
  return cv - chibar_left(from_range(y));
}

Matrix FeshbachPair::map() const {
  const Matrix id = Matrix::Identity(h_.rows(), h_.cols());
  return map_between(id, id);
}

Matrix FeshbachPair::q() const { return q_times(Matrix::Identity(h_.rows(), h_.cols())); }

Matrix FeshbachPair::q_sharp() const { return chi_ - chi_ * w() * reduced_resolvent(); }

FeshbachPairReport verify_pair(const Matrix& h, const Matrix& t, const Matrix& chi,
                               const Matrix& chibar) {
  return FeshbachPair(h, t, chi, chibar).report();
}

Matrix feshbach_map(const Matrix& h, const Matrix& t, const Matrix& chi, const Matrix& chibar) {
  return FeshbachPair(h, t, chi, chibar).map();
}

QOperators q_ops(const Matrix& h, const Matrix& t, const Matrix& chi, const Matrix& chibar) {
  FeshbachPair p(h, t, chi, chibar);
  return {p.q(), p.q_sharp()};
}

bool IsospectralityReport::pass(double tol) const {
  if (kernel_h != kernel_f) return false;
  if (invertible) return h_inverse_residual < tol && f_inverse_residual < tol;
  return kernel_map_residual < tol && forward_residual < tol && roundtrip_residual < tol;
}

IsospectralityReport isospectrality_suite(const FeshbachPair& pair) {
  IsospectralityReport rep;
  const Matrix f = pair.map();
  const Matrix& h = pair.h();
  const double hn = op_norm(h), fn = op_norm(f);
  const double thr = 1e-10 * std::max(hn, fn);
  RealVector sh = singular_values(h), sf = singular_values(f);
  rep.condition_h = sh(0) / sh(sh.size() - 1);
  rep.condition_f = sf(0) / sf(sf.size() - 1);
  rep.kernel_h = nullity(h, thr);
  rep.kernel_f = nullity(f, thr);
  rep.invertible = rep.kernel_h == 0 && rep.kernel_f == 0;
  const Matrix q = pair.q();
  if (rep.invertible) {
    const Matrix hinv = h.partialPivLu().inverse();
    const Matrix finv = f.partialPivLu().inverse();
    const Matrix h_formula = q * finv * pair.q_sharp() + pair.reduced_resolvent();
    const Matrix f_formula = pair.chi() * hinv * pair.chi() + pair.free_resolvent();
    rep.h_inverse_residual = op_norm(hinv - h_formula) / op_norm(hinv);
    rep.f_inverse_residual = op_norm(finv - f_formula) / op_norm(finv);
    return rep;
  }
  const Matrix kf = null_space(f, thr);
  const Matrix kh = null_space(h, thr);
  for (Index i = 0; i < kf.cols(); ++i) {
    const Vector u = kf.col(i);
    const Vector qu = q * u;
    rep.kernel_map_residual = std::max(rep.kernel_map_residual, (h * qu).norm() / qu.norm());
    rep.roundtrip_residual = std::max(rep.roundtrip_residual, (pair.chi() * qu - u).norm());
  }
  for (Index i = 0; i < kh.cols(); ++i) {
    const Vector ck = pair.chi() * kh.col(i);
    rep.forward_residual = std::max(rep.forward_residual, (f * ck).norm() / ck.norm());
  }
  return rep;
}

RandomPair make_random_pair(Index dim, Index kernel, std::uint64_t seed) {
  if (dim < 4 || kernel < 0 || kernel > dim / 4) throw Error("random pair: bad sizes");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> normal;
  RandomPair out;
  RealVector c(dim);
  // A quarter of the coordinates are fully in Ran chi, a quarter fully out.
  const Index inside = std::max<Index>(dim / 4, kernel + 1);
  for (Index i = 0; i < dim; ++i) {
    if (i < inside)
      c(i) = 1.0;
    else if (i >= dim - dim / 4)
      c(i) = 0.0;
    else
      c(i) = uni(rng);
  }
  Vector tdiag(dim);
  for (Index i = 0; i < dim; ++i) {
    const double mag = i < inside ? 0.1 + 0.2 * uni(rng) : 1.0 + uni(rng);
    tdiag(i) = std::polar(mag, 2 * std::numbers::pi * uni(rng));
  }
  out.t = tdiag.asDiagonal();
  out.chi = c.cast<Complex>().asDiagonal();
  out.chibar = (1.0 - c.array().square()).max(0.0).sqrt().matrix().cast<Complex>().asDiagonal();
  Matrix w(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) w(i, j) = Complex(normal(rng), normal(rng));
  w *= 0.25 / op_norm(w);
  out.h = out.t + w;
  if (kernel > 0) {
    Matrix v(dim, kernel);
    v.setZero();
    for (Index i = 0; i < inside; ++i)
      for (Index k = 0; k < kernel; ++k) v(i, k) = Complex(normal(rng), normal(rng));
    v = range_basis(v, 1e-12).basis;
    out.h = out.h - out.h * v * v.adjoint();
  }
  out.planted_kernel = kernel;
  return out;
}

FirstFeshbach::FirstFeshbach(const ModelSpec& spec, Complex s, double g, const FockBasis& full,
                             const Matrix& frame)
    : full_(full), frame_(frame) {
  if (full.atomic_dim() != spec.atomic_dim) throw DimensionError("first feshbach: basis mismatch");
  if (full.energy_cutoff() < 1.0 - kEnergySlack)
    throw Error("first feshbach: the full basis must contain the H_f <= 1 sector");
  const Index d_at = spec.atomic_dim;
  const Matrix id_f = Matrix::Identity(full.size(), full.size());
  const Matrix lift_u = kron(id_f, frame_);
  const Matrix lift_uinv = kron(id_f, Matrix(frame_.inverse()));
  h_ = lift_uinv * build_hamiltonian(spec, s, g, full) * lift_u;
  h0_ = lift_uinv * free_hamiltonian(spec, s, full) * lift_u;

  const AtomicData at0 = atomic_data(spec, spec.reference_point);
  e_at_ = atomic_data(spec, s).energy;
  v_ = at0.range;
  // Contour quadrature leaves ~1e-17 noise; snapping keeps diagonal cutoffs diagonal.
  const Matrix p = at0.projection.unaryExpr(
      [](Complex x) { return std::abs(x) < 1e-14 ? Complex(0) : x; });
  const Matrix pbar = Matrix::Identity(d_at, d_at) - p;
  const Cutoff cut{1.0};
  Vector cdiag(full.size()), cbdiag(full.size());
  for (Index i = 0; i < full.size(); ++i) {
    cdiag(i) = cut.chi(full.energy(i));
    cbdiag(i) = cut.chibar(full.energy(i));
  }
  chi_ = kron(Matrix(cdiag.asDiagonal()), p);
  chibar_ = kron(id_f, pbar) + kron(Matrix(cbdiag.asDiagonal()), p);

  reduced_ = std::make_shared<FockBasis>(full.grid(), full.max_photons(), 1.0, spec.degeneracy);
  Matrix sel = Matrix::Zero(full.size(), reduced_->size());
  for (Index i = 0; i < reduced_->size(); ++i) {
    auto k = full.index_of(reduced_->state(i));
    if (!k) throw DimensionError("first feshbach: reduced state missing from full basis");
    sel(*k, i) = 1.0;
  }
  embed_ = kron(sel, v_);

  // Both are independent of z: T = H_0 - z.
  commutation_chi_ = (chi_ * h0_ - h0_ * chi_).norm();
  commutation_chibar_ = (chibar_ * h0_ - h0_ * chibar_).norm();
  if (!is_diagonal(chibar_)) range_ = range_basis(chibar_, 1e-10).basis;
}

FeshbachPair FirstFeshbach::pair(Complex z, bool diagnostics) const {
  const Index n = h_.rows();
  PairOptions opt;
  opt.diagnostics = diagnostics;
  opt.check_commutation = false;
  return FeshbachPair(h_ - z * Matrix::Identity(n, n), h0_ - z * Matrix::Identity(n, n), chi_,
                      chibar_, opt, range_.size() > 0 ? &range_ : nullptr);
}

FirstFeshbach::Result FirstFeshbach::evaluate(Complex z, bool with_lift, bool with_neumann,
                                              bool diagnostics) const {
  const FeshbachPair pair = this->pair(z, diagnostics);
  const Matrix& t = pair.t();
  Result out;
  out.pair = pair.report();
  const double tscale = std::max(1.0, t.cwiseAbs().rowwise().sum().maxCoeff());
  out.pair.commutation_chi = commutation_chi_;
  out.pair.commutation_chibar = commutation_chibar_;
  if (commutation_chi_ > 1e-10 * tscale || commutation_chibar_ > 1e-10 * tscale)
    out.pair.pass = false;
  if (!out.pair.pass) throw PairFailure("first feshbach pair fails at z");
  out.reduced = pair.map_between(embed_, embed_);
  if (with_lift) out.lift = pair.q_times(embed_);
  if (with_neumann) {
    const Matrix f = pair.map();
    // F = T + sum_{L>=1} (-1)^{L-1} chi W (chibar T^{-1} chibar W)^{L-1} chi
    const Matrix w = h_ - h0_;
    const Matrix k = pair.free_resolvent() * w;
    const Matrix cw = chi_ * w;
    Matrix y = chi_;
    Matrix sum = t;
    double sign = 1, prev = 0, last = 0, kappa = 1;
    const double scale = std::max(1.0, op_norm(f));
    int terms = 0;
    for (int l = 1; l <= 30; ++l) {
      const Matrix term = cw * y;
      sum += sign * term;
      last = term.norm();
      if (l > 1 && prev > 0) kappa = last / prev;
      prev = last;
      terms = l;
      if (last < 1e-16 * scale) break;
      y = (k * y).eval();
      sign = -sign;
    }
    out.neumann_done = true;
    out.neumann_terms = terms;
    out.neumann_converged = kappa < 1 || last < 1e-16 * scale;
    out.neumann_tail_bound = kappa < 1 ? last * kappa / (1 - kappa) : std::numeric_limits<double>::infinity();
    out.neumann_discrepancy = op_norm(sum - f);
  }
  return out;
}

}  // namespace fsrg

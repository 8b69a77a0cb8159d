#include "fsrg/model.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

namespace fsrg {

namespace {

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0);
  w.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = t;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    x[i] = t;
    w[i] = 2 / ((1 - t * t) * dp * dp);
  }
}

template <typename F>
double integrate(F f, double a, double b, int panels = 8) {
  static std::vector<double> gx, gw;
  static const bool ready = (gauss_legendre(32, gx, gw), true);
  (void)ready;
  double sum = 0;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h, mid = lo + h / 2;
    for (std::size_t i = 0; i < gx.size(); ++i) sum += gw[i] * f(mid + h / 2 * gx[i]) * h / 2;
  }
  return sum;
}

}  // namespace

Matrix MatrixPolynomial::operator()(Complex s) const {
  if (coeffs.empty()) throw Error("matrix polynomial: no coefficients");
  Matrix out = coeffs.back();
  for (auto it = coeffs.rbegin() + 1; it != coeffs.rend(); ++it) out = (out * s + *it).eval();
  return out;
}

double RadialProfile::operator()(double r) const {
  switch (kind) {
    case Kind::zero:
      return 0.0;
    case Kind::power:
      return std::pow(r, exponent);
    case Kind::power_gauss:
      return std::pow(r, exponent) * std::exp(-r * r / (width * width));
  }
  return 0.0;
}

void ModelSpec::validate() const {
  if (atomic_dim < 1) throw Error("model: atomic_dim must be positive");
  if (degeneracy < 1 || degeneracy > atomic_dim) throw Error("model: bad degeneracy");
  auto check_poly = [&](const MatrixPolynomial& p, const char* what) {
    if (p.coeffs.empty()) throw Error(std::string("model: empty ") + what);
    for (const auto& c : p.coeffs)
      if (c.rows() != atomic_dim || c.cols() != atomic_dim)
        throw DimensionError(std::string("model: ") + what + " has wrong size");
  };
  check_poly(atomic_hamiltonian, "atomic_hamiltonian");
  check_poly(coupling1, "coupling g1");
  check_poly(coupling2, "coupling g2");
  for (const auto& s : symmetries)
    if (s.atomic.rows() != atomic_dim) throw DimensionError("model: symmetry size mismatch");
  if (conjugation && conjugation->atomic.rows() != atomic_dim)
    throw DimensionError("model: conjugation size mismatch");
  if (!(infrared_exponent > 0)) throw Error("model: infrared exponent must be positive");
  if (!(polarization_factor > 0)) throw Error("model: polarization factor must be positive");
  if (!(window.z_radius > 0 && window.z_radius < 0.5))
    throw Error("model: z radius must lie in (0, 1/2)");
  if (!(window.contour_radius > 0) || !(window.s_radius >= 0))
    throw Error("model: bad spectral window");
}

double shell_weight(const RadialProfile& profile, const ModeGrid& grid, int j) {
  const double hi = grid.energies.at(j), lo = hi * grid.ratio;
  switch (profile.kind) {
    case RadialProfile::Kind::zero:
      return 0.0;
    case RadialProfile::Kind::power: {
      const double e = 3 + 2 * profile.exponent;
      if (e <= 0) throw InfraredDivergence("profile too singular for a finite shell weight");
      return 4 * std::numbers::pi * (std::pow(hi, e) - std::pow(lo, e)) / e;
    }
    case RadialProfile::Kind::power_gauss:
      return 4 * std::numbers::pi *
             integrate([&](double r) { return r * r * std::pow(profile(r), 2); }, lo, hi);
  }
  return 0.0;
}

std::vector<Matrix> shell_couplings(const MatrixPolynomial& b, const RadialProfile& profile,
                                    const ModeGrid& grid, Complex s, double polarization) {
  const Matrix bs = b(s);
  std::vector<Matrix> out;
  for (int j = 0; j < grid.levels; ++j)
    out.push_back(std::sqrt(polarization * shell_weight(profile, grid, j)) * bs);
  return out;
}

double coupling_norm_mu(const RadialProfile& profile, double mu, double polarization) {
  if (!(mu > 0)) throw Error("coupling norm: mu must be positive");
  if (profile.kind == RadialProfile::Kind::zero) return 0.0;
  // Integrand r^{2p - 2mu} near 0; finite iff a = 1 + 2p - 2mu > 0.
  const double a = 1 + 2 * profile.exponent - 2 * mu;
  if (a <= 0)
    throw InfraredDivergence("infrared failure: coupling norm diverges for mu = " +
                             std::to_string(mu));
  double integral = 0;
  if (profile.kind == RadialProfile::Kind::power) {
    integral = 1.0 / a;
  } else {
    // u = r^a turns the weak singularity into a smooth integrand.
    const double w2 = profile.width * profile.width;
    integral = integrate(
                   [&](double u) { return std::exp(-2 * std::pow(u, 2 / a) / w2); }, 0.0, 1.0,
                   16) /
               a;
  }
  return std::sqrt(polarization * 4 * std::numbers::pi * integral);
}

void check_region(const ModelSpec& spec, Complex s) {
  if (std::abs(s - spec.reference_point) > spec.window.s_radius + 1e-12)
    throw WindowError("parameter outside the declared region");
}

Matrix free_hamiltonian(const ModelSpec& spec, Complex s, const FockBasis& basis) {
  return lift_atomic(basis, spec.atomic_hamiltonian(s)) + field_energy(basis);
}

Matrix interaction(const ModelSpec& spec, Complex s, const FockBasis& basis) {
  const auto g1 = shell_couplings(spec.coupling1, spec.profile, basis.grid(), std::conj(s),
                                  spec.polarization_factor);
  const auto g2 =
      shell_couplings(spec.coupling2, spec.profile, basis.grid(), s, spec.polarization_factor);
  return annihilation_op(basis, g1) + creation_op(basis, g2);
}

Matrix build_hamiltonian(const ModelSpec& spec, Complex s, double g, const FockBasis& basis) {
  check_region(spec, s);
  if (basis.atomic_dim() != spec.atomic_dim) throw DimensionError("hamiltonian: basis mismatch");
  Matrix h = free_hamiltonian(spec, s, basis);
  if (g != 0) h += g * interaction(spec, s, basis);
  return h;
}

Matrix spectral_projection(const Matrix& h, Complex center, double radius, int nodes) {
  if (h.rows() != h.cols()) throw DimensionError("spectral projection: square matrix required");
  if (nodes < 4) throw Error("spectral projection: too few nodes");
  Eigen::ComplexEigenSolver<Matrix> es(h, false);
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double d = std::abs(es.eigenvalues()(i) - center);
    if (d > 0.9 * radius && d < 1.1 * radius)
      throw Error("spectral projection: eigenvalue too close to the contour");
  }
  const Index n = h.rows();
  const Matrix id = Matrix::Identity(n, n);
  auto trapezoid = [&](int m) {
    Matrix p = Matrix::Zero(n, n);
    for (int k = 0; k < m; ++k) {
      const Complex e = std::polar(1.0, 2 * std::numbers::pi * k / m);
      const Complex z = center + radius * e;
      p -= (radius / m) * e * (h - z * id).partialPivLu().inverse();
    }
    return p;
  };
  Matrix coarse = trapezoid(nodes);
  Matrix fine = trapezoid(2 * nodes);
  if (op_norm(fine - coarse) > 1e-10 * std::max(1.0, op_norm(fine)))
    throw Error("spectral projection: quadrature did not converge");
  return fine;
}

AtomicData atomic_data(const ModelSpec& spec, Complex s) {
  AtomicData out;
  const Matrix hat = spec.atomic_hamiltonian(s);
  out.projection = spectral_projection(hat, spec.window.center, spec.window.contour_radius);
  const Complex tr = out.projection.trace();
  if (std::abs(tr - static_cast<double>(spec.degeneracy)) > 1e-8)
    throw Error("atomic projection rank differs from the declared degeneracy");
  out.energy = (hat * out.projection).trace() / static_cast<double>(spec.degeneracy);
  out.range = range_basis(out.projection, 1e-8).basis;
  return out;
}

bool projection_constant(const ModelSpec& spec, int samples) {
  const Matrix p0 = atomic_data(spec, spec.reference_point).projection;
  for (int k = 0; k < samples; ++k) {
    const Complex s = spec.reference_point +
                      spec.window.s_radius * std::polar(1.0, 2 * std::numbers::pi * k / samples);
    if (op_norm(atomic_data(spec, s).projection - p0) > 1e-12) return false;
  }
  return true;
}

Matrix atomic_frame(const ModelSpec& spec, Complex s) {
  const Index n = spec.atomic_dim;
  const Complex s0 = spec.reference_point;
  if (s == s0) return Matrix::Identity(n, n);
  const Matrix p0 = atomic_data(spec, s0).projection;
  const Matrix ps = atomic_data(spec, s).projection;
  const Complex mid = 0.5 * (s + s0);
  if (op_norm(ps - p0) <= 1e-13 && op_norm(atomic_data(spec, mid).projection - p0) <= 1e-13)
    return Matrix::Identity(n, n);
  const int steps = std::max(8, static_cast<int>(std::ceil(std::abs(s - s0) * 400)));
  auto path = transformation_function(
      [&](Complex t) {
        const Matrix hat = spec.atomic_hamiltonian(t);
        return spectral_projection(hat, spec.window.center, spec.window.contour_radius, 32);
      },
      s0, s, steps);
  return path.u.back();
}

double hyp3_sup(const ModelSpec& spec, Complex s, Complex z) {
  const Matrix hat = spec.atomic_hamiltonian(s);
  const Index n = hat.rows();
  const Matrix id = Matrix::Identity(n, n);
  const Matrix pbar = id - atomic_data(spec, s).projection;
  double sup = op_norm(pbar);
  std::vector<double> qs{0.0};
  for (int e = -6; e <= 6; ++e) qs.push_back(std::ldexp(1.0, e));
  for (double q : qs) {
    Matrix r = (hat - (z - q) * id).partialPivLu().solve(pbar);
    sup = std::max(sup, (q + 1) * op_norm(r));
  }
  return sup;
}

bool HypothesisReport::all_pass() const {
  for (const auto& e : entries)
    if (e.applicable && !e.pass) return false;
  return true;
}

HypothesisReport verify_hypotheses(const ModelSpec& spec, int samples) {
  HypothesisReport rep;
  spec.validate();
  const Complex s0 = spec.reference_point;
  std::vector<Complex> pts{s0};
  for (int k = 0; k < samples; ++k)
    pts.push_back(s0 + 0.5 * spec.window.s_radius *
                           std::polar(1.0, 2 * std::numbers::pi * (k + 0.25) / samples));

  {
    HypothesisEntry e;
    e.name = "coupling_norm";
    try {
      const double base = coupling_norm_mu(spec.profile, spec.infrared_exponent,
                                           spec.polarization_factor);
      double worst = 0;
      for (Complex s : pts)
        worst = std::max({worst, base * op_norm(spec.coupling1(s)), base * op_norm(spec.coupling2(s))});
      e.residual = worst;
      e.note = "max ||G||_mu over samples";
    } catch (const InfraredDivergence& ex) {
      e.pass = false;
      e.note = ex.what();
    }
    rep.entries.push_back(e);
  }

  AtomicData at0;
  {
    HypothesisEntry e;
    e.name = "isolated_eigenvalue";
    try {
      at0 = atomic_data(spec, s0);
      const Matrix hat = spec.atomic_hamiltonian(s0);
      e.residual = op_norm((hat - at0.energy * Matrix::Identity(spec.atomic_dim, spec.atomic_dim)) *
                           at0.range);
      e.pass = e.residual < 1e-9;
      e.note = "||(H_at - E_at) V||, non-defective check; analyticity holds by polynomial construction";
    } catch (const Error& ex) {
      e.pass = false;
      e.note = ex.what();
    }
    rep.entries.push_back(e);
    if (!e.pass) return rep;
  }

  {
    HypothesisEntry e;
    e.name = "irreducible";
    if (spec.degeneracy == 1) {
      e.note = "d = 1, no symmetry needed";
    } else {
      try {
        std::vector<SymmetryOp> gens;
        for (const auto& f : spec.symmetries) gens.push_back(atomic_part(restrict_atomic(f, at0.range)));
        e.pass = !gens.empty() && is_irreducible(gens);
        e.residual = gens.empty() ? 0 : commutant_dimension(gens);
        e.note = "commutant dimension on the eigenspace";
      } catch (const Error& ex) {
        e.pass = false;
        e.note = ex.what();
      }
    }
    rep.entries.push_back(e);
  }

  const FockBasis small(ModeGrid::geometric(0.5, 3), 2, 2.0, spec.atomic_dim);
  {
    HypothesisEntry e;
    e.name = "symmetry";
    e.applicable = !spec.symmetries.empty();
    double worst = 0;
    for (const auto& f : spec.symmetries) {
      const SymmetryOp s_full = lift(f, small);
      for (Complex s : pts) {
        if (std::abs(s.imag()) > 0 && f.antiunitary) continue;
        const Matrix h = build_hamiltonian(spec, s, 1.0, small);
        worst = std::max(worst, is_symmetry_of(s_full, h).residual);
      }
      worst = std::max(worst, dilation_commutation_residual(f, small, 0.5));
    }
    e.residual = worst;
    e.pass = worst < 1e-10;
    e.note = "conjugation residual of H_g (g = 1) and dilation commutation on the low sector";
    rep.entries.push_back(e);
  }

  {
    HypothesisEntry e;
    e.name = "resolvent";
    double worst = 0;
    for (Complex s : pts) {
      const Complex eat = atomic_data(spec, s).energy;
      for (int k = 0; k <= 4; ++k) {
        const Complex z = k == 0 ? eat
                                 : eat + spec.window.z_radius *
                                             std::polar(1.0, 2 * std::numbers::pi * k / 4.0);
        worst = std::max(worst, hyp3_sup(spec, s, z));
      }
    }
    e.residual = worst;
    e.pass = std::isfinite(worst) && spec.window.z_radius < 0.5;
    e.note = "grid max of (q+1)||(H_at - z + q)^{-1} Pbar_at||, not a certified sup";
    rep.entries.push_back(e);
  }

  {
    HypothesisEntry e;
    e.name = "reflection";
    e.applicable = spec.reflection_symmetric;
    if (e.applicable) {
      double worst = 0;
      for (Complex s : pts) {
        worst = std::max(worst, op_norm(spec.coupling1(s) - spec.coupling2(s)));
        worst = std::max(worst, op_norm(spec.atomic_hamiltonian(s).adjoint() -
                                        spec.atomic_hamiltonian(std::conj(s))));
      }
      e.residual = worst;
      e.pass = worst < 1e-12;
    }
    rep.entries.push_back(e);
  }

  {
    HypothesisEntry e;
    e.name = "constant_projection";
    const bool constant = projection_constant(spec);
    rep.frame_transform = !constant;
    if (!constant) {
      const Complex s = pts.back();
      const Matrix u = atomic_frame(spec, s);
      e.residual = transport_residual(u, at0.projection, atomic_data(spec, s).projection);
      e.pass = e.residual < 1e-8;
      e.note = "P_at varies; frame transform applied";
    } else {
      e.note = "P_at constant";
    }
    rep.entries.push_back(e);
  }

  {
    HypothesisEntry e;
    e.name = "complex_selfadjoint";
    e.applicable = spec.conjugation.has_value();
    if (e.applicable) {
      const SymmetryOp j = lift(*spec.conjugation, small);
      double worst = 0;
      for (Complex s : pts) {
        if (s.imag() != 0) continue;
        worst = std::max(worst, is_symmetry_of(j, build_hamiltonian(spec, s, 1.0, small)).residual);
      }
      const Matrix form = (spec.conjugation->atomic * at0.range.conjugate()).adjoint() * at0.range;
      const double smin = min_singular_value(form);
      e.residual = worst;
      e.pass = worst < 1e-10 && smin > 1e-8;
      e.note = "J-conjugation residual; bilinear form smallest singular value " + std::to_string(smin);
    }
    rep.entries.push_back(e);
  }
  return rep;
}

}  // namespace fsrg

#include "fsrg/rg.hpp"

#include "fsrg/symmetry.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

namespace fsrg {

double RGConfig::xi() const { return std::sqrt(rho) / (4 * c_chi); }

void RGConfig::validate() const {
  if (!(rho > 0 && rho < 0.8)) throw Error("rg: rho must lie in (0, 4/5)");
  if (!(mu > 0)) throw Error("rg: mu must be positive");
  if (!(c_chi > 0)) throw Error("rg: C_chi must be positive");
  if (!(xi() > 0 && xi() < 1)) throw Error("rg: xi must lie in (0, 1)");
  if (!(window_fraction > 0 && window_fraction <= 0.5))
    throw Error("rg: window fraction must lie in (0, 1/2]");
  if (max_iterations < 1 || winding_nodes < 4) throw Error("rg: bad iteration settings");
  if (!(tol_z > 0) || !(stop_tol > 0)) throw Error("rg: tolerances must be positive");
}

ParamStep param_step(double alpha, double beta, double gamma, const RGConfig& cfg) {
  (void)alpha;
  const double cb = 1.5 * cfg.c_chi;
  const double cg = 128.0 * cfg.c_chi * cfg.c_chi;
  const double bound = cfg.rho / (8 * cfg.c_chi);
  ParamStep out;
  out.alpha = cb * gamma * gamma / cfg.rho;
  out.beta = beta + cb * gamma * gamma / cfg.rho;
  out.gamma = cg * std::pow(cfg.rho, cfg.mu) * gamma;
  out.admissible = beta <= bound && gamma <= bound;
  return out;
}

bool sustained_admissible(double beta0, double gamma0, const RGConfig& cfg, int steps) {
  double beta = beta0, gamma = gamma0;
  for (int k = 0; k < steps; ++k) {
    ParamStep p = param_step(0, beta, gamma, cfg);
    if (!p.admissible) return false;
    beta = p.beta;
    gamma = p.gamma;
  }
  return beta <= cfg.rho / (8 * cfg.c_chi) && gamma <= cfg.rho / (8 * cfg.c_chi);
}

std::shared_ptr<const FockBasis> level_basis(double rho, int modes, int max_photons, int d) {
  if (modes == 0) return std::make_shared<FockBasis>(FockBasis::terminal(rho, d));
  return std::make_shared<FockBasis>(ModeGrid::geometric(rho, modes), max_photons, 1.0, d);
}

Matrix pair_reference(const Matrix& h, const FockBasis& basis, const W00Extraction& ext) {
  Matrix t = w00_operator(ext, basis);
  const int d = basis.atomic_dim();
  for (Index i = 0; i < basis.size(); ++i)
    if (basis.photons(i) == basis.max_photons() && basis.photons(i) > 0)
      t.block(i * d, i * d, d, d) = h.block(i * d, i * d, d, d);
  return t;
}

RGStepResult rg_step(const Matrix& h, const FockBasis& basis, const RGConfig& cfg, bool keep_q,
                     bool diagnostics) {
  if (basis.modes() < 1) throw Error("rg_step: no shell left to integrate out");
  if (std::abs(basis.grid().ratio - cfg.rho) > 1e-12) throw Error("rg_step: grid ratio differs from rho");
  RGStepResult out;
  const W00Extraction ext = extract_w00(h, basis, diagnostics ? 101 : 0);
  if (diagnostics) {
    out.polydisc =
        polydisc_check(h, basis, ext, PolydiscParams::managed(cfg.rho, cfg.mu, cfg.c_chi));
    if (cfg.abort_on_polydisc && !out.polydisc.member)
      throw Error("rg_step: input outside the polydisc B(rho/2, rho/8, rho/8)");
  }
  const Cutoff cut{cfg.rho};
  PairOptions opt;
  opt.diagnostics = diagnostics;
  FeshbachPair pair(h, pair_reference(h, basis, ext), cutoff_matrix(basis, cut, false),
                    cutoff_matrix(basis, cut, true), opt);
  out.pair = pair.report();
  if (!out.pair.pass)
    throw PairFailure("feshbach pair fails on a level with " + std::to_string(basis.modes()) +
                      " shells");
  out.next_basis = level_basis(cfg.rho, basis.modes() - 1, basis.max_photons(), basis.atomic_dim());
  const Dilation dil(basis, *out.next_basis, cfg.rho);
  // Gamma F Gamma^* / rho, gathered from the sector instead of multiplied.
  const int d = basis.atomic_dim();
  const auto& sector = dil.sector();
  const auto& image = dil.image();
  const Index m = static_cast<Index>(sector.size());
  Matrix cols = Matrix::Zero(basis.dim(), m * d);
  for (Index k = 0; k < m; ++k)
    for (int a = 0; a < d; ++a) cols(sector[k] * d + a, k * d + a) = 1.0;
  const Matrix f = pair.map_between(cols, cols);
  out.next = Matrix::Zero(out.next_basis->dim(), out.next_basis->dim());
  for (Index a = 0; a < m; ++a)
    for (Index b = 0; b < m; ++b)
      out.next.block(image[a] * d, image[b] * d, d, d) = f.block(a * d, b * d, d, d) / cfg.rho;
  if (keep_q) {
    out.q = pair.q();
    out.gamma = dil.matrix();
  }
  return out;
}

Cascade::Cascade(const ModelSpec& spec, Complex s, double g, const Truncation& trunc,
                 const RGConfig& cfg)
    : spec_(spec), s_(s), g_(g), trunc_(trunc), cfg_(cfg) {
  cfg_.validate();
  const FockBasis full(ModeGrid::geometric(cfg.rho, trunc.levels), trunc.max_photons,
                       trunc.energy_cutoff, spec.atomic_dim);
  first_ = std::make_shared<FirstFeshbach>(spec, s, g, full, atomic_frame(spec, s));
}

Cascade::Evaluation Cascade::evaluate(Complex z, int depth, const Options& opt) const {
  const bool keep = opt.keep;
  if (depth < 0 || depth > trunc_.levels) throw Error("cascade: depth out of range");
  if (std::abs(z - first_->atomic_energy()) > spec_.window.z_radius)
    throw WindowExit(0, "z outside U_0");
  Evaluation ev;
  ev.z = z;
  ev.first = first_->evaluate(z, keep, opt.neumann, opt.diagnostics);
  Matrix h = ev.first.reduced;
  std::shared_ptr<const FockBasis> basis = first_->reduced_basis();
  const int d = spec_.degeneracy;
  const double thr = cfg_.window_threshold();
  const PolydiscParams params = PolydiscParams::managed(cfg_.rho, cfg_.mu, cfg_.c_chi);
  for (int k = 0;; ++k) {
    const SchurScalar sc = schur_scalar(h, d);
    ev.energy.push_back(sc.c);
    ev.schur_deviation.push_back(sc.deviation);
    ev.bases.push_back(basis);
    if (keep) ev.h.push_back(h);
    if (k == depth) {
      if (opt.diagnostics) ev.polydisc.push_back(polydisc_check(h, *basis, params));
      break;
    }
    if (std::abs(sc.c) > thr) throw WindowExit(k + 1, "z outside U_" + std::to_string(k + 1));
    RGStepResult step = rg_step(h, *basis, cfg_, keep, opt.diagnostics);
    ev.pairs.push_back(step.pair);
    if (opt.diagnostics) ev.polydisc.push_back(step.polydisc);
    if (keep) {
      ev.q.push_back(std::move(step.q));
      ev.gamma.push_back(std::move(step.gamma));
    }
    h = std::move(step.next);
    basis = step.next_basis;
  }
  return ev;
}

RootResult find_zn(const Cascade& c, int n, Complex start) {
  const RGConfig& cfg = c.config();
  const double thr = cfg.window_threshold();
  const double scale = std::pow(cfg.rho, n);
  auto f = [&](Complex z) { return c.energy(z, n); };
  RootResult out;
  Complex z0 = start;
  Complex f0 = f(z0);
  if (std::abs(f0) <= cfg.tol_z) {
    out.z = z0;
    out.residual = f0;
  } else {
    Complex step = 0.1 * thr * scale;
    Complex z1, f1;
    for (int tries = 0;; ++tries) {
      try {
        z1 = z0 + step;
        f1 = f(z1);
        break;
      } catch (const WindowExit&) {
        if (tries > 20) throw;
        step *= 0.1;
      }
    }
    bool done = false;
    for (int it = 0; it < 50 && !done; ++it) {
      if (f1 == f0) break;
      Complex z2 = z1 - f1 * (z1 - z0) / (f1 - f0);
      Complex f2;
      for (int tries = 0;; ++tries) {
        try {
          f2 = f(z2);
          break;
        } catch (const WindowExit&) {
          if (tries > 30) throw;
          z2 = 0.5 * (z1 + z2);
        }
      }
      out.secant_steps = it + 1;
      const bool small_step = std::abs(z2 - z1) <= 1e-15 * std::max(1.0, std::abs(z2));
      z0 = z1;
      f0 = f1;
      z1 = z2;
      f1 = f2;
      done = std::abs(f2) <= cfg.tol_z || small_step;
    }
    if (!done && std::abs(f1) > cfg.tol_z)
      throw ConvergenceFailure("secant iteration for z_" + std::to_string(n) + " did not converge");
    out.z = z1;
    out.residual = f1;
  }
  if (cfg.winding_check) {
    const double radius = 0.5 * thr * scale;
    const int m = cfg.winding_nodes;
    std::vector<Complex> vals(m);
    for (int k = 0; k < m; ++k)
      vals[k] = f(out.z + radius * std::polar(1.0, 2 * std::numbers::pi * k / m));
    double total = 0;
    for (int k = 0; k < m; ++k) total += std::arg(vals[(k + 1) % m] / vals[k]);
    out.winding = static_cast<int>(std::lround(total / (2 * std::numbers::pi)));
    if (out.winding != 1)
      throw ConvergenceFailure("winding number " + std::to_string(out.winding) + " at level " +
                               std::to_string(n));
  }
  return out;
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string num(Complex v) { return num(v.real()) + "," + num(v.imag()); }

}  // namespace

std::string RGTrace::serialize() const {
  std::ostringstream os;
  for (const auto& r : records) {
    os << "n=" << r.n << " z=" << num(r.z) << " E=" << num(r.energy) << " delta=" << num(r.delta)
       << " alpha=" << num(r.alpha) << " beta=" << num(r.beta) << " gamma=" << num(r.gamma)
       << " schur=" << num(r.schur_deviation) << " pair_left=" << num(r.pair_left)
       << " pair_right=" << num(r.pair_right) << " pair_margin=" << num(r.pair_margin)
       << " pair_pass=" << (r.pair_pass ? 1 : 0) << " gamma_ratio=" << num(r.contraction_ratio)
       << " secant=" << r.secant_steps << " winding=" << r.winding
       << " tail_bound=" << num(r.tail_bound) << "\n";
  }
  return os.str();
}

double RGTrace::fitted_rate(int from, int to) const {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (const auto& r : records) {
    if (r.n < from || r.n > to) continue;
    if (!(r.delta > 0)) return std::numeric_limits<double>::quiet_NaN();
    const double x = r.n, y = std::log(r.delta);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2) throw Error("fitted_rate: need at least two records");
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  return std::exp(slope);
}

RGTrace iterate_to_fixed_point(const Cascade& c) {
  const RGConfig& cfg = c.config();
  const int levels = c.levels();
  RGTrace trace;
  Complex prev = c.atomic_energy();
  for (int n = 0;; ++n) {
    if (n >= cfg.max_iterations)
      throw ConvergenceFailure("iteration budget exhausted before convergence");
    const RootResult root = find_zn(c, n, prev);
    const int depth = std::min(n + 1, levels);
    Cascade::Options opt;
    opt.diagnostics = true;
    const Cascade::Evaluation ev = c.evaluate(root.z, depth, opt);
    TraceRecord rec;
    rec.n = n;
    rec.z = root.z;
    rec.energy = ev.energy[n];
    rec.delta = std::abs(root.z - prev);
    rec.alpha = ev.polydisc[n].alpha;
    rec.beta = ev.polydisc[n].beta;
    rec.gamma = ev.polydisc[n].gamma;
    rec.schur_deviation = ev.schur_deviation[n];
    if (n < levels) {
      const FeshbachPairReport& p = ev.pairs[n];
      rec.pair_left = p.contraction_left;
      rec.pair_right = p.contraction_right;
      rec.pair_margin = p.invertibility_margin;
      rec.pair_pass = p.pass;
    }
    rec.secant_steps = root.secant_steps;
    rec.winding = root.winding;
    if (!trace.records.empty() && trace.records.back().gamma > 0)
      trace.records.back().contraction_ratio = rec.gamma / trace.records.back().gamma;
    trace.records.push_back(rec);
    prev = root.z;
    if (n >= 1 && rec.delta < cfg.stop_tol * std::max(1.0, std::abs(root.z)) && rec.pair_pass) {
      trace.stop_reason = "tolerance";
      break;
    }
    if (n == levels) {
      trace.stop_reason = "levels exhausted";
      break;
    }
  }
  trace.z_inf = prev;
  trace.converged = true;
  trace.depth = trace.records.back().n;

  // Reported bound rho^n exp(sum alpha_k / (2 rho eps^2)) from the parameter recursion.
  const TraceRecord& r0 = trace.records.front();
  double beta = r0.beta, gamma = r0.gamma, alpha_sum = 0, alpha1 = 0;
  for (int k = 0; k < 64; ++k) {
    ParamStep p = param_step(0, beta, gamma, cfg);
    if (k == 0) alpha1 = p.alpha;
    alpha_sum += p.alpha;
    beta = p.beta;
    gamma = p.gamma;
    if (!std::isfinite(alpha_sum)) break;
  }
  const double eps = 0.5 - cfg.rho / 2 - alpha1;
  for (auto& r : trace.records)
    r.tail_bound = eps > 0 && std::isfinite(alpha_sum)
                       ? std::pow(cfg.rho, r.n) * std::exp(alpha_sum / (2 * cfg.rho * eps * eps))
                       : std::numeric_limits<double>::infinity();
  return trace;
}

bool EigenvectorResult::ok(double tol) const {
  for (double r : residuals)
    if (!(r <= tol)) return false;
  return gram_ratio > 1e-3;
}

EigenvectorResult build_eigenvectors(const Cascade& c, Complex z_inf, const Matrix& v) {
  const int d = c.spec().degeneracy;
  if (v.rows() != d) throw DimensionError("build_eigenvectors: vectors must live in C^d");
  const int depth = c.levels();
  Cascade::Options opt;
  opt.keep = true;
  const Cascade::Evaluation ev = c.evaluate(z_inf, depth, opt);
  Matrix phi = v;
  for (int k = depth - 1; k >= 0; --k) phi = ev.q[k] * (ev.gamma[k].adjoint() * phi);
  Matrix psi = ev.first.lift * phi;
  const FirstFeshbach& first = c.first();
  const FockBasis& full = first.full_basis();
  psi = kron(Matrix::Identity(full.size(), full.size()), first.frame()) * psi;

  EigenvectorResult out;
  out.depth = depth;
  const Matrix h = build_hamiltonian(c.spec(), c.parameter(), c.coupling(), full);
  const Matrix r = h * psi - z_inf * psi;
  for (Index j = 0; j < psi.cols(); ++j) out.residuals.push_back(r.col(j).norm() / psi.col(j).norm());
  const RealVector sv = singular_values(Matrix(psi.adjoint() * psi));
  out.gram_ratio = sv(sv.size() - 1) / sv(0);
  out.psi = std::move(psi);
  return out;
}

Eigenprojection build_eigenprojection(const Matrix& psi, const Matrix& partner) {
  if (psi.rows() != partner.rows() || psi.cols() != partner.cols())
    throw DimensionError("eigenprojection: shape mismatch");
  const Matrix m = partner.adjoint() * psi;
  const RealVector sv = singular_values(m);
  Eigenprojection out;
  out.condition = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1)
                                        : std::numeric_limits<double>::infinity();
  if (!(out.condition < 1e12)) throw Error("eigenprojection: bilinear form is degenerate");
  out.p = psi * m.partialPivLu().solve(partner.adjoint());
  out.idempotency = op_norm(out.p * out.p - out.p);
  out.rank = out.p.trace().real();
  return out;
}

}  // namespace fsrg

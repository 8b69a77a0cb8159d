#include "fsrg/pipeline.hpp"

#include "fsrg/feshbach.hpp"
#include "fsrg/kernels.hpp"
#include "fsrg/oracle.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <numbers>
#include <sstream>

namespace fsrg {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void Report::set(const std::string& key, const std::string& value) {
  for (auto& e : entries_)
    if (e.first == key) {
      e.second = value;
      return;
    }
  entries_.emplace_back(key, value);
}

void Report::set(const std::string& key, double value) { set(key, num(value)); }

void Report::set(const std::string& key, Complex value) {
  set(key, num(value.real()) + "," + num(value.imag()));
}

void Report::set(const std::string& key, long long value) { set(key, std::to_string(value)); }

void Report::check_below(const std::string& name, double value, double threshold,
                         const std::string& note, bool inclusive) {
  Check c;
  c.name = name;
  c.value = value;
  c.threshold = threshold;
  c.pass = inclusive ? value <= threshold : value < threshold;
  c.note = note;
  checks_.push_back(c);
}

void Report::check_above(const std::string& name, double value, double threshold,
                         const std::string& note, bool inclusive) {
  check_below(name, value, threshold, note, inclusive);
  checks_.back().pass = inclusive ? value >= threshold : value > threshold;
}

void Report::check(const std::string& name, bool pass, const std::string& note) {
  Check c;
  c.name = name;
  c.pass = pass;
  c.value = pass ? 1 : 0;
  c.threshold = 1;
  c.note = note;
  checks_.push_back(c);
}

void Report::merge(const Report& other, const std::string& prefix) {
  for (const auto& [k, v] : other.entries_) set(prefix + k, v);
  for (Check c : other.checks_) {
    c.name = prefix + c.name;
    checks_.push_back(c);
  }
  for (const auto& n : other.notes_) notes_.push_back(n);
  for (const auto& [k, v] : other.artifacts_) artifacts_[k] = v;
}

bool Report::all_pass() const {
  for (const auto& c : checks_)
    if (!c.pass) return false;
  return true;
}

const Check* Report::find(const std::string& name) const {
  for (const auto& c : checks_)
    if (c.name == name) return &c;
  return nullptr;
}

std::string Report::kv() const {
  std::ostringstream os;
  os << "report=" << kind_ << "\n";
  for (const auto& [k, v] : entries_) os << k << "=" << v << "\n";
  for (const auto& c : checks_) {
    os << "check." << c.name << "=" << (c.pass ? "pass" : "fail") << "\n";
    os << "check." << c.name << ".value=" << num(c.value) << "\n";
    os << "check." << c.name << ".threshold=" << num(c.threshold) << "\n";
  }
  os << "all_pass=" << (all_pass() ? "true" : "false") << "\n";
  return os.str();
}

std::string Report::digest() const {
  std::ostringstream os;
  int failed = 0;
  for (const auto& c : checks_) failed += c.pass ? 0 : 1;
  os << kind_ << ": " << checks_.size() - failed << " of " << checks_.size() << " checks pass.\n\n";
  for (const auto& c : checks_) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "  [%s] %-44s %.3e (limit %.1e)", c.pass ? "pass" : "FAIL",
                  c.name.c_str(), c.value, c.threshold);
    os << buf;
    if (!c.note.empty()) os << "  " << c.note;
    os << "\n";
  }
  if (!notes_.empty()) {
    os << "\nNotes:\n";
    for (const auto& n : notes_) os << "  - " << n << "\n";
  }
  return os.str();
}

void write_report(const Report& r, const std::string& dir, const std::vector<std::string>& formats) {
  std::filesystem::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& content) {
    std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
    if (!out) throw Error("cannot write '" + name + "' in " + dir);
    out << content;
  };
  for (const auto& f : formats) {
    if (f == "kv") put("summary.kv", r.kv());
    if (f == "digest") put("digest.txt", r.digest());
  }
  for (const auto& [name, content] : r.artifacts()) put(name, content);
}

namespace {

FockBasis full_basis(const RunConfig& c) {
  return FockBasis(ModeGrid::geometric(c.rg.rho, c.truncation.levels), c.truncation.max_photons,
                   c.truncation.energy_cutoff, c.model.atomic_dim);
}

bool is_hermitian(const Matrix& h) { return hermiticity_residual(h) <= 1e-13 * std::max(1.0, h.norm()); }

void add_hypotheses(Report& r, const ModelSpec& m) {
  const HypothesisReport hyp = verify_hypotheses(m);
  r.set("hyp.frame_transform", hyp.frame_transform);
  for (const auto& e : hyp.entries) {
    if (!e.applicable) {
      r.set("hyp." + e.name, std::string("not_applicable"));
      continue;
    }
    r.check("hyp." + e.name, e.pass, e.note);
    r.set("hyp." + e.name + ".residual", e.residual);
  }
}

void config_keys(Report& r, const RunConfig& c) {
  r.set("model", c.model.name);
  r.set("s", c.s);
  r.set("g", c.g);
  r.set("truncation.levels", c.truncation.levels);
  r.set("truncation.max_photons", c.truncation.max_photons);
  r.set("truncation.energy_cutoff", c.truncation.energy_cutoff);
  r.set("rg.rho", c.rg.rho);
  r.set("rg.window_threshold", c.rg.window_threshold());
  r.set("seed", static_cast<long long>(c.seed));
}

// Nearest oracle eigenvalue, its cluster size and the gap to the rest.
struct Cluster {
  Complex nearest;
  int multiplicity = 0;
  double gap = 0;
};

Cluster cluster_near(const OracleReport& o, Complex z) {
  Index best = 0;
  for (Index k = 1; k < static_cast<Index>(o.spectrum.size()); ++k)
    if (std::abs(o.spectrum[k] - z) < std::abs(o.spectrum[best] - z)) best = k;
  Cluster c;
  c.nearest = o.spectrum[best];
  c.multiplicity = static_cast<int>(o.cluster_around(c.nearest).size());
  c.gap = std::numeric_limits<double>::infinity();
  for (const Complex& v : o.spectrum)
    if (std::abs(v - c.nearest) > o.cluster_tol) c.gap = std::min(c.gap, std::abs(v - c.nearest));
  return c;
}

// Largest is_symmetry_of residual over the group generated by the model
// symmetries, on H_g(s) and on every H^(k)[z].
double pipeline_symmetry(const ModelSpec& m, const Cascade& c, const Cascade::Evaluation& ev,
                         const Matrix& h_full, const FockBasis& full, bool real_point, int& checked) {
  double worst = 0;
  checked = 0;
  std::vector<FactoredSymmetry> usable;
  for (const auto& f : m.symmetries)
    if (!f.antiunitary || real_point) usable.push_back(f);
  if (usable.empty()) return 0;
  {
    std::vector<SymmetryOp> gens;
    for (const auto& f : usable) gens.push_back(lift(f, full));
    const SymmetryGroup group(gens);
    for (const auto& e : group.elements()) {
      worst = std::max(worst, is_symmetry_of(e, h_full).residual);
      ++checked;
    }
  }
  const Matrix& v = c.first().atomic_range();
  for (std::size_t k = 0; k < ev.h.size(); ++k) {
    std::vector<SymmetryOp> gens;
    for (const auto& f : usable) gens.push_back(lift(restrict_atomic(f, v), *ev.bases[k]));
    const SymmetryGroup group(gens);
    for (const auto& e : group.elements()) {
      worst = std::max(worst, is_symmetry_of(e, ev.h[k]).residual);
      ++checked;
    }
  }
  return worst;
}

void projection_checks(Report& r, const std::string& branch, const Matrix& psi,
                       const Matrix& partner, const Matrix& h, Complex z, int d) {
  try {
    const Eigenprojection p = build_eigenprojection(psi, partner);
    const double scale = std::max(1.0, op_norm(p.p));
    r.set("eigenprojection." + branch + ".condition", p.condition);
    r.check_below("eigenprojection." + branch + ".idempotency", p.idempotency / scale, 1e-9);
    r.check_below("eigenprojection." + branch + ".eigen", op_norm(Matrix(h * p.p - z * p.p)) / scale,
                  1e-8);
    r.check_below("eigenprojection." + branch + ".rank", std::abs(p.rank - d), 1e-8);
  } catch (const Error& e) {
    r.check("eigenprojection." + branch, false, e.what());
  }
}

}  // namespace

Report verify(const RunConfig& cfg) {
  Report r("verify");
  config_keys(r, cfg);
  r.set("coupling_norm_mu", coupling_norm_mu(cfg.model.profile, cfg.model.infrared_exponent,
                                             cfg.model.polarization_factor));
  add_hypotheses(r, cfg.model);
  return r;
}

Report run_pipeline(const RunConfig& cfg) {
  const ModelSpec& m = cfg.model;
  Report r("run");
  config_keys(r, cfg);
  // Throws InfraredDivergence before anything else runs.
  r.set("coupling_norm_mu",
        coupling_norm_mu(m.profile, m.infrared_exponent, m.polarization_factor));
  add_hypotheses(r, m);

  const int d = m.degeneracy;
  const Cascade cascade(m, cfg.s, cfg.g, cfg.truncation, cfg.rg);
  const Complex e_at = cascade.atomic_energy();
  r.set("atomic_energy", e_at);
  {
    const auto first = cascade.first().evaluate(e_at, false, false, true);
    r.set("first.contraction_left", first.pair.contraction_left);
    r.set("first.contraction_right", first.pair.contraction_right);
    r.set("first.margin", first.pair.invertibility_margin);
    r.check("first.pair", first.pair.pass, "first Feshbach pair at z = E_at");
  }

  RGTrace trace;
  try {
    trace = iterate_to_fixed_point(cascade);
  } catch (const Error& e) {
    r.check("rg.converged", false, e.what());
    return r;
  }
  r.artifact("rg_trace.txt", trace.serialize());
  r.check("rg.converged", trace.converged, trace.stop_reason);
  r.set("rg.z_inf", trace.z_inf);
  r.set("rg.depth", trace.depth);
  r.set("rg.stop_reason", trace.stop_reason);
  double schur = 0, schur_rel = 0, margin = std::numeric_limits<double>::infinity();
  double contraction = 0;
  bool member = true;
  for (const auto& rec : trace.records) {
    schur = std::max(schur, rec.schur_deviation);
    schur_rel = std::max(schur_rel, rec.schur_deviation / std::max(1.0, std::abs(rec.energy)));
    if (rec.n < cascade.levels()) {
      margin = std::min(margin, rec.pair_margin);
      contraction = std::max({contraction, rec.pair_left, rec.pair_right});
    }
    member = member && rec.beta <= cfg.rg.rho / 8 && rec.gamma <= cfg.rg.rho / 8;
  }
  r.set("rg.max_pair_contraction", contraction);
  r.set("rg.min_pair_margin", margin);
  r.set("rg.polydisc_member_all_levels", member);
  r.set("rg.tail_bound_final", trace.records.back().tail_bound);
  r.check_below("rg.schur_deviation", schur_rel, 1e-9, "max over n of ||<H^(n)> - E^(n)|| / max(1,|E^(n)|)");
  if (trace.records.size() >= 7) {
    const double rate = trace.fitted_rate(2, 6);
    r.set("rg.fitted_rate", rate);
    r.check_below("rg.rate", rate, 1.2 * cfg.rg.rho, "fit of |z_n - z_{n-1}| over n = 2..6", true);
  } else {
    r.set("rg.fitted_rate", std::string("not_enough_levels"));
  }
  const double theory = 128 * cfg.rg.c_chi * cfg.rg.c_chi * std::pow(cfg.rg.rho, cfg.rg.mu);
  r.set("theory.c_gamma_rho_mu", theory);
  r.set("theory.admissible", theory < 1);
  r.note("gamma is the operator-norm surrogate ||H - w00(H_f)||, not the kernel norm; "
         "contraction is monitored empirically because C_gamma rho^mu = " + num(theory) + ".");

  const FockBasis full = full_basis(cfg);
  const Matrix h = build_hamiltonian(m, cfg.s, cfg.g, full);
  const bool herm = cfg.s.imag() == 0 && is_hermitian(h);
  EigenvectorResult ev;
  try {
    ev = build_eigenvectors(cascade, trace.z_inf, Matrix::Identity(d, d));
  } catch (const Error& e) {
    r.check("eigenvectors.built", false, e.what());
    return r;
  }
  double worst_res = 0;
  for (double x : ev.residuals) worst_res = std::max(worst_res, x);
  r.check_below("eigenvectors.residual", worst_res, 1e-7, "max ||(H - z)psi|| / ||psi||", true);
  r.check_above("eigenvectors.gram", ev.gram_ratio, 1e-3, "smallest/largest Gram singular value");

  const OracleReport o = dense_spectrum(h, herm, cfg.cluster_rel);
  r.artifact("spectrum.dat", dump_spectrum(o));
  const Comparison cmp = compare(trace.z_inf, ev.psi, o, herm);
  const Cluster cl = cluster_near(o, trace.z_inf);
  r.set("oracle.dim", static_cast<long long>(h.rows()));
  r.set("oracle.lowest", o.lowest);
  r.set("oracle.nearest", cmp.nearest);
  r.set("oracle.max_residual", o.max_residual);
  r.set("oracle.cluster_tol", o.cluster_tol);
  r.set("oracle.multiplicity", cl.multiplicity);
  r.set("oracle.gap", cl.gap);
  r.check_below("oracle.eigenvalue_error", cmp.eigenvalue_error, 1e-7);
  r.check_below("oracle.subspace_sine", cmp.subspace_sine, 1e-5);
  r.check("oracle.multiplicity", cl.multiplicity == d, "cluster size equals d");
  r.check_above("oracle.gap", cl.gap, 10 * o.cluster_tol, "gap over 10x cluster tolerance");
  if (cmp.ground_state_checked) {
    r.check_below("oracle.ground_state", cmp.ground_state_error, 1e-8, "z_inf = min spectrum");
    r.check_below("rg.z_inf_real", std::abs(trace.z_inf.imag()), 1e-9);
  }

  {
    Cascade::Options opt;
    opt.keep = true;
    const auto evaluation = cascade.evaluate(trace.z_inf, cascade.levels(), opt);
    int checked = 0;
    const bool real_point = cfg.s.imag() == 0 && std::abs(trace.z_inf.imag()) < 1e-12;
    const double sym = pipeline_symmetry(m, cascade, evaluation, h, full, real_point, checked);
    r.set("symmetry.elements_checked", checked);
    if (checked > 0) r.check_below("symmetry.pipeline", sym, 1e-9, "every group element at every depth");
  }

  if (m.reflection_symmetric) {
    Matrix partner = ev.psi;
    if (cfg.s.imag() != 0) {
      const Cascade mirror(m, std::conj(cfg.s), cfg.g, cfg.truncation, cfg.rg);
      const RGTrace t2 = iterate_to_fixed_point(mirror);
      r.set("reflection.z_inf_conj", t2.z_inf);
      r.check_below("reflection.z_inf", std::abs(std::conj(trace.z_inf) - t2.z_inf), 1e-8);
      partner = build_eigenvectors(mirror, t2.z_inf, Matrix::Identity(d, d)).psi;
    }
    projection_checks(r, "reflection", ev.psi, partner, h, trace.z_inf, d);
  }
  if (m.conjugation) {
    const Matrix partner = lift(*m.conjugation, full).apply(ev.psi);
    projection_checks(r, "conjugation", ev.psi, partner, h, trace.z_inf, d);
  }
  return r;
}

Report analyticity_probe(const RunConfig& cfg) {
  Report r("probe-analyticity");
  config_keys(r, cfg);
  const ProbeSpec& p = cfg.probe;
  r.set("probe.radius", p.radius);
  r.set("probe.nodes", p.nodes);
  r.set("probe.cr_step", p.cr_step);
  std::vector<Complex> pts;
  for (int k = 0; k < p.nodes; ++k)
    pts.push_back(cfg.s + p.radius * std::polar(1.0, 2 * std::numbers::pi * k / p.nodes));
  const std::size_t cr0 = pts.size();
  for (Complex step : {Complex(p.cr_step, 0), Complex(-p.cr_step, 0), Complex(0, p.cr_step),
                       Complex(0, -p.cr_step)})
    pts.push_back(cfg.s + step);
  const std::size_t refl0 = pts.size();
  const bool reflect = cfg.model.reflection_symmetric;
  if (reflect)
    for (Complex q : p.reflection_points) {
      pts.push_back(q);
      pts.push_back(std::conj(q));
    }

  std::vector<std::future<Complex>> jobs;
  for (Complex s : pts)
    jobs.push_back(std::async(std::launch::async, [&cfg, s] {
      const Cascade c(cfg.model, s, cfg.g, cfg.truncation, cfg.rg);
      return iterate_to_fixed_point(c).z_inf;
    }));
  std::vector<Complex> e(pts.size());
  bool failed = false;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    try {
      e[k] = jobs[k].get();
      r.set("probe.node" + std::to_string(k) + ".s", pts[k]);
      r.set("probe.node" + std::to_string(k) + ".E", e[k]);
    } catch (const Error& ex) {
      if (!failed) r.check("probe.nodes_converged", false, "node " + std::to_string(k) + ": " + ex.what());
      failed = true;
    }
  }
  if (failed) return r;
  r.check("probe.nodes_converged", true);

  Complex integral = 0;
  double emax = 0;
  for (std::size_t k = 0; k < cr0; ++k) {
    const Complex ds = Complex(0, 1) * (pts[k] - cfg.s) * (2 * std::numbers::pi / p.nodes);
    integral += e[k] * ds;
    emax = std::max(emax, std::abs(e[k]));
  }
  const double contour = std::abs(integral) / (p.radius * std::max(emax, 1e-300));
  r.check_below("probe.contour", contour, 1e-6, "|sum E ds| / (r_c max|E|), trapezoid rule");
  const Complex dx = (e[cr0] - e[cr0 + 1]) / (2 * p.cr_step);
  const Complex dy = (e[cr0 + 2] - e[cr0 + 3]) / (2 * p.cr_step);
  r.set("probe.dE_dx", dx);
  r.set("probe.dE_dy", dy);
  r.check_below("probe.cauchy_riemann", std::abs(dy - Complex(0, 1) * dx) / std::max(1.0, std::abs(dx)),
                1e-4, "|dE/dy - i dE/dx| / max(1, |dE/dx|)");
  if (reflect && !p.reflection_points.empty()) {
    double worst = 0;
    for (std::size_t k = refl0; k + 1 < pts.size(); k += 2)
      worst = std::max(worst, std::abs(std::conj(e[k]) - e[k + 1]));
    r.check_below("probe.reflection", worst, 1e-8, "|conj E(s) - E(conj s)|");
  }
  return r;
}

Report sweep_g(const RunConfig& cfg) {
  Report r("sweep-g");
  config_keys(r, cfg);
  if (cfg.sweep.size() < 4) throw ConfigError("sweep-g: need at least four couplings");
  const ScalingReport sc = perturbation_scaling(cfg.model, cfg.s, cfg.sweep, cfg.truncation, cfg.rg.rho);
  std::vector<std::future<Complex>> jobs;
  for (double g : cfg.sweep)
    jobs.push_back(std::async(std::launch::async, [&cfg, g] {
      const Cascade c(cfg.model, cfg.s, g, cfg.truncation, cfg.rg);
      return iterate_to_fixed_point(c).z_inf;
    }));
  std::ostringstream table;
  table << "# g Re(E_oracle) Im(E_oracle) Re(z_inf) Im(z_inf) distance\n";
  double worst = 0;
  for (std::size_t k = 0; k < cfg.sweep.size(); ++k) {
    Complex z;
    try {
      z = jobs[k].get();
    } catch (const Error& ex) {
      r.check("sweep.rg_converged", false, ex.what());
      return r;
    }
    worst = std::max(worst, std::abs(z - sc.energy[k]));
    table << num(cfg.sweep[k]) << " " << num(sc.energy[k].real()) << " " << num(sc.energy[k].imag())
          << " " << num(z.real()) << " " << num(z.imag()) << " " << num(sc.distance[k]) << "\n";
    r.set("sweep.g" + std::to_string(k), cfg.sweep[k]);
    r.set("sweep.energy" + std::to_string(k), sc.energy[k]);
    r.set("sweep.distance" + std::to_string(k), sc.distance[k]);
  }
  r.artifact("sweep.dat", table.str());
  r.set("sweep.exponent", sc.exponent);
  r.check_above("sweep.exponent_min", sc.exponent, 1.9, "slope of log|E_g - E_at| against log g", true);
  r.check("sweep.distance_monotone", sc.monotone, "eigenspace distance shrinks with g");
  r.check_below("sweep.rg_vs_oracle", worst, 1e-7);
  return r;
}

Report property_suite(const RunConfig& cfg) {
  Report r("suite");
  config_keys(r, cfg);
  const ModelSpec& m = cfg.model;
  const FockBasis full = full_basis(cfg);
  const double rho = cfg.rg.rho;

  // fock
  {
    double pull = 0;
    for (int j = 0; j < full.modes(); ++j)
      pull = std::max(pull, verify_pull_through(full, [](double x) { return 1.0 / (1.0 + x); }, j));
    r.check_below("fock.pull_through", pull, 1e-12);
    const auto reduced = level_basis(rho, cfg.truncation.levels, cfg.truncation.max_photons, m.atomic_dim);
    const auto next = level_basis(rho, cfg.truncation.levels - 1, cfg.truncation.max_photons, m.atomic_dim);
    const Dilation dil(*reduced, *next, rho);
    const Matrix& gm = dil.matrix();
    const Index nd = next->dim();
    r.check_below("fock.dilation_isometry", op_norm(Matrix(gm * gm.adjoint() - Matrix::Identity(nd, nd))), 1e-12);
    r.check_below("fock.dilation_scaling",
                  op_norm(Matrix(field_energy(*next) * gm - gm * field_energy(*reduced) / rho)), 1e-12);
    const auto couplings = shell_couplings(m.coupling1, m.profile, full.grid(), cfg.s, m.polarization_factor);
    const RelativeBoundReport rb = relative_bound_check(full, couplings, 100, cfg.seed);
    r.set("fock.relative_bound.max_ratio_annihilation", rb.max_ratio_annihilation);
    r.set("fock.relative_bound.max_ratio_creation", rb.max_ratio_creation);
    r.check("fock.relative_bound", rb.violations == 0, std::to_string(rb.samples) + " samples");
  }

  // symmetry
  {
    const Matrix h = build_hamiltonian(m, cfg.s, cfg.g, full);
    const bool real_point = cfg.s.imag() == 0;
    std::vector<SymmetryOp> gens;
    for (const auto& f : m.symmetries)
      if (!f.antiunitary || real_point) gens.push_back(lift(f, full));
    if (!gens.empty()) {
      double worst = 0;
      const SymmetryGroup group(gens);
      for (const auto& e : group.elements()) worst = std::max(worst, is_symmetry_of(e, h).residual);
      r.set("symmetry.group_order", static_cast<long long>(group.elements().size()));
      r.check_below("symmetry.hamiltonian", worst, 1e-9);
    }
    const Cascade c(m, cfg.s, cfg.g, cfg.truncation, cfg.rg);
    const Complex e_at = c.atomic_energy();
    const auto first = c.first().evaluate(e_at, false, false, false);
    const SchurScalar sc = schur_scalar(first.reduced, m.degeneracy);
    r.check_below("symmetry.schur_deviation", sc.deviation / std::max(1.0, std::abs(sc.c)), 1e-9,
                  "vacuum block of H^(0)[E_at]");
    if (m.degeneracy > 1 && !m.symmetries.empty()) {
      std::vector<SymmetryOp> restricted;
      for (const auto& f : m.symmetries)
        restricted.push_back(atomic_part(restrict_atomic(f, c.first().atomic_range())));
      r.check("symmetry.irreducible", is_irreducible(restricted), "restricted to Ran P_at");
    }
  }

  // feshbach
  {
    int failures = 0;
    double worst = 0;
    const int pairs = 20;
    for (int k = 0; k < pairs; ++k) {
      const Index dim = 8 + (k * 7) % 33;
      const RandomPair rp = make_random_pair(dim, k % 3, cfg.seed * 1000 + k);
      const FeshbachPair pair(rp.h, rp.t, rp.chi, rp.chibar);
      const IsospectralityReport iso = isospectrality_suite(pair);
      if (!iso.pass(1e-9) || iso.kernel_h != rp.planted_kernel) ++failures;
      worst = std::max({worst, iso.h_inverse_residual, iso.f_inverse_residual, iso.kernel_map_residual});
    }
    r.set("feshbach.random_pairs", pairs);
    r.set("feshbach.worst_residual", worst);
    r.check("feshbach.random_isospectrality", failures == 0, std::to_string(failures) + " failures");
    const Cascade c(m, cfg.s, cfg.g, cfg.truncation, cfg.rg);
    const FeshbachPair pair = c.first().pair(c.atomic_energy() + Complex(0.01, 0.01));
    const IsospectralityReport iso = isospectrality_suite(pair);
    r.check("feshbach.model_isospectrality", iso.pass(1e-9), "first pair at z = E_at + 0.01(1+i)");
  }

  // kernels
  {
    const int d = m.degeneracy;
    const FockBasis small(ModeGrid::geometric(rho, 4), 2, 1.0, d);
    int violations = 0;
    const int samples = 25;
    for (auto [mm, nn] : {std::pair{1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}}) {
      for (int k = 0; k < samples; ++k) {
        const KernelMN w = random_kernel(mm, nn, 4, d, 9, cfg.seed * 7919 + 31 * k + 5 * mm + nn);
        const double op = op_norm(build_H_mn(w, small));
        const double sharp = sharp_norm(w, small.grid());
        const double mu = norm_mu(w, small.grid(), cfg.rg.mu) /
                          std::sqrt(std::pow(mm, mm) * std::pow(nn, nn));
        if (op > sharp * (1 + 1e-12) || op > mu * (1 + 1e-12)) ++violations;
      }
    }
    r.check("kernels.operator_bounds", violations == 0, std::to_string(violations) + " violations");
  }
  return r;
}

}  // namespace fsrg

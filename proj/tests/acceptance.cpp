// Acceptance gate: one line per criterion, exit status 1 if any fails.

#include "fsrg/config.hpp"
#include "fsrg/feshbach.hpp"
#include "fsrg/pipeline.hpp"
#include "fsrg/symmetry.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

using namespace fsrg;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fixture(const std::string& name) { return std::string(FSRG_FIXTURE_DIR) + "/" + name; }

RunConfig config(const std::string& name, int levels = 8) {
  RunConfig c = load_run_config(fixture(name + ".json"));
  c.truncation.levels = levels;
  return c;
}

struct Line {
  bool pass = true;
  std::string detail;

  void need(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

// Worst value of a named check across reports, and whether all of them pass.
struct Worst {
  double value = 0;
  bool pass = true;
  int seen = 0;
};

Worst worst(const std::vector<const Report*>& reports, const std::string& name, bool larger_is_worse = true) {
  Worst w;
  w.value = larger_is_worse ? 0.0 : INFINITY;
  for (const Report* r : reports) {
    const Check* c = r->find(name);
    if (!c) {
      w.pass = false;
      continue;
    }
    ++w.seen;
    w.pass = w.pass && c->pass;
    w.value = larger_is_worse ? std::max(w.value, c->value) : std::min(w.value, c->value);
  }
  if (w.seen < static_cast<int>(reports.size())) w.pass = false;
  return w;
}

double entry(const Report& r, const std::string& key) {
  for (const auto& [k, v] : r.entries())
    if (k == key) return std::stod(v);
  return NAN;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Rank-one rotating projection onto (cos s, sin s).
Matrix rotating(Complex s) {
  const Complex c = std::cos(s), n = std::sin(s);
  return (Matrix(2, 2) << c * c, c * n, c * n, n * n).finished();
}

}  // namespace

int main() {
  const char* fixtures[] = {"m_triv", "m_exact", "m_pauli", "m_kramers", "m_rot"};
  int failures = 0;
  auto emit = [&](int id, const std::string& title, Line line, const std::string& summary) {
    std::printf("%s  criterion %2d  %-36s %s%s%s\n", line.pass ? "PASS" : "FAIL", id, title.c_str(),
                summary.c_str(), line.detail.empty() ? "" : "  | ", line.detail.c_str());
    std::fflush(stdout);
    failures += line.pass ? 0 : 1;
  };

  // Pipeline runs shared by several criteria.
  std::map<std::string, Report> runs;
  std::map<std::string, double> run_seconds;
  for (const char* name : fixtures) {
    const auto t0 = Clock::now();
    try {
      runs.emplace(name, run_pipeline(config(name)));
    } catch (const Error& e) {
      Report r("run");
      r.check("pipeline", false, e.what());
      runs.emplace(name, r);
    }
    run_seconds[name] = seconds_since(t0);
  }
  auto reports = [&](std::initializer_list<const char*> names) {
    std::vector<const Report*> out;
    for (const char* n : names) out.push_back(&runs.at(n));
    return out;
  };

  // 1. Feshbach isospectrality.
  {
    Line line;
    const auto t0 = Clock::now();
    int pairs = 0, kernel_mismatch = 0, identity_fail = 0;
    double residual = 0;
    for (int k = 0; k < 100; ++k) {
      const Index dim = 8 + (k * 7) % 33;
      const RandomPair rp = make_random_pair(dim, k % 3, 1000 + k);
      const IsospectralityReport iso = isospectrality_suite(FeshbachPair(rp.h, rp.t, rp.chi, rp.chibar));
      ++pairs;
      if (iso.kernel_h != rp.planted_kernel || iso.kernel_f != iso.kernel_h) ++kernel_mismatch;
      if (!iso.pass(1e-9)) ++identity_fail;
      residual = std::max({residual, iso.h_inverse_residual, iso.f_inverse_residual, iso.kernel_map_residual,
                           iso.forward_residual, iso.roundtrip_residual});
    }
    for (const char* name : fixtures) {
      const RunConfig c = config(name, 6);
      const Cascade cascade(c.model, c.s, c.g, c.truncation, c.rg);
      const FockBasis& full = cascade.first().full_basis();
      const Matrix h = build_hamiltonian(c.model, c.s, c.g, full);
      Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
      const double lambda = es.eigenvalues()(0);
      for (Complex z : {cascade.atomic_energy() + Complex(0.01, 0.01), Complex(lambda)}) {
        const IsospectralityReport iso = isospectrality_suite(cascade.first().pair(z));
        ++pairs;
        if (iso.kernel_f != iso.kernel_h) ++kernel_mismatch;
        if (z.imag() == 0 && iso.kernel_h != c.model.degeneracy) ++kernel_mismatch;
        if (!iso.pass(1e-9)) ++identity_fail;
        residual = std::max({residual, iso.h_inverse_residual, iso.f_inverse_residual, iso.kernel_map_residual,
                             iso.forward_residual, iso.roundtrip_residual});
      }
    }
    const double secs = seconds_since(t0);
    line.need(kernel_mismatch == 0, std::to_string(kernel_mismatch) + " kernel dimension mismatches");
    line.need(identity_fail == 0, std::to_string(identity_fail) + " identity failures");
    line.need(secs < 10, "runtime " + fmt("%.1f s", secs));
    emit(1, "Feshbach isospectrality", line,
         std::to_string(pairs) + " pairs, max residual " + fmt("%.1e", residual) + " < 1e-9, " +
             fmt("%.1f s", secs) + " < 10 s");
  }

  // 2. End-to-end eigenvalue.
  {
    Line line;
    const auto rs = reports({"m_triv", "m_exact", "m_pauli", "m_kramers"});
    const Worst w = worst(rs, "oracle.eigenvalue_error");
    line.need(w.pass, "eigenvalue check failed");
    double slowest = 0;
    for (const char* n : {"m_triv", "m_exact", "m_pauli", "m_kramers"}) slowest = std::max(slowest, run_seconds[n]);
    line.need(slowest < 60, "runtime " + fmt("%.1f s", slowest));
    emit(2, "End-to-end eigenvalue (J = 8)", line,
         "max |z_inf - oracle| " + fmt("%.1e", w.value) + " < 1e-7, slowest fixture " + fmt("%.1f s", slowest) +
             " < 60 s");
  }

  // 3. Symmetry-protected degeneracy.
  {
    Line line;
    const auto rs = reports({"m_pauli", "m_kramers"});
    const Worst gram = worst(rs, "eigenvectors.gram", false);
    const Worst mult = worst(rs, "oracle.multiplicity");
    const Worst gap = worst(rs, "oracle.gap", false);
    line.need(gram.pass, "Gram ratio");
    line.need(mult.pass, "multiplicity");
    line.need(gap.pass, "gap");
    emit(3, "Symmetry-protected degeneracy", line,
         "min Gram ratio " + fmt("%.3f", gram.value) + " > 1e-3, multiplicity 2, min gap " + fmt("%.2e", gap.value) +
             " > 10x cluster tol");
  }

  // 4. Schur scalarization.
  {
    Line line;
    const Worst w = worst(reports({"m_exact", "m_pauli", "m_kramers"}), "rg.schur_deviation");
    line.need(w.pass, "deviation above 1e-9");
    emit(4, "Schur scalarization (n <= 8)", line, "max relative deviation " + fmt("%.1e", w.value) + " < 1e-9");
  }

  // 5. Convergence rate.
  {
    Line line;
    const Worst w = worst(reports({"m_triv", "m_exact", "m_pauli", "m_kramers", "m_rot"}), "rg.rate");
    line.need(w.pass, "rate above 1.2 rho or undefined");
    emit(5, "Convergence rate", line, "max fitted rate over n = 2..6 " + fmt("%.4f", w.value) + " <= 0.6");
  }

  // 6 and 7 come from the property suites.
  std::vector<Report> suites;
  for (const char* name : fixtures) suites.push_back(property_suite(config(name, 6)));
  std::vector<const Report*> sp;
  for (const auto& r : suites) sp.push_back(&r);
  {
    Line line;
    const Worst rel = worst(sp, "fock.relative_bound");
    const Worst ops = worst(sp, "kernels.operator_bounds");
    line.need(rel.pass, "relative bound violated");
    line.need(ops.pass, "kernel operator bound violated");
    emit(6, "Operator inequalities", line,
         "100 relative-bound samples and 125 kernel samples per fixture, no violation");
  }
  {
    Line line;
    const Worst pull = worst(sp, "fock.pull_through");
    const Worst iso = worst(sp, "fock.dilation_isometry");
    const Worst scale = worst(sp, "fock.dilation_scaling");
    line.need(pull.pass && iso.pass && scale.pass, "algebra residual above 1e-12");
    emit(7, "Pull-through and dilation algebra", line,
         "pull-through " + fmt("%.1e", pull.value) + ", isometry " + fmt("%.1e", iso.value) + ", scaling " +
             fmt("%.1e", scale.value) + " < 1e-12");
  }

  // 8. g -> 0 limits.
  {
    Line line;
    const Report exact = sweep_g(config("m_exact"));
    const Report pauli = sweep_g(config("m_pauli"));
    const double ee = entry(exact, "sweep.exponent");
    const Worst pe = worst({&pauli}, "sweep.exponent_min");
    const Worst mono = worst({&exact, &pauli}, "sweep.distance_monotone");
    const Worst agree = worst({&exact, &pauli}, "sweep.rg_vs_oracle");
    line.need(ee >= 1.9 && ee <= 2.1, "M-EXACT exponent " + fmt("%.4f", ee));
    line.need(pe.pass, "M-PAULI exponent " + fmt("%.4f", pe.value));
    line.need(mono.pass, "eigenspace distance not monotone");
    line.need(agree.pass, "RG and oracle disagree on the sweep");
    emit(8, "g -> 0 limits", line,
         "exponent M-EXACT " + fmt("%.4f", ee) + " in [1.9, 2.1], M-PAULI " + fmt("%.4f", pe.value) +
             " >= 1.9, distances decreasing");
  }

  // 9. Analyticity probes (J = 6 to bound the runtime of 26 pipeline runs per fixture).
  {
    Line line;
    const Report pauli = analyticity_probe(config("m_pauli", 6));
    const Report kramers = analyticity_probe(config("m_kramers", 6));
    const Worst contour = worst({&pauli, &kramers}, "probe.contour");
    const Worst cr = worst({&pauli, &kramers}, "probe.cauchy_riemann");
    const Worst refl = worst({&pauli, &kramers}, "probe.reflection");
    line.need(contour.pass, "contour residual");
    line.need(cr.pass, "Cauchy-Riemann residual");
    line.need(refl.pass, "reflection residual");
    emit(9, "Analyticity probes", line,
         "contour " + fmt("%.1e", contour.value) + " < 1e-6, Cauchy-Riemann " + fmt("%.1e", cr.value) +
             " < 1e-4, reflection " + fmt("%.1e", refl.value) + " < 1e-8");
  }

  // 10. Ground-state identity.
  {
    Line line;
    const Worst w = worst(reports({"m_triv", "m_exact", "m_pauli", "m_kramers", "m_rot"}), "oracle.ground_state");
    line.need(w.pass, "z_inf differs from min spectrum");
    emit(10, "Ground-state identity", line, "max |z_inf - min spectrum| " + fmt("%.1e", w.value) + " < 1e-8");
  }

  // 11. Symmetry preservation.
  {
    Line line;
    const auto rs = reports({"m_exact", "m_pauli", "m_kramers"});
    const Worst w = worst(rs, "symmetry.pipeline");
    line.need(w.pass, "symmetry residual above 1e-9");
    emit(11, "Symmetry through the pipeline", line,
         "max residual " + fmt("%.1e", w.value) + " < 1e-9 over all group elements and depths");
  }

  // 12. Transformation function on two projection families at step 1e-3.
  {
    Line line;
    double transport = 0, unitarity = 0, inverse = 0;
    const ModelSpec rot = load_model(fixture("models/m_rot.json"));
    const std::function<Matrix(Complex)> families[] = {
        rotating, [&](Complex s) { return atomic_data(rot, s).projection; }};
    for (const auto& p : families) {
      for (Complex s1 : {Complex(0.2, 0), Complex(0.1, 0.15)}) {
        const int steps = static_cast<int>(std::lround(std::abs(s1) / 1e-3));
        const TransformationPath path = transformation_function(p, 0.0, s1, steps);
        const Matrix p0 = p(0.0);
        const Index n = p0.rows();
        for (std::size_t k = 0; k < path.u.size(); k += 10) {
          transport = std::max(transport, transport_residual(path.u[k], p0, p(path.s[k])));
          inverse = std::max(inverse, op_norm(Matrix(path.v[k] * path.u[k] - Matrix::Identity(n, n))));
          if (s1.imag() == 0)
            unitarity = std::max(unitarity, op_norm(Matrix(path.u[k].adjoint() * path.u[k] - Matrix::Identity(n, n))));
        }
      }
    }
    line.need(transport < 1e-8, "transport");
    line.need(unitarity < 1e-8, "unitarity");
    line.need(inverse < 1e-8, "inverse");
    emit(12, "Transformation function", line,
         "transport " + fmt("%.1e", transport) + ", unitarity " + fmt("%.1e", unitarity) + ", V U - 1 " +
             fmt("%.1e", inverse) + " < 1e-8");
  }

  std::printf("%d of 12 criteria pass\n", 12 - failures);
  return failures == 0 ? 0 : 1;
}

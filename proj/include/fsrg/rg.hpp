#pragma once

#include "fsrg/feshbach.hpp"
#include "fsrg/kernels.hpp"
#include "fsrg/model.hpp"

#include <memory>
#include <string>
#include <vector>

namespace fsrg {

struct ConvergenceFailure : Error {
  using Error::Error;
};

struct WindowExit : Error {
  WindowExit(int level, const std::string& what) : Error(what), level(level) {}
  int level;
};

struct Truncation {
  int levels = 8;             // J
  int max_photons = 2;        // N_max
  double energy_cutoff = 2.0; // E_cut of the full space
};

struct RGConfig {
  double rho = 0.5;
  double mu = 0.5;
  double c_chi = 1.0;
  int max_iterations = 64;
  double tol_z = 1e-12;       // secant stops once |E^(n)(z)| is below this
  double stop_tol = 1e-14;    // cascade stops once |z_n - z_{n-1}| is below this
  double window_fraction = 0.125;  // U_n threshold as a multiple of rho
  int winding_nodes = 16;
  bool winding_check = true;
  bool abort_on_polydisc = false;

  double xi() const;
  double window_threshold() const { return window_fraction * rho; }
  void validate() const;
};

struct ParamStep {
  double alpha = 0, beta = 0, gamma = 0;
  bool admissible = true;
};

ParamStep param_step(double alpha, double beta, double gamma, const RGConfig& cfg);

// Sustained iteration: beta plus the summed increments stays below rho/(8 C_chi).
bool sustained_admissible(double beta0, double gamma0, const RGConfig& cfg, int steps = 64);

struct RGStepResult {
  Matrix next;
  std::shared_ptr<const FockBasis> next_basis;
  FeshbachPairReport pair;
  PolydiscEstimate polydisc;
  Matrix q;      // Q_{chi_rho} on the input level (kept on request)
  Matrix gamma;  // next.dim x input.dim
};

// w00(H_f), except on states at the photon cap, where the diagonal blocks of H
// are used: those states cannot emit, so they miss a self-energy that the
// rescaling amplifies by 1/rho per step.
Matrix pair_reference(const Matrix& h, const FockBasis& basis, const W00Extraction& ext);

// rho^{-1} Gamma_rho F_{chi_rho}(H, w00(H_f)) Gamma_rho^*.
// Without diagnostics the polydisc estimate and the SVD-based pair margins are
// skipped; the pair then only has to be invertible.
RGStepResult rg_step(const Matrix& h, const FockBasis& basis, const RGConfig& cfg,
                     bool keep_q = false, bool diagnostics = true);

// Level basis with `modes` shells, H_f <= 1; vacuum only once no shell remains.
std::shared_ptr<const FockBasis> level_basis(double rho, int modes, int max_photons, int d);

// H^(n)[s, z] for fixed (spec, s, g) and varying z.
class Cascade {
 public:
  Cascade(const ModelSpec& spec, Complex s, double g, const Truncation& trunc, const RGConfig& cfg);

  struct Evaluation {
    Complex z;
    std::vector<Complex> energy;        // E^(k)(z), k = 0..depth
    std::vector<double> schur_deviation;
    std::vector<FeshbachPairReport> pairs;  // step k -> k+1
    std::vector<PolydiscEstimate> polydisc; // of H^(k)
    std::vector<Matrix> h;                  // H^(k), when kept
    std::vector<Matrix> q, gamma;           // per step, when kept
    std::vector<std::shared_ptr<const FockBasis>> bases;
    FirstFeshbach::Result first;
  };

  struct Options {
    bool keep = false;         // H^(k), Q_k, Gamma_k and the first lift
    bool neumann = false;
    bool diagnostics = false;  // pair margins and polydisc estimates
  };

  // Runs the first Feshbach map and `depth` steps; throws WindowExit when z
  // leaves U_k for some k < depth.
  Evaluation evaluate(Complex z, int depth, const Options& opt) const;
  Evaluation evaluate(Complex z, int depth) const { return evaluate(z, depth, Options{}); }
  Complex energy(Complex z, int depth) const { return evaluate(z, depth).energy.back(); }

  int levels() const { return trunc_.levels; }
  const ModelSpec& spec() const { return spec_; }
  Complex parameter() const { return s_; }
  double coupling() const { return g_; }
  const RGConfig& config() const { return cfg_; }
  const FirstFeshbach& first() const { return *first_; }
  Complex atomic_energy() const { return first_->atomic_energy(); }

 private:
  ModelSpec spec_;
  Complex s_;
  double g_;
  Truncation trunc_;
  RGConfig cfg_;
  std::shared_ptr<FirstFeshbach> first_;
};

struct RootResult {
  Complex z;
  Complex residual;  // E^(n)(z)
  int secant_steps = 0;
  int winding = 0;   // 0 when not checked
};

RootResult find_zn(const Cascade& c, int n, Complex start);

struct TraceRecord {
  int n = 0;
  Complex z;
  Complex energy;          // E^(n)(z_n)
  double delta = 0;        // |z_n - z_{n-1}|
  double alpha = 0, beta = 0, gamma = 0;
  double schur_deviation = 0;
  double pair_left = 0, pair_right = 0, pair_margin = 0;
  bool pair_pass = true;
  double contraction_ratio = 0;  // gamma_{n+1} / gamma_n
  int secant_steps = 0;
  int winding = 0;
  double tail_bound = 0;
};

struct RGTrace {
  std::vector<TraceRecord> records;
  Complex z_inf;
  bool converged = false;
  int depth = 0;
  std::string stop_reason;

  std::string serialize() const;
  // Least-squares slope of log |z_n - z_{n-1}| over n in [from, to], as a rate;
  // NaN when some step in the range is exactly zero.
  double fitted_rate(int from, int to) const;
};

RGTrace iterate_to_fixed_point(const Cascade& c);

struct EigenvectorResult {
  Matrix psi;                     // columns, original frame, full space
  std::vector<double> residuals;  // ||(H - z) psi|| / ||psi||
  double gram_ratio = 0;          // smallest / largest singular value of the Gram matrix
  int depth = 0;
  bool ok(double tol = 1e-7) const;
};

// psi_v = Q_chi E Q_0 Gamma_0^* ... Q_{N-1} Gamma_{N-1}^* (v (x) Omega) at z_inf.
EigenvectorResult build_eigenvectors(const Cascade& c, Complex z_inf, const Matrix& v);

struct Eigenprojection {
  Matrix p;
  double condition = 0;
  double idempotency = 0;
  double rank = 0;  // Re tr P
};

// P = Psi (Phi^* Psi)^{-1} Phi^*, with Phi = psi at conj(s) (reflection branch)
// or J psi (complex-selfadjoint branch).
Eigenprojection build_eigenprojection(const Matrix& psi, const Matrix& partner);

}  // namespace fsrg

#pragma once

#include "fsrg/fock.hpp"
#include "fsrg/symmetry.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fsrg {

struct InfraredDivergence : Error {
  using Error::Error;
};

struct WindowError : Error {
  using Error::Error;
};

// c_0 + c_1 s + c_2 s^2 + ...
struct MatrixPolynomial {
  std::vector<Matrix> coeffs;

  Matrix operator()(Complex s) const;
  Index dim() const { return coeffs.empty() ? 0 : coeffs.front().rows(); }
  static MatrixPolynomial constant(Matrix m) { return {{std::move(m)}}; }
};

struct RadialProfile {
  enum class Kind { zero, power, power_gauss };
  Kind kind = Kind::power;
  double exponent = 1.0;  // g(r) = r^p
  double width = 1.0;     // power_gauss: r^p exp(-r^2 / width^2)

  double operator()(double r) const;
};

struct SpectralWindow {
  Complex center = 0.0;          // E_at(s0)
  double contour_radius = 0.25;  // epsilon around E_at(s0)
  double s_radius = 0.25;
  double z_radius = 0.25;        // must stay below 1/2
  double gap = 0.5;
};

struct ModelSpec {
  std::string name;
  int atomic_dim = 1;
  int degeneracy = 1;
  MatrixPolynomial atomic_hamiltonian;
  RadialProfile profile;
  MatrixPolynomial coupling1;  // G_{1,s} atomic part
  MatrixPolynomial coupling2;  // G_{2,s} atomic part
  double infrared_exponent = 0.5;
  Complex reference_point = 0.0;
  std::vector<FactoredSymmetry> symmetries;
  bool reflection_symmetric = false;
  std::optional<FactoredSymmetry> conjugation;  // set for complex-selfadjoint models
  double polarization_factor = 1.0;
  SpectralWindow window;

  void validate() const;
};

// 4 pi int_{shell j} r^2 g(r)^2 dr
double shell_weight(const RadialProfile& profile, const ModeGrid& grid, int j);

// Per-mode couplings sqrt(pol * shell_weight_j) * B(s).
std::vector<Matrix> shell_couplings(const MatrixPolynomial& b, const RadialProfile& profile,
                                    const ModeGrid& grid, Complex s, double polarization = 1.0);

// (pol * 4 pi int_0^1 r^2 g(r)^2 / r^{2+2mu} dr)^{1/2}; throws InfraredDivergence.
double coupling_norm_mu(const RadialProfile& profile, double mu, double polarization = 1.0);

void check_region(const ModelSpec& spec, Complex s);

Matrix free_hamiltonian(const ModelSpec& spec, Complex s, const FockBasis& basis);
Matrix interaction(const ModelSpec& spec, Complex s, const FockBasis& basis);
// H_at(s) (x) 1 + 1 (x) H_f + g W(s)
Matrix build_hamiltonian(const ModelSpec& spec, Complex s, double g, const FockBasis& basis);

// -(2 pi i)^{-1} contour integral of (H - z)^{-1} by the trapezoid rule,
// refined once to confirm convergence.
Matrix spectral_projection(const Matrix& h, Complex center, double radius, int nodes = 32);

struct AtomicData {
  Complex energy;     // E_at(s)
  Matrix projection;  // P_at(s)
  Matrix range;       // orthonormal basis of Ran P_at(s)
};

AtomicData atomic_data(const ModelSpec& spec, Complex s);

// Frame U(s) with U P_at(s0) U^{-1} = P_at(s); identity when P_at is constant.
Matrix atomic_frame(const ModelSpec& spec, Complex s);
bool projection_constant(const ModelSpec& spec, int samples = 8);

// max over the q grid of ||(q+1)(H_at(s) - z + q)^{-1} Pbar_at||, and the q -> inf limit.
double hyp3_sup(const ModelSpec& spec, Complex s, Complex z);

struct HypothesisEntry {
  std::string name;
  bool applicable = true;
  bool pass = true;
  double residual = 0;
  std::string note;
};

struct HypothesisReport {
  std::vector<HypothesisEntry> entries;
  bool frame_transform = false;
  bool all_pass() const;
};

HypothesisReport verify_hypotheses(const ModelSpec& spec, int samples = 4);

}  // namespace fsrg

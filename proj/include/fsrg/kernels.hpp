#pragma once

#include "fsrg/fock.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>

namespace fsrg {

// w_{0,0} sampled on a uniform r-grid of [0,1] with derivatives.
struct KernelC1 {
  RealVector r;
  std::vector<Matrix> value;
  std::vector<Matrix> derivative;

  Index nodes() const { return r.size(); }
  int dim() const { return value.empty() ? 0 : static_cast<int>(value.front().rows()); }
  // Cubic Hermite interpolation of (value, derivative).
  Matrix operator()(double x) const;

  static KernelC1 sample(int d, Index nodes, const std::function<Matrix(double)>& f,
                         const std::function<Matrix(double)>& df);
  static KernelC1 zero(int d, Index nodes);
};

// max over intervals of ||(w1 - w0)/h - (w0' + w1')/2||, a consistency
// check between stored values and derivatives (O(h^2)).
double hermite_defect(const KernelC1& w);

// sup ||w|| + sup ||w'||
double norm_c1(const KernelC1& w);

// Kernel of order (m, n), 1 <= m + n <= 2, constant on shells: one KernelC1 per
// mode tuple (creation modes first).
struct KernelMN {
  int m = 0;
  int n = 0;
  int modes = 0;
  std::vector<KernelC1> samples;

  static KernelMN zero(int m, int n, int modes, int d, Index nodes);
  Index flat(const std::vector<int>& k) const;
  std::vector<int> unflat(Index i) const;
  KernelC1& at(const std::vector<int>& k) { return samples[flat(k)]; }
  const KernelC1& at(const std::vector<int>& k) const { return samples[flat(k)]; }

  void symmetrize();
  bool is_symmetric(double tol = 1e-14) const;
  void scale(Complex c);
};

// Quadratic-in-r kernel A + B r + C r^2 per mode tuple with Gaussian entries,
// symmetrized.
KernelMN random_kernel(int m, int n, int modes, int d, Index nodes, std::uint64_t seed);

struct KernelSet {
  KernelC1 w00;
  std::vector<KernelMN> higher;
};

// Shell integral 4 pi int_shell r^2 |k|^{-2-2mu} dr.
double shell_mu_weight(const ModeGrid& grid, int j, double mu);

double norm_mu(const KernelMN& w, const ModeGrid& grid, double mu);
double norm_mu_xi(const KernelSet& w, const ModeGrid& grid, double mu, double xi);
// sup over r of the weighted kernel, summed with weights mu_j / omega_j.
// The r sup runs over the kernel grid refined `refine` times.
double sharp_norm(const KernelMN& w, const ModeGrid& grid, int refine = 8);

// H_{m,n}(w) on the reduced basis (H_f <= 1).
Matrix build_H_mn(const KernelMN& w, const FockBasis& basis);
Matrix build_H_of_w(const KernelSet& w, const FockBasis& basis);

struct W00Extraction {
  std::vector<double> nodes;        // 0 and the mode energies, increasing
  std::vector<Matrix> node_values;
  Pchip interpolant;
  KernelC1 kernel;                  // interpolant resampled on the r-grid
  double contamination = 0;         // estimate of the w_{1,1} share in one-photon blocks

  Matrix operator()(double r) const { return interpolant(r); }
};

W00Extraction extract_w00(const Matrix& h, const FockBasis& basis, Index grid_nodes = 101);

// w00(H_f) from an extraction, evaluated at the exact basis energies.
Matrix w00_operator(const W00Extraction& w, const FockBasis& basis);

struct PolydiscParams {
  double alpha = 0, beta = 0, gamma = 0;
  double rho = 0.5, mu = 0.5, xi = 0;
  double c_chi = 1.0;

  double c_beta() const { return 1.5 * c_chi; }
  double c_gamma() const { return 128.0 * c_chi * c_chi; }
  static PolydiscParams managed(double rho, double mu, double c_chi);
};

struct PolydiscEstimate {
  double alpha = 0;
  double beta = 0;
  double gamma = 0;  // ||H - w00(H_f)||, a surrogate for the kernel norm
  bool member = false;
};

PolydiscEstimate polydisc_check(const Matrix& h, const FockBasis& basis,
                                const PolydiscParams& params);
PolydiscEstimate polydisc_check(const Matrix& h, const FockBasis& basis,
                                const W00Extraction& w, const PolydiscParams& params);

// Columnar dump: r, then Re and Im of each entry of w(r) row-major.
std::string dump_kernel(const KernelC1& w);

}  // namespace fsrg

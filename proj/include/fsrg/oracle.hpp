#pragma once

#include "fsrg/model.hpp"
#include "fsrg/rg.hpp"

#include <string>
#include <vector>

namespace fsrg {

inline constexpr Index kOracleDimBudget = 20000;

struct OracleReport {
  std::vector<Complex> spectrum;  // sorted by real part, then imaginary part
  Matrix vectors;                 // column k belongs to spectrum[k]
  Complex lowest;
  int multiplicity = 0;           // eigenvalues within cluster_tol of lowest
  double cluster_tol = 0;
  double gap = 0;                 // distance from the lowest cluster to the next eigenvalue
  double max_residual = 0;        // max ||H v - lambda v|| / ||H||
  bool hermitian = false;

  // Indices of eigenvalues within cluster_tol of z.
  std::vector<Index> cluster_around(Complex z) const;
};

// Cluster tolerance is cluster_rel * max(1, |lambda_min|).
OracleReport dense_spectrum(const Matrix& h, bool hermitian = false, double cluster_rel = 1e-8);

struct Comparison {
  Complex nearest;
  double eigenvalue_error = 0;
  double subspace_sine = 0;     // largest principal sine against the oracle eigenspace
  bool ground_state_checked = false;
  double ground_state_error = 0;  // |z - min spectrum|, when checked
};

Comparison compare(Complex z, const Matrix& psi, const OracleReport& oracle,
                   bool selfadjoint_real);

struct ScalingReport {
  std::vector<double> g;
  std::vector<Complex> energy;     // E_g, oracle eigenvalue continuing E_at
  std::vector<double> distance;    // largest principal sine to Ran P_at (x) Omega
  double exponent = 0;             // slope of log |E_g - E_at| against log g
  bool monotone = true;            // distances strictly decreasing as g decreases
};

// Needs at least four couplings in geometric progression.
ScalingReport perturbation_scaling(const ModelSpec& spec, Complex s, const std::vector<double>& g,
                                   const Truncation& trunc, double rho = 0.5);

// Columnar dump: index, Re, Im.
std::string dump_spectrum(const OracleReport& r);

}  // namespace fsrg

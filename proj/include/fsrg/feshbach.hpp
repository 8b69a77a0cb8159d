#pragma once

#include "fsrg/fock.hpp"
#include "fsrg/model.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace fsrg {

// chi(r) = 1 on [0, 3/4], cos(pi/2 sigma(4r - 3)) on (3/4, 1), 0 beyond,
// sigma the quintic smoothstep; chibar = (1 - chi^2)^{1/2}.
double smooth_cutoff(double r);

struct Cutoff {
  double scale = 1.0;  // chi_rho(r) = chi(r / rho)
  double chi(double r) const { return smooth_cutoff(r / scale); }
  double chibar(double r) const;
};

// chi(H_f) and chibar(H_f) as diagonal matrices (times 1_D) on the basis.
Matrix cutoff_matrix(const FockBasis& basis, const Cutoff& c, bool bar);

struct PairFailure : Error {
  using Error::Error;
};

struct FeshbachPairReport {
  double commutation_chi = 0;
  double commutation_chibar = 0;
  double invertibility_margin = 0;  // smallest singular value of T on Ran chibar
  double condition_number = 0;      // of H_chibar on Ran chibar
  double contraction_left = 0;      // ||T^{-1} chibar W chibar||
  double contraction_right = 0;     // ||chibar W T^{-1} chibar||
  double range_conditioning = 1;    // smallest kept singular value of chibar, relative
  bool conditioning_warning = false;
  bool pass = false;
};

struct PairOptions {
  double tol = 1e-10;
  bool diagnostics = true;        // SVD margins, condition number, contractions
  bool check_commutation = true;
};

// Shared pieces of the map for one (H, T, chi, chibar). Diagonal cutoffs are
// detected and applied as scalings.
class FeshbachPair {
 public:
  FeshbachPair(Matrix h, Matrix t, Matrix chi, Matrix chibar, double tol = 1e-10);
  // `range`, when given, is an orthonormal basis of Ran chibar.
  FeshbachPair(Matrix h, Matrix t, Matrix chi, Matrix chibar, const PairOptions& opt,
               const Matrix* range = nullptr);

  const FeshbachPairReport& report() const { return report_; }
  const Matrix& h() const { return h_; }
  const Matrix& t() const { return t_; }
  const Matrix& chi() const { return chi_; }
  const Matrix& chibar() const { return chibar_; }
  Matrix w() const { return h_ - t_; }

  // chibar H_chibar^{-1} chibar and chibar T^{-1} chibar, inverses taken on Ran chibar.
  Matrix reduced_resolvent() const;
  Matrix free_resolvent() const;

  Matrix map() const;       // F_chi(H, T)
  Matrix q() const;         // chi - chibar H_chibar^{-1} chibar W chi
  Matrix q_sharp() const;   // chi - chi W chibar H_chibar^{-1} chibar

  // l^* F r and Q r without forming the full operators.
  Matrix map_between(const Matrix& l, const Matrix& r) const;
  Matrix q_times(const Matrix& v) const;

 private:
  void init(const PairOptions& opt, const Matrix* range);
  void require_pass() const;
  Matrix chi_left(const Matrix& x) const;
  Matrix chibar_left(const Matrix& x) const;
  Matrix to_range(const Matrix& x) const;    // Q^* x
  Matrix from_range(const Matrix& y) const;  // Q y

  Matrix h_, t_, chi_, chibar_;
  Vector chi_diag_, chibar_diag_;
  bool diagonal_ = false;
  std::vector<Index> selection_;  // Ran chibar coordinates when diagonal
  Matrix range_;                  // orthonormal basis of Ran chibar otherwise
  Index range_dim_ = 0;
  Eigen::PartialPivLU<Matrix> lu_h_, lu_t_;  // Q^* H_chibar Q and Q^* T Q
  FeshbachPairReport report_;
};

FeshbachPairReport verify_pair(const Matrix& h, const Matrix& t, const Matrix& chi,
                               const Matrix& chibar);
Matrix feshbach_map(const Matrix& h, const Matrix& t, const Matrix& chi, const Matrix& chibar);

struct QOperators {
  Matrix q;
  Matrix q_sharp;
};
QOperators q_ops(const Matrix& h, const Matrix& t, const Matrix& chi, const Matrix& chibar);

struct IsospectralityReport {
  Index kernel_h = 0;
  Index kernel_f = 0;
  bool invertible = false;
  double h_inverse_residual = 0;  // ||H^{-1} - (Q F^{-1} Q# + chibar H_chibar^{-1} chibar)|| / ||H^{-1}||
  double f_inverse_residual = 0;  // ||F^{-1} - (chi H^{-1} chi + chibar T^{-1} chibar)|| / ||F^{-1}||
  double kernel_map_residual = 0; // ||H Q u|| / ||Q u|| over u in ker F
  double forward_residual = 0;    // ||F chi k|| / ||chi k|| over k in ker H
  double roundtrip_residual = 0;  // ||chi Q u - u|| over orthonormal u in ker F
  double condition_h = 0;
  double condition_f = 0;
  bool pass(double tol = 1e-9) const;
};

IsospectralityReport isospectrality_suite(const FeshbachPair& pair);

struct RandomPair {
  Matrix h, t, chi, chibar;
  Index planted_kernel = 0;
};

// Diagonal cutoffs, diagonal T, small W, and a planted kernel of dimension
// `kernel` supported where chibar vanishes.
RandomPair make_random_pair(Index dim, Index kernel, std::uint64_t seed);

// First Feshbach operator for one (spec, s, g) on a full basis; z varies.
class FirstFeshbach {
 public:
  FirstFeshbach(const ModelSpec& spec, Complex s, double g, const FockBasis& full,
                const Matrix& frame);

  const FockBasis& full_basis() const { return full_; }
  std::shared_ptr<const FockBasis> reduced_basis() const { return reduced_; }
  // full.dim x reduced.dim isometry V_at (x) 1_{H_f <= 1}
  const Matrix& embedding() const { return embed_; }
  // H_g(s) in the working frame (equal to the model frame when P_at is constant)
  const Matrix& hamiltonian() const { return h_; }
  Complex atomic_energy() const { return e_at_; }
  const Matrix& atomic_range() const { return v_; }
  const Matrix& frame() const { return frame_; }

  struct Result {
    Matrix reduced;  // H^(0)[s, z]
    FeshbachPairReport pair;
    Matrix lift;     // Q_chi E: reduced kernel vectors -> eigenvectors in the working frame
    bool neumann_done = false;
    int neumann_terms = 0;
    bool neumann_converged = false;
    double neumann_discrepancy = 0;
    double neumann_tail_bound = 0;
  };

  Result evaluate(Complex z, bool with_lift = false, bool with_neumann = false,
                  bool diagnostics = true) const;

  // The pair (H - z, H_0 - z) with the atomic cutoffs, on the full space.
  FeshbachPair pair(Complex z, bool diagnostics = true) const;

 private:
  FockBasis full_;
  std::shared_ptr<const FockBasis> reduced_;
  Matrix frame_;
  Matrix h_, h0_, chi_, chibar_, embed_, v_, range_;
  double commutation_chi_ = 0, commutation_chibar_ = 0;
  Complex e_at_;
};

}  // namespace fsrg

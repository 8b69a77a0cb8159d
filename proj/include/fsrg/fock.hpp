#pragma once

#include "fsrg/linalg.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace fsrg {

// Radial shells [rho^{j+1}, rho^j] with representative energy omega_j = rho^j.
struct ModeGrid {
  double ratio = 0.5;
  int levels = 0;
  std::vector<double> energies;
  std::vector<double> shell_volumes;  // 4 pi int_shell r^2 dr

  static ModeGrid geometric(double ratio, int levels);
  // Grid after removing the top shell; mode j of the result is mode j+1 here.
  ModeGrid coarsened() const;
};

using Occupation = std::vector<int>;

class FockBasis {
 public:
  FockBasis(ModeGrid grid, int max_photons, double energy_cutoff, int atomic_dim = 1);

  const ModeGrid& grid() const { return grid_; }
  int modes() const { return grid_.levels; }
  int max_photons() const { return max_photons_; }
  double energy_cutoff() const { return energy_cutoff_; }
  int atomic_dim() const { return atomic_dim_; }

  Index size() const { return static_cast<Index>(states_.size()); }
  Index dim() const { return size() * atomic_dim_; }

  const Occupation& state(Index i) const { return states_[i]; }
  double energy(Index i) const { return energies_[i]; }
  int photons(Index i) const { return photons_[i]; }
  std::optional<Index> index_of(const Occupation& n) const;
  const RealVector& energies() const { return energy_vector_; }

  FockBasis with_atomic_dim(int d) const;

  // Vacuum-only space over a grid that may have no shells left; the last
  // level of the renormalization cascade lives here.
  static FockBasis terminal(double ratio, int atomic_dim);

 private:
  struct TerminalTag {};
  FockBasis(TerminalTag, double ratio, int atomic_dim);
  void index_states();

  ModeGrid grid_;
  int max_photons_;
  double energy_cutoff_;
  int atomic_dim_;
  std::vector<Occupation> states_;
  std::vector<double> energies_;
  std::vector<int> photons_;
  RealVector energy_vector_;
  std::map<Occupation, Index> lookup_;
};

// Energies are compared with this slack so that sums like 0.5 + 0.5 <= 1 hold.
inline constexpr double kEnergySlack = 1e-12;

// Dense matrix on atomic (x) Fock space with Fock-major index f * D + a.
class OperatorMatrix {
 public:
  OperatorMatrix(std::shared_ptr<const FockBasis> basis, Matrix m, bool self_adjoint = false);

  const Matrix& matrix() const { return m_; }
  const FockBasis& basis() const { return *basis_; }
  std::shared_ptr<const FockBasis> basis_ptr() const { return basis_; }
  bool self_adjoint() const { return self_adjoint_; }

 private:
  std::shared_ptr<const FockBasis> basis_;
  Matrix m_;
  bool self_adjoint_;
};

// Scalar annihilator a_j on the Fock factor only (size x size).
Matrix ladder(const FockBasis& basis, int mode);

// a*(G) = sum_j G_j (x) a_j^*, and its exact adjoint a(G).
Matrix creation_op(const FockBasis& basis, const std::vector<Matrix>& coeffs);
Matrix annihilation_op(const FockBasis& basis, const std::vector<Matrix>& coeffs);

Matrix field_energy(const FockBasis& basis);
Matrix number_op(const FockBasis& basis);
// f(H_f) (x) 1_D
Matrix fock_function(const FockBasis& basis, const std::function<Complex(double)>& f);
// 1_F (x) A
Matrix lift_atomic(const FockBasis& basis, const Matrix& a);

// Gamma_rho restricted to the H_f <= rho sector of `source`, landing in `target`.
class Dilation {
 public:
  Dilation(const FockBasis& source, const FockBasis& target, double rho);

  // target.dim() x source.dim(); zero columns outside the sector.
  const Matrix& matrix() const { return matrix_; }
  // Source Fock indices inside the sector, and their images.
  const std::vector<Index>& sector() const { return sector_; }
  const std::vector<Index>& image() const { return image_; }
  // Throws if psi has weight outside the sector.
  Vector apply(const Vector& psi, double tol = 1e-12) const;

 private:
  Index source_dim_;
  int atomic_dim_;
  std::vector<Index> sector_;
  std::vector<Index> image_;
  std::vector<char> in_sector_;
  Matrix matrix_;
};

// Dilation within a single basis (target = source).
Dilation dilation(const FockBasis& basis, double rho);

double verify_pull_through(const FockBasis& basis, const std::function<double(double)>& f,
                           int mode);

struct RelativeBoundReport {
  int samples = 0;
  int violations = 0;
  double max_ratio_annihilation = 0;  // lhs / rhs
  double max_ratio_creation = 0;
};

RelativeBoundReport relative_bound_check(const FockBasis& basis, const std::vector<Matrix>& coeffs,
                                         int samples, std::uint64_t seed);

}  // namespace fsrg

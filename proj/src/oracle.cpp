#include "fsrg/oracle.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace fsrg {

std::vector<Index> OracleReport::cluster_around(Complex z) const {
  std::vector<Index> out;
  for (Index k = 0; k < static_cast<Index>(spectrum.size()); ++k)
    if (std::abs(spectrum[k] - z) <= cluster_tol) out.push_back(k);
  return out;
}

OracleReport dense_spectrum(const Matrix& h, bool hermitian, double cluster_rel) {
  if (h.rows() != h.cols()) throw DimensionError("oracle: matrix must be square");
  if (h.rows() > kOracleDimBudget) throw DimensionError("oracle: dimension budget exceeded");
  if (h.rows() == 0) throw DimensionError("oracle: empty matrix");
  OracleReport r;
  r.hermitian = hermitian;
  std::vector<Complex> vals;
  Matrix vecs;
  if (hermitian) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success) throw Error("oracle: Hermitian eigensolver failed");
    vals.resize(h.rows());
    for (Index k = 0; k < h.rows(); ++k) vals[k] = es.eigenvalues()(k);
    vecs = es.eigenvectors();
  } else {
    Eigen::ComplexEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success) throw Error("oracle: eigensolver failed");
    vals.assign(es.eigenvalues().data(), es.eigenvalues().data() + h.rows());
    vecs = es.eigenvectors();
    for (Index k = 0; k < vecs.cols(); ++k) vecs.col(k).normalize();
  }
  std::vector<Index> order(vals.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (vals[a].real() != vals[b].real()) return vals[a].real() < vals[b].real();
    return vals[a].imag() < vals[b].imag();
  });
  r.vectors.resize(h.rows(), h.rows());
  for (Index k = 0; k < h.rows(); ++k) {
    r.spectrum.push_back(vals[order[k]]);
    r.vectors.col(k) = vecs.col(order[k]);
  }
  r.lowest = r.spectrum.front();
  r.cluster_tol = cluster_rel * std::max(1.0, std::abs(r.lowest));
  r.multiplicity = static_cast<int>(r.cluster_around(r.lowest).size());
  r.gap = std::numeric_limits<double>::infinity();
  for (const Complex& v : r.spectrum)
    if (std::abs(v - r.lowest) > r.cluster_tol) r.gap = std::min(r.gap, std::abs(v - r.lowest));
  const double hn = std::max(op_norm(h), 1e-300);
  for (Index k = 0; k < h.rows(); ++k)
    r.max_residual = std::max(
        r.max_residual, (h * r.vectors.col(k) - r.spectrum[k] * r.vectors.col(k)).norm() / hn);
  return r;
}

Comparison compare(Complex z, const Matrix& psi, const OracleReport& oracle,
                   bool selfadjoint_real) {
  Comparison c;
  Index best = 0;
  for (Index k = 1; k < static_cast<Index>(oracle.spectrum.size()); ++k)
    if (std::abs(oracle.spectrum[k] - z) < std::abs(oracle.spectrum[best] - z)) best = k;
  c.nearest = oracle.spectrum[best];
  c.eigenvalue_error = std::abs(c.nearest - z);
  if (psi.cols() > 0) {
    std::vector<Index> cluster = oracle.cluster_around(c.nearest);
    Matrix space(oracle.vectors.rows(), static_cast<Index>(cluster.size()));
    for (Index k = 0; k < space.cols(); ++k) space.col(k) = oracle.vectors.col(cluster[k]);
    c.subspace_sine =
        max_principal_sine(range_basis(psi).basis, range_basis(space).basis);
  }
  if (selfadjoint_real) {
    c.ground_state_checked = true;
    c.ground_state_error = std::abs(z - oracle.lowest);
  }
  return c;
}

ScalingReport perturbation_scaling(const ModelSpec& spec, Complex s, const std::vector<double>& g,
                                   const Truncation& trunc, double rho) {
  if (g.size() < 4) throw Error("perturbation_scaling: need at least four couplings");
  const double q = g[1] / g[0];
  for (std::size_t k = 1; k < g.size(); ++k)
    if (!(g[k] > 0) || std::abs(g[k] / g[k - 1] - q) > 1e-9 * q)
      throw Error("perturbation_scaling: couplings must form a geometric progression");
  const FockBasis basis(ModeGrid::geometric(rho, trunc.levels), trunc.max_photons,
                        trunc.energy_cutoff, spec.atomic_dim);
  const AtomicData at = atomic_data(spec, s);
  Matrix free_space = Matrix::Zero(basis.dim(), spec.degeneracy);
  free_space.topRows(spec.atomic_dim) = at.range;

  ScalingReport rep;
  rep.g = g;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double gk : g) {
    const Matrix h = build_hamiltonian(spec, s, gk, basis);
    const bool herm = hermiticity_residual(h) <= 1e-13 * std::max(1.0, h.norm());
    const OracleReport o = dense_spectrum(h, herm);
    // The continuation of the atomic level is the d eigenvectors with the
    // largest weight on Ran P_at (x) Omega; nearest-in-energy picks photon
    // states once g^2 exceeds the lowest shell energy.
    std::vector<double> weight(o.spectrum.size());
    for (std::size_t k = 0; k < weight.size(); ++k)
      weight[k] = (free_space.adjoint() * o.vectors.col(k)).norm() / o.vectors.col(k).norm();
    std::vector<Index> idx(o.spectrum.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + spec.degeneracy, idx.end(),
                      [&](Index a, Index b) { return weight[a] > weight[b]; });
    Matrix space(basis.dim(), spec.degeneracy);
    Complex mean = 0;
    for (int j = 0; j < spec.degeneracy; ++j) {
      space.col(j) = o.vectors.col(idx[j]);
      mean += o.spectrum[idx[j]];
    }
    mean /= static_cast<double>(spec.degeneracy);
    rep.energy.push_back(mean);
    rep.distance.push_back(max_principal_sine(range_basis(space).basis, free_space));
    const double x = std::log(gk), y = std::log(std::abs(mean - at.energy));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(g.size());
  rep.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  // Ordered by g; the distance must shrink with g.
  for (std::size_t k = 1; k < g.size(); ++k) {
    const bool up = g[k] > g[k - 1];
    if (up ? !(rep.distance[k] > rep.distance[k - 1]) : !(rep.distance[k] < rep.distance[k - 1]))
      rep.monotone = false;
  }
  return rep;
}

std::string dump_spectrum(const OracleReport& r) {
  std::ostringstream os;
  char buf[96];
  for (std::size_t k = 0; k < r.spectrum.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu %.17g %.17g\n", k, r.spectrum[k].real(),
                  r.spectrum[k].imag());
    os << buf;
  }
  return os.str();
}

}  // namespace fsrg

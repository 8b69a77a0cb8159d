#include "fsrg/kernels.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

namespace fsrg {

Matrix KernelC1::operator()(double x) const {
  const Index n = nodes();
  if (n < 2) throw DimensionError("kernel: need at least two nodes");
  const double h = r(1) - r(0);
  Index k = static_cast<Index>(std::floor((x - r(0)) / h));
  k = std::clamp<Index>(k, 0, n - 2);
  const double t = (x - r(k)) / h;
  const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
  const double h10 = t * (1 - t) * (1 - t);
  const double h01 = t * t * (3 - 2 * t);
  const double h11 = t * t * (t - 1);
  return h00 * value[k] + h10 * h * derivative[k] + h01 * value[k + 1] +
         h11 * h * derivative[k + 1];
}

KernelC1 KernelC1::sample(int d, Index nodes, const std::function<Matrix(double)>& f,
                          const std::function<Matrix(double)>& df) {
  if (nodes < 2) throw DimensionError("kernel: need at least two nodes");
  KernelC1 w;
  w.r = RealVector::LinSpaced(nodes, 0.0, 1.0);
  for (Index i = 0; i < nodes; ++i) {
    Matrix v = f(w.r(i)), dv = df(w.r(i));
    if (v.rows() != d || dv.rows() != d) throw DimensionError("kernel: sample size mismatch");
    w.value.push_back(std::move(v));
    w.derivative.push_back(std::move(dv));
  }
  return w;
}

KernelC1 KernelC1::zero(int d, Index nodes) {
  const Matrix z = Matrix::Zero(d, d);
  return sample(d, nodes, [&](double) { return z; }, [&](double) { return z; });
}

double hermite_defect(const KernelC1& w) {
  double worst = 0;
  for (Index k = 0; k + 1 < w.nodes(); ++k) {
    const double h = w.r(k + 1) - w.r(k);
    const Matrix secant = (w.value[k + 1] - w.value[k]) / h;
    worst = std::max(worst, op_norm(secant - 0.5 * (w.derivative[k] + w.derivative[k + 1])));
  }
  return worst;
}

double norm_c1(const KernelC1& w) {
  double sv = 0, sd = 0;
  for (Index i = 0; i < w.nodes(); ++i) {
    sv = std::max(sv, op_norm(w.value[i]));
    sd = std::max(sd, op_norm(w.derivative[i]));
  }
  return sv + sd;
}

KernelMN KernelMN::zero(int m, int n, int modes, int d, Index nodes) {
  if (m < 0 || n < 0 || m + n < 1 || m + n > 2) throw DimensionError("kernel: order out of range");
  KernelMN w;
  w.m = m;
  w.n = n;
  w.modes = modes;
  Index count = 1;
  for (int i = 0; i < m + n; ++i) count *= modes;
  w.samples.assign(count, KernelC1::zero(d, nodes));
  return w;
}

Index KernelMN::flat(const std::vector<int>& k) const {
  if (static_cast<int>(k.size()) != m + n) throw DimensionError("kernel: wrong tuple length");
  Index i = 0;
  for (int v : k) {
    if (v < 0 || v >= modes) throw DimensionError("kernel: mode out of range");
    i = i * modes + v;
  }
  return i;
}

std::vector<int> KernelMN::unflat(Index i) const {
  std::vector<int> k(m + n);
  for (int p = m + n - 1; p >= 0; --p) {
    k[p] = static_cast<int>(i % modes);
    i /= modes;
  }
  return k;
}

void KernelMN::symmetrize() {
  auto swap_pair = [&](int a, int b) {
    for (Index i = 0; i < static_cast<Index>(samples.size()); ++i) {
      std::vector<int> k = unflat(i);
      std::swap(k[a], k[b]);
      const Index j = flat(k);
      if (j <= i) continue;
      KernelC1& x = samples[i];
      KernelC1& y = samples[j];
      for (Index t = 0; t < x.nodes(); ++t) {
        Matrix v = 0.5 * (x.value[t] + y.value[t]);
        Matrix dv = 0.5 * (x.derivative[t] + y.derivative[t]);
        x.value[t] = y.value[t] = v;
        x.derivative[t] = y.derivative[t] = dv;
      }
    }
  };
  if (m == 2) swap_pair(0, 1);
  if (n == 2) swap_pair(m, m + 1);
}

bool KernelMN::is_symmetric(double tol) const {
  auto check = [&](int a, int b) {
    for (Index i = 0; i < static_cast<Index>(samples.size()); ++i) {
      std::vector<int> k = unflat(i);
      std::swap(k[a], k[b]);
      const KernelC1& x = samples[i];
      const KernelC1& y = samples[flat(k)];
      for (Index t = 0; t < x.nodes(); ++t)
        if ((x.value[t] - y.value[t]).norm() > tol || (x.derivative[t] - y.derivative[t]).norm() > tol)
          return false;
    }
    return true;
  };
  return (m < 2 || check(0, 1)) && (n < 2 || check(m, m + 1));
}

void KernelMN::scale(Complex c) {
  for (auto& s : samples)
    for (Index t = 0; t < s.nodes(); ++t) {
      s.value[t] *= c;
      s.derivative[t] *= c;
    }
}

KernelMN random_kernel(int m, int n, int modes, int d, Index nodes, std::uint64_t seed) {
  KernelMN w = KernelMN::zero(m, n, modes, d, nodes);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  auto draw = [&] {
    Matrix x(d, d);
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) x(i, j) = Complex(normal(rng), normal(rng));
    return x;
  };
  for (auto& s : w.samples) {
    const Matrix a = draw(), b = draw(), c = draw();
    s = KernelC1::sample(
        d, nodes, [&](double r) { return Matrix(a + r * b + r * r * c); },
        [&](double r) { return Matrix(b + 2 * r * c); });
  }
  w.symmetrize();
  return w;
}

double shell_mu_weight(const ModeGrid& grid, int j, double mu) {
  const double hi = grid.energies.at(j), lo = hi * grid.ratio;
  const double e = 1 - 2 * mu;
  if (std::abs(e) < 1e-14) return 4 * std::numbers::pi * std::log(hi / lo);
  return 4 * std::numbers::pi * (std::pow(hi, e) - std::pow(lo, e)) / e;
}

double norm_mu(const KernelMN& w, const ModeGrid& grid, double mu) {
  if (w.modes != grid.levels) throw DimensionError("norm_mu: grid mismatch");
  double sum = 0;
  for (Index i = 0; i < static_cast<Index>(w.samples.size()); ++i) {
    double weight = 1;
    for (int k : w.unflat(i)) weight *= shell_mu_weight(grid, k, mu);
    sum += std::pow(norm_c1(w.samples[i]), 2) * weight;
  }
  return std::sqrt(sum);
}

double norm_mu_xi(const KernelSet& w, const ModeGrid& grid, double mu, double xi) {
  double sum = norm_c1(w.w00);
  for (const auto& k : w.higher) sum += std::pow(xi, -(k.m + k.n)) * norm_mu(k, grid, mu);
  return sum;
}

double sharp_norm(const KernelMN& w, const ModeGrid& grid, int refine) {
  if (w.modes != grid.levels) throw DimensionError("sharp_norm: grid mismatch");
  double sum = 0;
  for (Index i = 0; i < static_cast<Index>(w.samples.size()); ++i) {
    const std::vector<int> k = w.unflat(i);
    const KernelC1& s = w.samples[i];
    const Index pts = (s.nodes() - 1) * refine + 1;
    double sup = 0;
    for (Index p = 0; p < pts; ++p) {
      const double r = static_cast<double>(p) / (pts - 1);
      double weight = 1, acc = 0;
      for (int l = 0; l < w.m; ++l) {
        acc += grid.energies[k[l]];
        weight *= r + acc;
      }
      acc = 0;
      for (int l = 0; l < w.n; ++l) {
        acc += grid.energies[k[w.m + l]];
        weight *= r + acc;
      }
      sup = std::max(sup, std::pow(op_norm(s(r)), 2) * weight);
    }
    double measure = 1;
    for (int j : k) measure *= grid.shell_volumes[j] / grid.energies[j];
    sum += sup * measure;
  }
  return std::sqrt(sum);
}

Matrix build_H_mn(const KernelMN& w, const FockBasis& basis) {
  if (w.modes != basis.modes()) throw DimensionError("build_H: grid mismatch");
  const int d = basis.atomic_dim();
  const ModeGrid& grid = basis.grid();
  Matrix out = Matrix::Zero(basis.dim(), basis.dim());
  for (Index src = 0; src < basis.size(); ++src) {
    for (Index t = 0; t < static_cast<Index>(w.samples.size()); ++t) {
      const std::vector<int> k = w.unflat(t);
      Occupation occ = basis.state(src);
      double amp = 1;
      for (int l = 0; l < w.n; ++l) {
        const int j = k[w.m + l];
        if (occ[j] == 0) {
          amp = 0;
          break;
        }
        amp *= std::sqrt(static_cast<double>(occ[j]));
        --occ[j];
      }
      if (amp == 0) continue;
      double r = 0;
      for (int j = 0; j < basis.modes(); ++j) r += occ[j] * grid.energies[j];
      for (int l = 0; l < w.m; ++l) {
        const int j = k[l];
        ++occ[j];
        amp *= std::sqrt(static_cast<double>(occ[j]));
      }
      auto dst = basis.index_of(occ);
      if (!dst) continue;
      for (int j : k) amp *= std::sqrt(grid.shell_volumes[j]);
      out.block(*dst * d, src * d, d, d) += amp * w.samples[t](r);
    }
  }
  return out;
}

Matrix build_H_of_w(const KernelSet& w, const FockBasis& basis) {
  if (w.w00.dim() != basis.atomic_dim()) throw DimensionError("build_H: atomic size mismatch");
  const int d = basis.atomic_dim();
  Matrix out = Matrix::Zero(basis.dim(), basis.dim());
  for (Index i = 0; i < basis.size(); ++i) out.block(i * d, i * d, d, d) = w.w00(basis.energy(i));
  for (const auto& k : w.higher) out += build_H_mn(k, basis);
  return out;
}

W00Extraction extract_w00(const Matrix& h, const FockBasis& basis, Index grid_nodes) {
  const int d = basis.atomic_dim();
  if (h.rows() != basis.dim()) throw DimensionError("extract_w00: size mismatch");
  W00Extraction out;
  const Matrix vac = h.topLeftCorner(d, d);
  // One-photon states, from the softest mode up so nodes increase.
  std::vector<std::pair<int, Index>> single;
  for (int j = basis.modes() - 1; j >= 0; --j) {
    Occupation n(basis.modes(), 0);
    n[j] = 1;
    if (auto k = basis.index_of(n)) single.emplace_back(j, *k);
  }
  out.nodes.push_back(0.0);
  out.node_values.push_back(vac);
  for (auto [j, k] : single) {
    out.nodes.push_back(basis.grid().energies[j]);
    out.node_values.push_back(h.block(k * d, k * d, d, d));
  }
  if (single.empty()) {
    // Vacuum only: continue with unit slope, the free field energy.
    out.nodes.push_back(1.0);
    out.node_values.push_back(vac + Matrix::Identity(d, d));
  }
  for (auto [j, k] : single) {
    double est = 0;
    for (auto [j2, k2] : single) {
      if (j2 == j) continue;
      const double ratio = std::sqrt(basis.grid().shell_volumes[j] / basis.grid().shell_volumes[j2]);
      est = std::max(est, op_norm(h.block(k * d, k2 * d, d, d)) * ratio);
    }
    out.contamination = std::max(out.contamination, est);
  }
  out.interpolant = Pchip(out.nodes, out.node_values);
  out.kernel.r = RealVector::LinSpaced(grid_nodes, 0.0, 1.0);
  for (Index i = 0; i < grid_nodes; ++i) {
    out.kernel.value.push_back(out.interpolant(out.kernel.r(i)));
    out.kernel.derivative.push_back(out.interpolant.derivative(out.kernel.r(i)));
  }
  return out;
}

Matrix w00_operator(const W00Extraction& w, const FockBasis& basis) {
  const int d = basis.atomic_dim();
  Matrix out = Matrix::Zero(basis.dim(), basis.dim());
  for (Index i = 0; i < basis.size(); ++i)
    out.block(i * d, i * d, d, d) = w.interpolant(basis.energy(i));
  return out;
}

PolydiscParams PolydiscParams::managed(double rho, double mu, double c_chi) {
  PolydiscParams p;
  p.rho = rho;
  p.mu = mu;
  p.c_chi = c_chi;
  p.xi = std::sqrt(rho) / (4 * c_chi);
  p.alpha = rho / 2;
  p.beta = rho / 8;
  p.gamma = rho / 8;
  return p;
}

PolydiscEstimate polydisc_check(const Matrix& h, const FockBasis& basis, const W00Extraction& w,
                                const PolydiscParams& params) {
  PolydiscEstimate est;
  const int d = basis.atomic_dim();
  const Matrix id = Matrix::Identity(d, d);
  est.alpha = op_norm(w.node_values.front());
  for (Index i = 0; i < w.kernel.nodes(); ++i)
    est.beta = std::max(est.beta, op_norm(w.kernel.derivative[i] - id));
  est.gamma = op_norm(h - w00_operator(w, basis));
  est.member = est.alpha <= params.alpha && est.beta <= params.beta && est.gamma <= params.gamma;
  return est;
}

PolydiscEstimate polydisc_check(const Matrix& h, const FockBasis& basis,
                                const PolydiscParams& params) {
  return polydisc_check(h, basis, extract_w00(h, basis), params);
}

std::string dump_kernel(const KernelC1& w) {
  std::ostringstream os;
  os << "# r";
  const int d = w.dim();
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) os << " re_" << a << b << " im_" << a << b;
  os << "\n";
  char buf[64];
  for (Index i = 0; i < w.nodes(); ++i) {
    std::snprintf(buf, sizeof buf, "%.10f", w.r(i));
    os << buf;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        std::snprintf(buf, sizeof buf, " %.17g %.17g", w.value[i](a, b).real(), w.value[i](a, b).imag());
        os << buf;
      }
    os << "\n";
  }
  return os.str();
}

}  // namespace fsrg

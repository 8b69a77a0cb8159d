#pragma once

// Independent construction of the truncated Hamiltonian for test oracles.
// Shares only ModelSpec (for the polynomial coefficients) with the library.

#include "fsrg/model.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#ifndef FSRG_FIXTURE_DIR
#error "FSRG_FIXTURE_DIR must point at the fixtures directory"
#endif

namespace ref {

using fsrg::Complex;
using fsrg::Matrix;

inline std::string fixture(const std::string& name) { return std::string(FSRG_FIXTURE_DIR) + "/" + name; }

inline Matrix poly(const fsrg::MatrixPolynomial& p, Complex s) {
  Matrix out = Matrix::Zero(p.dim(), p.dim());
  Complex pw = 1;
  for (const Matrix& c : p.coeffs) {
    out += pw * c;
    pw *= s;
  }
  return out;
}

struct Truncated {
  std::vector<std::vector<int>> states;
  std::vector<double> omega;  // mode energies
  Matrix h;
};

// Shells [rho^{j+1}, rho^j], omega_j = rho^j, g(r) = r^p, states with at most
// nmax photons and field energy at most ecut.
inline Truncated hamiltonian(const fsrg::ModelSpec& m, Complex s, double g, int modes, int nmax,
                             double ecut, double rho = 0.5) {
  Truncated t;
  std::vector<double> weight;
  for (int j = 0; j < modes; ++j) {
    const double hi = std::pow(rho, j), lo = hi * rho, e = 3 + 2 * m.profile.exponent;
    t.omega.push_back(hi);
    weight.push_back(std::sqrt(m.polarization_factor * 4 * std::numbers::pi *
                               (std::pow(hi, e) - std::pow(lo, e)) / e));
  }
  // Odometer over occupations, keeping admissible ones.
  std::vector<int> n(modes, 0);
  for (;;) {
    int count = 0;
    double energy = 0;
    for (int j = 0; j < modes; ++j) {
      count += n[j];
      energy += n[j] * t.omega[j];
    }
    if (count <= nmax && energy <= ecut + 1e-12) t.states.push_back(n);
    int j = 0;
    while (j < modes && ++n[j] > nmax) n[j++] = 0;
    if (j == modes) break;
  }
  std::sort(t.states.begin(), t.states.end());
  std::map<std::vector<int>, int> index;
  for (std::size_t k = 0; k < t.states.size(); ++k) index[t.states[k]] = static_cast<int>(k);

  const int d = m.atomic_dim;
  const Matrix hat = poly(m.atomic_hamiltonian, s);
  const Matrix b1 = poly(m.coupling1, std::conj(s));
  const Matrix b2 = poly(m.coupling2, s);
  const int size = static_cast<int>(t.states.size());
  t.h = Matrix::Zero(size * d, size * d);
  for (int k = 0; k < size; ++k) {
    double energy = 0;
    for (int j = 0; j < modes; ++j) energy += t.states[k][j] * t.omega[j];
    t.h.block(k * d, k * d, d, d) = hat + energy * Matrix::Identity(d, d);
    for (int j = 0; j < modes; ++j) {
      std::vector<int> up = t.states[k];
      ++up[j];
      auto it = index.find(up);
      if (it == index.end()) continue;
      const double amp = g * weight[j] * std::sqrt(static_cast<double>(up[j]));
      t.h.block(it->second * d, k * d, d, d) += amp * b2;               // a*_j (x) G2
      t.h.block(k * d, it->second * d, d, d) += amp * b1.adjoint();     // a_j (x) G1^*
    }
  }
  return t;
}

// Eigenvalues sorted by (re, im).
inline std::vector<Complex> spectrum(const Matrix& h) {
  Eigen::ComplexEigenSolver<Matrix> es(h, false);
  std::vector<Complex> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return out;
}

inline Complex nearest(const std::vector<Complex>& spec, Complex z) {
  return *std::min_element(spec.begin(), spec.end(),
                           [&](Complex a, Complex b) { return std::abs(a - z) < std::abs(b - z); });
}

}  // namespace ref

#include "fsrg/linalg.hpp"

#include <cmath>

namespace fsrg {

namespace {

double sgn(double v) { return (v > 0) - (v < 0); }

// Slopes for one scalar series, same scheme as the classic PCHIP.
std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> d(n, 0.0);
  if (n == 2) {
    d[0] = d[1] = (y[1] - y[0]) / (x[1] - x[0]);
    return d;
  }
  std::vector<double> h(n - 1), del(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = x[k + 1] - x[k];
    del[k] = (y[k + 1] - y[k]) / h[k];
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (sgn(del[k - 1]) * sgn(del[k]) <= 0) continue;
    const double w1 = 2 * h[k] + h[k - 1];
    const double w2 = h[k] + 2 * h[k - 1];
    d[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
  }
  auto edge = [](double h0, double h1, double m0, double m1) {
    double e = ((2 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if (sgn(e) != sgn(m0))
      e = 0;
    else if (sgn(m0) != sgn(m1) && std::abs(e) > 3 * std::abs(m0))
      e = 3 * m0;
    return e;
  };
  d[0] = edge(h[0], h[1], del[0], del[1]);
  d[n - 1] = edge(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
  return d;
}

}  // namespace

Pchip::Pchip(std::vector<double> nodes, std::vector<Matrix> values)
    : x_(std::move(nodes)), y_(std::move(values)) {
  if (x_.size() < 2 || x_.size() != y_.size())
    throw DimensionError("pchip: need at least two nodes with matching values");
  for (std::size_t k = 1; k < x_.size(); ++k)
    if (!(x_[k] > x_[k - 1])) throw DimensionError("pchip: nodes must increase");
  const Index rows = y_[0].rows(), cols = y_[0].cols();
  slope_.assign(x_.size(), Matrix::Zero(rows, cols));
  std::vector<double> re(x_.size()), im(x_.size());
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) {
      for (std::size_t k = 0; k < x_.size(); ++k) {
        re[k] = y_[k](i, j).real();
        im[k] = y_[k](i, j).imag();
      }
      auto dr = pchip_slopes(x_, re);
      auto di = pchip_slopes(x_, im);
      for (std::size_t k = 0; k < x_.size(); ++k) slope_[k](i, j) = Complex(dr[k], di[k]);
    }
}

Index Pchip::locate(double x) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  Index k = static_cast<Index>(it - x_.begin()) - 1;
  return std::clamp<Index>(k, 0, static_cast<Index>(x_.size()) - 2);
}

Matrix Pchip::operator()(double x) const {
  const Index k = locate(x);
  const double h = x_[k + 1] - x_[k];
  const double t = (x - x_[k]) / h;
  const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
  const double h10 = t * (1 - t) * (1 - t);
  const double h01 = t * t * (3 - 2 * t);
  const double h11 = t * t * (t - 1);
  return h00 * y_[k] + h10 * h * slope_[k] + h01 * y_[k + 1] + h11 * h * slope_[k + 1];
}

Matrix Pchip::derivative(double x) const {
  const Index k = locate(x);
  const double h = x_[k + 1] - x_[k];
  const double t = (x - x_[k]) / h;
  const double d00 = 6 * t * t - 6 * t;
  const double d10 = 3 * t * t - 4 * t + 1;
  const double d01 = -6 * t * t + 6 * t;
  const double d11 = 3 * t * t - 2 * t;
  return (d00 / h) * y_[k] + d10 * slope_[k] + (d01 / h) * y_[k + 1] + d11 * slope_[k + 1];
}

}  // namespace fsrg

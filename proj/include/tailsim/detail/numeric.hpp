#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace tailsim::detail {

/// Monotonicity-preserving piecewise-cubic interpolant (Fritsch-Carlson
/// slope limiting). Built for nondecreasing data; eval stays nondecreasing,
/// so it can represent a tabulated CDF and be inverted safely.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;

  MonotoneCubic(std::vector<double> xs, std::vector<double> ys)
      : xs_(std::move(xs)), ys_(std::move(ys)) {
    const std::size_t n = xs_.size();
    if (n < 2 || ys_.size() != n) throw std::invalid_argument("MonotoneCubic: need >= 2 nodes");
    std::vector<double> h(n - 1), d(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      h[k] = xs_[k + 1] - xs_[k];
      if (!(h[k] > 0.0)) throw std::invalid_argument("MonotoneCubic: x not strictly increasing");
      d[k] = (ys_[k + 1] - ys_[k]) / h[k];
    }
    ms_.assign(n, 0.0);
    ms_[0] = d[0];
    ms_[n - 1] = d[n - 2];
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (d[k - 1] * d[k] <= 0.0) {
        ms_[k] = 0.0;
      } else {
        const double w1 = 2.0 * h[k] + h[k - 1];
        const double w2 = h[k] + 2.0 * h[k - 1];
        ms_[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
      }
    }
  }

  double x_min() const { return xs_.front(); }
  double x_max() const { return xs_.back(); }
  double y_min() const { return ys_.front(); }
  double y_max() const { return ys_.back(); }

  double eval(double x) const {
    const std::size_t k = segment(x);
    const double h = xs_[k + 1] - xs_[k];
    const double t = (x - xs_[k]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * ys_[k] + h * h10 * ms_[k] + h01 * ys_[k + 1] + h * h11 * ms_[k + 1];
  }

  double derivative(double x) const {
    const std::size_t k = segment(x);
    const double h = xs_[k + 1] - xs_[k];
    const double t = (x - xs_[k]) / h;
    const double t2 = t * t;
    const double d00 = (6 * t2 - 6 * t) / h;
    const double d10 = 3 * t2 - 4 * t + 1;
    const double d01 = (-6 * t2 + 6 * t) / h;
    const double d11 = 3 * t2 - 2 * t;
    return d00 * ys_[k] + d10 * ms_[k] + d01 * ys_[k + 1] + d11 * ms_[k + 1];
  }

  /// Inverse of the (nondecreasing) interpolant by bracketed bisection.
  double inverse(double y) const {
    if (y <= ys_.front()) return xs_.front();
    if (y >= ys_.back()) return xs_.back();
    auto it = std::upper_bound(ys_.begin(), ys_.end(), y);
    std::size_t k = static_cast<std::size_t>(it - ys_.begin());
    if (k == 0) k = 1;
    double lo = xs_[k - 1], hi = xs_[std::min(k, xs_.size() - 1)];
    for (int iter = 0; iter < 60; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (eval(mid) < y)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  }

 private:
  std::size_t segment(double x) const {
    if (x <= xs_.front()) return 0;
    if (x >= xs_.back()) return xs_.size() - 2;
    auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    return static_cast<std::size_t>(it - xs_.begin()) - 1;
  }

  std::vector<double> xs_, ys_, ms_;
};

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations. Dimensions
/// here are tiny (the number of basic variables), so simplicity wins.
inline std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  if (n == 0) return {};
  double scale = 0.0;
  for (const auto& row : a)
    for (double v : row) scale = std::max(scale, std::fabs(v));
  if (scale == 0.0) return std::vector<double>(n, 0.0);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30 * scale * scale) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::fabs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t k = 0; k < n; ++k) eig[k] = a[k][k];
  return eig;
}

/// Gaussian elimination with partial pivoting; throws on singular systems.
inline std::vector<double> solve_linear(std::vector<std::vector<double>> a,
                                        std::vector<double> b) {
  const std::size_t n = a.size();
  double scale = 0.0;
  for (const auto& row : a)
    for (double v : row) scale = std::max(scale, std::fabs(v));
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    if (std::fabs(a[piv][col]) < 1e-14 * std::max(scale, 1e-300))
      throw std::runtime_error("singular linear system");
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
    x[r] = s / a[r][r];
  }
  return x;
}

}  // namespace tailsim::detail

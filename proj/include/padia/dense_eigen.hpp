#pragma once

// Small dense symmetric eigensolvers used by the full-space reference.
//
// Two independent routes are provided:
//   * cyclic Jacobi rotations (full decomposition, O(n^3) per sweep);
//   * Householder tridiagonalization followed by implicit QL with Givens
//     rotations for the eigenvalues, and inverse iteration plus
//     back-transformation for the few eigenvectors that are requested.
// The second route is the default for the oracle because it is several
// times cheaper when only the two lowest eigenvectors are needed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "padia/error.hpp"

namespace padia {

/// Dense row-major square matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * n_, n_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }

  double frobenius_norm() const {
    double acc = 0.0;
    for (double x : data_) acc += x * x;
    return std::sqrt(acc);
  }

  bool is_symmetric(double tol = 0.0) const {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j)
        if (std::abs((*this)(i, j) - (*this)(j, i)) > tol) return false;
    return true;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Eigenvalues ascending; `vectors[k]` belongs to `values[k]`. Only the
/// leading `vectors.size()` eigenvectors may be present.
struct EigenDecomposition {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
};

/// Fixes the sign of an eigenvector so its largest-magnitude component is
/// positive. Ties go to the lowest index.
inline void canonicalize_sign(std::span<double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  if (!v.empty() && v[best] < 0.0)
    for (double& x : v) x = -x;
}

inline constexpr double kEigenRelativeTolerance = 1e-12;

/// Cyclic Jacobi. Converged when the off-diagonal Frobenius norm drops
/// below `rel_tol * ||A||_F`.
inline EigenDecomposition jacobi_eigen(DenseMatrix a, double rel_tol = kEigenRelativeTolerance,
                                       int max_sweeps = 100) {
  const std::size_t n = a.size();
  DenseMatrix v(n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;
  const double target = rel_tol * a.frobenius_norm();

  auto off_norm = [&a, n] {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) acc += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(acc);
  };

  int sweep = 0;
  while (off_norm() > target) {
    if (sweep++ == max_sweeps) {
      throw Error(ErrorCode::kConvergenceFailure,
                  "Jacobi did not converge in " + std::to_string(max_sweeps) + " sweeps");
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::hypot(t, 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&a](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  EigenDecomposition out;
  out.values.reserve(n);
  out.vectors.reserve(n);
  for (std::size_t k : order) {
    out.values.push_back(a(k, k));
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = v(i, k);
    canonicalize_sign(col);
    out.vectors.push_back(std::move(col));
  }
  return out;
}

namespace detail {

struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> sub;  // sub[k] = T(k+1, k)
  // Householder reflectors I - tau v v^T acting on indices k+1..n-1.
  std::vector<std::vector<double>> reflectors;
  std::vector<double> taus;
};

inline Tridiagonal householder_tridiagonalize(DenseMatrix a) {
  const std::size_t n = a.size();
  Tridiagonal t;
  t.diag.assign(n, 0.0);
  t.sub.assign(n > 0 ? n - 1 : 0, 0.0);
  std::vector<double> p(n), w(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t m = n - k - 1;
    std::vector<double> v(m);
    double xnorm2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      v[i] = a(k + 1 + i, k);
      xnorm2 += v[i] * v[i];
    }
    t.diag[k] = a(k, k);
    const double xnorm = std::sqrt(xnorm2);
    const double alpha = v[0] > 0.0 ? -xnorm : xnorm;
    v[0] -= alpha;
    const double vnorm2 = xnorm2 - 2.0 * alpha * (v[0] + alpha) + alpha * alpha;
    if (xnorm == 0.0 || vnorm2 == 0.0) {
      t.sub[k] = a(k + 1, k);
      t.reflectors.emplace_back();
      t.taus.push_back(0.0);
      continue;
    }
    const double tau = 2.0 / vnorm2;
    // p = tau * A_sub v
    double pv = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const auto r = a.row(k + 1 + i).subspan(k + 1, m);
      double acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) acc += r[j] * v[j];
      p[i] = tau * acc;
      pv += p[i] * v[i];
    }
    const double kappa = 0.5 * tau * pv;
    for (std::size_t i = 0; i < m; ++i) w[i] = p[i] - kappa * v[i];
    for (std::size_t i = 0; i < m; ++i) {
      auto r = a.row(k + 1 + i).subspan(k + 1, m);
      const double vi = v[i], wi = w[i];
      for (std::size_t j = 0; j < m; ++j) r[j] -= vi * w[j] + wi * v[j];
    }
    t.sub[k] = alpha;
    t.reflectors.push_back(std::move(v));
    t.taus.push_back(tau);
  }
  if (n >= 2) {
    t.diag[n - 2] = a(n - 2, n - 2);
    t.sub[n - 2] = a(n - 1, n - 2);
  }
  if (n >= 1) t.diag[n - 1] = a(n - 1, n - 1);
  return t;
}

// Implicit QL with Wilkinson-type shifts; eigenvalues only.
inline std::vector<double> tridiagonal_eigenvalues(std::vector<double> d, std::vector<double> e,
                                                   int max_iter_per_value = 50) {
  const std::size_t n = d.size();
  e.resize(n, 0.0);
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m = l;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == max_iter_per_value) {
          throw Error(ErrorCode::kConvergenceFailure,
                      "tridiagonal QL did not converge for eigenvalue " + std::to_string(l));
        }
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflow = false;
        for (std::size_t i = m; i-- > l;) {
          const double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  std::sort(d.begin(), d.end());
  return d;
}

// Inverse iteration on T - shift*I using Gaussian elimination with partial
// pivoting. A few iterations suffice when `shift` is an accurate eigenvalue.
inline std::vector<double> tridiagonal_inverse_iteration(const std::vector<double>& d,
                                                         const std::vector<double>& e,
                                                         double shift, int iterations = 3) {
  const std::size_t n = d.size();
  double tnorm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = std::abs(d[i]);
    if (i > 0) row += std::abs(e[i - 1]);
    if (i + 1 < n) row += std::abs(e[i]);
    tnorm = std::max(tnorm, row);
  }
  const double tiny = std::max(tnorm, 1.0) * std::numeric_limits<double>::epsilon();

  std::vector<double> u0(n), u1(n, 0.0), u2(n, 0.0), mult(n, 0.0);
  std::vector<char> swapped(n, 0);
  double cur0 = d[0] - shift;
  double cur1 = n > 1 ? e[0] : 0.0;
  double cur2 = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double r_sub = e[i];
    const double r_diag = d[i + 1] - shift;
    const double r_sup = i + 2 < n ? e[i + 1] : 0.0;
    if (std::abs(cur0) >= std::abs(r_sub)) {
      if (cur0 == 0.0) cur0 = tiny;
      const double m = r_sub / cur0;
      u0[i] = cur0;
      u1[i] = cur1;
      u2[i] = cur2;
      mult[i] = m;
      cur0 = r_diag - m * cur1;
      cur1 = r_sup - m * cur2;
    } else {
      const double m = cur0 / r_sub;
      u0[i] = r_sub;
      u1[i] = r_diag;
      u2[i] = r_sup;
      mult[i] = m;
      swapped[i] = 1;
      const double next0 = cur1 - m * r_diag;
      const double next1 = cur2 - m * r_sup;
      cur0 = next0;
      cur1 = next1;
    }
    cur2 = 0.0;
  }
  u0[n - 1] = cur0 == 0.0 ? tiny : cur0;

  std::vector<double> x(n, 1.0);
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (swapped[i]) std::swap(x[i], x[i + 1]);
      x[i + 1] -= mult[i] * x[i];
    }
    for (std::size_t i = n; i-- > 0;) {
      double acc = x[i];
      if (i + 1 < n) acc -= u1[i] * x[i + 1];
      if (i + 2 < n) acc -= u2[i] * x[i + 2];
      x[i] = acc / (u0[i] == 0.0 ? tiny : u0[i]);
    }
    double norm = 0.0;
    for (double xi : x) norm += xi * xi;
    norm = std::sqrt(norm);
    for (double& xi : x) xi /= norm;
  }
  return x;
}

}  // namespace detail

/// All eigenvalues plus the eigenvectors of the `vector_count` lowest ones.
inline EigenDecomposition tridiagonal_ql_eigen(const DenseMatrix& a, std::size_t vector_count) {
  const std::size_t n = a.size();
  EigenDecomposition out;
  if (n == 0) return out;
  detail::Tridiagonal t = detail::householder_tridiagonalize(a);
  out.values = detail::tridiagonal_eigenvalues(t.diag, t.sub);
  vector_count = std::min(vector_count, n);
  for (std::size_t k = 0; k < vector_count; ++k) {
    std::vector<double> x = detail::tridiagonal_inverse_iteration(t.diag, t.sub, out.values[k]);
    // x <- H_0 H_1 ... H_{n-3} x
    for (std::size_t r = t.reflectors.size(); r-- > 0;) {
      const auto& v = t.reflectors[r];
      if (v.empty()) continue;
      double dot = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * x[r + 1 + i];
      dot *= t.taus[r];
      for (std::size_t i = 0; i < v.size(); ++i) x[r + 1 + i] -= dot * v[i];
    }
    canonicalize_sign(x);
    out.vectors.push_back(std::move(x));
  }
  return out;
}

}  // namespace padia

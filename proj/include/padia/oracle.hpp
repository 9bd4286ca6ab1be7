#pragma once

// Brute-force reference in the full N-dimensional Hilbert space. The marked
// set is explicit, the Hamiltonian is a dense N x N matrix, and nothing
// here relies on the two-level reduction it is meant to certify.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "padia/dense_eigen.hpp"
#include "padia/dynamics.hpp"
#include "padia/instance.hpp"
#include "padia/spectrum.hpp"

namespace padia {

inline constexpr std::uint64_t kMaxDiagonalizationItems = 4096;
inline constexpr std::uint64_t kMaxCertifyItems = 1024;
inline constexpr std::uint64_t kMaxDynamicsItems = 512;

struct FullInstance {
  std::uint64_t n_items = 0;
  std::vector<std::uint64_t> marked_set;  // sorted, unique

  std::uint64_t n_marked() const noexcept { return marked_set.size(); }
  bool is_marked(std::uint64_t x) const {
    return std::binary_search(marked_set.begin(), marked_set.end(), x);
  }
  SearchInstance reduced() const { return make_instance(n_items, n_marked()); }
};

inline FullInstance make_full_instance(std::uint64_t n_items, std::vector<std::uint64_t> marked) {
  if (n_items < 2) {
    throw Error(ErrorCode::kInvalidItemCount, "need at least 2 items");
  }
  if (n_items > kMaxDiagonalizationItems) {
    throw Error(ErrorCode::kCapacityExceeded,
                "full-space reference is limited to N <= " +
                    std::to_string(kMaxDiagonalizationItems));
  }
  std::sort(marked.begin(), marked.end());
  marked.erase(std::unique(marked.begin(), marked.end()), marked.end());
  if (marked.empty()) {
    throw Error(ErrorCode::kNonEmptyMarkedSetRequired, "marked set must not be empty");
  }
  if (marked.back() >= n_items) {
    throw Error(ErrorCode::kInvalidArgument,
                "marked index " + std::to_string(marked.back()) + " out of range");
  }
  return FullInstance{n_items, std::move(marked)};
}

/// Marks the last `n_marked` items.
inline FullInstance make_full_instance(std::uint64_t n_items, std::uint64_t n_marked) {
  if (n_marked > n_items) {
    throw Error(ErrorCode::kTooManyMarked, "marked count exceeds item count");
  }
  std::vector<std::uint64_t> marked;
  for (std::uint64_t x = n_items - n_marked; x < n_items; ++x) marked.push_back(x);
  return make_full_instance(n_items, std::move(marked));
}

inline void check_capacity(const FullInstance& full, std::uint64_t cap, const char* what) {
  if (full.n_items > cap) {
    throw Error(ErrorCode::kCapacityExceeded, std::string(what) + " is limited to N <= " +
                                                  std::to_string(cap) + ", got " +
                                                  std::to_string(full.n_items));
  }
}

/// H(s)_{xy} = delta_{xy} - (1-s)/N - s [x in S][y in S] / M.
inline DenseMatrix full_hamiltonian(const FullInstance& full, double s) {
  check_schedule_parameter(s);
  check_capacity(full, kMaxDiagonalizationItems, "full_hamiltonian");
  const std::size_t n = full.n_items;
  const double uniform = (1.0 - s) / static_cast<double>(n);
  const double marked = s / static_cast<double>(full.n_marked());
  std::vector<char> mask(n, 0);
  for (auto x : full.marked_set) mask[x] = 1;
  DenseMatrix h(n);
  for (std::size_t x = 0; x < n; ++x) {
    auto row = h.row(x);
    for (std::size_t y = 0; y < n; ++y) {
      double v = (x == y ? 1.0 : 0.0) - uniform;
      if (mask[x] && mask[y]) v -= marked;
      row[y] = v;
    }
  }
  return h;
}

enum class EigenMethod { kTridiagonalQL, kJacobi };

struct DenseSpectrum {
  std::vector<double> eigenvalues;  // ascending
  std::vector<double> ground_vector;
  std::vector<double> first_excited_vector;
};

inline DenseSpectrum dense_spectrum(const FullInstance& full, double s,
                                    EigenMethod method = EigenMethod::kTridiagonalQL) {
  DenseMatrix h = full_hamiltonian(full, s);
  EigenDecomposition dec = method == EigenMethod::kJacobi ? jacobi_eigen(std::move(h))
                                                          : tridiagonal_ql_eigen(h, 2);
  DenseSpectrum out;
  out.eigenvalues = std::move(dec.values);
  out.ground_vector = std::move(dec.vectors[0]);
  out.first_excited_vector = std::move(dec.vectors[1]);
  return out;
}

/// |<Psi|v>|^2 with |Psi> the uniform superposition.
inline double overlap_uniform(const FullInstance& full, std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc * acc / static_cast<double>(full.n_items);
}

/// |<beta|v>|^2 with |beta> the uniform superposition of marked items.
inline double overlap_marked(const FullInstance& full, std::span<const double> v) {
  double acc = 0.0;
  for (auto x : full.marked_set) acc += v[x];
  return acc * acc / static_cast<double>(full.n_marked());
}

/// Norm of the part of `v` orthogonal to span{|alpha>, |beta>}.
inline double subspace_residual(const FullInstance& full, std::span<const double> v) {
  const std::size_t n = full.n_items;
  const double m = static_cast<double>(full.n_marked());
  const double unmarked = static_cast<double>(n) - m;
  double sum_marked = 0.0, sum_unmarked = 0.0;
  for (std::size_t x = 0; x < n; ++x) (full.is_marked(x) ? sum_marked : sum_unmarked) += v[x];
  // Projection onto the span replaces each entry by its group mean.
  const double mean_marked = sum_marked / m;
  const double mean_unmarked = unmarked > 0.0 ? sum_unmarked / unmarked : 0.0;
  double acc = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    const double r = v[x] - (full.is_marked(x) ? mean_marked : mean_unmarked);
    acc += r * r;
  }
  return std::sqrt(acc);
}

/// Worst absolute disagreement between the dense spectrum and the reduced
/// closed forms on E0, E1, gap, |<Psi|E0>|^2 and |<beta|E0>|^2.
inline double certify_reduction(const FullInstance& full, std::span<const double> s_grid,
                                EigenMethod method = EigenMethod::kTridiagonalQL) {
  const SearchInstance inst = full.reduced();
  double worst = 0.0;
  for (double s : s_grid) {
    const DenseSpectrum dense = dense_spectrum(full, s, method);
    const SpectralPoint p = spectral_point(inst, s);
    const double de0 = dense.eigenvalues[0];
    const double de1 = dense.eigenvalues[1];
    worst = std::max({worst, std::abs(de0 - p.e0), std::abs(de1 - p.e1),
                      std::abs((de1 - de0) - p.gap),
                      std::abs(overlap_uniform(full, dense.ground_vector) - p.ov_psi_0),
                      std::abs(overlap_marked(full, dense.ground_vector) - p.ov_beta_0)});
  }
  return worst;
}

inline std::vector<double> uniform_grid(std::size_t points) {
  if (points < 2) throw Error(ErrorCode::kInvalidArgument, "grid needs at least 2 points");
  std::vector<double> out(points);
  for (std::size_t i = 0; i < points; ++i) {
    out[i] = static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return out;
}

/// Runs the protocol in the full space starting from |Psi> and returns the
/// total probability of the marked items at the end of `schedule`.
inline double full_evolve(const FullInstance& full, const Schedule& schedule, std::size_t steps) {
  check_capacity(full, kMaxDynamicsItems, "full_evolve");
  if (steps < kMinSteps) {
    throw Error(ErrorCode::kInvalidArgument, "need at least " + std::to_string(kMinSteps) +
                                                 " steps");
  }
  const std::size_t n = full.n_items;
  // H(s) = H0 + s * D with H0 = H(0), D = H(1) - H(0).
  const DenseMatrix h0 = full_hamiltonian(full, 0.0);
  DenseMatrix d = full_hamiltonian(full, 1.0);
  for (std::size_t x = 0; x < n; ++x) {
    auto drow = d.row(x);
    const auto hrow = h0.row(x);
    for (std::size_t y = 0; y < n; ++y) drow[y] -= hrow[y];
  }
  auto apply = [&](double s, const std::vector<Amplitude>& in, std::vector<Amplitude>& out) {
    for (std::size_t x = 0; x < n; ++x) {
      const auto hrow = h0.row(x);
      const auto drow = d.row(x);
      double re0 = 0.0, im0 = 0.0, re1 = 0.0, im1 = 0.0;
      for (std::size_t y = 0; y < n; ++y) {
        re0 += hrow[y] * in[y].real();
        im0 += hrow[y] * in[y].imag();
        re1 += drow[y] * in[y].real();
        im1 += drow[y] * in[y].imag();
      }
      out[x] = Amplitude(re0 + s * re1, im0 + s * im1);
    }
  };
  std::vector<Amplitude> psi(n, Amplitude(1.0 / std::sqrt(static_cast<double>(n)), 0.0));
  rk4_integrate(psi, schedule, steps, apply);

  double norm2 = 0.0, marked = 0.0;
  for (std::size_t x = 0; x < n; ++x) norm2 += std::norm(psi[x]);
  for (auto x : full.marked_set) marked += std::norm(psi[x]);
  const double drift = std::abs(std::sqrt(norm2) - 1.0);
  if (drift > kMaxNormDrift) {
    throw Error(ErrorCode::kNormDriftExceeded,
                "full-space norm drift " + std::to_string(drift) + "; increase the step count");
  }
  return std::clamp(marked, 0.0, 1.0);
}

}  // namespace padia

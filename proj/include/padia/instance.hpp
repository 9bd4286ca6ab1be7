#pragma once

// Search instance, evolution window and the exact two-level reduction of
//   H(s) = (1 - s)(1 - |Psi><Psi|) + s(1 - |beta><beta|)
// onto span{|alpha>, |beta>}, where |alpha> and |beta> are the uniform
// superpositions of the unmarked and marked items.

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>

#include "padia/error.hpp"

namespace padia {

/// Unstructured search over N items with M marked ones.
///
/// `a` and `b` are the squared overlaps of the uniform superposition with
/// |alpha> and |beta>. They are always rebuilt from the exact integers.
struct SearchInstance {
  std::uint64_t n_items = 0;
  std::uint64_t n_marked = 0;
  double a = 0.0;  // (N - M) / N
  double b = 0.0;  // M / N

  bool all_marked() const noexcept { return n_marked == n_items; }
};

inline SearchInstance make_instance(std::uint64_t n_items, std::uint64_t n_marked) {
  if (n_items < 2) {
    throw Error(ErrorCode::kInvalidItemCount,
                "need at least 2 items, got " + std::to_string(n_items));
  }
  if (n_marked == 0) {
    throw Error(ErrorCode::kNonEmptyMarkedSetRequired, "marked set must not be empty");
  }
  if (n_marked > n_items) {
    throw Error(ErrorCode::kTooManyMarked, "marked count " + std::to_string(n_marked) +
                                               " exceeds item count " + std::to_string(n_items));
  }
  SearchInstance inst;
  inst.n_items = n_items;
  inst.n_marked = n_marked;
  const auto n = static_cast<double>(n_items);
  inst.a = static_cast<double>(n_items - n_marked) / n;
  inst.b = static_cast<double>(n_marked) / n;
  return inst;
}

/// The interval [s_minus, s_plus] swept adiabatically, centred on the gap
/// minimum at s = 1/2 with half-width 1/(2 sqrt N).
struct EvolutionWindow {
  double s_minus = 0.0;
  double s_plus = 0.0;
  double omega = 0.0;
};

inline EvolutionWindow evolution_window(const SearchInstance& inst) {
  const double half_width = 0.5 / std::sqrt(static_cast<double>(inst.n_items));
  EvolutionWindow w;
  w.s_minus = 0.5 - half_width;
  w.s_plus = 0.5 + half_width;
  w.omega = 2.0 * half_width;
  return w;
}

inline void check_schedule_parameter(double s) {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw Error(ErrorCode::kDomain, "s must lie in [0, 1], got " + std::to_string(s));
  }
}

/// H(s) restricted to the ordered basis (|alpha>, |beta>).
struct ReducedHamiltonian {
  double s = 0.0;
  double h_aa = 0.0;
  double h_ab = 0.0;
  double h_bb = 0.0;

  double trace() const noexcept { return h_aa + h_bb; }
  double determinant() const noexcept { return h_aa * h_bb - h_ab * h_ab; }
};

inline ReducedHamiltonian reduced_hamiltonian(const SearchInstance& inst, double s) {
  check_schedule_parameter(s);
  const double w = 1.0 - s;
  ReducedHamiltonian h;
  h.s = s;
  h.h_aa = 1.0 - w * inst.a;
  h.h_ab = -w * std::sqrt(inst.a * inst.b);
  h.h_bb = w * inst.a;  // 1 - (1-s)B - s, without the cancellation
  return h;
}

using Amplitude = std::complex<double>;

inline constexpr double kDefaultNormTolerance = 1e-9;

/// Two complex amplitudes on |alpha> and |beta>.
struct ReducedState {
  Amplitude amp_alpha{};
  Amplitude amp_beta{};

  double norm_squared() const noexcept {
    return std::norm(amp_alpha) + std::norm(amp_beta);
  }
  bool is_normalized(double tol = kDefaultNormTolerance) const noexcept {
    return std::abs(std::sqrt(norm_squared()) - 1.0) <= tol;
  }
};

/// The uniform superposition sqrt(A)|alpha> + sqrt(B)|beta>.
inline ReducedState initial_state(const SearchInstance& inst) {
  return ReducedState{Amplitude(std::sqrt(inst.a), 0.0), Amplitude(std::sqrt(inst.b), 0.0)};
}

}  // namespace padia

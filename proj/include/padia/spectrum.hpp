#pragma once

// Closed-form spectrum of the two-level reduction: eigenvalues, gap,
// eigenvectors, the squared overlaps that set the one-round success
// probability, and a numerical audit of the lower-bound chain P > 1/24.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "padia/instance.hpp"

namespace padia {

/// Tolerance for algebraic identities (trace, determinant, normalization).
inline constexpr double kIdentityTolerance = 1e-12;
/// Tolerance for secular-equation residuals and formula/eigenvector agreement.
inline constexpr double kSecularTolerance = 1e-11;
/// Relative slack on the non-strict link 4M/(1+sqrt M)^2 of the bound chain,
/// which holds with equality when every item is marked.
inline constexpr double kNonStrictLinkSlack = 1e-12;

enum class Level : int { kGround = 0, kExcited = 1 };

struct LevelPair {
  double e0 = 0.0;
  double e1 = 0.0;
};

struct Components {
  double c_alpha = 0.0;
  double c_beta = 0.0;
};

struct MinGap {
  double g_min = 0.0;
  double s_star = 0.0;
};

struct SpectralPoint {
  double s = 0.0;
  double e0 = 0.0;
  double e1 = 0.0;
  double gap = 0.0;
  double ov_psi_0 = 0.0;   // |<Psi|E(0,s)>|^2
  double ov_beta_0 = 0.0;  // |<beta|E(0,s)>|^2
};

/// g(s) = sqrt((1-2s)^2 + 4s(1-s)B).
///
/// This equals sqrt(1 - 4s(1-s)A) but does not cancel when B is tiny and
/// s is close to 1/2.
inline double gap(const SearchInstance& inst, double s) {
  check_schedule_parameter(s);
  const double d = 1.0 - 2.0 * s;
  return std::sqrt(d * d + 4.0 * s * (1.0 - s) * inst.b);
}

/// Roots of E^2 - E + s(1-s)A = 0. The lower root is taken from the product
/// of the roots so it keeps full relative precision near s = 0 and s = 1.
inline LevelPair eigenvalues(const SearchInstance& inst, double s) {
  const double g = gap(inst, s);
  const double e1 = 0.5 * (1.0 + g);
  return LevelPair{s * (1.0 - s) * inst.a / e1, e1};
}

inline MinGap min_gap(const SearchInstance& inst) {
  return MinGap{std::sqrt(inst.b), 0.5};
}

/// Verification mode for min_gap: evaluates the gap on `points` uniformly
/// spaced values of s in [0, 1] and returns the smallest one found.
inline MinGap scan_min_gap(const SearchInstance& inst, std::size_t points) {
  if (points < 2) throw Error(ErrorCode::kInvalidArgument, "scan needs at least 2 points");
  MinGap best{gap(inst, 0.0), 0.0};
  for (std::size_t i = 1; i < points; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(points - 1);
    const double g = gap(inst, s);
    if (g < best.g_min) best = MinGap{g, s};
  }
  return best;
}

namespace detail {

// 1 - E(k,s) and 1 - s - E(k,s), each evaluated in a form free of
// subtractive cancellation.
struct Denominators {
  double one_minus_e = 0.0;
  double one_minus_s_minus_e = 0.0;
};

inline Denominators denominators(const SearchInstance& inst, double s, Level k) {
  const double g = gap(inst, s);
  const LevelPair e = eigenvalues(inst, s);
  const double d = 1.0 - 2.0 * s;
  const double q = 2.0 * s * (1.0 - s) * inst.b;
  Denominators out;
  if (k == Level::kGround) {
    out.one_minus_e = e.e1;
    out.one_minus_s_minus_e = d >= 0.0 ? 0.5 * (d + g) : q / (g - d);
  } else {
    out.one_minus_e = e.e0;
    out.one_minus_s_minus_e = d <= 0.0 ? 0.5 * (d - g) : -q / (d + g);
  }
  return out;
}

inline bool vanishes(double x) { return std::abs(x) < 1e-300; }

inline Components normalize_with_convention(double ca, double cb, Level k) {
  const double norm = std::hypot(ca, cb);
  ca /= norm;
  cb /= norm;
  // ground: c_beta >= 0; excited: c_alpha >= 0
  const bool flip = k == Level::kGround ? (cb < 0.0 || (cb == 0.0 && ca < 0.0))
                                        : (ca < 0.0 || (ca == 0.0 && cb < 0.0));
  if (flip) {
    ca = -ca;
    cb = -cb;
  }
  return Components{ca + 0.0, cb + 0.0};
}

// Formula route is unusable when a denominator vanishes, when A = 0 or at s = 1.
inline bool formula_degenerate(const SearchInstance& inst, double s, const Denominators& den) {
  return inst.a == 0.0 || s == 1.0 || vanishes(den.one_minus_e) ||
         vanishes(den.one_minus_s_minus_e);
}

}  // namespace detail

/// Eigenvector of the 2x2 reduced Hamiltonian computed directly from
/// (H - E)v = 0, without the closed-form component ratios.
inline Components eigenvector_components_direct(const SearchInstance& inst, double s, Level k) {
  const ReducedHamiltonian h = reduced_hamiltonian(inst, s);
  const LevelPair e = eigenvalues(inst, s);
  const double lambda = k == Level::kGround ? e.e0 : e.e1;
  // Two null-vector candidates; keep the better conditioned one.
  const double u_a = h.h_ab, u_b = lambda - h.h_aa;
  const double v_a = lambda - h.h_bb, v_b = h.h_ab;
  if (std::hypot(u_a, u_b) >= std::hypot(v_a, v_b)) {
    return detail::normalize_with_convention(u_a, u_b, k);
  }
  return detail::normalize_with_convention(v_a, v_b, k);
}

/// Components <alpha|E(k,s)> and <beta|E(k,s)> from the ratios
///   <alpha|E> ~ sqrt(A) / (1 - E),   <beta|E> ~ sqrt(B) / (1 - s - E),
/// falling back to the direct 2x2 solve whenever those ratios are undefined.
inline Components eigenvector_components(const SearchInstance& inst, double s, Level k) {
  check_schedule_parameter(s);
  const detail::Denominators den = detail::denominators(inst, s, k);
  if (detail::formula_degenerate(inst, s, den)) {
    return eigenvector_components_direct(inst, s, k);
  }
  // Both ratios multiplied through by (1-E)(1-s-E).
  return detail::normalize_with_convention(std::sqrt(inst.a) * den.one_minus_s_minus_e,
                                           std::sqrt(inst.b) * den.one_minus_e, k);
}

/// |<Psi|E(k,s)>|^2 = 1 / [(1-s)^2 (A/(1-E)^2 + B/(1-s-E)^2)].
inline double overlap_psi(const SearchInstance& inst, double s, Level k) {
  check_schedule_parameter(s);
  const detail::Denominators den = detail::denominators(inst, s, k);
  if (detail::formula_degenerate(inst, s, den)) {
    const Components c = eigenvector_components_direct(inst, s, k);
    const double amp = c.c_alpha * std::sqrt(inst.a) + c.c_beta * std::sqrt(inst.b);
    return amp * amp;
  }
  const double da2 = den.one_minus_e * den.one_minus_e;
  const double db2 = den.one_minus_s_minus_e * den.one_minus_s_minus_e;
  const double w = 1.0 - s;
  return std::min(1.0, da2 * db2 / (w * w * (inst.a * db2 + inst.b * da2)));
}

/// |<beta|E(k,s)>|^2 = B / [((1-s-E)/(1-E))^2 A + B].
inline double overlap_beta(const SearchInstance& inst, double s, Level k) {
  check_schedule_parameter(s);
  const detail::Denominators den = detail::denominators(inst, s, k);
  if (inst.a == 0.0 || s == 1.0 || detail::vanishes(den.one_minus_e)) {
    const double cb = eigenvector_components_direct(inst, s, k).c_beta;
    return cb * cb;
  }
  const double ratio = den.one_minus_s_minus_e / den.one_minus_e;
  return inst.b / (ratio * ratio * inst.a + inst.b);
}

inline SpectralPoint spectral_point(const SearchInstance& inst, double s) {
  const LevelPair e = eigenvalues(inst, s);
  SpectralPoint p;
  p.s = s;
  p.e0 = e.e0;
  p.e1 = e.e1;
  p.gap = gap(inst, s);
  p.ov_psi_0 = overlap_psi(inst, s, Level::kGround);
  p.ov_beta_0 = overlap_beta(inst, s, Level::kGround);
  return p;
}

/// P = |<Psi|E(0,s-)>|^2 * |<beta|E(0,s+)>|^2.
inline double adiabatic_success_probability(const SearchInstance& inst) {
  const EvolutionWindow w = evolution_window(inst);
  return overlap_psi(inst, w.s_minus, Level::kGround) *
         overlap_beta(inst, w.s_plus, Level::kGround);
}

/// T' = omega / g_min^2, i.e. sqrt(N)/M in dimensionless time.
inline double one_round_time(const SearchInstance& inst) {
  const double g = min_gap(inst).g_min;
  return evolution_window(inst).omega / (g * g);
}

inline double expected_total_time(const SearchInstance& inst) {
  return one_round_time(inst) / adiabatic_success_probability(inst);
}

/// One link of the inequality chain: `lhs < rhs` (or `<=` when not strict).
struct BoundLink {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool strict = true;
  bool holds = false;
};

/// Every quantity in the chain that ends in P > 1/24, evaluated for one
/// instance.
struct BoundReport {
  double ov_psi_at_s_minus = 0.0;
  double ov_beta_at_s_plus = 0.0;
  double p_one_round = 0.0;
  double lhs_23 = 0.0;  // (1 - s-)^2  < 1
  double lhs_24 = 0.0;  // A / (1 - E(0,s-))^2  < 4
  double lhs_25_26 = 0.0;  // B / (1 - s- - E(0,s-))^2  <= 4M/(1+sqrt M)^2 < 4
  double marked_ratio_bound = 0.0;  // 4M / (1 + sqrt M)^2
  double ratio_27 = 0.0;  // (1 - s+ - E(0,s+)) / (1 - E(0,s+))  < ratio_excess
  double ratio_excess = 0.0;  // -1/sqrt N + sqrt((M+1)/N - M/N^2)  < sqrt(2B)
  double beta_floor = 0.0;  // 1 / (2A + 1)  > 1/3
  std::vector<BoundLink> links;
  bool all_bounds_hold = false;
};

inline BoundReport bound_report(const SearchInstance& inst) {
  const EvolutionWindow w = evolution_window(inst);
  const double n = static_cast<double>(inst.n_items);
  const double m = static_cast<double>(inst.n_marked);
  const detail::Denominators lo = detail::denominators(inst, w.s_minus, Level::kGround);
  const detail::Denominators hi = detail::denominators(inst, w.s_plus, Level::kGround);

  BoundReport r;
  r.ov_psi_at_s_minus = overlap_psi(inst, w.s_minus, Level::kGround);
  r.ov_beta_at_s_plus = overlap_beta(inst, w.s_plus, Level::kGround);
  r.p_one_round = r.ov_psi_at_s_minus * r.ov_beta_at_s_plus;

  const double one_minus_s = 1.0 - w.s_minus;
  r.lhs_23 = one_minus_s * one_minus_s;
  r.lhs_24 = inst.a / (lo.one_minus_e * lo.one_minus_e);
  r.lhs_25_26 = inst.b / (lo.one_minus_s_minus_e * lo.one_minus_s_minus_e);
  const double sqrt_m = std::sqrt(m);
  r.marked_ratio_bound = 4.0 * m / ((1.0 + sqrt_m) * (1.0 + sqrt_m));
  r.ratio_27 = hi.one_minus_s_minus_e / hi.one_minus_e;
  r.ratio_excess = -1.0 / std::sqrt(n) + std::sqrt((m + 1.0) / n - m / (n * n));
  r.beta_floor = 1.0 / (2.0 * inst.a + 1.0);

  auto add = [&r](std::string name, double lhs, double rhs, bool strict) {
    const bool holds = strict ? lhs < rhs : lhs <= rhs * (1.0 + kNonStrictLinkSlack);
    r.links.push_back(BoundLink{std::move(name), lhs, rhs, strict, holds});
  };
  add("(1-s-)^2 < 1", r.lhs_23, 1.0, true);
  add("A/(1-E0(s-))^2 < 4", r.lhs_24, 4.0, true);
  add("B/(1-s- -E0(s-))^2 <= 4M/(1+sqrt M)^2", r.lhs_25_26, r.marked_ratio_bound, false);
  add("4M/(1+sqrt M)^2 < 4", r.marked_ratio_bound, 4.0, true);
  add("|<Psi|E0(s-)>|^2 > 1/8", 0.125, r.ov_psi_at_s_minus, true);
  add("ratio(s+) < -1/sqrt N + sqrt((M+1)/N - M/N^2)", r.ratio_27, r.ratio_excess, true);
  add("-1/sqrt N + sqrt((M+1)/N - M/N^2) < sqrt(2B)", r.ratio_excess, std::sqrt(2.0 * inst.b),
      true);
  // Equality when A = 0: the ratio term drops out and both sides are 1.
  add("|<beta|E0(s+)>|^2 > 1/(2A+1)", r.beta_floor, r.ov_beta_at_s_plus, inst.a > 0.0);
  add("1/(2A+1) > 1/3", 1.0 / 3.0, r.beta_floor, true);
  add("|<beta|E0(s+)>|^2 > 1/3", 1.0 / 3.0, r.ov_beta_at_s_plus, true);
  add("P > 1/24", 1.0 / 24.0, r.p_one_round, true);

  r.all_bounds_hold =
      std::all_of(r.links.begin(), r.links.end(), [](const BoundLink& l) { return l.holds; });
  return r;
}

}  // namespace padia

#pragma once

// Time evolution of the search protocol: prepare |Psi>, switch suddenly to
// H(s-), sweep s linearly to s+ over c * T', measure. Baseline schedules
// (global linear, local adiabatic) run over the full interval [0, 1].

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "padia/instance.hpp"
#include "padia/spectrum.hpp"

namespace padia {

inline constexpr double kMaxNormDrift = 1e-6;
inline constexpr std::size_t kMinSteps = 10;
inline constexpr std::size_t kMinLocalKnots = 100;
inline constexpr std::size_t kDefaultLocalKnots = 10000;

enum class ScheduleKind { kPartial, kGlobalLinear, kLocalAdiabatic };

constexpr std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::kPartial: return "partial";
    case ScheduleKind::kGlobalLinear: return "global";
    case ScheduleKind::kLocalAdiabatic: return "local";
  }
  return "unknown";
}

/// Monotone map t in [0, total_time] -> s in [0, 1]. Either linear between
/// two endpoints or piecewise linear through tabulated knots.
class Schedule {
 public:
  static Schedule linear(ScheduleKind kind, double total_time, double s_start, double s_end) {
    if (!(total_time > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "schedule duration must be positive");
    }
    check_schedule_parameter(s_start);
    check_schedule_parameter(s_end);
    Schedule out;
    out.kind_ = kind;
    out.total_time_ = total_time;
    out.times_ = {0.0, total_time};
    out.values_ = {s_start, s_end};
    return out;
  }

  /// Knots must start at t = 0 and be strictly increasing in t.
  static Schedule tabulated(ScheduleKind kind, std::vector<double> times,
                            std::vector<double> values) {
    if (times.size() < 2 || times.size() != values.size() || times.front() != 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "tabulated schedule needs matching knots from t=0");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
      if (!(times[i] > times[i - 1])) {
        throw Error(ErrorCode::kInvalidArgument, "schedule knots must increase in time");
      }
    }
    for (double s : values) check_schedule_parameter(s);
    Schedule out;
    out.kind_ = kind;
    out.total_time_ = times.back();
    out.times_ = std::move(times);
    out.values_ = std::move(values);
    return out;
  }

  ScheduleKind kind() const noexcept { return kind_; }
  double total_time() const noexcept { return total_time_; }
  double s_start() const noexcept { return values_.front(); }
  double s_end() const noexcept { return values_.back(); }
  std::size_t knot_count() const noexcept { return times_.size(); }

  double sample(double t) const {
    if (t <= 0.0) return values_.front();
    if (t >= total_time_) return values_.back();
    if (times_.size() == 2) {
      return values_[0] + (values_[1] - values_[0]) * (t / total_time_);
    }
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const auto hi = static_cast<std::size_t>(it - times_.begin());
    const std::size_t lo = hi - 1;
    const double frac = (t - times_[lo]) / (times_[hi] - times_[lo]);
    return values_[lo] + (values_[hi] - values_[lo]) * frac;
  }

  /// The same path traversed backwards: s'(t) = s(T - t).
  Schedule reversed() const {
    Schedule out = *this;
    const std::size_t n = times_.size();
    for (std::size_t i = 0; i < n; ++i) {
      out.times_[i] = total_time_ - times_[n - 1 - i];
      out.values_[i] = values_[n - 1 - i];
    }
    out.times_.front() = 0.0;
    out.times_.back() = total_time_;
    return out;
  }

 private:
  Schedule() = default;

  ScheduleKind kind_ = ScheduleKind::kPartial;
  double total_time_ = 0.0;
  std::vector<double> times_;
  std::vector<double> values_;
};

/// Sweep of [s-, s+] over c * T' = c * sqrt(N) / M.
inline Schedule make_partial_schedule(const SearchInstance& inst, double time_multiplier) {
  if (!(time_multiplier > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "time multiplier must be positive");
  }
  const EvolutionWindow w = evolution_window(inst);
  return Schedule::linear(ScheduleKind::kPartial, time_multiplier * one_round_time(inst),
                          w.s_minus, w.s_plus);
}

/// Linear sweep of [0, 1] over c / g_min^2 = c * N / M.
inline Schedule make_global_schedule(const SearchInstance& inst, double time_multiplier) {
  if (!(time_multiplier > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "time multiplier must be positive");
  }
  const double g = min_gap(inst).g_min;
  return Schedule::linear(ScheduleKind::kGlobalLinear, time_multiplier / (g * g), 0.0, 1.0);
}

/// Local adiabatic baseline: ds/dt = epsilon * g(s)^2 from s = 0 to s = 1,
/// tabulated on `knots` uniform intervals in s. The elapsed time over each
/// interval is the composite Simpson integral of 1 / (epsilon g^2).
inline Schedule make_local_schedule(const SearchInstance& inst, double epsilon,
                                    std::size_t knots = kDefaultLocalKnots) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::kInvalidArgument, "epsilon must be positive");
  if (knots < kMinLocalKnots) {
    throw Error(ErrorCode::kInvalidArgument,
                "local schedule needs at least " + std::to_string(kMinLocalKnots) + " knots");
  }
  auto rate = [&](double s) {
    const double g = gap(inst, s);
    return 1.0 / (epsilon * g * g);
  };
  constexpr int kSimpsonPanels = 8;
  std::vector<double> times(knots + 1, 0.0), values(knots + 1, 0.0);
  for (std::size_t i = 1; i <= knots; ++i) {
    const double s0 = static_cast<double>(i - 1) / static_cast<double>(knots);
    const double s1 = static_cast<double>(i) / static_cast<double>(knots);
    const double h = (s1 - s0) / kSimpsonPanels;
    double acc = rate(s0) + rate(s1);
    for (int j = 1; j < kSimpsonPanels; ++j) acc += (j % 2 == 1 ? 4.0 : 2.0) * rate(s0 + j * h);
    times[i] = times[i - 1] + acc * h / 3.0;
    values[i] = s1;
  }
  values.back() = 1.0;
  return Schedule::tabulated(ScheduleKind::kLocalAdiabatic, std::move(times), std::move(values));
}

/// max(10^3, ceil(10^3 * T * max_s ||H(s)||)) for the reduced model.
inline std::size_t default_step_count(const SearchInstance& inst, const Schedule& schedule) {
  // e1(s) peaks at an endpoint of any interval since the gap is smallest at 1/2.
  const double norm = std::max(eigenvalues(inst, schedule.s_start()).e1,
                               eigenvalues(inst, schedule.s_end()).e1);
  const double steps = std::ceil(1000.0 * schedule.total_time() * norm);
  return std::max<std::size_t>(1000, static_cast<std::size_t>(steps));
}

/// Classical fixed-step fourth-order Runge-Kutta for i dpsi/dt = H(s(t)) psi.
///
/// `apply(s, in, out)` must write H(s) * in into out. The same routine
/// drives both the reduced model and the full-space reference, so equal
/// step counts give directly comparable trajectories.
template <class State, class ApplyHamiltonian>
void rk4_integrate(State& psi, const Schedule& schedule, std::size_t steps,
                   ApplyHamiltonian&& apply) {
  using C = std::complex<double>;
  const std::size_t n = psi.size();
  State k1 = psi, k2 = psi, k3 = psi, k4 = psi, tmp = psi;
  const double total = schedule.total_time();
  const double h = total / static_cast<double>(steps);
  const C minus_i(0.0, -1.0);

  auto derivative = [&](double s, const State& in, State& out) {
    apply(s, in, out);
    for (std::size_t i = 0; i < n; ++i) out[i] *= minus_i;
  };

  for (std::size_t j = 0; j < steps; ++j) {
    const double t0 = total * static_cast<double>(j) / static_cast<double>(steps);
    const double t1 = total * static_cast<double>(j + 1) / static_cast<double>(steps);
    const double s0 = schedule.sample(t0);
    const double sm = schedule.sample(0.5 * (t0 + t1));
    const double s1 = schedule.sample(t1);

    derivative(s0, psi, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = psi[i] + (0.5 * h) * k1[i];
    derivative(sm, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = psi[i] + (0.5 * h) * k2[i];
    derivative(sm, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = psi[i] + h * k3[i];
    derivative(s1, tmp, k4);
    for (std::size_t i = 0; i < n; ++i) {
      psi[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
  }
}

struct RoundOutcome {
  ReducedState final_state;
  double success_probability = 0.0;    // |<beta|psi(T)>|^2, what a measurement sees
  double ground_fidelity = 0.0;        // |<E(0,s_end)|psi(T)>|^2
  double ground_branch_success = 0.0;  // ground_fidelity * |<beta|E(0,s_end)>|^2
  double norm_drift = 0.0;
};

/// Populations |<E(k,s)|psi>|^2 of the two reduced eigenstates.
inline std::array<double, 2> eigen_populations(const SearchInstance& inst, double s,
                                               const ReducedState& state) {
  std::array<double, 2> out{};
  for (int k = 0; k < 2; ++k) {
    const Components c = eigenvector_components(inst, s, static_cast<Level>(k));
    out[static_cast<std::size_t>(k)] =
        std::norm(c.c_alpha * state.amp_alpha + c.c_beta * state.amp_beta);
  }
  return out;
}

inline RoundOutcome evolve(const SearchInstance& inst, const Schedule& schedule,
                           std::size_t steps, const ReducedState& initial) {
  if (steps < kMinSteps) {
    throw Error(ErrorCode::kInvalidArgument,
                "need at least " + std::to_string(kMinSteps) + " steps, got " +
                    std::to_string(steps));
  }
  if (!initial.is_normalized()) {
    throw Error(ErrorCode::kInvalidArgument, "initial state is not normalized");
  }
  const double sqrt_ab = std::sqrt(inst.a * inst.b);
  auto apply = [&inst, sqrt_ab](double s, const std::array<Amplitude, 2>& in,
                                std::array<Amplitude, 2>& out) {
    const double w = 1.0 - s;
    const double h_aa = 1.0 - w * inst.a;
    const double h_ab = -w * sqrt_ab;
    const double h_bb = 1.0 - w * inst.b - s;
    out[0] = h_aa * in[0] + h_ab * in[1];
    out[1] = h_ab * in[0] + h_bb * in[1];
  };
  std::array<Amplitude, 2> psi{initial.amp_alpha, initial.amp_beta};
  rk4_integrate(psi, schedule, steps, apply);

  RoundOutcome out;
  out.final_state = ReducedState{psi[0], psi[1]};
  out.norm_drift = std::abs(std::sqrt(out.final_state.norm_squared()) - 1.0);
  if (out.norm_drift > kMaxNormDrift) {
    throw Error(ErrorCode::kNormDriftExceeded,
                "norm drift " + std::to_string(out.norm_drift) + " after " +
                    std::to_string(steps) + " steps; increase the step count");
  }
  const double s_end = schedule.s_end();
  out.success_probability = std::clamp(std::norm(psi[1]), 0.0, 1.0);
  out.ground_fidelity =
      std::clamp(eigen_populations(inst, s_end, out.final_state)[0], 0.0, 1.0);
  out.ground_branch_success = out.ground_fidelity * overlap_beta(inst, s_end, Level::kGround);
  return out;
}

/// One full round of the protocol. `steps == 0` selects the default count.
inline RoundOutcome run_round(const SearchInstance& inst, double time_multiplier,
                              std::size_t steps = 0) {
  const Schedule schedule = make_partial_schedule(inst, time_multiplier);
  if (steps == 0) steps = default_step_count(inst, schedule);
  return evolve(inst, schedule, steps, initial_state(inst));
}

struct RepeatStats {
  std::uint64_t rounds_used = 0;
  double total_evolution_time = 0.0;
  bool succeeded = false;

  bool operator==(const RepeatStats&) const = default;
};

/// Uniform double in [0, 1) from the top 53 bits of one engine draw; fixed
/// across standard library implementations, unlike std distributions.
inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Bernoulli rounds with success probability `p` until the first success
/// or until `max_rounds` rounds are spent.
inline RepeatStats repeat_until_success(double p, double round_time, std::uint64_t seed,
                                        std::uint64_t max_rounds) {
  if (max_rounds < 1) throw Error(ErrorCode::kInvalidArgument, "max_rounds must be at least 1");
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "success probability must lie in [0, 1]");
  }
  std::mt19937_64 rng(seed);
  RepeatStats out;
  while (out.rounds_used < max_rounds) {
    ++out.rounds_used;
    if (uniform_unit(rng) < p) {
      out.succeeded = true;
      break;
    }
  }
  out.total_evolution_time = static_cast<double>(out.rounds_used) * round_time;
  return out;
}

inline RepeatStats simulate_until_success(const SearchInstance& inst, double time_multiplier,
                                          std::size_t steps, std::uint64_t seed,
                                          std::uint64_t max_rounds) {
  const Schedule schedule = make_partial_schedule(inst, time_multiplier);
  if (steps == 0) steps = default_step_count(inst, schedule);
  const RoundOutcome round = evolve(inst, schedule, steps, initial_state(inst));
  return repeat_until_success(round.success_probability, schedule.total_time(), seed, max_rounds);
}

}  // namespace padia

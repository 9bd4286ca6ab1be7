#pragma once

// Sweeps over (N, M) grids, power-law fits, and the CSV / JSON record
// formats emitted by the command-line tool.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <istream>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "padia/dynamics.hpp"
#include "padia/instance.hpp"
#include "padia/spectrum.hpp"

namespace padia {

// ---------------------------------------------------------------------------
// Fitting

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::string axis;
};

/// Ordinary least squares of log(y) on log(x).
inline FitResult fit_loglog(std::span<const double> xs, std::span<const double> ys,
                            std::string axis = {}) {
  if (xs.size() != ys.size()) {
    throw Error(ErrorCode::kInvalidArgument, "fit needs equally many x and y values");
  }
  if (xs.size() < 3) throw Error(ErrorCode::kInvalidArgument, "fit needs at least 3 points");
  const auto n = static_cast<double>(xs.size());
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "log-log fit needs positive data");
    }
    lx.push_back(std::log(xs[i]));
    ly.push_back(std::log(ys[i]));
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorCode::kDegenerateFit, "all x values are equal");
  FitResult fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy == 0.0 ? 1.0 : std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  fit.axis = std::move(axis);
  return fit;
}

// ---------------------------------------------------------------------------
// Grids

enum class MarkedRule { kOne, kSqrt, kHalf, kFull, kEvery, kDivisors };

inline MarkedRule parse_marked_rule(std::string_view name) {
  if (name == "one") return MarkedRule::kOne;
  if (name == "sqrt") return MarkedRule::kSqrt;
  if (name == "half") return MarkedRule::kHalf;
  if (name == "full") return MarkedRule::kFull;
  if (name == "every") return MarkedRule::kEvery;
  if (name == "all-divisors") return MarkedRule::kDivisors;
  throw Error(ErrorCode::kInvalidArgument, "unknown marked-count rule '" + std::string(name) +
                                               "' (one|sqrt|half|full|every|all-divisors)");
}

inline std::uint64_t isqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

/// Marked counts for one N under a rule; always within [1, N].
inline std::vector<std::uint64_t> marked_counts(std::uint64_t n, MarkedRule rule) {
  std::vector<std::uint64_t> out;
  switch (rule) {
    case MarkedRule::kOne: out = {1}; break;
    case MarkedRule::kSqrt: out = {std::max<std::uint64_t>(1, isqrt(n))}; break;
    case MarkedRule::kHalf: out = {std::max<std::uint64_t>(1, n / 2)}; break;
    case MarkedRule::kFull: out = {n}; break;
    case MarkedRule::kEvery:
      for (std::uint64_t m = 1; m <= n; ++m) out.push_back(m);
      break;
    case MarkedRule::kDivisors:
      for (std::uint64_t d = 1; d * d <= n; ++d) {
        if (n % d == 0) {
          out.push_back(d);
          if (d != n / d) out.push_back(n / d);
        }
      }
      std::sort(out.begin(), out.end());
      break;
  }
  return out;
}

/// Powers of two 2^lo, 2^(lo+step), ..., up to 2^hi.
inline std::vector<std::uint64_t> power_of_two_grid(int lo, int hi, int step = 1) {
  if (lo < 0 || hi > 62 || lo > hi || step < 1) {
    throw Error(ErrorCode::kInvalidArgument, "power-of-two grid needs 0 <= lo <= hi <= 62");
  }
  std::vector<std::uint64_t> out;
  for (int k = lo; k <= hi; k += step) out.push_back(std::uint64_t{1} << k);
  return out;
}

using GridPoint = std::pair<std::uint64_t, std::uint64_t>;

inline std::vector<GridPoint> make_grid(std::span<const std::uint64_t> ns,
                                        std::span<const MarkedRule> rules) {
  std::vector<GridPoint> out;
  for (auto n : ns)
    for (auto rule : rules)
      for (auto m : marked_counts(n, rule)) out.emplace_back(n, m);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Worker pool

/// Worker count from an explicit flag, else PADIA_WORKERS, else the
/// hardware concurrency.
inline unsigned resolve_workers(std::optional<unsigned> flag) {
  if (flag && *flag > 0) return *flag;
  if (const char* env = std::getenv("PADIA_WORKERS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Evaluates f(0..count-1) on up to `workers` threads; results keep index
/// order. The first exception thrown by any task is rethrown.
template <class F>
auto parallel_map(std::size_t count, unsigned workers, F&& f)
    -> std::vector<decltype(f(std::size_t{0}))> {
  using R = decltype(f(std::size_t{0}));
  std::vector<std::optional<R>> slots(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < count && !failed; i = next++) {
      try {
        slots[i].emplace(f(i));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        failed = true;
      }
    }
  };
  const unsigned threads =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), count));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<R> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

// ---------------------------------------------------------------------------
// Records

struct SweepRecord {
  std::uint64_t n_items = 0;
  std::uint64_t n_marked = 0;
  ScheduleKind schedule_kind = ScheduleKind::kPartial;
  double g_min = 0.0;
  double t_prime = 0.0;
  double p_adiabatic = 0.0;
  double t_expected = 0.0;
  double ov_psi_minus = 0.0;
  double ov_beta_plus = 0.0;
  bool bounds_hold = false;
  std::optional<double> sim_success;
};

struct SweepOptions {
  ScheduleKind schedule = ScheduleKind::kPartial;
  double time_multiplier = 1.0;  // c for partial/global, 1/epsilon for local
  bool simulate = false;
  std::size_t steps = 0;  // 0 selects the default step count
  std::size_t knots = kDefaultLocalKnots;
};

inline Schedule make_schedule(const SearchInstance& inst, ScheduleKind kind,
                              double time_multiplier, std::size_t knots = kDefaultLocalKnots) {
  switch (kind) {
    case ScheduleKind::kPartial: return make_partial_schedule(inst, time_multiplier);
    case ScheduleKind::kGlobalLinear: return make_global_schedule(inst, time_multiplier);
    case ScheduleKind::kLocalAdiabatic:
      if (!(time_multiplier > 0.0)) {
        throw Error(ErrorCode::kInvalidArgument, "time multiplier must be positive");
      }
      return make_local_schedule(inst, 1.0 / time_multiplier, knots);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown schedule kind");
}

inline ScheduleKind parse_schedule_kind(std::string_view name) {
  if (name == "partial") return ScheduleKind::kPartial;
  if (name == "global") return ScheduleKind::kGlobalLinear;
  if (name == "local") return ScheduleKind::kLocalAdiabatic;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown schedule '" + std::string(name) + "' (partial|global|local)");
}

/// One grid point. For the partial schedule the times and probabilities are
/// the analytic T', P and T'/P. The baselines sweep all of [0, 1], so their
/// adiabatic success probability is 1 and t_prime is the schedule duration.
/// `sim_success` is the ground-branch success of a simulated round, i.e.
/// ground-state fidelity at the end times |<beta|E(0,s_end)>|^2.
inline SweepRecord make_record(const SearchInstance& inst, const SweepOptions& opt) {
  SweepRecord r;
  r.n_items = inst.n_items;
  r.n_marked = inst.n_marked;
  r.schedule_kind = opt.schedule;
  r.g_min = min_gap(inst).g_min;
  if (opt.schedule == ScheduleKind::kPartial) {
    const BoundReport b = bound_report(inst);
    r.t_prime = one_round_time(inst);
    r.p_adiabatic = b.p_one_round;
    r.ov_psi_minus = b.ov_psi_at_s_minus;
    r.ov_beta_plus = b.ov_beta_at_s_plus;
    r.bounds_hold = b.all_bounds_hold;
  } else {
    r.t_prime = make_schedule(inst, opt.schedule, opt.time_multiplier, opt.knots).total_time();
    r.ov_psi_minus = overlap_psi(inst, 0.0, Level::kGround);
    r.ov_beta_plus = overlap_beta(inst, 1.0, Level::kGround);
    r.p_adiabatic = r.ov_psi_minus * r.ov_beta_plus;
    r.bounds_hold =
        r.ov_psi_minus > 1.0 / 8.0 && r.ov_beta_plus > 1.0 / 3.0 && r.p_adiabatic > 1.0 / 24.0;
  }
  r.t_expected = r.t_prime / r.p_adiabatic;
  if (opt.simulate) {
    const Schedule schedule = make_schedule(inst, opt.schedule, opt.time_multiplier, opt.knots);
    const std::size_t steps = opt.steps == 0 ? default_step_count(inst, schedule) : opt.steps;
    r.sim_success = evolve(inst, schedule, steps, initial_state(inst)).ground_branch_success;
  }
  return r;
}

/// Records for every grid point, ordered by (n, m) regardless of which
/// worker finished first.
inline std::vector<SweepRecord> run_records(std::vector<GridPoint> grid, const SweepOptions& opt,
                                            unsigned workers) {
  std::sort(grid.begin(), grid.end());
  return parallel_map(grid.size(), workers, [&](std::size_t i) {
    return make_record(make_instance(grid[i].first, grid[i].second), opt);
  });
}

enum class SweepAxis { kItems, kMarked };

struct SweepResult {
  std::vector<SweepRecord> records;
  FitResult fit;
};

/// Sweeps N (with M fixed) or M (with N fixed) over `values` and fits the
/// expected total time against the swept variable.
inline SweepResult run_sweep(SweepAxis axis, std::uint64_t fixed,
                             std::span<const std::uint64_t> values, const SweepOptions& opt,
                             unsigned workers) {
  if (values.size() < 5) {
    throw Error(ErrorCode::kInvalidArgument, "a sweep needs at least 5 grid points");
  }
  std::vector<GridPoint> grid;
  for (auto v : values) {
    grid.emplace_back(axis == SweepAxis::kItems ? GridPoint{v, fixed} : GridPoint{fixed, v});
  }
  SweepResult out;
  out.records = run_records(std::move(grid), opt, workers);
  std::vector<double> xs, ys;
  for (const auto& r : out.records) {
    xs.push_back(static_cast<double>(axis == SweepAxis::kItems ? r.n_items : r.n_marked));
    ys.push_back(r.t_expected);
  }
  out.fit = fit_loglog(xs, ys, axis == SweepAxis::kItems ? "n" : "m");
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline constexpr std::string_view kCsvHeader =
    "n,m,schedule,g_min,t_prime,p_adiabatic,t_expected,ov_psi_minus,ov_beta_plus,bounds_hold,"
    "sim_success";

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(std::ostream& os, std::span<const SweepRecord> records) {
  os << kCsvHeader << '\n';
  for (const auto& r : records) {
    os << r.n_items << ',' << r.n_marked << ',' << to_string(r.schedule_kind) << ','
       << format_double(r.g_min) << ',' << format_double(r.t_prime) << ','
       << format_double(r.p_adiabatic) << ',' << format_double(r.t_expected) << ','
       << format_double(r.ov_psi_minus) << ',' << format_double(r.ov_beta_plus) << ','
       << (r.bounds_hold ? "true" : "false") << ',';
    if (r.sim_success) os << format_double(*r.sim_success);
    os << '\n';
  }
}

inline std::vector<SweepRecord> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) {
    throw Error(ErrorCode::kInvalidArgument, "unexpected CSV header");
  }
  std::vector<SweepRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 11) throw Error(ErrorCode::kInvalidArgument, "bad CSV row: " + line);
    SweepRecord r;
    r.n_items = std::stoull(f[0]);
    r.n_marked = std::stoull(f[1]);
    r.schedule_kind = parse_schedule_kind(f[2]);
    r.g_min = std::stod(f[3]);
    r.t_prime = std::stod(f[4]);
    r.p_adiabatic = std::stod(f[5]);
    r.t_expected = std::stod(f[6]);
    r.ov_psi_minus = std::stod(f[7]);
    r.ov_beta_plus = std::stod(f[8]);
    r.bounds_hold = f[9] == "true";
    if (!f[10].empty()) r.sim_success = std::stod(f[10]);
    out.push_back(r);
  }
  return out;
}

inline nlohmann::json to_json(const SweepRecord& r) {
  nlohmann::json j;
  j["n"] = r.n_items;
  j["m"] = r.n_marked;
  j["schedule"] = std::string(to_string(r.schedule_kind));
  j["g_min"] = r.g_min;
  j["t_prime"] = r.t_prime;
  j["p_adiabatic"] = r.p_adiabatic;
  j["t_expected"] = r.t_expected;
  j["ov_psi_minus"] = r.ov_psi_minus;
  j["ov_beta_plus"] = r.ov_beta_plus;
  j["bounds_hold"] = r.bounds_hold;
  j["sim_success"] = r.sim_success ? nlohmann::json(*r.sim_success) : nlohmann::json(nullptr);
  return j;
}

inline SweepRecord record_from_json(const nlohmann::json& j) {
  SweepRecord r;
  r.n_items = j.at("n").get<std::uint64_t>();
  r.n_marked = j.at("m").get<std::uint64_t>();
  r.schedule_kind = parse_schedule_kind(j.at("schedule").get<std::string>());
  r.g_min = j.at("g_min").get<double>();
  r.t_prime = j.at("t_prime").get<double>();
  r.p_adiabatic = j.at("p_adiabatic").get<double>();
  r.t_expected = j.at("t_expected").get<double>();
  r.ov_psi_minus = j.at("ov_psi_minus").get<double>();
  r.ov_beta_plus = j.at("ov_beta_plus").get<double>();
  r.bounds_hold = j.at("bounds_hold").get<bool>();
  if (!j.at("sim_success").is_null()) r.sim_success = j.at("sim_success").get<double>();
  return r;
}

inline nlohmann::json to_json(const FitResult& f) {
  return nlohmann::json{{"slope", f.slope},
                        {"intercept", f.intercept},
                        {"r_squared", f.r_squared},
                        {"axis", f.axis}};
}

inline nlohmann::json records_json(std::span<const SweepRecord> records,
                                   const std::optional<FitResult>& fit = std::nullopt) {
  nlohmann::json j;
  j["records"] = nlohmann::json::array();
  for (const auto& r : records) j["records"].push_back(to_json(r));
  if (fit) j["fit"] = to_json(*fit);
  return j;
}

inline nlohmann::json to_json(const SpectralPoint& p) {
  return nlohmann::json{{"s", p.s},         {"e0", p.e0},
                        {"e1", p.e1},       {"gap", p.gap},
                        {"ov_psi_0", p.ov_psi_0}, {"ov_beta_0", p.ov_beta_0}};
}

inline void write_spectrum_csv(std::ostream& os, std::span<const SpectralPoint> rows) {
  os << "s,e0,e1,gap,ov_psi_0,ov_beta_0\n";
  for (const auto& p : rows) {
    os << format_double(p.s) << ',' << format_double(p.e0) << ',' << format_double(p.e1) << ','
       << format_double(p.gap) << ',' << format_double(p.ov_psi_0) << ','
       << format_double(p.ov_beta_0) << '\n';
  }
}

struct BoundRow {
  std::uint64_t n_items = 0;
  std::uint64_t n_marked = 0;
  BoundReport report;
};

inline nlohmann::json to_json(const BoundRow& row) {
  const BoundReport& b = row.report;
  nlohmann::json j{{"n", row.n_items},
                   {"m", row.n_marked},
                   {"ov_psi_at_s_minus", b.ov_psi_at_s_minus},
                   {"ov_beta_at_s_plus", b.ov_beta_at_s_plus},
                   {"p_one_round", b.p_one_round},
                   {"lhs_23", b.lhs_23},
                   {"lhs_24", b.lhs_24},
                   {"lhs_25_26", b.lhs_25_26},
                   {"marked_ratio_bound", b.marked_ratio_bound},
                   {"ratio_27", b.ratio_27},
                   {"ratio_excess", b.ratio_excess},
                   {"beta_floor", b.beta_floor},
                   {"all_bounds_hold", b.all_bounds_hold}};
  j["links"] = nlohmann::json::array();
  for (const auto& l : b.links) {
    j["links"].push_back(
        {{"name", l.name}, {"lhs", l.lhs}, {"rhs", l.rhs}, {"strict", l.strict}, {"holds", l.holds}});
  }
  return j;
}

inline void write_bounds_csv(std::ostream& os, std::span<const BoundRow> rows) {
  os << "n,m,ov_psi_at_s_minus,ov_beta_at_s_plus,p_one_round,lhs_23,lhs_24,lhs_25_26,marked_ratio_bound,"
        "ratio_27,ratio_excess,beta_floor,all_bounds_hold\n";
  for (const auto& row : rows) {
    const BoundReport& b = row.report;
    os << row.n_items << ',' << row.n_marked << ',' << format_double(b.ov_psi_at_s_minus) << ','
       << format_double(b.ov_beta_at_s_plus) << ',' << format_double(b.p_one_round) << ','
       << format_double(b.lhs_23) << ',' << format_double(b.lhs_24) << ','
       << format_double(b.lhs_25_26) << ',' << format_double(b.marked_ratio_bound) << ','
       << format_double(b.ratio_27) << ',' << format_double(b.ratio_excess) << ','
       << format_double(b.beta_floor) << ',' << (b.all_bounds_hold ? "true" : "false")
       << '\n';
  }
}

}  // namespace padia

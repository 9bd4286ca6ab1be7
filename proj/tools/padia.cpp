// padia: command-line driver for the partial adiabatic search simulator.
//
// Exit status: 0 when every check passes, 1 when a bound or certification
// check fails (or a run fails numerically), 2 on usage errors.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "padia/padia.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr double kCertifyThreshold = 1e-9;

struct CommonFlags {
  std::string output = "csv";
  std::string out_path;
  std::optional<unsigned> workers;
  std::uint64_t seed = 0;
};

// Parses "lo:hi" or "lo:hi:step" into a power-of-two grid.
std::vector<std::uint64_t> parse_log2_range(const std::string& spec) {
  std::vector<int> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t colon = spec.find(':', start);
    const std::string token = spec.substr(start, colon - start);
    try {
      std::size_t used = 0;
      parts.push_back(std::stoi(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw padia::Error(padia::ErrorCode::kInvalidArgument,
                         "bad --log2 range '" + spec + "', expected lo:hi[:step]");
    }
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  if (parts.size() < 2 || parts.size() > 3) {
    throw padia::Error(padia::ErrorCode::kInvalidArgument,
                       "bad --log2 range '" + spec + "', expected lo:hi[:step]");
  }
  return padia::power_of_two_grid(parts[0], parts[1], parts.size() == 3 ? parts[2] : 1);
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) {
        throw padia::Error(padia::ErrorCode::kInvalidArgument, "cannot open " + path);
      }
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

int run_spectrum(const CommonFlags& common, std::uint64_t n, std::uint64_t m,
                 std::size_t points) {
  const auto inst = padia::make_instance(n, m);
  std::vector<padia::SpectralPoint> rows;
  for (double s : padia::uniform_grid(points)) rows.push_back(padia::spectral_point(inst, s));
  Output out(common.out_path);
  if (common.output == "json") {
    nlohmann::json j;
    j["n"] = n;
    j["m"] = m;
    j["points"] = nlohmann::json::array();
    for (const auto& p : rows) j["points"].push_back(padia::to_json(p));
    out.stream() << j.dump(2) << '\n';
  } else {
    padia::write_spectrum_csv(out.stream(), rows);
  }
  return kExitOk;
}

int run_bounds(const CommonFlags& common, std::vector<std::uint64_t> ns,
               const std::string& log2_range, const std::vector<std::string>& rule_names) {
  if (!log2_range.empty()) {
    const auto extra = parse_log2_range(log2_range);
    ns.insert(ns.end(), extra.begin(), extra.end());
  }
  if (ns.empty()) {
    throw padia::Error(padia::ErrorCode::kInvalidArgument, "give --n values or a --log2 range");
  }
  std::vector<padia::MarkedRule> rules;
  for (const auto& r : rule_names) rules.push_back(padia::parse_marked_rule(r));
  for (auto n : ns) padia::make_instance(n, 1);  // validates N before the pool starts
  const auto grid = padia::make_grid(ns, rules);

  const auto rows = padia::parallel_map(
      grid.size(), padia::resolve_workers(common.workers), [&](std::size_t i) {
        return padia::BoundRow{grid[i].first, grid[i].second,
                               padia::bound_report(
                                   padia::make_instance(grid[i].first, grid[i].second))};
      });
  Output out(common.out_path);
  if (common.output == "json") {
    nlohmann::json j;
    j["rows"] = nlohmann::json::array();
    for (const auto& row : rows) j["rows"].push_back(padia::to_json(row));
    out.stream() << j.dump(2) << '\n';
  } else {
    padia::write_bounds_csv(out.stream(), rows);
  }
  std::size_t violations = 0;
  for (const auto& row : rows) violations += row.report.all_bounds_hold ? 0 : 1;
  if (violations > 0) {
    std::cerr << violations << " of " << rows.size() << " rows violate the bound chain\n";
    return kExitCheckFailed;
  }
  return kExitOk;
}

int run_evolve(const CommonFlags& common, std::uint64_t n, std::uint64_t m, double c,
               std::size_t steps, const std::string& schedule_name, bool repeat,
               std::uint64_t max_rounds) {
  const auto inst = padia::make_instance(n, m);
  const auto kind = padia::parse_schedule_kind(schedule_name);
  const auto schedule = padia::make_schedule(inst, kind, c);
  if (steps == 0) steps = padia::default_step_count(inst, schedule);
  const auto outcome = padia::evolve(inst, schedule, steps, padia::initial_state(inst));

  nlohmann::json j;
  j["n"] = n;
  j["m"] = m;
  j["schedule"] = schedule_name;
  j["c"] = c;
  j["steps"] = steps;
  j["total_time"] = schedule.total_time();
  j["success_probability"] = outcome.success_probability;
  j["ground_fidelity"] = outcome.ground_fidelity;
  j["ground_branch_success"] = outcome.ground_branch_success;
  j["norm_drift"] = outcome.norm_drift;
  const auto& st = outcome.final_state;
  j["final_state"] = {{"alpha", {st.amp_alpha.real(), st.amp_alpha.imag()}},
                      {"beta", {st.amp_beta.real(), st.amp_beta.imag()}}};
  if (kind == padia::ScheduleKind::kPartial) {
    j["p_adiabatic"] = padia::adiabatic_success_probability(inst);
  }
  if (repeat) {
    const auto stats = padia::repeat_until_success(outcome.success_probability,
                                                   schedule.total_time(), common.seed, max_rounds);
    j["repeat"] = {{"seed", common.seed},
                   {"max_rounds", max_rounds},
                   {"rounds_used", stats.rounds_used},
                   {"total_evolution_time", stats.total_evolution_time},
                   {"succeeded", stats.succeeded}};
  }
  Output out(common.out_path);
  out.stream() << j.dump(2) << '\n';
  return kExitOk;
}

int run_sweep(const CommonFlags& common, const std::string& axis_name, std::uint64_t fixed,
              const std::string& log2_range, const std::string& schedule_name, double c,
              std::size_t steps, bool simulate) {
  padia::SweepAxis axis;
  if (axis_name == "n") {
    axis = padia::SweepAxis::kItems;
  } else if (axis_name == "m") {
    axis = padia::SweepAxis::kMarked;
  } else {
    throw padia::Error(padia::ErrorCode::kInvalidArgument, "--axis must be n or m");
  }
  const auto values = parse_log2_range(log2_range);
  for (auto v : values) {
    if (axis == padia::SweepAxis::kItems) {
      padia::make_instance(v, fixed);
    } else {
      padia::make_instance(fixed, v);
    }
  }
  padia::SweepOptions opt;
  opt.schedule = padia::parse_schedule_kind(schedule_name);
  opt.time_multiplier = c;
  opt.simulate = simulate;
  opt.steps = steps;
  const auto result =
      padia::run_sweep(axis, fixed, values, opt, padia::resolve_workers(common.workers));

  Output out(common.out_path);
  if (common.output == "json") {
    out.stream() << padia::records_json(result.records, result.fit).dump(2) << '\n';
  } else {
    padia::write_csv(out.stream(), result.records);
  }
  std::cerr << "fit (" << result.fit.axis << "): slope=" << result.fit.slope
            << " intercept=" << result.fit.intercept << " r2=" << result.fit.r_squared << '\n';
  return kExitOk;
}

int run_certify(const CommonFlags& common, std::uint64_t n_max, std::size_t points) {
  if (n_max > padia::kMaxCertifyItems) {
    throw padia::Error(padia::ErrorCode::kCapacityExceeded,
                       "certify is limited to --n-max <= " +
                           std::to_string(padia::kMaxCertifyItems));
  }
  if (n_max < 2) throw padia::Error(padia::ErrorCode::kInvalidItemCount, "--n-max must be >= 2");
  std::vector<std::uint64_t> ns;
  for (std::uint64_t n = 2; n <= n_max; n *= 2) ns.push_back(n);
  const std::vector<padia::MarkedRule> rules{padia::MarkedRule::kOne, padia::MarkedRule::kSqrt,
                                             padia::MarkedRule::kHalf, padia::MarkedRule::kFull};
  const auto grid = padia::make_grid(ns, rules);
  const auto s_grid = padia::uniform_grid(points);
  const auto errors = padia::parallel_map(
      grid.size(), padia::resolve_workers(common.workers), [&](std::size_t i) {
        const auto full = padia::make_full_instance(grid[i].first, grid[i].second);
        return padia::certify_reduction(full, s_grid);
      });
  double worst = 0.0;
  Output out(common.out_path);
  if (common.output == "json") {
    nlohmann::json j;
    j["cases"] = nlohmann::json::array();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      j["cases"].push_back({{"n", grid[i].first}, {"m", grid[i].second}, {"max_abs_error", errors[i]}});
      worst = std::max(worst, errors[i]);
    }
    j["worst_error"] = worst;
    j["threshold"] = kCertifyThreshold;
    out.stream() << j.dump(2) << '\n';
  } else {
    out.stream() << "n,m,max_abs_error\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      out.stream() << grid[i].first << ',' << grid[i].second << ','
                   << padia::format_double(errors[i]) << '\n';
      worst = std::max(worst, errors[i]);
    }
  }
  std::cerr << "worst error " << worst << " (threshold " << kCertifyThreshold << ")\n";
  return worst <= kCertifyThreshold ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partial adiabatic quantum search: spectra, bounds, dynamics and scaling"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonFlags common;
  app.add_option("--output", common.output, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--out", common.out_path, "Write output to PATH instead of stdout");
  app.add_option("--workers", common.workers, "Worker threads (default: $PADIA_WORKERS or cores)")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", common.seed, "Seed for repeat-until-success draws");

  std::uint64_t n = 0, m = 0;

  auto* spectrum = app.add_subcommand("spectrum", "Eigenvalues, gap and overlaps on an s-grid");
  std::size_t points = 11;
  spectrum->add_option("--n", n, "Number of items")->required();
  spectrum->add_option("--m", m, "Number of marked items")->required();
  spectrum->add_option("--points", points, "Grid points on [0, 1]")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 24));

  auto* bounds = app.add_subcommand("bounds", "Audit the success-probability bound chain");
  std::vector<std::uint64_t> n_list;
  std::string log2_range;
  std::vector<std::string> rules{"one"};
  bounds->add_option("--n", n_list, "Item counts");
  bounds->add_option("--log2", log2_range, "Power-of-two item counts lo:hi[:step]");
  bounds->add_option("--m-rule", rules, "Marked-count rules: one sqrt half full every all-divisors");

  auto* evolve = app.add_subcommand("evolve", "Simulate one round (optionally repeat until success)");
  double c = 1.0;
  std::size_t steps = 0;
  std::string schedule = "partial";
  bool repeat = false;
  std::uint64_t max_rounds = 1000;
  evolve->add_option("--n", n, "Number of items")->required();
  evolve->add_option("--m", m, "Number of marked items")->required();
  evolve->add_option("--c", c, "Time multiplier (local schedule: epsilon = 1/c)")
      ->check(CLI::PositiveNumber);
  evolve->add_option("--steps", steps, "RK4 steps (0 = default)");
  evolve->add_option("--schedule", schedule, "partial | global | local")
      ->check(CLI::IsMember({"partial", "global", "local"}));
  evolve->add_flag("--repeat", repeat, "Repeat rounds until a marked item is measured");
  evolve->add_option("--max-rounds", max_rounds, "Round cap for --repeat")
      ->check(CLI::PositiveNumber);

  auto* sweep = app.add_subcommand("sweep", "Scaling sweep with a log-log fit");
  std::string axis = "n";
  std::uint64_t fixed = 1;
  std::string sweep_range = "6:16";
  std::string sweep_schedule = "partial";
  double sweep_c = 1.0;
  std::size_t sweep_steps = 0;
  bool simulate = false;
  sweep->add_option("--axis", axis, "Swept variable: n or m")->check(CLI::IsMember({"n", "m"}));
  sweep->add_option("--fixed", fixed, "Value of the other variable")->required();
  sweep->add_option("--log2", sweep_range, "Power-of-two grid lo:hi[:step]");
  sweep->add_option("--schedule", sweep_schedule, "partial | global | local")
      ->check(CLI::IsMember({"partial", "global", "local"}));
  sweep->add_option("--c", sweep_c, "Time multiplier (local: epsilon = 1/c)")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--steps", sweep_steps, "RK4 steps for --simulate (0 = default)");
  sweep->add_flag("--simulate", simulate, "Also simulate one round per grid point");

  auto* certify = app.add_subcommand("certify", "Compare the reduction against dense diagonalization");
  std::uint64_t n_max = 256;
  std::size_t certify_points = 21;
  certify->add_option("--n-max", n_max, "Largest N (powers of two from 2)")->required();
  certify->add_option("--points", certify_points, "s-grid points")
      ->check(CLI::Range(std::size_t{2}, std::size_t{10001}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (spectrum->parsed()) return run_spectrum(common, n, m, points);
    if (bounds->parsed()) return run_bounds(common, n_list, log2_range, rules);
    if (evolve->parsed()) {
      return run_evolve(common, n, m, c, steps, schedule, repeat, max_rounds);
    }
    if (sweep->parsed()) {
      return run_sweep(common, axis, fixed, sweep_range, sweep_schedule, sweep_c, sweep_steps,
                       simulate);
    }
    if (certify->parsed()) return run_certify(common, n_max, certify_points);
  } catch (const padia::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.code()) {
      case padia::ErrorCode::kNormDriftExceeded:
      case padia::ErrorCode::kConvergenceFailure:
        return kExitCheckFailed;
      default:
        return kExitUsage;
    }
  }
  return kExitUsage;
}

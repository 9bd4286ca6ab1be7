#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "padia/experiments.hpp"

namespace padia {
namespace {

TEST(Fit, ExactPowerLaws) {
  const std::vector<double> xs{1, 2, 4, 8, 16};
  auto fit = fit_loglog(xs, xs, "n");
  EXPECT_NEAR(fit.slope, 1.0, 1e-12);
  EXPECT_NEAR(fit.intercept, 0.0, 1e-12);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
  EXPECT_EQ(fit.axis, "n");

  std::vector<double> ys;
  for (double x : xs) ys.push_back(7.0 / x);
  fit = fit_loglog(xs, ys);
  EXPECT_NEAR(fit.slope, -1.0, 1e-12);
  EXPECT_NEAR(fit.intercept, std::log(7.0), 1e-12);
}

TEST(Fit, NoisySquareRoot) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<double> xs, ys;
  for (int k = 6; k <= 16; ++k) {
    const double x = std::ldexp(1.0, k);
    xs.push_back(x);
    ys.push_back(std::sqrt(x) * (1.0 + noise(rng)));
  }
  const auto fit = fit_loglog(xs, ys);
  EXPECT_GE(fit.slope, 0.45);
  EXPECT_LE(fit.slope, 0.55);
  EXPECT_GT(fit.r_squared, 0.99);
}

TEST(Fit, Errors) {
  const std::vector<double> same{4, 4, 4, 4};
  const std::vector<double> ys{1, 2, 3, 4};
  try {
    fit_loglog(same, ys);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateFit);
  }
  EXPECT_THROW(fit_loglog(std::vector<double>{1, 2}, std::vector<double>{1, 2}), Error);
  EXPECT_THROW(fit_loglog(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}), Error);
  EXPECT_THROW(fit_loglog(std::vector<double>{1, 2, 3}, std::vector<double>{1, 0, 2}), Error);
}

TEST(Grid, MarkedRules) {
  EXPECT_EQ(marked_counts(64, MarkedRule::kOne), std::vector<std::uint64_t>{1});
  EXPECT_EQ(marked_counts(64, MarkedRule::kSqrt), std::vector<std::uint64_t>{8});
  EXPECT_EQ(marked_counts(65, MarkedRule::kSqrt), std::vector<std::uint64_t>{8});
  EXPECT_EQ(marked_counts(64, MarkedRule::kHalf), std::vector<std::uint64_t>{32});
  EXPECT_EQ(marked_counts(64, MarkedRule::kFull), std::vector<std::uint64_t>{64});
  EXPECT_EQ(marked_counts(12, MarkedRule::kDivisors),
            (std::vector<std::uint64_t>{1, 2, 3, 4, 6, 12}));
  EXPECT_EQ(marked_counts(5, MarkedRule::kEvery).size(), 5u);
  EXPECT_EQ(parse_marked_rule("all-divisors"), MarkedRule::kDivisors);
  EXPECT_THROW(parse_marked_rule("most"), Error);
  EXPECT_EQ(isqrt((std::uint64_t{1} << 62) - 1), (std::uint64_t{1} << 31) - 1);
}

TEST(Grid, PowersOfTwoAndDeduplication) {
  EXPECT_EQ(power_of_two_grid(2, 8, 2), (std::vector<std::uint64_t>{4, 16, 64, 256}));
  EXPECT_THROW(power_of_two_grid(5, 3), Error);
  const std::vector<std::uint64_t> ns{4, 2};
  const std::vector<MarkedRule> rules{MarkedRule::kSqrt, MarkedRule::kHalf, MarkedRule::kFull};
  const auto grid = make_grid(ns, rules);
  EXPECT_EQ(grid, (std::vector<GridPoint>{{2, 1}, {2, 2}, {4, 2}, {4, 4}}));
}

TEST(Records, PartialRowIsConsistent) {
  const auto r = make_record(make_instance(1024, 4), SweepOptions{});
  EXPECT_NEAR(r.t_prime, 8.0, 1e-12);
  EXPECT_NEAR(r.g_min, 0.0625, 1e-15);
  EXPECT_NEAR(r.t_expected, r.t_prime / r.p_adiabatic, 1e-12);
  EXPECT_NEAR(r.p_adiabatic, r.ov_psi_minus * r.ov_beta_plus, 1e-15);
  EXPECT_TRUE(r.bounds_hold);
  EXPECT_FALSE(r.sim_success.has_value());
}

TEST(Records, SortedRegardlessOfWorkers) {
  std::vector<GridPoint> grid{{256, 4}, {16, 1}, {64, 8}, {16, 2}, {1024, 1}};
  SweepOptions opt;
  opt.simulate = true;
  const auto serial = run_records(grid, opt, 1);
  const auto threaded = run_records(grid, opt, 4);
  ASSERT_EQ(serial.size(), grid.size());
  for (std::size_t i = 1; i < serial.size(); ++i) {
    EXPECT_LT(GridPoint(serial[i - 1].n_items, serial[i - 1].n_marked),
              GridPoint(serial[i].n_items, serial[i].n_marked));
  }
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].n_items, threaded[i].n_items);
    EXPECT_EQ(*serial[i].sim_success, *threaded[i].sim_success);
  }
}

TEST(Records, BaselinesUseFullInterval) {
  SweepOptions opt;
  opt.schedule = ScheduleKind::kLocalAdiabatic;
  const auto local = make_record(make_instance(64, 1), opt);
  EXPECT_NEAR(local.t_prime, 11.655162414955428989, 1e-8);
  EXPECT_NEAR(local.p_adiabatic, 1.0, 1e-12);
  opt.schedule = ScheduleKind::kGlobalLinear;
  opt.time_multiplier = 2.0;
  const auto global = make_record(make_instance(64, 1), opt);
  EXPECT_NEAR(global.t_prime, 2.0 * 64.0, 1e-9);
}

TEST(Sweep, ItemAxisScalesAsSquareRoot) {
  const auto ns = power_of_two_grid(6, 14);
  const auto result = run_sweep(SweepAxis::kItems, 1, ns, SweepOptions{}, 2);
  EXPECT_NEAR(result.fit.slope, 0.5, 0.05);
  EXPECT_GT(result.fit.r_squared, 0.99);
  EXPECT_EQ(result.fit.axis, "n");
  EXPECT_THROW(run_sweep(SweepAxis::kItems, 1, std::vector<std::uint64_t>{4, 8}, {}, 1), Error);
}

TEST(Serialization, CsvRoundTrip) {
  std::vector<GridPoint> grid{{16, 1}, {64, 64}, {4096, 7}};
  SweepOptions opt;
  opt.simulate = true;
  auto records = run_records(grid, opt, 1);
  records.push_back(make_record(make_instance(100, 3), SweepOptions{}));
  std::stringstream ss;
  write_csv(ss, records);
  std::string header;
  std::getline(std::stringstream(ss.str()), header);
  EXPECT_EQ(header,
            "n,m,schedule,g_min,t_prime,p_adiabatic,t_expected,ov_psi_minus,ov_beta_plus,"
            "bounds_hold,sim_success");
  const auto back = read_csv(ss);
  ASSERT_EQ(back.size(), records.size());
  auto rel = [](double a, double b) { return std::abs(a - b) <= 1e-15 * std::abs(b); };
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].n_items, records[i].n_items);
    EXPECT_EQ(back[i].n_marked, records[i].n_marked);
    EXPECT_EQ(back[i].schedule_kind, records[i].schedule_kind);
    EXPECT_TRUE(rel(back[i].g_min, records[i].g_min));
    EXPECT_TRUE(rel(back[i].t_expected, records[i].t_expected));
    EXPECT_TRUE(rel(back[i].ov_beta_plus, records[i].ov_beta_plus));
    EXPECT_EQ(back[i].bounds_hold, records[i].bounds_hold);
    EXPECT_EQ(back[i].sim_success.has_value(), records[i].sim_success.has_value());
  }
  std::stringstream bad("n,m\n1,2\n");
  EXPECT_THROW(read_csv(bad), Error);
}

TEST(Serialization, JsonRoundTrip) {
  SweepOptions opt;
  opt.simulate = true;
  const auto records = run_records({{64, 1}, {256, 16}}, opt, 1);
  const auto fit = FitResult{0.5, 0.1, 0.999, "n"};
  const auto j = records_json(records, fit);
  const auto parsed = nlohmann::json::parse(j.dump());
  ASSERT_EQ(parsed.at("records").size(), 2u);
  EXPECT_DOUBLE_EQ(parsed.at("fit").at("slope").get<double>(), 0.5);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto r = record_from_json(parsed["records"][i]);
    EXPECT_EQ(r.n_items, records[i].n_items);
    EXPECT_EQ(r.t_prime, records[i].t_prime);
    EXPECT_EQ(r.p_adiabatic, records[i].p_adiabatic);
    EXPECT_EQ(*r.sim_success, *records[i].sim_success);
  }
  EXPECT_FALSE(records_json(records).contains("fit"));
}

TEST(Workers, ParallelMapKeepsOrder) {
  const auto out = parallel_map(1000, 8, [](std::size_t i) { return i * i; });
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], i * i);
  EXPECT_TRUE(parallel_map(0, 4, [](std::size_t i) { return i; }).empty());
}

TEST(Workers, ParallelMapPropagatesFailure) {
  EXPECT_THROW(parallel_map(100, 4,
                            [](std::size_t i) {
                              if (i == 37) throw std::runtime_error("boom");
                              return i;
                            }),
               std::runtime_error);
}

TEST(Workers, ResolveFromEnvironment) {
  EXPECT_EQ(resolve_workers(3u), 3u);
  ::setenv("PADIA_WORKERS", "5", 1);
  EXPECT_EQ(resolve_workers(std::nullopt), 5u);
  ::setenv("PADIA_WORKERS", "junk", 1);
  EXPECT_GE(resolve_workers(std::nullopt), 1u);
  ::unsetenv("PADIA_WORKERS");
  EXPECT_GE(resolve_workers(std::nullopt), 1u);
}

}  // namespace
}  // namespace padia

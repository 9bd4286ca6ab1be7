#include <cmath>
#include <cstdint>
#include <random>

#include <gtest/gtest.h>

#include "padia/spectrum.hpp"
#include "test_support.hpp"

namespace padia {
namespace {

std::vector<double> grid(std::size_t points) {
  std::vector<double> out;
  for (std::size_t i = 0; i < points; ++i) out.push_back(static_cast<double>(i) / (points - 1));
  return out;
}

TEST(Eigenvalues, KnownValues) {
  // Diagonalizing the N=4, M=1, s=1/2 matrix [[5/8, -sqrt3/8], [-sqrt3/8, 3/8]] by hand.
  auto e = eigenvalues(make_instance(4, 1), 0.5);
  EXPECT_NEAR(e.e0, 0.25, 1e-15);
  EXPECT_NEAR(e.e1, 0.75, 1e-15);

  e = eigenvalues(make_instance(1000, 3), 0.0);
  EXPECT_EQ(e.e0, 0.0);
  EXPECT_EQ(e.e1, 1.0);

  for (double s : {0.0, 0.3, 0.5, 1.0}) {
    e = eigenvalues(make_instance(12, 12), s);
    EXPECT_EQ(e.e0, 0.0);
    EXPECT_EQ(e.e1, 1.0);
  }
}

TEST(Eigenvalues, SecularIdentity) {
  for (const auto& inst : testing::random_instances(400, 60)) {
    for (double s : grid(101)) {
      const auto e = eigenvalues(inst, s);
      EXPECT_NEAR(e.e0 * e.e0 - e.e0 + s * (1.0 - s) * inst.a, 0.0, 1e-11);
      EXPECT_NEAR(e.e0 + e.e1, 1.0, 1e-15);
      EXPECT_NEAR(e.e0 * e.e1, s * (1.0 - s) * inst.a, 1e-15);
      EXPECT_LE(e.e0, e.e1);
      EXPECT_NEAR(e.e1 - e.e0, gap(inst, s), 1e-15);
    }
  }
}

TEST(Gap, KnownValues) {
  EXPECT_NEAR(gap(make_instance(100, 1), 0.5), 0.1, 1e-16);
  EXPECT_EQ(gap(make_instance(100, 1), 0.0), 1.0);
  EXPECT_EQ(gap(make_instance(100, 1), 1.0), 1.0);
  // sqrt(0.37) to 20 digits (mpmath).
  EXPECT_NEAR(gap(make_instance(4, 1), 0.3), 0.6082762530298219689, 1e-15);
  EXPECT_THROW(gap(make_instance(4, 1), 1.5), Error);
}

TEST(Gap, StableFormMatchesPrintedForm) {
  for (const auto& inst : testing::random_instances(400, 40)) {
    for (double s : grid(101)) {
      const double printed_sq = 1.0 - 4.0 * s * (1.0 - s) * inst.a;
      if (printed_sq <= 1e-8) continue;
      const double stable = gap(inst, s);
      const double printed = std::sqrt(printed_sq);
      // The printed form itself carries an absolute error of order eps in
      // its radicand, so compare with that noise floor included.
      EXPECT_NEAR(stable, printed, 1e-12 * printed + 1e-16 / printed);
    }
  }
}

TEST(MinGap, AnalyticValues) {
  auto g = min_gap(make_instance(100, 1));
  EXPECT_NEAR(g.g_min, 0.1, 1e-16);
  EXPECT_EQ(g.s_star, 0.5);

  g = min_gap(make_instance(64, 64));
  EXPECT_EQ(g.g_min, 1.0);
  EXPECT_EQ(g.s_star, 0.5);

  g = min_gap(make_instance(1024, 4));
  EXPECT_EQ(g.g_min, 0.0625);
  const auto scanned = scan_min_gap(make_instance(1024, 4), 10001);
  EXPECT_NEAR(scanned.g_min, 0.0625, 1e-15);
  EXPECT_EQ(scanned.s_star, 0.5);
}

TEST(MinGap, GapIsSmallestAtHalf) {
  for (const auto& inst : testing::random_instances(60, 20)) {
    const double g_half = gap(inst, 0.5);
    for (double s : grid(10001)) {
      if (inst.all_marked()) {
        EXPECT_NEAR(gap(inst, s), 1.0, 1e-15);
      } else if (s == 0.5) {
        EXPECT_EQ(gap(inst, s), g_half);
      } else {
        EXPECT_GT(gap(inst, s), g_half) << inst.n_items << " " << inst.n_marked << " " << s;
      }
    }
  }
}

TEST(EigenvectorComponents, KnownValues) {
  // Null vector of H - 0.25 I for the N=4, M=1, s=1/2 matrix.
  auto c = eigenvector_components(make_instance(4, 1), 0.5, Level::kGround);
  EXPECT_NEAR(c.c_alpha, 0.5, 1e-15);
  EXPECT_NEAR(c.c_beta, 0.8660254037844386, 1e-15);

  c = eigenvector_components(make_instance(16, 16), 0.4, Level::kGround);
  EXPECT_EQ(c.c_alpha, 0.0);
  EXPECT_EQ(c.c_beta, 1.0);

  const auto inst = make_instance(20, 3);
  c = eigenvector_components(inst, 0.0, Level::kGround);
  EXPECT_NEAR(c.c_alpha, std::sqrt(inst.a), 1e-15);
  EXPECT_NEAR(c.c_beta, std::sqrt(inst.b), 1e-15);
}

TEST(EigenvectorComponents, SignConventionAndNormalization) {
  for (const auto& inst : testing::random_instances(300, 30)) {
    for (double s : grid(51)) {
      const auto g = eigenvector_components(inst, s, Level::kGround);
      const auto x = eigenvector_components(inst, s, Level::kExcited);
      EXPECT_NEAR(g.c_alpha * g.c_alpha + g.c_beta * g.c_beta, 1.0, 1e-12);
      EXPECT_NEAR(x.c_alpha * x.c_alpha + x.c_beta * x.c_beta, 1.0, 1e-12);
      EXPECT_GE(g.c_beta, 0.0);
      EXPECT_GE(x.c_alpha, 0.0);
      EXPECT_NEAR(g.c_alpha * x.c_alpha + g.c_beta * x.c_beta, 0.0, 1e-12);
    }
  }
}

TEST(EigenvectorComponents, SolvesTheEigenproblem) {
  for (const auto& inst : testing::random_instances(300, 30)) {
    for (double s : grid(51)) {
      const auto h = reduced_hamiltonian(inst, s);
      const auto e = eigenvalues(inst, s);
      for (int k = 0; k < 2; ++k) {
        const auto c = eigenvector_components(inst, s, static_cast<Level>(k));
        const double lambda = k == 0 ? e.e0 : e.e1;
        EXPECT_NEAR(h.h_aa * c.c_alpha + h.h_ab * c.c_beta, lambda * c.c_alpha, 1e-13);
        EXPECT_NEAR(h.h_ab * c.c_alpha + h.h_bb * c.c_beta, lambda * c.c_beta, 1e-13);
      }
    }
  }
}

TEST(EigenvectorComponents, FallbackCasesAgreeWithDirectSolve) {
  const auto inst = make_instance(32, 5);
  for (int k = 0; k < 2; ++k) {
    const auto level = static_cast<Level>(k);
    for (double s : {0.0, 1.0}) {
      const auto c = eigenvector_components(inst, s, level);
      const auto d = eigenvector_components_direct(inst, s, level);
      EXPECT_NEAR(c.c_alpha, d.c_alpha, 1e-15);
      EXPECT_NEAR(c.c_beta, d.c_beta, 1e-15);
    }
  }
  // s = 0 excited state: H_i = 1 - |Psi><Psi| has |Psi_perp> at energy 1.
  const auto x = eigenvector_components(inst, 0.0, Level::kExcited);
  EXPECT_NEAR(x.c_alpha, std::sqrt(inst.b), 1e-15);
  EXPECT_NEAR(x.c_beta, -std::sqrt(inst.a), 1e-15);
}

TEST(Overlaps, KnownValues) {
  const auto inst = make_instance(4, 1);
  // Closed-form overlap with A=3/4, B=1/4, E0=1/4; eigenvector route gives (0.866*0.5+0.5*0.866)^2.
  EXPECT_NEAR(overlap_psi(inst, 0.5, Level::kGround), 0.75, 1e-15);
  // Ratio (1-0.5-0.25)/(1-0.25) = 1/3, so 0.25 / (0.75/9 + 0.25) = 0.75.
  EXPECT_NEAR(overlap_beta(inst, 0.5, Level::kGround), 0.75, 1e-15);

  EXPECT_NEAR(overlap_psi(make_instance(77, 9), 0.0, Level::kGround), 1.0, 1e-15);
  EXPECT_NEAR(overlap_beta(make_instance(77, 9), 1.0, Level::kGround), 1.0, 1e-15);
  for (double s : {0.0, 0.25, 0.5, 0.99, 1.0}) {
    EXPECT_NEAR(overlap_psi(make_instance(8, 8), s, Level::kGround), 1.0, 1e-15);
    EXPECT_NEAR(overlap_beta(make_instance(8, 8), s, Level::kGround), 1.0, 1e-15);
  }
}

TEST(Overlaps, CompletenessInSubspace) {
  for (const auto& inst : testing::random_instances(400, 50)) {
    for (double s : grid(101)) {
      if (s == 1.0) continue;
      const double p0 = overlap_psi(inst, s, Level::kGround);
      const double p1 = overlap_psi(inst, s, Level::kExcited);
      EXPECT_NEAR(p0 + p1, 1.0, 1e-11) << inst.n_items << " " << inst.n_marked << " " << s;
      EXPECT_GE(p0, 0.0);
      EXPECT_LE(p0, 1.0);
      const double b0 = overlap_beta(inst, s, Level::kGround);
      const double b1 = overlap_beta(inst, s, Level::kExcited);
      EXPECT_NEAR(b0 + b1, 1.0, 1e-11);
    }
  }
}

TEST(Overlaps, FormulasMatchEigenvectorRoute) {
  for (const auto& inst : testing::random_instances(400, 14)) {
    for (double s : grid(101)) {
      for (int k = 0; k < 2; ++k) {
        const auto level = static_cast<Level>(k);
        const auto c = eigenvector_components_direct(inst, s, level);
        const double amp = c.c_alpha * std::sqrt(inst.a) + c.c_beta * std::sqrt(inst.b);
        EXPECT_NEAR(overlap_psi(inst, s, level), amp * amp, 1e-11)
            << inst.n_items << " " << inst.n_marked << " " << s << " " << k;
        EXPECT_NEAR(overlap_beta(inst, s, level), c.c_beta * c.c_beta, 1e-11);
      }
    }
  }
}

TEST(SuccessProbability, MatchesDenseOracle) {
  // Products of squared overlaps from numpy.linalg.eigh on the dense N x N
  // Hamiltonian at s- and s+.
  EXPECT_NEAR(adiabatic_success_probability(make_instance(2, 1)), 0.9856504100245022, 1e-13);
  EXPECT_NEAR(adiabatic_success_probability(make_instance(4, 1)), 0.9456698769758196, 1e-13);
  EXPECT_NEAR(adiabatic_success_probability(make_instance(64, 1)), 0.798814893966787, 1e-13);
  EXPECT_NEAR(adiabatic_success_probability(make_instance(100, 1)), 0.7855990506993922, 1e-13);
  EXPECT_NEAR(adiabatic_success_probability(make_instance(50, 50)), 1.0, 1e-15);
  EXPECT_GT(adiabatic_success_probability(make_instance(std::uint64_t{1} << 20, 1)), 1.0 / 24.0);
}

TEST(Times, OneRound) {
  EXPECT_NEAR(one_round_time(make_instance(100, 1)), 10.0, 1e-12);
  EXPECT_NEAR(one_round_time(make_instance(100, 10)), 1.0, 1e-12);
  EXPECT_EQ(one_round_time(make_instance(std::uint64_t{1} << 16, 4)), 64.0);
  for (const auto& inst : testing::random_instances(500, 60)) {
    const double n = static_cast<double>(inst.n_items);
    const double m = static_cast<double>(inst.n_marked);
    EXPECT_NEAR(one_round_time(inst) / (std::sqrt(n) / m), 1.0, 1e-9);
  }
}

TEST(Times, ExpectedTotal) {
  const auto all = make_instance(49, 49);
  EXPECT_NEAR(expected_total_time(all), one_round_time(all), 1e-15);

  const auto inst = make_instance(100, 1);
  EXPECT_NEAR(expected_total_time(inst), 10.0 / 0.7855990506993922, 1e-10);

  for (const auto& x : testing::random_instances(2000, 60)) {
    const double n = static_cast<double>(x.n_items);
    const double m = static_cast<double>(x.n_marked);
    EXPECT_LE(expected_total_time(x), 24.0 * std::sqrt(n) / m);
  }
}

TEST(BoundReport, SmallInstances) {
  for (auto [n, m] : {std::pair<std::uint64_t, std::uint64_t>{4, 1}, {2, 1}, {2, 2}, {16, 16},
                      {std::uint64_t{1} << 20, std::uint64_t{1} << 10}}) {
    const auto r = bound_report(make_instance(n, m));
    EXPECT_TRUE(r.all_bounds_hold) << n << " " << m;
    EXPECT_EQ(r.p_one_round, r.ov_psi_at_s_minus * r.ov_beta_at_s_plus);
    for (const auto& link : r.links) EXPECT_TRUE(link.holds) << link.name;
  }
  const auto r2 = bound_report(make_instance(2, 1));
  EXPECT_NEAR(r2.lhs_23, 0.7286, 1e-4);
}

TEST(BoundReport, ChainIsConsistentWithOverlaps) {
  for (const auto& inst : testing::random_instances(500, 40)) {
    const auto r = bound_report(inst);
    // |<Psi|E0(s-)>|^2 = 1 / ((1-s-)^2 (lhs24 + lhs25)).
    EXPECT_NEAR(r.ov_psi_at_s_minus, 1.0 / (r.lhs_23 * (r.lhs_24 + r.lhs_25_26)), 1e-12);
    EXPECT_NEAR(r.ov_beta_at_s_plus,
                inst.b / (r.ratio_27 * r.ratio_27 * inst.a + inst.b), 1e-12);
    EXPECT_TRUE(r.all_bounds_hold) << inst.n_items << " " << inst.n_marked;
  }
}

TEST(BoundReport, ExhaustiveSmallGrid) {
  for (std::uint64_t n = 2; n <= 256; ++n) {
    for (std::uint64_t m = 1; m <= n; ++m) {
      ASSERT_TRUE(bound_report(make_instance(n, m)).all_bounds_hold) << n << " " << m;
    }
  }
}

}  // namespace
}  // namespace padia

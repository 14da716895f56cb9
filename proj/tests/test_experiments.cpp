#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "reuse/experiments.hpp"

namespace reuse {
namespace {

TEST(Bounds, Values) {
  EXPECT_DOUBLE_EQ(bound_value(Bound::kTheorem1, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(bound_value(Bound::kTheorem1, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(bound_value(Bound::kTheorem2, 0.5), 0.75);
  EXPECT_DOUBLE_EQ(bound_value(Bound::kTheorem3General, 1.0, 0.5), 0.5);
  EXPECT_DOUBLE_EQ(bound_value(Bound::kTheorem3Geometric, 0.0, 1.0), 0.5);
  // Theorem 2 dominates Theorem 1 on [0, 1].
  for (double p = 0.0; p <= 1.0; p += 0.05) {
    EXPECT_GE(bound_value(Bound::kTheorem2, p), bound_value(Bound::kTheorem1, p) - 1e-15);
  }
}

TEST(Bounds, EvaluateReport) {
  const auto r = evaluate_bound(tight_example(0.5, 0.1), greedy_policy(), Bound::kTheorem2);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.ratio, 1.65 / 2.1, 1e-12);
  EXPECT_NEAR(r.margin, 1.65 / 2.1 - 0.75, 1e-12);
  EXPECT_FALSE(r.alpha.has_value());

  const auto bad = evaluate_bound(testing::finite_two(), greedy_policy(), Bound::kTheorem2);
  EXPECT_FALSE(bad.pass);
  EXPECT_FALSE(bad.error.empty());

  const auto a = evaluate_bound(testing::geometric_three(), alpha_threshold_policy(0.5),
                                Bound::kTheorem3Geometric);
  ASSERT_TRUE(a.alpha.has_value());
  EXPECT_NEAR(*a.alpha, 9.165596 / 12.655448, 1e-12);
  EXPECT_GE(*a.alpha, 0.5 - 1e-12);
  EXPECT_TRUE(a.pass);
}

TEST(Corpus, DeterministicAndBounded) {
  CorpusSpec spec;
  spec.max_resources = 3;
  spec.max_horizon = 5;
  spec.max_cells = 12;
  const auto a = make_corpus(spec, 50, 77);
  const auto b = make_corpus(spec, 50, 77);
  ASSERT_EQ(a.size(), 50u);
  EXPECT_EQ(a, b);
  for (const auto& inst : a) {
    EXPECT_LE(inst.size(), 3);
    EXPECT_LE(inst.horizon(), 5);
    EXPECT_LE(inst.size() * inst.horizon(), 12);
    EXPECT_TRUE(is_canonical(inst));
  }
}

TEST(Corpus, GreedyPassesBothTheoremsOnSmallCorpus) {
  CorpusSpec spec;
  const auto corpus = make_corpus(spec, 60, 3);
  EXPECT_TRUE(all_pass(verify_bounds(corpus, greedy_policy(), Bound::kTheorem2)));
  EXPECT_TRUE(all_pass(verify_bounds(corpus, greedy_policy(), Bound::kTheorem1)));
}

TEST(Sweep, TightExampleRows) {
  const std::vector<double> ps = {0.2, 0.8};
  const std::vector<double> ds = {0.1, 0.001};
  const auto rows = sweep_tight_example(ps, ds);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) {
    EXPECT_NEAR(r.opt, 2 + r.delta, 1e-12);
    EXPECT_NEAR(r.greedy, (1 + r.p) * (1 + r.delta), 1e-12);
    EXPECT_LE(r.difference, 1e-12);
    EXPECT_GE(r.gap, 0.0);
    EXPECT_LE(r.gap, r.delta);
  }
}

TEST(Search, DeterministicAndRespectsBound) {
  SearchParams sp;
  sp.n_resources = 2;
  sp.horizon = 3;
  sp.p_min = 0.4;
  const auto a = ratio_search(sp, 5, 150);
  const auto b = ratio_search(sp, 5, 150);
  ASSERT_FALSE(a.reports.empty());
  EXPECT_EQ(a.reports.front().ratio, b.reports.front().ratio);
  EXPECT_FALSE(a.counterexample);
  for (std::size_t k = 1; k < a.reports.size(); ++k) {
    EXPECT_LE(a.reports[k - 1].ratio, a.reports[k].ratio);
  }
  for (const auto& inst : a.instances) EXPECT_DOUBLE_EQ(p_min(inst), 0.4);
  EXPECT_GE(a.reports.front().ratio, 0.7 - 1e-9);
}

TEST(Search, NonReusableStaysAboveHalf) {
  SearchParams sp;
  sp.family = DistributionFamily::kNonReusable;
  sp.p_min = 0.0;
  sp.n_resources = 2;
  sp.horizon = 2;
  const auto r = ratio_search(sp, 1, 200);
  EXPECT_FALSE(r.counterexample);
  EXPECT_GE(r.reports.front().ratio, 0.5 - 1e-9);
}

}  // namespace
}  // namespace reuse

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "fmest/errors.hpp"
#include "fmest/estimator.hpp"
#include "fmest/isit.hpp"

using namespace fmest;

namespace {

// Direct evaluation of N(eps, p, K) = 3 + ceil(6 K log2(2 / (eps (p - 1/K)(1 - p)))).
long long reference_sum_Nk(int K, double eps) {
  long long total = 0;
  for (int k = 1; k <= K; ++k) {
    const double M = K + 2.0;
    const double p = (k + 1) / M;
    total += 3 + static_cast<long long>(std::ceil(6 * M * std::log2(2 / (eps * (p - 1 / M) * (1 - p)))));
  }
  return total;
}

}  // namespace

TEST(ClassParameters, FollowConstruction) {
  const std::vector<MiniParams> mini = class_parameters(10, 0.01);
  ASSERT_EQ(mini.size(), 10u);
  for (int k = 1; k <= 10; ++k) {
    const MiniParams& mp = mini[k - 1];
    EXPECT_DOUBLE_EQ(mp.p, (k + 1) / 12.0);
    EXPECT_DOUBLE_EQ(mp.q, k / 12.0);
    EXPECT_EQ(mp.N, isit::required_states(0.01, mp.p, 12));
    EXPECT_EQ(mp.s, isit::initial_state(mp.N, mp.p, mp.q));
  }
  // Middle class of K=10 has p = 6/12: same arithmetic as required_states(0.01, 0.5, 10)
  // but with K + 2 = 12 in place of 10.
  EXPECT_EQ(mini[4].N, 3 + static_cast<int>(std::ceil(72 * std::log2(2 / (0.01 * (5 / 12.0) * 0.5)))));
}

TEST(BuildEstimator, EstimatesForK3) {
  const ComposedEstimator est = build_estimator(3, 0.05);
  ASSERT_EQ(est.layout.estimates.size(), 3u);
  EXPECT_DOUBLE_EQ(est.layout.estimates[0], 0.2);
  EXPECT_DOUBLE_EQ(est.layout.estimates[1], 0.4);
  EXPECT_DOUBLE_EQ(est.layout.estimates[2], 0.6);
}

TEST(BuildEstimator, K10StructureAndCounts) {
  const ComposedEstimator est = build_estimator(10, 0.01);
  const Machine& m = est.machine;
  const ComposedLayout& L = est.layout;
  long long physical = 0;
  for (const MiniParams& mp : L.mini) physical += mp.N - 2;
  EXPECT_EQ(m.num_states(), physical);
  EXPECT_EQ(L.sum_Nk(), reference_sum_Nk(10, 0.01));
  const Diagnostics d = validate(m);
  EXPECT_TRUE(d.structural_ok);
  EXPECT_TRUE(d.strongly_connected);
  EXPECT_TRUE(check_nested_structure(m, L).empty());
  EXPECT_EQ(m.initial, L.entry[4]);  // entry of class ceil(10/2) = 5
}

TEST(BuildEstimator, PropertyLayoutInvariants) {
  for (int K : {2, 3, 4, 5, 8}) {
    for (double eps : {0.01, 0.1}) {
      const ComposedEstimator est = build_estimator(K, eps);
      const Machine& m = est.machine;
      const ComposedLayout& L = est.layout;
      ASSERT_EQ(L.K, K);
      // Ranges partition [1, S] in order, entries inside their range.
      StateIndex next = 1;
      for (int k = 1; k <= K; ++k) {
        const StateRange& r = L.class_ranges[k - 1];
        EXPECT_EQ(r.first, next);
        EXPECT_EQ(r.size(), L.mini[k - 1].N - 2);
        EXPECT_TRUE(r.contains(L.entry[k - 1]));
        EXPECT_EQ(L.entry[k - 1], r.first + L.mini[k - 1].s - 2);
        next = r.last + 1;
      }
      EXPECT_EQ(next, m.num_states() + 1);
      EXPECT_EQ(m.initial, L.entry[(K + 1) / 2 - 1]);
      // Estimates strictly increasing in (0,1), consistent with class_map.
      for (int k = 1; k < K; ++k) EXPECT_LT(L.estimates[k - 1], L.estimates[k]);
      EXPECT_GT(L.estimates.front(), 0.0);
      EXPECT_LT(L.estimates.back(), 1.0);
      EXPECT_EQ(m.class_map, L.class_map);
      for (StateIndex s = 1; s <= m.num_states(); ++s) {
        EXPECT_DOUBLE_EQ(m.estimate[s - 1], L.estimates[L.class_of(s) - 1]);
      }
      // Cross-class edges go to a neighbouring class's entry state, and
      // the boundary classes send both exits to their only neighbour.
      for (StateIndex s = 1; s <= m.num_states(); ++s) {
        const int from = L.class_of(s);
        for (StateIndex t : {m.next0[s - 1], m.next1[s - 1]}) {
          const int to = L.class_of(t);
          if (to == from) continue;
          EXPECT_EQ(std::abs(to - from), 1);
          EXPECT_EQ(t, L.entry[to - 1]);
          if (from == 1) EXPECT_EQ(to, 2);
          if (from == K) EXPECT_EQ(to, K - 1);
        }
      }
      EXPECT_TRUE(validate(m).strongly_connected);
    }
  }
}

TEST(BuildEstimator, MiddleClassRouting) {
  const ComposedEstimator est = build_estimator(4, 0.05);
  const ComposedLayout& L = est.layout;
  // From the entry of class 2, N-s ones exit right into class 3's entry and
  // s-1 zeros exit left into class 1's entry.
  const MiniParams& mp = L.mini[1];
  StateIndex s = L.entry[1];
  for (int i = 0; i < mp.N - mp.s; ++i) s = step(est.machine, s, 1);
  EXPECT_EQ(s, L.entry[2]);
  s = L.entry[1];
  for (int i = 0; i < mp.s - 1; ++i) s = step(est.machine, s, 0);
  EXPECT_EQ(s, L.entry[0]);
}

TEST(BuildEstimator, RejectsSmallK) {
  EXPECT_THROW(build_estimator(1, 0.01), DomainError);
  EXPECT_THROW(build_estimator(0, 0.01), DomainError);
  EXPECT_THROW(build_estimator(4, 0.5), DomainError);
  EXPECT_THROW(build_estimator(4, 0.0), DomainError);
}

TEST(StateBudget, Examples) {
  const StateBudget b10 = state_budget(10, 0.01);
  EXPECT_NEAR(b10.paper_bound, 864 * std::log2(2 * std::exp(1.0) / 0.01), 1e-9);
  EXPECT_NEAR(b10.paper_bound, 7851.0, 0.5);
  EXPECT_EQ(b10.sum_Nk, reference_sum_Nk(10, 0.01));
  EXPECT_EQ(b10.physical_S, b10.sum_Nk - 20);
  EXPECT_TRUE(b10.within_bound());

  const StateBudget b4 = state_budget(4, 0.1);
  EXPECT_NEAR(b4.paper_bound, 1245.2, 0.1);
  EXPECT_TRUE(b4.within_bound());
}

TEST(StateBudget, BoundIncreasesWithK) {
  for (int K = 2; K < 30; ++K) EXPECT_LT(state_budget(K, 0.01).paper_bound, state_budget(K + 1, 0.01).paper_bound);
}

TEST(StateBudget, HoldsForTheMachinesAnalysed) {
  for (int K = 2; K <= 12; ++K) EXPECT_TRUE(state_budget(K, 0.01).within_bound()) << K;
  for (int K = 2; K <= 8; ++K) EXPECT_TRUE(state_budget(K, 0.1).within_bound()) << K;
}

TEST(StateBudget, ExceededForLargeK) {
  // The budget is not a valid upper bound over the whole range; see the
  // acceptance suite for the full sweep.
  const StateBudget b = state_budget(30, 0.1);
  EXPECT_EQ(b.sum_Nk, reference_sum_Nk(30, 0.1));
  EXPECT_FALSE(b.within_bound());
}

TEST(ChooseK, Boundaries) {
  const long long cap10 = state_budget(10, 0.01).sum_Nk;
  EXPECT_EQ(choose_K(cap10, 0.01), 10);
  EXPECT_EQ(choose_K(cap10 - 1, 0.01), 9);
  EXPECT_THROW(choose_K(state_budget(2, 0.01).sum_Nk - 1, 0.01), DomainError);
  int prev = 2;
  for (long long cap = state_budget(2, 0.01).sum_Nk; cap < 20000; cap += 997) {
    const int K = choose_K(cap, 0.01);
    EXPECT_GE(K, prev);
    prev = K;
  }
}

TEST(Drift, InteriorClassesDecideCorrectly) {
  const int K = 6;
  const double eps = 0.01;
  for (const MiniParams& mp : class_parameters(K, eps)) {
    const isit::MiniChain c(mp.N, mp.s, mp.p, mp.q);
    for (int i = 1; i < 100; ++i) {
      const double theta = i / 100.0;
      if (theta > mp.p) EXPECT_GT(isit::exit_analysis(c, theta).prob_exit_right, 1 - eps);
      if (theta < mp.q) EXPECT_LT(isit::exit_analysis(c, theta).prob_exit_right, eps);
    }
  }
}

TEST(Monotonicity, StartStatesAndRunLengths) {
  for (int K : {4, 6, 8, 10, 16}) {
    const std::vector<MiniParams> mini = class_parameters(K, 0.01);
    for (std::size_t k = 1; k < mini.size(); ++k) {
      EXPECT_LE(mini[k].s, mini[k - 1].s);
      EXPECT_GE(mini[k].N - mini[k].s, mini[k - 1].N - mini[k - 1].s);
    }
  }
}

TEST(NestedStructure, DetectsEdgeBypassingEntry) {
  ComposedEstimator est = build_estimator(4, 0.1);
  const ComposedLayout& L = est.layout;
  // Redirect one exit of class 2 to a non-entry state of class 3.
  const StateIndex bad = L.entry[2] == L.class_ranges[2].first ? L.class_ranges[2].first + 1 : L.class_ranges[2].first;
  StateIndex s = L.entry[1];
  const MiniParams& mp = L.mini[1];
  for (int i = 0; i < mp.N - mp.s - 1; ++i) s = step(est.machine, s, 1);
  est.machine.next1[s - 1] = bad;
  EXPECT_FALSE(check_nested_structure(est.machine, L).empty());
}

TEST(NestedStructure, DetectsNonNeighbourJump) {
  ComposedEstimator est = build_estimator(5, 0.1);
  const ComposedLayout& L = est.layout;
  est.machine.next1[L.entry[0] - 1] = L.entry[3];
  EXPECT_FALSE(check_nested_structure(est.machine, L).empty());
}

TEST(InferLayout, RecoversComposedLayout) {
  const ComposedEstimator est = build_estimator(6, 0.05);
  const ComposedLayout L = infer_layout(est.machine, 0.05, est.layout.mini);
  EXPECT_EQ(L.K, 6);
  EXPECT_EQ(L.entry, est.layout.entry);
  EXPECT_EQ(L.class_map, est.layout.class_map);
  for (int k = 0; k < 6; ++k) {
    EXPECT_EQ(L.class_ranges[k].first, est.layout.class_ranges[k].first);
    EXPECT_EQ(L.class_ranges[k].last, est.layout.class_ranges[k].last);
    EXPECT_DOUBLE_EQ(L.estimates[k], est.layout.estimates[k]);
  }
}

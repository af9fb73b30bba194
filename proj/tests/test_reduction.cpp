#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fmest/errors.hpp"
#include "fmest/reduction.hpp"
#include "oracles.hpp"

using namespace fmest;

namespace {

// Random irreducible chain: a directed cycle through all states plus extra
// random edges, with random weights.
TransitionMatrix random_chain(int n, std::mt19937& gen) {
  std::uniform_real_distribution<double> w(0.05, 1.0);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<std::vector<Transition>> rows(n);
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<int, double>> out{{(i + 1) % n, w(gen)}};
    for (int e = 0; e < 2; ++e) out.emplace_back(pick(gen), w(gen));
    double total = 0.0;
    for (auto& [to, x] : out) total += x;
    for (auto& [to, x] : out) rows[i].push_back({to, x / total});
  }
  return TransitionMatrix(std::move(rows));
}

}  // namespace

TEST(Stationary, TwoStateClosedForm) {
  const double a = 0.3, b = 0.1;
  const TransitionMatrix tm({{{0, 1 - a}, {1, a}}, {{0, b}, {1, 1 - b}}});
  const std::vector<double> pi = reduction::stationary(tm);
  EXPECT_NEAR(pi[0], b / (a + b), 1e-15);
  EXPECT_NEAR(pi[1], a / (a + b), 1e-15);
}

TEST(Stationary, SingleState) {
  const TransitionMatrix tm({{{0, 1.0}}});
  EXPECT_EQ(reduction::stationary(tm), std::vector<double>{1.0});
}

TEST(Stationary, PropertyMatchesDenseSolve) {
  std::mt19937 gen(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 30;
    const TransitionMatrix tm = random_chain(n, gen);
    const std::vector<double> got = reduction::stationary(tm);
    const std::vector<double> ref = oracle::stationary(tm);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      EXPECT_NEAR(got[i], ref[i], 1e-12) << "n=" << n << " i=" << i;
      EXPECT_GE(got[i], 0.0);
      total += got[i];
    }
    EXPECT_NEAR(total, 1.0, 1e-14);
    EXPECT_LT(reduction::residual_l1(tm, got), 1e-13);
  }
}

TEST(Stationary, KeepsRelativeAccuracyForTinyEscape) {
  // State 0 leaves with probability 1e-300: pi_1 / pi_0 = 1e-300 / 0.5.
  const double tiny = 1e-300;
  const TransitionMatrix tm({{{0, 1 - tiny}, {1, tiny}}, {{0, 0.5}, {1, 0.5}}});
  const std::vector<double> pi = reduction::stationary(tm);
  EXPECT_DOUBLE_EQ(pi[0], 1.0);
  EXPECT_NEAR(pi[1] / 2e-300, 1.0, 1e-14);
}

TEST(Stationary, BirthDeathBeyondDoubleRange) {
  // Reflecting walk with up 0.001, down 0.999 on 400 states: the weights
  // span 1e-1200, far below the smallest double. Detailed balance gives
  // pi_{i+1} / pi_i = 0.001 / 0.999 exactly.
  const int n = 400;
  const double up = 0.001;
  std::vector<std::vector<Transition>> rows(n);
  for (int i = 0; i < n; ++i) {
    if (i + 1 < n) rows[i].push_back({i + 1, up});
    if (i > 0) rows[i].push_back({i - 1, 1 - up});
    const double stay = (i == 0 ? 1 - up : 0.0) + (i + 1 == n ? up : 0.0);
    if (stay > 0.0) rows[i].push_back({i, stay});
  }
  const std::vector<double> pi = reduction::stationary(TransitionMatrix(std::move(rows)));
  const double ratio = up / (1 - up);
  for (int i = 0; i < 50; ++i) EXPECT_NEAR(pi[i + 1] / pi[i], ratio, 1e-12 * ratio);
  EXPECT_NEAR(pi[0], 1 - ratio, 1e-14);
}

TEST(Absorb, GamblersRuin) {
  // Walk on 1..n-1, absorbed at 0 (index n-1) and n (index n); fair coin.
  const int n = 10;
  reduction::AbsorbingChain chain{n - 1, 2, std::vector<std::vector<Transition>>(n - 1)};
  auto idx = [&](int pos) { return pos == 0 ? n - 1 : pos == n ? n : pos - 1; };
  for (int pos = 1; pos < n; ++pos) chain.rows[pos - 1] = {{idx(pos - 1), 0.5}, {idx(pos + 1), 0.5}};
  for (int start = 1; start < n; ++start) {
    const reduction::Absorption a = reduction::absorb(chain, start - 1);
    EXPECT_NEAR(static_cast<double>(a.hit[1]), static_cast<double>(start) / n, 1e-14);
    EXPECT_NEAR(static_cast<double>(a.expected_steps), static_cast<double>(start) * (n - start), 1e-11);
  }
}

TEST(Absorb, PropertyMatchesFundamentalMatrix) {
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> w(0.05, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + trial % 20;
    const int m = 1 + trial % 3;
    std::uniform_int_distribution<int> pick(0, n + m - 1);
    reduction::AbsorbingChain chain{n, m, std::vector<std::vector<Transition>>(n)};
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n), R = Eigen::MatrixXd::Zero(n, m);
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<int, double>> out{{n + i % m, w(gen)}, {pick(gen), w(gen)}, {pick(gen), w(gen)}};
      double total = 0.0;
      for (auto& [to, x] : out) total += x;
      for (auto& [to, x] : out) {
        chain.rows[i].push_back({to, x / total});
        if (to < n) {
          Q(i, to) += x / total;
        } else {
          R(i, to - n) += x / total;
        }
      }
    }
    const int start = trial % n;
    const reduction::Absorption got = reduction::absorb(chain, start);
    const oracle::Absorbing ref = oracle::absorb(Q, R, start);
    for (int j = 0; j < m; ++j) EXPECT_NEAR(static_cast<double>(got.hit[j]), ref.hit[j], 1e-12);
    EXPECT_NEAR(static_cast<double>(got.expected_steps), ref.steps, 1e-10 * ref.steps);
  }
}

TEST(Absorb, RejectsUncertainAbsorption) {
  // State 0 -> 1 -> 0 never reaches the absorbing state 2.
  reduction::AbsorbingChain chain{2, 1, {{{1, 1.0}}, {{0, 1.0}}}};
  EXPECT_THROW(reduction::absorb(chain, 0), NumericalError);
}

TEST(Absorb, RejectsBadArguments) {
  reduction::AbsorbingChain chain{1, 1, {{{1, 1.0}}}};
  EXPECT_THROW(reduction::absorb(chain, 1), DomainError);
  chain.rows[0] = {{5, 1.0}};
  EXPECT_THROW(reduction::absorb(chain, 0), StructuralError);
}

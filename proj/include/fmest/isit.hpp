#pragma once

#include "fmest/machine.hpp"

// Run-counting hypothesis tester deciding {theta > p} against {theta < q}.
//
// Nominal states are 1..N. State s is neutral, s+j counts a run of j ones
// and s-j a run of j zeros. Completing a run of N-s ones (reaching N) exits
// right; completing a run of s-1 zeros (reaching 1) exits left. States 1 and
// N are virtual, so a built chain has N-2 physical states 2..N-1.
namespace fmest::isit {

enum class Side { Left, Right };

struct Successor {
  bool exits = false;
  Side side = Side::Left;  // meaningful when exits
  int state = 0;           // nominal state in 2..N-1 when !exits
};

class MiniChain {
 public:
  // Throws DomainError unless 0 < q < p < 1, N >= 4 and 2 <= s <= N-1.
  MiniChain(int N, int s, double p, double q);

  int N() const { return N_; }
  int s() const { return s_; }
  double p() const { return p_; }
  double q() const { return q_; }
  int interior_count() const { return N_ - 2; }
  int ones_to_exit() const { return N_ - s_; }
  int zeros_to_exit() const { return s_ - 1; }

  Successor next(int state, int bit) const;

 private:
  int N_;
  int s_;
  double p_;
  double q_;
};

struct ExitAnalysis {
  double theta = 0.0;
  double prob_exit_right = 0.0;
  double prob_exit_left = 0.0;
  double expected_decision_time = 0.0;
};

struct HypothesisErrors {
  double p01 = 0.0;  // decides right (H0) at theta = q
  double p10 = 0.0;  // decides left (H1) at theta = p
  double worst() const { return p01 > p10 ? p01 : p10; }
};

// s = 2 + round((N-3) log(pq) / (log p(1-p) + log q(1-q))), clamped to [2, N-1].
int initial_state(int N, double p, double q);

// N = 3 + ceil(6 K log2(2 / (eps (p - 1/K) (1 - p)))).
int required_states(double epsilon, double p, int K);

MiniChain build_isit(int N, double p, double q);

// Exit probabilities and expected decision time from the neutral state,
// by exact reduction of the absorbing chain on the N-2 physical states.
ExitAnalysis exit_analysis(const MiniChain& c, double theta);

// Closed-form exit probability, evaluated in the log domain.
double closed_form_exit(int N, int s, double theta, Side side);

// r(p,q) = (log p log(1-q) - log q log(1-p)) / (log p(1-p) + log q(1-q)).
double error_exponent(double p, double q);

// (2 / p_min) 2^{-r(p,q)(N-3)} with p_min = min{p(1-p), q(1-q)}.
double pe_upper_bound(int N, double p, double q, int K);

HypothesisErrors worst_error_over_hypothesis(const MiniChain& c);

}  // namespace fmest::isit

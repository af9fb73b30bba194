#pragma once

#include <cstdint>

#include "fmest/machine.hpp"

namespace fmest {

// Randomized S-state estimator with Binomial(S-1, theta) stationary law.
// States are 0..S-1 here: on input 1 the state moves up with probability
// (S-1-i)/(S-1), on input 0 down with probability i/(S-1); estimate i/(S-1).
struct RandomizedMachine {
  int S = 0;
  int initial = 0;

  double up_probability(int i) const { return static_cast<double>(S - 1 - i) / (S - 1); }
  double down_probability(int i) const { return static_cast<double>(i) / (S - 1); }
  double estimate(int i) const { return static_cast<double>(i) / (S - 1); }
};

RandomizedMachine build_samaniego(int S);

// Chain of the randomized machine under Bern(theta) input; row i is state i.
TransitionMatrix samaniego_transition_matrix(const RandomizedMachine& rm, double theta);

// theta (1 - theta) / (S - 1)
double samaniego_exact_risk(int S, double theta);

struct RandomizedSimResult {
  double empirical_risk = 0.0;
  double standard_error = 0.0;
};

// Time-averaged squared error over n steps. Input bits and internal coins
// come from one seeded stream.
RandomizedSimResult simulate_randomized(const RandomizedMachine& rm, double theta, std::uint64_t n,
                                        std::uint64_t seed);

}  // namespace fmest

#pragma once

#include <vector>

#include "fmest/machine.hpp"

// Exact solvers for finite Markov chains by state reduction (censoring).
//
// Eliminating a state v splices every path u -> v -> ... -> v -> w into a
// single edge u -> w. All updates are sums and products of non-negative
// quantities (the escape mass of v is the sum of its non-loop edges rather
// than 1 - P(v,v)), so relative accuracy survives chains whose exit
// probabilities are many orders of magnitude below machine epsilon.
namespace fmest::reduction {

// Working precision. The extended exponent range holds the ~1e-2400 exit
// probabilities and ~1e+2400 holding times of the K <= 10 estimators.
using Real = long double;

// Stationary distribution of an irreducible chain. Elimination order is
// greedy minimum fill (in-degree x out-degree); ties break on index, so the
// result is deterministic.
std::vector<double> stationary(const TransitionMatrix& tm);

// Chain with `transient` transient states 0..transient-1 followed by
// `absorbing` absorbing states. rows[i] lists the transitions of transient
// state i; targets >= transient are absorbing states.
struct AbsorbingChain {
  int transient = 0;
  int absorbing = 0;
  std::vector<std::vector<Transition>> rows;
};

struct Absorption {
  std::vector<Real> hit;  // probability of ending in each absorbing state
  Real expected_steps = 0.0;
};

// Hitting probabilities and expected absorption time from `start`.
// Throws NumericalError when absorption is not certain from `start`.
Absorption absorb(const AbsorbingChain& chain, int start);

// || pi P - pi ||_1
double residual_l1(const TransitionMatrix& tm, const std::vector<double>& pi);

}  // namespace fmest::reduction

#include "fmest/baselines.hpp"

#include <cmath>

#include "fmest/errors.hpp"
#include "fmest/rng.hpp"
#include "fmest/stats.hpp"

namespace fmest {

RandomizedMachine build_samaniego(int S) {
  if (S < 2) throw DomainError("Samaniego machine needs S >= 2");
  return {S, (S - 1) / 2};
}

TransitionMatrix samaniego_transition_matrix(const RandomizedMachine& rm, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw DomainError("theta must lie strictly inside (0,1)");
  std::vector<std::vector<Transition>> rows(rm.S);
  for (int i = 0; i < rm.S; ++i) {
    const double up = theta * rm.up_probability(i);
    const double down = (1.0 - theta) * rm.down_probability(i);
    const double stay = 1.0 - up - down;
    if (up > 0.0) rows[i].push_back({i + 1, up});
    if (down > 0.0) rows[i].push_back({i - 1, down});
    if (stay > 0.0) rows[i].push_back({i, stay});
  }
  return TransitionMatrix(std::move(rows), theta);
}

double samaniego_exact_risk(int S, double theta) {
  if (S < 2) throw DomainError("Samaniego machine needs S >= 2");
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("theta must lie in [0,1]");
  return theta * (1.0 - theta) / (S - 1);
}

RandomizedSimResult simulate_randomized(const RandomizedMachine& rm, double theta, std::uint64_t n,
                                        std::uint64_t seed) {
  if (n == 0) throw DomainError("simulate_randomized: n must be positive");
  SplitMix64 rng(seed);
  BatchMeans batches(n);
  int state = rm.initial;
  for (std::uint64_t t = 0; t < n; ++t) {
    if (rng.bernoulli(theta)) {
      if (rng.bernoulli(rm.up_probability(state))) ++state;
    } else {
      if (rng.bernoulli(rm.down_probability(state))) --state;
    }
    const double d = rm.estimate(state) - theta;
    batches.add(d * d);
  }
  return {batches.mean(), batches.standard_error()};
}

}  // namespace fmest

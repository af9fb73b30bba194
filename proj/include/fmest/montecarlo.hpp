#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fmest/machine.hpp"

namespace fmest {

struct SimConfig {
  double theta = 0.5;
  std::uint64_t steps = 0;    // total steps, burn-in included
  std::uint64_t burn_in = 0;  // must be < steps
  std::uint64_t seed = 0;
};

// 10 S steps.
std::uint64_t default_burn_in(const Machine& m);

// Classes come from m.class_map; a machine without one treats each state as
// its own class. Per-class vectors are indexed by class - 1.
struct SimResult {
  double empirical_risk = 0.0;
  std::vector<double> class_occupancy;
  std::vector<std::optional<double>> holding_time_means;  // absent: no completed run
  double standard_error = 0.0;                            // batch means, 100 batches
  std::uint64_t steps_used = 0;
  bool operator==(const SimResult&) const = default;
};

// Runs the machine from its initial state on a seeded Bern(theta) stream and
// averages (estimate - theta)^2 over the steps after burn-in.
SimResult simulate(const Machine& m, const SimConfig& cfg);

// Run statistics of the quantized process after burn-in. Only runs that both
// start and end inside the window count.
struct SampledStats {
  std::vector<std::optional<double>> visit_fraction;  // estimates mu_k
  std::vector<std::optional<double>> mean_holding;    // estimates E[T_k]
  std::uint64_t completed_runs = 0;
};

SampledStats empirical_sampled_stats(const Machine& m, const SimConfig& cfg);

// One task per theta; task i uses seed base_seed ^ i.
std::vector<SimResult> simulate_thetas(const Machine& m, const std::vector<double>& thetas,
                                       std::uint64_t steps, std::uint64_t burn_in, std::uint64_t base_seed);

}  // namespace fmest

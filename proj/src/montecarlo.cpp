#include "fmest/montecarlo.hpp"

#include <algorithm>

#include "fmest/errors.hpp"
#include "fmest/parallel.hpp"
#include "fmest/rng.hpp"
#include "fmest/stats.hpp"

namespace fmest {

namespace {

struct Trace {
  SimResult result;
  SampledStats sampled;
};

std::vector<int> class_labels(const Machine& m) {
  if (!m.class_map.empty()) return m.class_map;
  std::vector<int> labels(m.num_states());
  for (int i = 0; i < m.num_states(); ++i) labels[i] = i + 1;
  return labels;
}

Trace trace(const Machine& m, const SimConfig& cfg) {
  if (!(cfg.theta >= 0.0 && cfg.theta <= 1.0)) throw DomainError("simulate: theta must lie in [0,1]");
  if (cfg.burn_in >= cfg.steps) throw DomainError("simulate: burn_in must be smaller than steps");
  require_structurally_valid(m);

  const std::vector<int> labels = class_labels(m);
  const int K = *std::max_element(labels.begin(), labels.end());
  const std::uint64_t window = cfg.steps - cfg.burn_in;

  SplitMix64 rng(cfg.seed);
  StateIndex s = m.initial;
  for (std::uint64_t t = 0; t < cfg.burn_in; ++t) s = rng.bernoulli(cfg.theta) ? m.next1[s - 1] : m.next0[s - 1];

  BatchMeans batches(window);
  std::vector<std::uint64_t> visits(m.num_states(), 0);
  std::vector<std::uint64_t> occupancy(K, 0);
  std::vector<std::uint64_t> runs(K, 0);
  std::vector<std::uint64_t> run_steps(K, 0);
  int current = labels[s - 1];  // class just before the window
  std::uint64_t run_len = 0;
  bool censored = true;  // the first run began before the window
  std::uint64_t completed = 0;

  for (std::uint64_t t = 0; t < window; ++t) {
    s = rng.bernoulli(cfg.theta) ? m.next1[s - 1] : m.next0[s - 1];
    const int c = labels[s - 1];
    if (c != current) {
      if (!censored && run_len > 0) {
        ++runs[current - 1];
        run_steps[current - 1] += run_len;
        ++completed;
      }
      censored = false;
      current = c;
      run_len = 0;
    }
    ++run_len;
    ++occupancy[c - 1];
    ++visits[s - 1];
    const double d = m.estimate[s - 1] - cfg.theta;
    batches.add(d * d);
  }

  Trace out;
  SimResult& r = out.result;
  // Summed per state from visit counts, so a machine that never moves
  // reports its squared error exactly.
  for (StateIndex i = 1; i <= m.num_states(); ++i) {
    if (visits[i - 1] == 0) continue;
    const double d = m.estimate[i - 1] - cfg.theta;
    r.empirical_risk += static_cast<double>(visits[i - 1]) / static_cast<double>(window) * (d * d);
  }
  r.standard_error = batches.standard_error();
  r.steps_used = window;
  r.class_occupancy.resize(K);
  r.holding_time_means.resize(K);
  out.sampled.visit_fraction.resize(K);
  out.sampled.mean_holding.resize(K);
  out.sampled.completed_runs = completed;
  for (int k = 0; k < K; ++k) {
    r.class_occupancy[k] = static_cast<double>(occupancy[k]) / static_cast<double>(window);
    if (runs[k] > 0) {
      const double mean = static_cast<double>(run_steps[k]) / static_cast<double>(runs[k]);
      r.holding_time_means[k] = mean;
      out.sampled.mean_holding[k] = mean;
      out.sampled.visit_fraction[k] = static_cast<double>(runs[k]) / static_cast<double>(completed);
    }
  }
  return out;
}

}  // namespace

std::uint64_t default_burn_in(const Machine& m) { return 10ULL * static_cast<std::uint64_t>(m.num_states()); }

SimResult simulate(const Machine& m, const SimConfig& cfg) { return trace(m, cfg).result; }

SampledStats empirical_sampled_stats(const Machine& m, const SimConfig& cfg) { return trace(m, cfg).sampled; }

std::vector<SimResult> simulate_thetas(const Machine& m, const std::vector<double>& thetas,
                                       std::uint64_t steps, std::uint64_t burn_in, std::uint64_t base_seed) {
  std::vector<SimResult> out(thetas.size());
  parallel_for(thetas.size(), [&](std::size_t i) {
    out[i] = simulate(m, SimConfig{thetas[i], steps, burn_in, base_seed ^ static_cast<std::uint64_t>(i)});
  });
  return out;
}

}  // namespace fmest

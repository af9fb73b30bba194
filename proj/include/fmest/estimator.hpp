#pragma once

#include <vector>

#include "fmest/isit.hpp"
#include "fmest/machine.hpp"

namespace fmest {

struct MiniParams {
  int N = 0;
  int s = 0;
  double p = 0.0;
  double q = 0.0;
  bool operator==(const MiniParams&) const = default;
};

struct StateRange {
  StateIndex first = 0;
  StateIndex last = 0;
  int size() const { return last - first + 1; }
  bool contains(StateIndex s) const { return s >= first && s <= last; }
};

// Class structure of a composed estimator. Classes are numbered 1..K; the
// vectors below are indexed by class - 1.
struct ComposedLayout {
  int K = 0;
  double epsilon = 0.0;
  std::vector<StateRange> class_ranges;
  std::vector<StateIndex> entry;
  std::vector<int> class_map;  // per state, 1-based class
  std::vector<double> estimates;
  std::vector<MiniParams> mini;

  int physical_states() const { return static_cast<int>(class_map.size()); }
  long long sum_Nk() const;
  int class_of(StateIndex s) const { return class_map[s - 1]; }
};

struct ComposedEstimator {
  Machine machine;
  ComposedLayout layout;
};

// Per-class tester parameters: p_k = (k+1)/(K+2), q_k = k/(K+2),
// N_k = required_states(eps, p_k, K+2), s_k = initial_state(N_k, p_k, q_k).
std::vector<MiniParams> class_parameters(int K, double epsilon);

// Glues K mini-chains into one machine. Class k exits right to entry[k+1]
// and left to entry[k-1]; class 1 sends both exits to entry[2] and class K
// both exits to entry[K-1]. Class k estimates k/(K+2). The initial state is
// entry[ceil(K/2)].
ComposedEstimator compose_estimator(int K, double epsilon, const std::vector<MiniParams>& mini);

ComposedEstimator build_estimator(int K, double epsilon = 0.01);

struct StateBudget {
  long long sum_Nk = 0;
  long long physical_S = 0;
  double paper_bound = 0.0;  // 6 (K+2)^2 log2(2e / eps)
  bool within_bound() const { return static_cast<double>(sum_Nk) <= paper_bound; }
};

StateBudget state_budget(int K, double epsilon);

// Largest K whose sum_Nk fits in state_cap.
int choose_K(long long state_cap, double epsilon);

// Checks the nested structure: class ranges partition [1,S], cross-class
// edges land on entry states of neighbouring classes. Returns problems found.
std::vector<std::string> check_nested_structure(const Machine& m, const ComposedLayout& layout);

// Rebuilds a layout from a machine's class_map. Entry states are the targets
// of cross-class edges (or the initial state for a class nothing enters).
ComposedLayout infer_layout(const Machine& m, double epsilon, const std::vector<MiniParams>& mini);

}  // namespace fmest

#include "fmest/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fmest/errors.hpp"

namespace fmest {

long long ComposedLayout::sum_Nk() const {
  long long total = 0;
  for (const MiniParams& mp : mini) total += mp.N;
  return total;
}

std::vector<MiniParams> class_parameters(int K, double epsilon) {
  if (K < 2) throw DomainError("K must be at least 2");
  std::vector<MiniParams> out;
  out.reserve(K);
  for (int k = 1; k <= K; ++k) {
    const double p = static_cast<double>(k + 1) / (K + 2);
    const double q = static_cast<double>(k) / (K + 2);
    const int N = isit::required_states(epsilon, p, K + 2);
    out.push_back({N, isit::initial_state(N, p, q), p, q});
  }
  return out;
}

ComposedEstimator compose_estimator(int K, double epsilon, const std::vector<MiniParams>& mini) {
  if (K < 2) throw DomainError("K must be at least 2");
  if (static_cast<int>(mini.size()) != K) throw DomainError("need one mini-chain per class");

  ComposedLayout layout;
  layout.K = K;
  layout.epsilon = epsilon;
  layout.mini = mini;
  std::vector<isit::MiniChain> chains;
  StateIndex next_free = 1;
  for (int k = 1; k <= K; ++k) {
    const MiniParams& mp = mini[k - 1];
    chains.emplace_back(mp.N, mp.s, mp.p, mp.q);
    const StateRange range{next_free, next_free + mp.N - 3};
    layout.class_ranges.push_back(range);
    // Nominal state j of the mini-chain sits at range.first + (j - 2).
    layout.entry.push_back(range.first + mp.s - 2);
    layout.estimates.push_back(static_cast<double>(k) / (K + 2));
    next_free = range.last + 1;
  }
  const int S = next_free - 1;

  Machine m;
  m.next0.resize(S);
  m.next1.resize(S);
  m.estimate.resize(S);
  m.class_map.resize(S);
  for (int k = 1; k <= K; ++k) {
    const StateRange& range = layout.class_ranges[k - 1];
    const StateIndex right = layout.entry[(k == K ? K - 1 : k + 1) - 1];
    const StateIndex left = layout.entry[(k == 1 ? 2 : k - 1) - 1];
    const isit::MiniChain& c = chains[k - 1];
    for (int nominal = 2; nominal <= c.N() - 1; ++nominal) {
      const StateIndex state = range.first + nominal - 2;
      auto resolve = [&](const isit::Successor& succ) -> StateIndex {
        if (!succ.exits) return range.first + succ.state - 2;
        return succ.side == isit::Side::Right ? right : left;
      };
      m.next0[state - 1] = resolve(c.next(nominal, 0));
      m.next1[state - 1] = resolve(c.next(nominal, 1));
      m.estimate[state - 1] = layout.estimates[k - 1];
      m.class_map[state - 1] = k;
    }
  }
  m.initial = layout.entry[(K + 1) / 2 - 1];
  layout.class_map = m.class_map;
  return {std::move(m), std::move(layout)};
}

ComposedEstimator build_estimator(int K, double epsilon) {
  return compose_estimator(K, epsilon, class_parameters(K, epsilon));
}

StateBudget state_budget(int K, double epsilon) {
  StateBudget b;
  for (const MiniParams& mp : class_parameters(K, epsilon)) b.sum_Nk += mp.N;
  b.physical_S = b.sum_Nk - 2LL * K;
  b.paper_bound = 6.0 * (K + 2.0) * (K + 2.0) * std::log2(2.0 * std::numbers::e / epsilon);
  return b;
}

int choose_K(long long state_cap, double epsilon) {
  const long long minimum = state_budget(2, epsilon).sum_Nk;
  if (state_cap < minimum) {
    throw DomainError("state cap " + std::to_string(state_cap) +
                      " is below the minimum feasible cap " + std::to_string(minimum));
  }
  int K = 2;
  while (state_budget(K + 1, epsilon).sum_Nk <= state_cap) ++K;
  return K;
}

std::vector<std::string> check_nested_structure(const Machine& m, const ComposedLayout& layout) {
  std::vector<std::string> problems;
  const int S = m.num_states();
  const int K = layout.K;
  if (static_cast<int>(layout.class_map.size()) != S) {
    problems.push_back("class_map length differs from num_states");
    return problems;
  }
  if (static_cast<int>(layout.class_ranges.size()) != K || static_cast<int>(layout.entry.size()) != K) {
    problems.push_back("layout has the wrong number of classes");
    return problems;
  }
  StateIndex expect = 1;
  for (int k = 1; k <= K; ++k) {
    const StateRange& r = layout.class_ranges[k - 1];
    if (r.first != expect || r.last < r.first) {
      problems.push_back("class ranges do not partition [1,S] at class " + std::to_string(k));
    }
    if (!r.contains(layout.entry[k - 1])) {
      problems.push_back("entry state of class " + std::to_string(k) + " lies outside its range");
    }
    for (StateIndex s = r.first; s <= r.last && s <= S; ++s) {
      if (layout.class_map[s - 1] != k) {
        problems.push_back("class_map disagrees with class ranges at state " + std::to_string(s));
        break;
      }
    }
    expect = r.last + 1;
  }
  if (expect != S + 1) problems.push_back("class ranges do not cover [1,S]");
  if (!problems.empty()) return problems;

  for (StateIndex s = 1; s <= S; ++s) {
    const int from = layout.class_map[s - 1];
    for (StateIndex t : {m.next0[s - 1], m.next1[s - 1]}) {
      const int to = layout.class_map[t - 1];
      if (to == from) continue;
      if (t != layout.entry[to - 1]) {
        problems.push_back("edge " + std::to_string(s) + "->" + std::to_string(t) +
                           " enters class " + std::to_string(to) + " away from its entry state");
      }
      if (std::abs(to - from) != 1) {
        problems.push_back("edge " + std::to_string(s) + "->" + std::to_string(t) +
                           " skips past a neighbouring class");
      }
    }
  }
  return problems;
}

ComposedLayout infer_layout(const Machine& m, double epsilon, const std::vector<MiniParams>& mini) {
  const int S = m.num_states();
  if (static_cast<int>(m.class_map.size()) != S || S == 0) {
    throw StructuralError("machine carries no class_map");
  }
  ComposedLayout layout;
  layout.epsilon = epsilon;
  layout.mini = mini;
  layout.class_map = m.class_map;
  int K = 0;
  for (int c : m.class_map) K = std::max(K, c);
  layout.K = K;
  layout.class_ranges.assign(K, StateRange{});
  layout.entry.assign(K, 0);
  layout.estimates.assign(K, 0.0);
  for (StateIndex s = 1; s <= S; ++s) {
    const int k = m.class_map[s - 1];
    if (k < 1) throw StructuralError("class labels must be positive");
    StateRange& r = layout.class_ranges[k - 1];
    if (r.first == 0) r.first = s;
    r.last = s;
    layout.estimates[k - 1] = m.estimate[s - 1];
  }
  for (StateIndex s = 1; s <= S; ++s) {
    for (StateIndex t : {m.next0[s - 1], m.next1[s - 1]}) {
      const int to = m.class_map[t - 1];
      if (to != m.class_map[s - 1] && layout.entry[to - 1] == 0) layout.entry[to - 1] = t;
    }
  }
  const int start_class = m.class_map[m.initial - 1];
  if (layout.entry[start_class - 1] == 0) layout.entry[start_class - 1] = m.initial;
  for (int k = 1; k <= K; ++k) {
    if (layout.class_ranges[k - 1].first == 0) {
      throw StructuralError("class " + std::to_string(k) + " has no states");
    }
    if (layout.entry[k - 1] == 0) {
      throw StructuralError("class " + std::to_string(k) + " is never entered");
    }
  }
  return layout;
}

}  // namespace fmest

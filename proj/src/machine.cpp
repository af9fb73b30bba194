#include "fmest/machine.hpp"

#include <cmath>
#include <sstream>

#include "fmest/errors.hpp"

namespace fmest {

namespace {

bool valid_index(const Machine& m, StateIndex s) {
  return s >= 1 && s <= m.num_states();
}

// Iterative DFS over successors (forward) or predecessors (reverse) from
// `root`; returns the number of distinct states visited.
int count_reachable(const std::vector<std::vector<int>>& adj, int root) {
  std::vector<char> seen(adj.size(), 0);
  std::vector<int> stack{root};
  seen[root] = 1;
  int visited = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++visited;
        stack.push_back(w);
      }
    }
  }
  return visited;
}

}  // namespace

StateIndex step(const Machine& m, StateIndex state, int bit) {
  if (!valid_index(m, state)) {
    throw StructuralError("step: state " + std::to_string(state) +
                          " outside [1," + std::to_string(m.num_states()) + "]");
  }
  if (bit != 0 && bit != 1) {
    throw DomainError("step: input bit must be 0 or 1");
  }
  return bit ? m.next1[state - 1] : m.next0[state - 1];
}

std::vector<StateIndex> run_from(const Machine& m, StateIndex start,
                                 std::span<const std::uint8_t> bits) {
  require_structurally_valid(m);
  if (!valid_index(m, start)) {
    throw StructuralError("run: start state out of range");
  }
  std::vector<StateIndex> trajectory;
  trajectory.reserve(bits.size());
  StateIndex s = start;
  for (std::uint8_t b : bits) {
    s = b ? m.next1[s - 1] : m.next0[s - 1];
    trajectory.push_back(s);
  }
  return trajectory;
}

std::vector<StateIndex> run(const Machine& m, std::span<const std::uint8_t> bits) {
  return run_from(m, m.initial, bits);
}

Diagnostics validate(const Machine& m) {
  Diagnostics d;
  const int S = m.num_states();
  auto complain = [&](const std::string& msg) { d.problems.push_back(msg); };

  if (S == 0) complain("num_states must be positive");
  if (static_cast<int>(m.next0.size()) != S) complain("next0 length differs from num_states");
  if (static_cast<int>(m.next1.size()) != S) complain("next1 length differs from num_states");
  if (!m.class_map.empty() && static_cast<int>(m.class_map.size()) != S) {
    complain("class_map length differs from num_states");
  }
  for (int i = 0; i < static_cast<int>(m.next0.size()); ++i) {
    if (!valid_index(m, m.next0[i])) {
      complain("next0[" + std::to_string(i + 1) + "] = " + std::to_string(m.next0[i]) + " out of range");
    }
  }
  for (int i = 0; i < static_cast<int>(m.next1.size()); ++i) {
    if (!valid_index(m, m.next1[i])) {
      complain("next1[" + std::to_string(i + 1) + "] = " + std::to_string(m.next1[i]) + " out of range");
    }
  }
  for (int i = 0; i < S; ++i) {
    const double e = m.estimate[i];
    if (!(e >= 0.0 && e <= 1.0)) {
      complain("estimate[" + std::to_string(i + 1) + "] outside [0,1]");
    }
  }
  if (!valid_index(m, m.initial)) complain("initial state out of range");

  d.structural_ok = d.problems.empty();
  if (!d.structural_ok) return d;

  std::vector<std::vector<int>> fwd(S), rev(S);
  for (int i = 0; i < S; ++i) {
    for (StateIndex t : {m.next0[i], m.next1[i]}) {
      fwd[i].push_back(t - 1);
      rev[t - 1].push_back(i);
    }
  }
  d.reachable_from_initial = count_reachable(fwd, m.initial - 1) == S;
  // One SCC iff every state reaches state 1 and state 1 reaches every state.
  d.strongly_connected = count_reachable(fwd, 0) == S && count_reachable(rev, 0) == S;
  return d;
}

void require_structurally_valid(const Machine& m) {
  const Diagnostics d = validate(m);
  if (!d.structural_ok) throw StructuralError("invalid machine: " + d.problems.front());
}

TransitionMatrix::TransitionMatrix(std::vector<std::vector<Transition>> rows, double theta)
    : theta_(theta) {
  row_start_.reserve(rows.size() + 1);
  const int n = static_cast<int>(rows.size());
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (const Transition& t : rows[i]) {
      if (t.to < 0 || t.to >= n) {
        throw StructuralError("transition matrix row " + std::to_string(i) + " has column out of range");
      }
      if (!(t.prob >= 0.0)) {
        throw DomainError("transition matrix row " + std::to_string(i) + " has a negative entry");
      }
      sum += t.prob;
      entries_.push_back(t);
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      std::ostringstream os;
      os << "transition matrix row " << i << " sums to " << sum;
      throw DomainError(os.str());
    }
    row_start_.push_back(entries_.size());
  }
}

std::vector<double> TransitionMatrix::left_multiply(std::span<const double> pi) const {
  std::vector<double> out(dimension(), 0.0);
  for (int i = 0; i < dimension(); ++i) {
    for (const Transition& t : row(i)) out[t.to] += pi[i] * t.prob;
  }
  return out;
}

TransitionMatrix transition_matrix(const Machine& m, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) {
    throw DomainError("transition_matrix: theta must lie strictly inside (0,1)");
  }
  require_structurally_valid(m);
  const int S = m.num_states();
  std::vector<std::vector<Transition>> rows(S);
  for (int i = 0; i < S; ++i) {
    const int zero = m.next0[i] - 1;
    const int one = m.next1[i] - 1;
    if (zero == one) {
      rows[i] = {{zero, 1.0}};
    } else {
      rows[i] = {{zero, 1.0 - theta}, {one, theta}};
    }
  }
  return TransitionMatrix(std::move(rows), theta);
}

}  // namespace fmest

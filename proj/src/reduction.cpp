#include "fmest/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>
#include <string>

#include "fmest/errors.hpp"

namespace fmest::reduction {

namespace {

// p: probability of taking the edge as the next macro-step.
// m: p times the expected number of original steps the edge spans.
struct Edge {
  int to;
  Real p;
  Real m;
};

struct Record {
  int state;
  Real escape;
  std::vector<std::pair<int, Real>> inflow;
};

class Reducer {
 public:
  Reducer(int nodes, bool track_time) : out_(nodes), in_(nodes), alive_(nodes, 1),
                                        version_(nodes, 0), track_time_(track_time) {}

  void add(int from, int to, Real p) {
    if (p <= 0.0) return;
    if (Edge* e = find(from, to)) {
      e->p += p;
      e->m += p;
      return;
    }
    out_[from].push_back({to, p, p});
    if (to != from) in_[to].push_back(from);
  }

  // Eliminates every node for which `eliminable` holds, cheapest first.
  template <class Pred, class OnRecord>
  void reduce(Pred eliminable, OnRecord on_record) {
    using Item = std::tuple<long long, int, unsigned>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    const int n = static_cast<int>(out_.size());
    for (int v = 0; v < n; ++v) {
      if (eliminable(v)) heap.emplace(cost(v), v, version_[v]);
    }
    std::vector<int> touched;
    while (!heap.empty()) {
      auto [c, v, ver] = heap.top();
      heap.pop();
      if (!alive_[v] || ver != version_[v] || !eliminable(v)) continue;
      touched.clear();
      on_record(eliminate(v, touched));
      for (int t : touched) {
        if (alive_[t] && eliminable(t)) {
          ++version_[t];
          heap.emplace(cost(t), t, version_[t]);
        }
      }
    }
  }

  const std::vector<Edge>& out(int v) const { return out_[v]; }
  bool alive(int v) const { return alive_[v] != 0; }

 private:
  Edge* find(int from, int to) {
    for (Edge& e : out_[from]) {
      if (e.to == to) return &e;
    }
    return nullptr;
  }

  long long cost(int v) const {
    long long outdeg = 0;
    for (const Edge& e : out_[v]) outdeg += (e.to != v);
    return static_cast<long long>(in_[v].size()) * outdeg;
  }

  static void erase_value(std::vector<int>& xs, int value) {
    auto it = std::find(xs.begin(), xs.end(), value);
    if (it != xs.end()) {
      *it = xs.back();
      xs.pop_back();
    }
  }

  Record eliminate(int v, std::vector<int>& touched) {
    Real loop_m = 0.0;
    Real escape = 0.0;
    std::vector<Edge> exits;
    for (const Edge& e : out_[v]) {
      if (e.to == v) {
        loop_m = e.m;
      } else {
        exits.push_back(e);
        escape += e.p;
      }
    }
    if (!(escape > 0.0)) {
      throw NumericalError("state reduction: state " + std::to_string(v) +
                               " has no escape mass (closed class or underflow)",
                           static_cast<double>(escape));
    }

    Record rec{v, escape, {}};
    const std::vector<int> preds = in_[v];
    for (int u : preds) {
      auto& row = out_[u];
      auto it = std::find_if(row.begin(), row.end(), [v](const Edge& e) { return e.to == v; });
      const Edge into = *it;
      row.erase(it);
      rec.inflow.emplace_back(u, into.p);
      for (const Edge& w : exits) {
        // Divide first so intermediates stay in range.
        const Real share = w.p / escape;
        const Real p = into.p * share;
        Real m = 0.0;
        if (track_time_) {
          m = into.m * share + into.p * (w.m / escape) + p * (loop_m / escape);
        }
        if (Edge* e = find(u, w.to)) {
          e->p += p;
          e->m += m;
        } else {
          row.push_back({w.to, p, m});
          if (w.to != u) in_[w.to].push_back(u);
        }
      }
      touched.push_back(u);
    }
    for (const Edge& w : exits) {
      erase_value(in_[w.to], v);
      touched.push_back(w.to);
    }
    alive_[v] = 0;
    out_[v].clear();
    in_[v].clear();
    return rec;
  }

  std::vector<std::vector<Edge>> out_;
  std::vector<std::vector<int>> in_;
  std::vector<char> alive_;
  std::vector<unsigned> version_;
  bool track_time_;
};

}  // namespace

std::vector<double> stationary(const TransitionMatrix& tm) {
  const int n = tm.dimension();
  if (n == 0) return {};
  Reducer red(n, false);
  for (int i = 0; i < n; ++i) {
    for (const Transition& t : tm.row(i)) red.add(i, t.to, t.prob);
  }
  std::vector<Record> records;
  records.reserve(n);
  int remaining = n;
  // Keep the final survivor: stop eliminating once one state is left.
  red.reduce([&](int) { return remaining > 1; },
             [&](Record&& r) {
               records.push_back(std::move(r));
               --remaining;
             });

  std::vector<Real> w(n, 0.0);
  for (int v = 0; v < n; ++v) {
    if (red.alive(v)) w[v] = 1.0;
  }
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    Real acc = 0.0;
    for (auto [u, p] : it->inflow) acc += w[u] * p;
    w[it->state] = acc / it->escape;
    // The survivor may be a rare state; rescale before weights overflow.
    if (w[it->state] > 1e1000L) {
      const Real scale = 1.0L / w[it->state];
      for (Real& x : w) x *= scale;
    }
  }
  Real total = 0.0;
  for (Real x : w) total += x;
  if (!std::isfinite(total) || !(total > 0.0)) {
    throw NumericalError("state reduction: stationary weights left the long double range", 0.0);
  }
  std::vector<double> pi(n);
  for (int v = 0; v < n; ++v) pi[v] = static_cast<double>(w[v] / total);
  return pi;
}

Absorption absorb(const AbsorbingChain& chain, int start) {
  const int n = chain.transient;
  if (start < 0 || start >= n) throw DomainError("absorb: start state is not transient");
  if (static_cast<int>(chain.rows.size()) != n) {
    throw StructuralError("absorb: row count differs from transient state count");
  }
  Reducer red(n + chain.absorbing, true);
  for (int i = 0; i < n; ++i) {
    for (const Transition& t : chain.rows[i]) {
      if (t.to < 0 || t.to >= n + chain.absorbing) {
        throw StructuralError("absorb: transition target out of range");
      }
      red.add(i, t.to, t.prob);
    }
  }
  red.reduce([&](int v) { return v < n && v != start; }, [](Record&&) {});

  Real escape = 0.0;
  Real loop_m = 0.0;
  Real exit_m = 0.0;
  Absorption result;
  result.hit.assign(chain.absorbing, 0.0);
  for (const Edge& e : red.out(start)) {
    if (e.to == start) {
      loop_m = e.m;
    } else {
      escape += e.p;
      exit_m += e.m;
    }
  }
  if (!(escape > 0.0)) {
    throw NumericalError("absorb: absorption from start state is not certain", static_cast<double>(escape));
  }
  for (const Edge& e : red.out(start)) {
    if (e.to != start) result.hit[e.to - n] = e.p / escape;
  }
  result.expected_steps = (loop_m + exit_m) / escape;
  return result;
}

double residual_l1(const TransitionMatrix& tm, const std::vector<double>& pi) {
  const std::vector<double> next = tm.left_multiply(pi);
  double r = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) r += std::abs(next[i] - pi[i]);
  return r;
}

}  // namespace fmest::reduction

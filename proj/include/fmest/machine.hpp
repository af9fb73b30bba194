#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fmest {

// States are numbered 1..S everywhere a state index crosses an API
// boundary (machine tables, trajectories, class ranges, files).
using StateIndex = std::int32_t;

// A deterministic finite-state estimator: on input bit b the state moves
// along next0/next1, and the current estimate is estimate[state].
// Vector position i describes state i+1.
struct Machine {
  std::vector<StateIndex> next0;
  std::vector<StateIndex> next1;
  std::vector<double> estimate;
  StateIndex initial = 1;
  // Optional class label (1..K) per state; populated for composed machines.
  std::vector<int> class_map;

  int num_states() const { return static_cast<int>(estimate.size()); }
  bool operator==(const Machine&) const = default;
};

struct Diagnostics {
  bool structural_ok = false;
  bool strongly_connected = false;
  bool reachable_from_initial = false;
  std::vector<std::string> problems;
};

StateIndex step(const Machine& m, StateIndex state, int bit);

// trajectory[n] is the state after consuming bits[0..n].
std::vector<StateIndex> run(const Machine& m, std::span<const std::uint8_t> bits);
std::vector<StateIndex> run_from(const Machine& m, StateIndex start,
                                 std::span<const std::uint8_t> bits);

Diagnostics validate(const Machine& m);

// Throws StructuralError carrying the first problem validate() finds.
void require_structurally_valid(const Machine& m);

// Sparse row-stochastic matrix, rows and columns 0-based (row i is state i+1).
struct Transition {
  int to;
  double prob;
};

class TransitionMatrix {
 public:
  TransitionMatrix() = default;
  // Rows must be stochastic within 1e-12 with non-negative entries.
  explicit TransitionMatrix(std::vector<std::vector<Transition>> rows,
                            double theta = 0.0);

  int dimension() const { return static_cast<int>(row_start_.size()) - 1; }
  double theta() const { return theta_; }
  std::span<const Transition> row(int i) const {
    return {entries_.data() + row_start_[i],
            entries_.data() + row_start_[i + 1]};
  }
  std::size_t nonzeros() const { return entries_.size(); }

  // pi * P
  std::vector<double> left_multiply(std::span<const double> pi) const;

 private:
  std::vector<std::size_t> row_start_{0};
  std::vector<Transition> entries_;
  double theta_ = 0.0;
};

// Chain induced by i.i.d. Bern(theta) inputs; theta strictly inside (0,1).
TransitionMatrix transition_matrix(const Machine& m, double theta);

}  // namespace fmest

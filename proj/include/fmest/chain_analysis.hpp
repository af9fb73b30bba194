#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fmest/estimator.hpp"
#include "fmest/machine.hpp"

namespace fmest {

// Stationary law of an irreducible chain (index i is state i+1). Throws
// NumericalError if ||pi P - pi||_1 exceeds kStationaryResidualTol.
inline constexpr double kStationaryResidualTol = 1e-12;
std::vector<double> stationary_distribution(const TransitionMatrix& tm);

// Aggregates a state distribution by class (index k-1 is class k).
std::vector<double> class_distribution(std::span<const double> pi, const ComposedLayout& layout);

// sum_k pi_k (estimate_k - theta)^2
double risk_from_classes(std::span<const double> pi_class, std::span<const double> estimates, double theta);

double exact_risk(const Machine& m, const ComposedLayout& layout, double theta);

// Quantities of the sampled (run-start) process of a nested machine.
// Vectors are indexed by class - 1. Extended precision because holding
// times near the ends of [0,1] exceed the double range.
struct SampledAnalysis {
  double theta = 0.0;
  std::vector<long double> p;        // leaves class k upward
  std::vector<long double> q;        // leaves class k downward
  std::vector<long double> mu;       // stationary law of the sampled chain
  std::vector<long double> holding;  // E[T_k], expected steps per visit
  std::vector<double> pi;            // E[T_k] mu_k / sum_j E[T_j] mu_j
  int K() const { return static_cast<int>(p.size()); }
};

// Throws DomainError if the machine lacks the nested structure.
SampledAnalysis sampled_analysis(const Machine& m, const ComposedLayout& layout, double theta);

// Stationary law of the birth-death chain moving up from k with prob up[k]
// and down with prob down[k]. Solved outward from the mode by flow balance,
// so tiny ratios never overflow.
std::vector<long double> birth_death_stationary(std::span<const long double> up, std::span<const long double> down);

// Classes k (1-based) whose bracket [k/(K+2), (k+1)/(K+2)] contains theta:
// empty in the two boundary brackets, two classes at a shared endpoint.
std::vector<int> bracket_classes(double theta, int K);

// mu_{k-i} <= mu_{k-1} r^{i-1} and mu_{k+i} <= mu_{k+1} r^{i-1}, r = eps/(1-eps).
bool lemma3_check(const SampledAnalysis& sa, int k, double epsilon);

// E[T_j] >= (1-eps) E[T_i] for i > j when theta < j/(K+2), and for i < j
// when theta > (j+1)/(K+2).
bool lemma4_check(const SampledAnalysis& sa, double epsilon);

// || pi_class - sa.pi ||_1
double lemma1_gap(const SampledAnalysis& sa, std::span<const double> pi_class);

struct GridSpec {
  double step = 0.0;  // 0 selects 1/(8(K+2))
  double lo = 1e-3;
  double hi = 1.0 - 1e-3;
  bool class_points = true;  // add k/(K+2) and bracket midpoints

  std::string describe(int K) const;
};

std::vector<double> theta_grid(int K, const GridSpec& spec);

struct RiskReport {
  std::vector<double> theta_grid;
  std::vector<double> risk;
  double worst = 0.0;
  double worst_theta = 0.0;
  long long S_physical = 0;
  long long sum_Nk = 0;
  double normalized = 0.0;  // worst * sum_Nk
  bool bound600 = false;
  std::string grid_spec;
};

// Evaluates exact_risk over the grid (in parallel). The maximum is a grid
// maximum, not a certified supremum.
RiskReport worst_case_risk(const Machine& m, const ComposedLayout& layout, const GridSpec& spec = {});

// Risk at theta in {0,1}: average squared error over the cycle reached by
// the constant input stream from the initial state.
double endpoint_orbit_risk(const Machine& m, double theta);

// Probability flow out of `cut` equals flow into it, within 1e-10.
bool cut_flow_check(std::span<const double> pi, const TransitionMatrix& tm,
                    std::span<const StateIndex> cut);

// Everything the analyze command reports at one theta in (0,1).
struct ThetaAnalysis {
  double theta = 0.0;
  double risk = 0.0;
  double residual = 0.0;
  std::vector<double> pi_class;
  SampledAnalysis sampled;
  double lemma1_gap = 0.0;
  std::optional<bool> lemma3;  // absent in the boundary brackets
  bool lemma4 = false;
  bool cut_flow = false;
};

ThetaAnalysis analyze_theta(const Machine& m, const ComposedLayout& layout, double theta);

}  // namespace fmest

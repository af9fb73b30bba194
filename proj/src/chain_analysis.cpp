#include "fmest/chain_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fmest/errors.hpp"
#include "fmest/parallel.hpp"
#include "fmest/reduction.hpp"

namespace fmest {

namespace {

void require_open_theta(double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw DomainError("theta must lie strictly inside (0,1)");
}

double bracket_point(int k, int K) { return static_cast<double>(k) / (K + 2); }

}  // namespace

std::vector<double> stationary_distribution(const TransitionMatrix& tm) {
  std::vector<double> pi = reduction::stationary(tm);
  const double r = reduction::residual_l1(tm, pi);
  if (!(r <= kStationaryResidualTol)) {
    std::ostringstream os;
    os << "stationary solve residual " << r << " exceeds " << kStationaryResidualTol;
    throw NumericalError(os.str(), r);
  }
  return pi;
}

std::vector<double> class_distribution(std::span<const double> pi, const ComposedLayout& layout) {
  std::vector<double> out(layout.K, 0.0);
  for (std::size_t i = 0; i < pi.size(); ++i) out[layout.class_map[i] - 1] += pi[i];
  return out;
}

double risk_from_classes(std::span<const double> pi_class, std::span<const double> estimates, double theta) {
  double r = 0.0;
  for (std::size_t k = 0; k < pi_class.size(); ++k) {
    const double d = estimates[k] - theta;
    r += pi_class[k] * d * d;
  }
  return r;
}

double exact_risk(const Machine& m, const ComposedLayout& layout, double theta) {
  require_open_theta(theta);
  const std::vector<double> pi = stationary_distribution(transition_matrix(m, theta));
  return risk_from_classes(class_distribution(pi, layout), layout.estimates, theta);
}

std::vector<long double> birth_death_stationary(std::span<const long double> up, std::span<const long double> down) {
  const int K = static_cast<int>(up.size());
  if (K == 0 || static_cast<int>(down.size()) != K) throw DomainError("birth_death_stationary: size mismatch");
  // First pass in the log domain only locates the mode.
  std::vector<long double> logw(K, 0.0);
  for (int i = 1; i < K; ++i) {
    const long double f = up[i - 1];
    const long double b = down[i];
    if (f == 0.0 && b == 0.0) {
      throw NumericalError("birth-death chain splits between classes " + std::to_string(i) +
                               " and " + std::to_string(i + 1), 0.0);
    }
    if (b == 0.0) {
      std::fill(logw.begin(), logw.begin() + i, -HUGE_VAL);
      logw[i] = 0.0;
    } else if (f == 0.0) {
      logw[i] = -HUGE_VAL;
    } else {
      logw[i] = logw[i - 1] + std::log(f) - std::log(b);
    }
  }
  const int mode = static_cast<int>(std::max_element(logw.begin(), logw.end()) - logw.begin());
  std::vector<long double> w(K, 0.0);
  w[mode] = 1.0;
  for (int i = mode + 1; i < K; ++i) {
    w[i] = down[i] > 0.0 ? w[i - 1] * up[i - 1] / down[i] : 0.0;
  }
  for (int i = mode - 1; i >= 0; --i) {
    w[i] = up[i] > 0.0 ? w[i + 1] * down[i + 1] / up[i] : 0.0;
  }
  long double total = 0.0;
  for (long double x : w) total += x;
  for (long double& x : w) x /= total;
  return w;
}

SampledAnalysis sampled_analysis(const Machine& m, const ComposedLayout& layout, double theta) {
  require_open_theta(theta);
  if (const auto problems = check_nested_structure(m, layout); !problems.empty()) {
    throw DomainError("machine lacks nested structure: " + problems.front());
  }
  const int K = layout.K;
  SampledAnalysis sa;
  sa.theta = theta;
  sa.p.resize(K);
  sa.q.resize(K);
  sa.holding.resize(K);
  for (int k = 1; k <= K; ++k) {
    const StateRange& range = layout.class_ranges[k - 1];
    const int n = range.size();
    constexpr int kDown = 0, kUp = 1;
    reduction::AbsorbingChain chain{n, 2, std::vector<std::vector<Transition>>(n)};
    auto target = [&](StateIndex t) {
      const int c = layout.class_of(t);
      if (c == k) return static_cast<int>(t - range.first);
      return n + (c > k ? kUp : kDown);
    };
    for (StateIndex s = range.first; s <= range.last; ++s) {
      chain.rows[s - range.first] = {{target(m.next0[s - 1]), 1.0 - theta},
                                     {target(m.next1[s - 1]), theta}};
    }
    const reduction::Absorption a = reduction::absorb(chain, layout.entry[k - 1] - range.first);
    sa.p[k - 1] = a.hit[kUp];
    sa.q[k - 1] = a.hit[kDown];
    sa.holding[k - 1] = a.expected_steps;
  }
  sa.mu = birth_death_stationary(sa.p, sa.q);
  sa.pi.resize(K);
  long double total = 0.0;
  for (int k = 0; k < K; ++k) total += sa.holding[k] * sa.mu[k];
  if (!std::isfinite(total)) throw NumericalError("sampled_analysis: holding times overflow", 0.0);
  for (int k = 0; k < K; ++k) sa.pi[k] = static_cast<double>(sa.holding[k] * sa.mu[k] / total);
  return sa;
}

std::vector<int> bracket_classes(double theta, int K) {
  std::vector<int> out;
  for (int k = 1; k <= K; ++k) {
    if (theta >= bracket_point(k, K) && theta <= bracket_point(k + 1, K)) out.push_back(k);
  }
  return out;
}

bool lemma3_check(const SampledAnalysis& sa, int k, double epsilon) {
  const int K = sa.K();
  if (k < 1 || k > K || sa.theta < bracket_point(k, K) || sa.theta > bracket_point(k + 1, K)) {
    throw DomainError("lemma3_check: theta outside the bracket of class " + std::to_string(k));
  }
  const long double r = epsilon / (1.0L - epsilon);
  auto mu = [&](int j) { return sa.mu[j - 1]; };
  for (int i = 1; i <= k - 1; ++i) {
    if (mu(k - i) > mu(k - 1) * std::pow(r, i - 1)) return false;
  }
  for (int i = 1; i <= K - k; ++i) {
    if (mu(k + i) > mu(k + 1) * std::pow(r, i - 1)) return false;
  }
  return true;
}

bool lemma4_check(const SampledAnalysis& sa, double epsilon) {
  const int K = sa.K();
  auto T = [&](int j) { return sa.holding[j - 1]; };
  for (int j = 1; j <= K; ++j) {
    if (sa.theta < bracket_point(j, K)) {
      for (int i = j + 1; i <= K; ++i) {
        if (T(j) < (1.0L - epsilon) * T(i)) return false;
      }
    }
    if (sa.theta > bracket_point(j + 1, K)) {
      for (int i = 1; i < j; ++i) {
        if (T(j) < (1.0L - epsilon) * T(i)) return false;
      }
    }
  }
  return true;
}

double lemma1_gap(const SampledAnalysis& sa, std::span<const double> pi_class) {
  double gap = 0.0;
  for (std::size_t k = 0; k < pi_class.size(); ++k) gap += std::abs(pi_class[k] - sa.pi[k]);
  return gap;
}

std::string GridSpec::describe(int K) const {
  std::ostringstream os;
  os.precision(17);
  os << "uniform step " << (step > 0.0 ? step : 1.0 / (8.0 * (K + 2))) << " over [" << lo << ", " << hi << "]";
  if (class_points) os << " plus k/(K+2) and bracket midpoints";
  return os.str();
}

std::vector<double> theta_grid(int K, const GridSpec& spec) {
  if (!(spec.lo > 0.0 && spec.hi < 1.0 && spec.lo <= spec.hi)) {
    throw DomainError("grid bounds must satisfy 0 < lo <= hi < 1");
  }
  const double step = spec.step > 0.0 ? spec.step : 1.0 / (8.0 * (K + 2));
  std::vector<double> grid;
  const long count = static_cast<long>(std::floor((spec.hi - spec.lo) / step + 1e-9));
  for (long i = 0; i <= count; ++i) grid.push_back(spec.lo + static_cast<double>(i) * step);
  if (grid.back() < spec.hi) grid.push_back(spec.hi);
  if (spec.class_points) {
    for (int k = 1; k <= K + 1; ++k) grid.push_back(bracket_point(k, K));
    for (int k = 0; k <= K + 1; ++k) grid.push_back((k + 0.5) / (K + 2));
  }
  std::erase_if(grid, [&](double t) { return t < spec.lo || t > spec.hi; });
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
             grid.end());
  return grid;
}

RiskReport worst_case_risk(const Machine& m, const ComposedLayout& layout, const GridSpec& spec) {
  RiskReport report;
  report.theta_grid = theta_grid(layout.K, spec);
  report.grid_spec = spec.describe(layout.K);
  report.risk.assign(report.theta_grid.size(), 0.0);
  parallel_for(report.theta_grid.size(),
               [&](std::size_t i) { report.risk[i] = exact_risk(m, layout, report.theta_grid[i]); });
  const auto it = std::max_element(report.risk.begin(), report.risk.end());
  report.worst = *it;
  report.worst_theta = report.theta_grid[it - report.risk.begin()];
  report.S_physical = m.num_states();
  report.sum_Nk = layout.mini.empty() ? report.S_physical + 2LL * layout.K : layout.sum_Nk();
  report.normalized = report.worst * static_cast<double>(report.sum_Nk);
  report.bound600 = report.normalized <= 600.0;
  return report;
}

double endpoint_orbit_risk(const Machine& m, double theta) {
  if (theta != 0.0 && theta != 1.0) throw DomainError("endpoint_orbit_risk: theta must be exactly 0 or 1");
  require_structurally_valid(m);
  const int bit = theta == 1.0 ? 1 : 0;
  std::vector<long> first_seen(m.num_states(), -1);
  std::vector<StateIndex> path;
  StateIndex s = m.initial;
  while (first_seen[s - 1] < 0) {
    first_seen[s - 1] = static_cast<long>(path.size());
    path.push_back(s);
    s = step(m, s, bit);
  }
  double total = 0.0;
  const long start = first_seen[s - 1];
  for (long i = start; i < static_cast<long>(path.size()); ++i) {
    const double d = m.estimate[path[i] - 1] - theta;
    total += d * d;
  }
  return total / static_cast<double>(path.size() - start);
}

bool cut_flow_check(std::span<const double> pi, const TransitionMatrix& tm, std::span<const StateIndex> cut) {
  std::vector<char> inside(tm.dimension(), 0);
  for (StateIndex s : cut) {
    if (s < 1 || s > tm.dimension()) throw StructuralError("cut_flow_check: state out of range");
    inside[s - 1] = 1;
  }
  double out_flow = 0.0, in_flow = 0.0;
  for (int i = 0; i < tm.dimension(); ++i) {
    for (const Transition& t : tm.row(i)) {
      if (inside[i] && !inside[t.to]) out_flow += pi[i] * t.prob;
      if (!inside[i] && inside[t.to]) in_flow += pi[i] * t.prob;
    }
  }
  return std::abs(out_flow - in_flow) <= 1e-10;
}

ThetaAnalysis analyze_theta(const Machine& m, const ComposedLayout& layout, double theta) {
  require_open_theta(theta);
  ThetaAnalysis a;
  a.theta = theta;
  const TransitionMatrix tm = transition_matrix(m, theta);
  const std::vector<double> pi = stationary_distribution(tm);
  a.residual = reduction::residual_l1(tm, pi);
  a.pi_class = class_distribution(pi, layout);
  a.risk = risk_from_classes(a.pi_class, layout.estimates, theta);
  a.sampled = sampled_analysis(m, layout, theta);
  a.lemma1_gap = lemma1_gap(a.sampled, a.pi_class);
  for (int k : bracket_classes(theta, layout.K)) {
    const bool ok = lemma3_check(a.sampled, k, layout.epsilon);
    a.lemma3 = a.lemma3.value_or(true) && ok;
  }
  a.lemma4 = lemma4_check(a.sampled, layout.epsilon);
  a.cut_flow = true;
  std::vector<StateIndex> cut;
  for (int k = 1; k < layout.K; ++k) {
    const StateRange& r = layout.class_ranges[k - 1];
    for (StateIndex s = r.first; s <= r.last; ++s) cut.push_back(s);
    a.cut_flow = a.cut_flow && cut_flow_check(pi, tm, cut);
  }
  return a;
}

}  // namespace fmest

#include "fmest/isit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fmest/errors.hpp"
#include "fmest/reduction.hpp"

namespace fmest::isit {

namespace {

constexpr double kBandTol = 1e-12;

void require_hypotheses(double p, double q) {
  if (!(q > 0.0 && q < p && p < 1.0)) {
    std::ostringstream os;
    os << "hypothesis thresholds must satisfy 0 < q < p < 1 (p=" << p << ", q=" << q << ")";
    throw DomainError(os.str());
  }
}

void require_theta(double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw DomainError("theta must lie strictly inside (0,1)");
}

void require_band(double p, int K) {
  if (K < 1 || p < 2.0 / K - kBandTol || p > 1.0 - 1.0 / K + kBandTol) {
    std::ostringstream os;
    os << "p=" << p << " outside the admissible band [2/K, 1-1/K] for K=" << K;
    throw DomainError(os.str());
  }
}

}  // namespace

MiniChain::MiniChain(int N, int s, double p, double q) : N_(N), s_(s), p_(p), q_(q) {
  require_hypotheses(p, q);
  if (N < 4) throw DomainError("mini-chain needs N >= 4");
  if (s < 2 || s > N - 1) throw DomainError("mini-chain initial state must lie in [2, N-1]");
}

Successor MiniChain::next(int state, int bit) const {
  if (state < 2 || state > N_ - 1) throw StructuralError("mini-chain state out of range");
  // Position on the run axis: > 0 counts ones, < 0 counts zeros.
  const int run = state - s_;
  int target;
  if (bit) {
    target = s_ + (run >= 0 ? run + 1 : 1);
  } else {
    target = s_ - (run <= 0 ? -run + 1 : 1);
  }
  if (target >= N_) return {true, Side::Right, 0};
  if (target <= 1) return {true, Side::Left, 0};
  return {false, Side::Left, target};
}

int initial_state(int N, double p, double q) {
  require_hypotheses(p, q);
  if (N < 4) throw DomainError("initial_state: N must be at least 4");
  const double ratio = std::log2(p * q) / (std::log2(p * (1.0 - p)) + std::log2(q * (1.0 - q)));
  const int s = 2 + static_cast<int>(std::floor(ratio * (N - 3) + 0.5));
  return std::clamp(s, 2, N - 1);
}

int required_states(double epsilon, double p, int K) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw DomainError("epsilon must lie in (0, 1/2)");
  require_band(p, K);
  const double arg = 2.0 / (epsilon * (p - 1.0 / K) * (1.0 - p));
  return 3 + static_cast<int>(std::ceil(K * 6.0 * std::log2(arg)));
}

MiniChain build_isit(int N, double p, double q) {
  return MiniChain(N, initial_state(N, p, q), p, q);
}

ExitAnalysis exit_analysis(const MiniChain& c, double theta) {
  require_theta(theta);
  const int n = c.interior_count();
  const int left = n;
  const int right = n + 1;
  reduction::AbsorbingChain chain{n, 2, std::vector<std::vector<Transition>>(n)};
  auto index_of = [&](const Successor& succ) {
    if (succ.exits) return succ.side == Side::Left ? left : right;
    return succ.state - 2;
  };
  for (int state = 2; state <= c.N() - 1; ++state) {
    chain.rows[state - 2] = {{index_of(c.next(state, 0)), 1.0 - theta},
                             {index_of(c.next(state, 1)), theta}};
  }
  const reduction::Absorption a = reduction::absorb(chain, c.s() - 2);
  ExitAnalysis out{theta, static_cast<double>(a.hit[1]), static_cast<double>(a.hit[0]),
                   static_cast<double>(a.expected_steps)};
  const double defect = std::abs(out.prob_exit_left + out.prob_exit_right - 1.0);
  if (defect > 1e-10) {
    throw NumericalError("exit_analysis: exit probabilities do not sum to one", defect);
  }
  return out;
}

double closed_form_exit(int N, int s, double theta, Side side) {
  require_theta(theta);
  if (s < 2 || s > N - 1) throw DomainError("closed_form_exit: s must lie in [2, N-1]");
  const double ones = N - s;   // run of ones that exits right
  const double zeros = s - 1;  // run of zeros that exits left
  const double log_t = std::log(theta);
  const double log_1t = std::log1p(-theta);
  if (side == Side::Left) {
    // (1 - t^ones) / (1 + t^(ones-1) (1 - (1-t)^(zeros-1)) / (1-t)^(zeros-1))
    const double numer = -std::expm1(ones * log_t);
    const double tail = -std::expm1((zeros - 1.0) * log_1t);
    const double denom = 1.0 + std::exp((ones - 1.0) * log_t - (zeros - 1.0) * log_1t) * tail;
    return tail == 0.0 ? numer : numer / denom;
  }
  const double numer = -std::expm1(zeros * log_1t);
  const double tail = -std::expm1((ones - 1.0) * log_t);
  const double denom = 1.0 + std::exp((zeros - 1.0) * log_1t - (ones - 1.0) * log_t) * tail;
  return tail == 0.0 ? numer : numer / denom;
}

double error_exponent(double p, double q) {
  require_hypotheses(p, q);
  const double lp = std::log2(p), lq = std::log2(q);
  const double l1p = std::log2(1.0 - p), l1q = std::log2(1.0 - q);
  return (lp * l1q - lq * l1p) / (lp + l1p + lq + l1q);
}

double pe_upper_bound(int N, double p, double q, int K) {
  require_band(p, K);
  if (std::abs(q - (p - 1.0 / K)) > kBandTol) throw DomainError("pe_upper_bound: q must equal p - 1/K");
  const double p_min = std::min(p * (1.0 - p), q * (1.0 - q));
  const int n_min = 3 + static_cast<int>(std::ceil(K * 6.0 * std::log2(2.0 / p_min)));
  if (N < n_min) {
    throw DomainError("pe_upper_bound: N below the minimum " + std::to_string(n_min));
  }
  return (2.0 / p_min) * std::exp2(-error_exponent(p, q) * (N - 3));
}

HypothesisErrors worst_error_over_hypothesis(const MiniChain& c) {
  return {exit_analysis(c, c.q()).prob_exit_right, exit_analysis(c, c.p()).prob_exit_left};
}

}  // namespace fmest::isit

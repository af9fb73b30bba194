#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "fmest/chain_analysis.hpp"
#include "fmest/montecarlo.hpp"

// Output schemas (documented in README.md):
//   risk CSV        theta,risk,risk_times_S
//   analyze CSV     theta,risk,risk_times_S,lemma1_gap,lemma3,lemma4,cut_flow,method
//   simulation CSV  theta,seed,steps,burn_in,empirical_risk,standard_error,class,occupancy,holding_time_mean
//   compare CSV     machine,S,worst_risk,worst_theta,normalized,ratio
//   sweep CSV       K,epsilon,sum_Nk,S_physical,theta,risk,risk_times_S
// Floating-point fields carry 17 significant digits.
namespace fmest {

std::string format_double(double x);

void write_risk_csv(std::ostream& os, const RiskReport& report);
std::string risk_summary_json(const RiskReport& report);

struct SimRow {
  double theta = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t steps = 0;
  std::uint64_t burn_in = 0;
  SimResult result;
};

void write_sim_csv(std::ostream& os, const std::vector<SimRow>& rows);
std::string sim_json(const std::vector<SimRow>& rows);

}  // namespace fmest

#include "fmest/report.hpp"

#include <cstdio>

#include <json.hpp>

namespace fmest {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_risk_csv(std::ostream& os, const RiskReport& report) {
  os << "theta,risk,risk_times_S\n";
  for (std::size_t i = 0; i < report.theta_grid.size(); ++i) {
    os << format_double(report.theta_grid[i]) << ',' << format_double(report.risk[i]) << ','
       << format_double(report.risk[i] * static_cast<double>(report.sum_Nk)) << '\n';
  }
}

std::string risk_summary_json(const RiskReport& report) {
  nlohmann::json doc{{"worst", report.worst},
                     {"worst_theta", report.worst_theta},
                     {"normalized", report.normalized},
                     {"bound600", report.bound600},
                     {"S_physical", report.S_physical},
                     {"sum_Nk", report.sum_Nk},
                     {"grid_spec", report.grid_spec},
                     {"grid_points", report.theta_grid.size()}};
  return doc.dump(1) + "\n";
}

void write_sim_csv(std::ostream& os, const std::vector<SimRow>& rows) {
  os << "theta,seed,steps,burn_in,empirical_risk,standard_error,class,occupancy,holding_time_mean\n";
  for (const SimRow& row : rows) {
    const SimResult& r = row.result;
    for (std::size_t k = 0; k < r.class_occupancy.size(); ++k) {
      os << format_double(row.theta) << ',' << row.seed << ',' << row.steps << ',' << row.burn_in << ','
         << format_double(r.empirical_risk) << ',' << format_double(r.standard_error) << ',' << k + 1 << ','
         << format_double(r.class_occupancy[k]) << ','
         << (r.holding_time_means[k] ? format_double(*r.holding_time_means[k]) : "") << '\n';
    }
  }
}

std::string sim_json(const std::vector<SimRow>& rows) {
  nlohmann::json doc = nlohmann::json::array();
  for (const SimRow& row : rows) {
    nlohmann::json holding = nlohmann::json::array();
    for (const auto& h : row.result.holding_time_means) holding.push_back(h ? nlohmann::json(*h) : nlohmann::json());
    doc.push_back({{"theta", row.theta},
                   {"seed", row.seed},
                   {"steps", row.steps},
                   {"burn_in", row.burn_in},
                   {"empirical_risk", row.result.empirical_risk},
                   {"standard_error", row.result.standard_error},
                   {"steps_used", row.result.steps_used},
                   {"class_occupancy", row.result.class_occupancy},
                   {"holding_time_means", holding}});
  }
  return doc.dump(1) + "\n";
}

}  // namespace fmest

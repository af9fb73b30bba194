#include "fmest/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fmest/baselines.hpp"
#include "fmest/chain_analysis.hpp"
#include "fmest/errors.hpp"
#include "fmest/estimator.hpp"
#include "fmest/machine_io.hpp"
#include "fmest/montecarlo.hpp"
#include "fmest/report.hpp"

namespace fmest::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

fs::path summary_path(fs::path table) { return table.replace_extension(".summary.json"); }

// Layout for analysis: the stored class structure when present, otherwise
// every state is its own class.
ComposedLayout analysis_layout(const MachineDocument& doc) {
  if (!doc.machine.class_map.empty()) return layout_of(doc);
  Machine copy = doc.machine;
  copy.class_map.resize(copy.num_states());
  for (int i = 0; i < copy.num_states(); ++i) copy.class_map[i] = i + 1;
  return infer_layout(copy, 0.0, {});
}

struct Options {
  int K = 0;
  std::vector<int> K_list;
  double epsilon = 0.01;
  std::vector<double> thetas;
  double grid_step = 0.0;
  std::uint64_t steps = 0;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> burn_in;
  std::string machine;
  std::string out;
  std::string format = "csv";
  bool equalize = false;
};

int cmd_build(const Options& o, std::ostream& out) {
  const ComposedEstimator est = build_estimator(o.K, o.epsilon);
  write_machine_file(o.out, serialize(est));
  const StateBudget b = state_budget(o.K, o.epsilon);
  out << "K " << o.K << "\n"
      << "epsilon " << format_double(o.epsilon) << "\n"
      << "S_physical " << est.machine.num_states() << "\n"
      << "sum_Nk " << b.sum_Nk << "\n"
      << "paper_bound " << format_double(b.paper_bound) << "\n"
      << "budget_check " << (b.within_bound() ? "pass" : "fail") << "\n";
  return b.within_bound() ? kOk : kFailed;
}

int cmd_analyze(const Options& o, std::ostream& out) {
  const MachineDocument doc = read_machine_file(o.machine);
  const Machine& m = doc.machine;
  const Diagnostics diag = validate(m);
  if (!diag.structural_ok) throw StructuralError("machine file: " + diag.problems.front());
  const ComposedLayout layout = analysis_layout(doc);
  const std::vector<std::string> nested = check_nested_structure(m, layout);
  const bool nested_ok = nested.empty();

  GridSpec spec;
  spec.step = o.grid_step;
  std::vector<double> interior;
  std::vector<double> endpoints;
  if (o.thetas.empty()) {
    interior = theta_grid(layout.K, spec);
  } else {
    for (double t : o.thetas) {
      if (t == 0.0 || t == 1.0) {
        endpoints.push_back(t);
      } else if (t > 0.0 && t < 1.0) {
        interior.push_back(t);
      } else {
        throw UsageError("--theta values must lie in [0,1]");
      }
    }
  }

  const long long sum_Nk = layout.mini.empty() ? m.num_states() + 2LL * layout.K : layout.sum_Nk();
  std::vector<ThetaAnalysis> rows(interior.size());
  for (std::size_t i = 0; i < interior.size(); ++i) {
    if (nested_ok) {
      rows[i] = analyze_theta(m, layout, interior[i]);
    } else {
      rows[i].theta = interior[i];
      rows[i].risk = exact_risk(m, layout, interior[i]);
    }
  }

  bool all_ok = diag.strongly_connected && nested_ok;
  double worst = 0.0, worst_theta = 0.0, worst_gap = 0.0;
  bool lemma3_ok = true, lemma4_ok = true, flow_ok = true;
  double boundary_normalized = 0.0;
  for (const ThetaAnalysis& a : rows) {
    if (a.risk > worst) {
      worst = a.risk;
      worst_theta = a.theta;
    }
    if (nested_ok) {
      worst_gap = std::max(worst_gap, a.lemma1_gap);
      lemma3_ok = lemma3_ok && a.lemma3.value_or(true);
      lemma4_ok = lemma4_ok && a.lemma4;
      flow_ok = flow_ok && a.cut_flow;
    }
    if (a.theta < 1.0 / (layout.K + 2) || a.theta > (layout.K + 1.0) / (layout.K + 2)) {
      boundary_normalized = std::max(boundary_normalized, a.risk * static_cast<double>(sum_Nk));
    }
  }
  const double normalized = worst * static_cast<double>(sum_Nk);
  const bool bound600 = normalized <= 600.0;
  const bool lemma1_ok = worst_gap <= 1e-8;
  if (nested_ok) all_ok = all_ok && lemma1_ok && lemma3_ok && lemma4_ok && flow_ok;
  all_ok = all_ok && bound600;

  std::ostringstream table;
  if (o.format == "json") {
    json arr = json::array();
    for (const ThetaAnalysis& a : rows) {
      json row{{"theta", a.theta}, {"risk", a.risk}, {"risk_times_S", a.risk * static_cast<double>(sum_Nk)},
               {"method", "stationary"}};
      if (nested_ok) {
        row["lemma1_gap"] = a.lemma1_gap;
        row["lemma3"] = a.lemma3 ? json(*a.lemma3) : json();
        row["lemma4"] = a.lemma4;
        row["cut_flow"] = a.cut_flow;
      }
      arr.push_back(row);
    }
    for (double t : endpoints) {
      const double r = endpoint_orbit_risk(m, t);
      arr.push_back({{"theta", t}, {"risk", r}, {"risk_times_S", r * static_cast<double>(sum_Nk)},
                     {"method", "orbit"}});
    }
    table << arr.dump(1) << "\n";
  } else {
    table << "theta,risk,risk_times_S,lemma1_gap,lemma3,lemma4,cut_flow,method\n";
    auto flag = [](bool b) { return b ? "pass" : "fail"; };
    for (const ThetaAnalysis& a : rows) {
      table << format_double(a.theta) << ',' << format_double(a.risk) << ','
            << format_double(a.risk * static_cast<double>(sum_Nk)) << ',';
      if (nested_ok) {
        table << format_double(a.lemma1_gap) << ',' << (a.lemma3 ? flag(*a.lemma3) : "n/a") << ','
              << flag(a.lemma4) << ',' << flag(a.cut_flow);
      } else {
        table << ",,,";
      }
      table << ",stationary\n";
    }
    for (double t : endpoints) {
      const double r = endpoint_orbit_risk(m, t);
      table << format_double(t) << ',' << format_double(r) << ',' << format_double(r * static_cast<double>(sum_Nk))
            << ",,,,,orbit\n";
    }
  }
  write_text(o.out, table.str());

  json summary{{"worst", worst},
               {"worst_theta", worst_theta},
               {"normalized", normalized},
               {"bound600", bound600},
               {"boundary_normalized", boundary_normalized},
               {"bound300_boundary", boundary_normalized <= 300.0},
               {"S_physical", m.num_states()},
               {"sum_Nk", sum_Nk},
               {"grid_spec", o.thetas.empty() ? spec.describe(layout.K) : std::string("explicit theta list")},
               {"strongly_connected", diag.strongly_connected},
               {"nested_structure", nested_ok},
               {"passed", all_ok}};
  if (!nested_ok) summary["structure_problems"] = nested;
  if (nested_ok) {
    summary["lemma1_max_gap"] = worst_gap;
    summary["lemma1"] = lemma1_ok;
    summary["lemma3"] = lemma3_ok;
    summary["lemma4"] = lemma4_ok;
    summary["cut_flow"] = flow_ok;
  }
  write_text(summary_path(o.out), summary.dump(1) + "\n");

  out << "worst " << format_double(worst) << " at theta " << format_double(worst_theta) << "\n"
      << "normalized " << format_double(normalized) << " (sum_Nk " << sum_Nk << ")\n"
      << "bound600 " << (bound600 ? "pass" : "fail") << "\n"
      << "checks " << (all_ok ? "pass" : "fail") << "\n";
  return all_ok ? kOk : kFailed;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const MachineDocument doc = read_machine_file(o.machine);
  const Machine& m = doc.machine;
  const std::uint64_t burn_in = o.burn_in.value_or(default_burn_in(m));
  if (o.steps <= burn_in) {
    throw UsageError("--steps (" + std::to_string(o.steps) + ") must exceed the burn-in (" +
                     std::to_string(burn_in) + ")");
  }
  if (o.thetas.empty()) throw UsageError("--theta is required");
  for (double t : o.thetas) {
    if (!(t >= 0.0 && t <= 1.0)) throw UsageError("--theta values must lie in [0,1]");
  }
  const std::vector<SimResult> results = simulate_thetas(m, o.thetas, o.steps, burn_in, o.seed);
  std::vector<SimRow> rows;
  for (std::size_t i = 0; i < results.size(); ++i) {
    rows.push_back({o.thetas[i], o.seed ^ static_cast<std::uint64_t>(i), o.steps, burn_in, results[i]});
    out << "theta " << format_double(o.thetas[i]) << " empirical_risk " << format_double(results[i].empirical_risk)
        << " standard_error " << format_double(results[i].standard_error) << "\n";
  }
  std::ostringstream table;
  if (o.format == "json") {
    table << sim_json(rows);
  } else {
    write_sim_csv(table, rows);
  }
  write_text(o.out, table.str());
  return kOk;
}

int cmd_compare(const Options& o, std::ostream& out) {
  const ComposedEstimator est = build_estimator(o.K, o.epsilon);
  GridSpec spec;
  spec.step = o.grid_step;
  const RiskReport det = worst_case_risk(est.machine, est.layout, spec);
  const long long det_S = o.equalize ? det.S_physical : det.sum_Nk;
  const int rand_S = static_cast<int>(det.S_physical);
  const double rand_worst = samaniego_exact_risk(rand_S, 0.5);
  const double det_norm = det.worst * static_cast<double>(det_S);
  const double rand_norm = rand_worst * rand_S;
  const double ratio = det_norm / rand_norm;

  std::ostringstream table;
  if (o.format == "json") {
    json doc = json::array();
    doc.push_back({{"machine", "deterministic"}, {"S", det_S}, {"worst_risk", det.worst},
                   {"worst_theta", det.worst_theta}, {"normalized", det_norm}, {"ratio", ratio}});
    doc.push_back({{"machine", "samaniego"}, {"S", rand_S}, {"worst_risk", rand_worst}, {"worst_theta", 0.5},
                   {"normalized", rand_norm}, {"ratio", 1.0}});
    table << doc.dump(1) << "\n";
  } else {
    table << "machine,S,worst_risk,worst_theta,normalized,ratio\n"
          << "deterministic," << det_S << ',' << format_double(det.worst) << ',' << format_double(det.worst_theta)
          << ',' << format_double(det_norm) << ',' << format_double(ratio) << '\n'
          << "samaniego," << rand_S << ',' << format_double(rand_worst) << ",0.5," << format_double(rand_norm)
          << ",1\n";
  }
  write_text(o.out, table.str());
  out << "deterministic normalized " << format_double(det_norm) << " (S " << det_S << ")\n"
      << "samaniego normalized " << format_double(rand_norm) << " (S " << rand_S << ")\n"
      << "ratio " << format_double(ratio) << "\n";
  return det.bound600 ? kOk : kFailed;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  std::ostringstream table;
  json doc = json::array();
  table << "K,epsilon,sum_Nk,S_physical,theta,risk,risk_times_S\n";
  bool ok = true;
  for (int K : o.K_list) {
    const ComposedEstimator est = build_estimator(K, o.epsilon);
    GridSpec spec;
    spec.step = o.grid_step;
    RiskReport r;
    if (o.thetas.empty()) {
      r = worst_case_risk(est.machine, est.layout, spec);
    } else {
      r.theta_grid = o.thetas;
      for (double t : o.thetas) r.risk.push_back(exact_risk(est.machine, est.layout, t));
      r.sum_Nk = est.layout.sum_Nk();
      r.S_physical = est.machine.num_states();
      r.worst = *std::max_element(r.risk.begin(), r.risk.end());
      r.normalized = r.worst * static_cast<double>(r.sum_Nk);
      r.bound600 = r.normalized <= 600.0;
    }
    ok = ok && r.bound600;
    for (std::size_t i = 0; i < r.theta_grid.size(); ++i) {
      const double scaled = r.risk[i] * static_cast<double>(r.sum_Nk);
      table << K << ',' << format_double(o.epsilon) << ',' << r.sum_Nk << ',' << r.S_physical << ','
            << format_double(r.theta_grid[i]) << ',' << format_double(r.risk[i]) << ',' << format_double(scaled)
            << '\n';
      doc.push_back({{"K", K}, {"epsilon", o.epsilon}, {"sum_Nk", r.sum_Nk}, {"S_physical", r.S_physical},
                     {"theta", r.theta_grid[i]}, {"risk", r.risk[i]}, {"risk_times_S", scaled}});
    }
    out << "K " << K << " worst " << format_double(r.worst) << " normalized " << format_double(r.normalized)
        << "\n";
  }
  write_text(o.out, o.format == "json" ? doc.dump(1) + "\n" : table.str());
  return ok ? kOk : kFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite-memory Bernoulli estimation: build, analyze and simulate estimator machines"};
  app.require_subcommand(1);
  Options o;
  auto check_theta = CLI::Range(0.0, 1.0);
  auto check_eps = CLI::Range(0.0, 0.5);

  auto* build = app.add_subcommand("build", "Build the composed estimator and write a machine file");
  build->add_option("--K", o.K, "number of classes")->required()->check(CLI::Range(2, 1 << 20));
  build->add_option("--epsilon", o.epsilon, "per-class decision error")->check(check_eps);
  build->add_option("--out", o.out, "machine file to write")->required();

  auto* analyze = app.add_subcommand("analyze", "Exact risk and lemma checks over a theta grid");
  analyze->add_option("--machine", o.machine, "machine file")->required()->check(CLI::ExistingFile);
  analyze->add_option("--theta", o.thetas, "explicit theta values (0 and 1 use orbit analysis)")
      ->delimiter(',')
      ->check(check_theta);
  analyze->add_option("--grid-step", o.grid_step, "uniform grid step (default 1/(8(K+2)))")
      ->check(CLI::NonNegativeNumber);
  analyze->add_option("--out", o.out, "table to write; the summary goes next to it")->required();
  analyze->add_option("--format", o.format)->check(CLI::IsMember({"csv", "json"}));

  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo risk of a machine");
  simulate_cmd->add_option("--machine", o.machine, "machine file")->required()->check(CLI::ExistingFile);
  simulate_cmd->add_option("--theta", o.thetas, "theta values")->required()->delimiter(',')->check(check_theta);
  simulate_cmd->add_option("--steps", o.steps, "total steps including burn-in")->required();
  simulate_cmd->add_option("--seed", o.seed, "base seed; theta i uses seed xor i");
  simulate_cmd->add_option("--burn-in", o.burn_in, "steps discarded first (default 10 S)");
  simulate_cmd->add_option("--out", o.out, "table to write")->required();
  simulate_cmd->add_option("--format", o.format)->check(CLI::IsMember({"csv", "json"}));

  auto* compare = app.add_subcommand("compare", "Deterministic estimator against the randomized baseline");
  compare->add_option("--K", o.K, "number of classes")->required()->check(CLI::Range(2, 1 << 20));
  compare->add_option("--epsilon", o.epsilon)->check(check_eps);
  compare->add_option("--grid-step", o.grid_step)->check(CLI::NonNegativeNumber);
  compare->add_flag("--equalize-S", o.equalize, "use the physical state count for both machines");
  compare->add_option("--out", o.out, "table to write")->required();
  compare->add_option("--format", o.format)->check(CLI::IsMember({"csv", "json"}));

  auto* sweep = app.add_subcommand("sweep", "Exact risk over the cartesian product of K values and thetas");
  sweep->add_option("--K", o.K_list, "K values")->required()->delimiter(',')->check(CLI::Range(2, 1 << 20));
  sweep->add_option("--epsilon", o.epsilon)->check(check_eps);
  sweep->add_option("--theta", o.thetas, "explicit theta values")->delimiter(',')->check(CLI::Range(0.0, 1.0));
  sweep->add_option("--grid-step", o.grid_step)->check(CLI::NonNegativeNumber);
  sweep->add_option("--out", o.out, "table to write")->required();
  sweep->add_option("--format", o.format)->check(CLI::IsMember({"csv", "json"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*build) return cmd_build(o, out);
    if (*analyze) return cmd_analyze(o, out);
    if (*simulate_cmd) return cmd_simulate(o, out);
    if (*compare) return cmd_compare(o, out);
    if (*sweep) {
      for (double t : o.thetas) {
        if (!(t > 0.0 && t < 1.0)) throw UsageError("sweep --theta values must lie in (0,1)");
      }
      return cmd_sweep(o, out);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailed;
  }
  return kUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace fmest::cli

#include "clairaut/report.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using clairaut::Json;
using clairaut::RunConfig;

int write_output(const Json& report, const RunConfig& config) {
  std::string text = config.format == "json" ? report.dump(2) + "\n"
                                             : clairaut::render_text(report);
  if (config.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(config.out, std::ios::binary);
    if (!out) {
      std::cerr << "cannot write " << config.out << "\n";
      return 2;
    }
    out << text;
  }
  return 0;
}

std::vector<double> parse_csv_doubles(const std::string& text) {
  std::vector<double> out;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clairaut conformal submersion toolkit"};
  app.require_subcommand(1);

  RunConfig config;
  std::string point_csv, velocity_csv;

  auto add_common = [&](CLI::App* cmd, bool wants_scenario) {
    if (wants_scenario) {
      cmd->add_option("--scenario", config.scenario, "registry scenario name");
      cmd->add_option("--file", config.file, "scenario file path");
    }
    cmd->add_option("--points", config.points, "sample point count")->check(CLI::PositiveNumber);
    cmd->add_option("--geodesics", config.geodesics, "geodesic count")->check(CLI::PositiveNumber);
    cmd->add_option("--step", config.step, "integration step")->check(CLI::PositiveNumber);
    cmd->add_option("--t-end", config.t_end, "integration end time")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", config.seed, "random seed");
    cmd->add_option("--out", config.out, "output path (prefix for geodesic)");
    cmd->add_option("--format", config.format, "text | json | csv")
        ->check(CLI::IsMember({"text", "json", "csv"}));
  };

  CLI::App* scenarios_cmd = app.add_subcommand("scenarios", "list registry scenarios");
  CLI::App* check_cmd = app.add_subcommand("check", "run the expectation checks");
  add_common(check_cmd, true);
  CLI::App* geodesic_cmd = app.add_subcommand("geodesic", "integrate one geodesic");
  add_common(geodesic_cmd, true);
  geodesic_cmd->add_option("--point", point_csv, "initial point, comma separated");
  geodesic_cmd->add_option("--velocity", velocity_csv, "initial velocity, comma separated");
  CLI::App* curvature_cmd = app.add_subcommand("curvature", "curvature identity checks");
  add_common(curvature_cmd, true);
  CLI::App* report_cmd = app.add_subcommand("report", "run every check");
  add_common(report_cmd, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (scenarios_cmd->parsed()) {
      for (const auto& name : clairaut::registry_names()) {
        clairaut::SubmersionScenario scn = clairaut::make_scenario(name);
        std::cout << name << "  m=" << scn.def.m << " n=" << scn.def.n;
        auto flag = [&](const char* label, const std::optional<bool>& v) {
          if (v) std::cout << " " << label << "=" << (*v ? "true" : "false");
        };
        flag("conformal", scn.def.flags.conformal);
        flag("clairaut", scn.def.flags.clairaut);
        flag("umbilical", scn.def.flags.umbilical);
        flag("harmonic", scn.def.flags.harmonic);
        if (scn.def.flags.einstein_lambda_f)
          std::cout << " einstein_lambda_f=" << *scn.def.flags.einstein_lambda_f;
        std::cout << "\n";
      }
      return 0;
    }

    clairaut::SubmersionScenario scn = [&] {
      try {
        return clairaut::resolve_scenario(config);
      } catch (const std::exception& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        std::exit(2);
      }
    }();

    if (check_cmd->parsed()) {
      Json report = clairaut::run_check(scn, config);
      int rc = write_output(report, config);
      if (rc != 0) return rc;
      return clairaut::expectation_exit_code(scn, report);
    }
    if (report_cmd->parsed()) {
      Json report = clairaut::run_report(scn, config);
      int rc = write_output(report, config);
      if (rc != 0) return rc;
      return clairaut::expectation_exit_code(scn, report);
    }
    if (curvature_cmd->parsed()) {
      Json report = clairaut::run_curvature(scn, config);
      int rc = write_output(report, config);
      if (rc != 0) return rc;
      return clairaut::expectation_exit_code(scn, report);
    }
    if (geodesic_cmd->parsed()) {
      clairaut::GeodesicState s0;
      const int m = scn.def.m;
      if (point_csv.empty() && velocity_csv.empty()) {
        s0 = clairaut::seeded_geodesic_starts(scn, 1, config.seed).front();
      } else {
        std::vector<double> p, v;
        try {
          p = parse_csv_doubles(point_csv);
          v = parse_csv_doubles(velocity_csv);
        } catch (const std::exception&) {
          std::cerr << "bad --point/--velocity\n";
          return 2;
        }
        if (static_cast<int>(p.size()) != m || static_cast<int>(v.size()) != m) {
          std::cerr << "initial data must have " << m << " components\n";
          return 2;
        }
        s0.t = 0.0;
        s0.point = Eigen::Map<clairaut::Vec>(p.data(), m);
        s0.velocity = Eigen::Map<clairaut::Vec>(v.data(), m);
        if (s0.velocity.lpNorm<Eigen::Infinity>() == 0.0) {
          std::cerr << "zero initial velocity\n";
          return 2;
        }
      }
      clairaut::GeodesicTrace trace =
          clairaut::integrate(scn.total(), s0, config.t_end, config.step);
      std::string prefix = config.out.empty() ? "geodesic" : config.out;
      {
        std::ofstream out(prefix + "_trace.csv", std::ios::binary);
        clairaut::write_trace_csv(out, scn.total(), trace);
      }
      double drift = -1.0;
      if (scn.clairaut_f) {
        clairaut::InvariantTrace inv =
            clairaut::clairaut_invariant_trace(scn.map, *scn.clairaut_f, trace);
        std::ofstream out(prefix + "_invariant.csv", std::ios::binary);
        clairaut::write_invariant_csv(out, inv);
        drift = inv.drift;
      }
      std::cout << "trace: " << prefix << "_trace.csv  samples=" << trace.states.size()
                << "  speed_drift=" << clairaut::max_speed_drift(scn.total(), trace);
      if (drift >= 0.0) std::cout << "  invariant_drift=" << drift;
      std::cout << "\n";
      return 0;
    }
  } catch (const clairaut::ArgumentError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const clairaut::ValidationError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

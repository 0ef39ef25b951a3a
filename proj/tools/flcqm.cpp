// Command-line front end: run a scenario, compare the fixed baseline with
// the adaptive scheme over a seed list, or dump the controller surface.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flcqm/flcqm.hpp"

namespace fs = std::filesystem;

namespace {

std::string resolve_out_dir(const std::string& flag_value) {
  if (const char* env = std::getenv("FLCQM_OUT"); env && *env) return env;
  return flag_value;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw flcqm::OutputError("cannot create output directory: " + dir);
}

std::vector<std::string> source_names(const flcqm::ScenarioSpec& spec) {
  std::vector<std::string> names;
  for (const auto& n : spec.nodes)
    if (n.kind == flcqm::NodeKind::source) names.push_back(n.name);
  return names;
}

int run_one(const flcqm::ScenarioSpec& spec, const std::string& out_dir,
            bool trace) {
  flcqm::RunResult result =
      flcqm::run_scheme(spec, trace ? &std::cerr : nullptr);
  const std::string scheme = flcqm::to_string(spec.scheme);
  flcqm::write_dmr_csv(out_dir + "/dmr_" + scheme + ".csv", result.log);
  flcqm::write_summary_csv(out_dir + "/summary_" + scheme + ".csv",
                           result.summary);
  if (result.log.conservation_violations != 0) {
    std::cerr << "error: deadline accounting violated conservation in "
              << result.log.conservation_violations << " interval(s)\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fuzzy-feedback QoS management simulator for wireless "
               "sensor/actuator networks"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", scheme = "both", grid = "31,41";
  std::string seeds_csv = "1,2,3,4,5,6,7,8,9,10";
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool trace = false;
  std::string feedback;
  int defuzz_resolution = 0;

  auto* run = app.add_subcommand("run", "run one scenario and write CSVs");
  run->add_option("--config", config_path, "scenario config file")->required();
  run->add_option("--scheme", scheme, "fixed | flc | both");
  run->add_option("--seed", seed, "RNG seed override")
      ->each([&](const std::string&) { seed_given = true; });
  run->add_option("--out", out_dir, "output directory");
  run->add_flag("--trace", trace, "stream per-event trace to stderr");
  run->add_option("--feedback", feedback, "outofband | inband");
  run->add_option("--defuzz-resolution", defuzz_resolution,
                  "override defuzzification grid size");

  auto* cmp = app.add_subcommand(
      "compare", "run both schemes over a seed list and write a report");
  cmp->add_option("--config", config_path, "scenario config file")->required();
  cmp->add_option("--seeds", seeds_csv, "comma-separated seed list");
  cmp->add_option("--out", out_dir, "output directory");

  auto* surf = app.add_subcommand("surface",
                                  "dump the controller input-output surface");
  surf->add_option("--config", config_path,
                   "scenario config file (for controller overrides)");
  surf->add_option("--out", out_dir, "output directory");
  surf->add_option("--grid", grid, "E_N,DE_N grid sizes (default 31,41)");
  surf->add_option("--defuzz-resolution", defuzz_resolution,
                   "override defuzzification grid size");

  CLI11_PARSE(app, argc, argv);

  try {
    const std::string out = resolve_out_dir(out_dir);
    ensure_dir(out);

    if (app.got_subcommand(run)) {
      flcqm::ScenarioSpec spec = flcqm::parse_config(config_path);
      if (seed_given) spec.seed = seed;
      if (!feedback.empty()) {
        if (feedback == "inband") spec.inband_feedback = true;
        else if (feedback == "outofband") spec.inband_feedback = false;
        else {
          std::cerr << "error: --feedback must be outofband or inband\n";
          return 1;
        }
      }
      if (defuzz_resolution > 0)
        spec.controller = std::make_shared<const flcqm::FuzzyController>(
            spec.controller
                ? flcqm::FuzzyController(
                      spec.controller->e_var(), spec.controller->de_var(),
                      spec.controller->dh_var(), spec.controller->rule_base(),
                      defuzz_resolution)
                : flcqm::default_controller(defuzz_resolution));
      std::vector<flcqm::Scheme> schemes;
      std::vector<std::string> scheme_names;
      if (scheme == "fixed" || scheme == "both") {
        schemes.push_back(flcqm::Scheme::fixed);
        scheme_names.push_back("fixed");
      }
      if (scheme == "flc" || scheme == "both") {
        schemes.push_back(flcqm::Scheme::flc);
        scheme_names.push_back("flc");
      }
      if (schemes.empty()) {
        std::cerr << "error: --scheme must be fixed, flc or both\n";
        return 1;
      }
      for (auto s : schemes) {
        flcqm::ScenarioSpec one = spec;
        one.scheme = s;
        if (int rc = run_one(one, out, trace); rc != 0) return rc;
      }
      flcqm::write_plot_script(out + "/plot.gp", scheme_names,
                               source_names(spec));
      return 0;
    }

    if (app.got_subcommand(cmp)) {
      flcqm::ScenarioSpec spec = flcqm::parse_config(config_path);
      std::vector<std::uint64_t> seeds;
      std::stringstream ss(seeds_csv);
      std::string tok;
      while (std::getline(ss, tok, ','))
        if (!tok.empty()) seeds.push_back(std::stoull(tok));
      if (seeds.empty()) {
        std::cerr << "error: --seeds must list at least one seed\n";
        return 1;
      }
      const flcqm::CompareReport report = flcqm::compare(spec, seeds);
      flcqm::write_compare_csv(out + "/comparison.csv", report);
      return 0;
    }

    // surface
    flcqm::ScenarioSpec spec;
    if (!config_path.empty()) spec = flcqm::parse_config(config_path);
    auto controller = spec.controller
                          ? spec.controller
                          : std::make_shared<const flcqm::FuzzyController>(
                                flcqm::default_controller(
                                    defuzz_resolution > 0
                                        ? defuzz_resolution
                                        : flcqm::FuzzyController::
                                              kDefaultResolution));
    int e_n = 31, de_n = 41;
    if (std::sscanf(grid.c_str(), "%d,%d", &e_n, &de_n) != 2) {
      std::cerr << "error: --grid must be E_N,DE_N\n";
      return 1;
    }
    flcqm::write_surface_csv(out + "/surface.csv",
                             controller->surface_sample(e_n, de_n));
    return 0;
  } catch (const flcqm::ConfigParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const flcqm::ConfigValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return 2;
  }
}

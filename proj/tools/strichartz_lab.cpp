// Command-line runner: run, plot, validate.
// Exit status: 0 all selected checks passed, 1 a check failed or an
// experiment errored, 2 configuration error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "strichartz/config.hpp"
#include "strichartz/runner.hpp"

namespace {

using namespace strichartz;

struct Overrides {
  std::string config_path;
  std::string out;
  std::string experiments;
  std::string seeds;
  int nmax = -1;
  int threads = -1;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

// Flags win over file values.
ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig cfg = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (!o.experiments.empty()) cfg.experiments = split_list(o.experiments == "none" ? "" : o.experiments);
  if (!o.seeds.empty()) {
    cfg.seeds.clear();
    for (const auto& s : split_list(o.seeds)) {
      try {
        std::size_t pos = 0;
        cfg.seeds.push_back(std::stoull(s, &pos));
        if (pos != s.size()) throw std::invalid_argument(s);
      } catch (const std::exception&) {
        throw ConfigError("config: bad seed '" + s + "'");
      }
    }
  }
  if (o.nmax >= 0) cfg.nmax = o.nmax;
  if (o.threads >= 0) cfg.threads = o.threads;
  cfg.validate();
  return cfg;
}

int execute(const ExperimentConfig& cfg) {
  const ExperimentReport rep = run(cfg);
  const auto dir = write_report(rep, cfg.out_dir);
  for (const auto& c : rep.checks)
    std::printf("%-4s %-12s %-34s %s\n", c.passed ? "ok" : "FAIL", c.experiment.c_str(), c.name.c_str(),
                c.detail.c_str());
  for (const auto& [exp, msg] : rep.errors) std::printf("ERR  %-12s %s\n", exp.c_str(), msg.c_str());
  std::printf("report: %s\n", dir.string().c_str());
  return rep.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for frequency-localized Schroedinger propagators"};
  app.require_subcommand(1);
  Overrides o;
  auto add_common = [&o](CLI::App* sub, bool experiments) {
    sub->add_option("--config", o.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory");
    if (experiments) sub->add_option("--experiments", o.experiments, "comma-separated experiment list, or 'none'");
    sub->add_option("--seeds", o.seeds, "comma-separated seeds");
    sub->add_option("--nmax", o.nmax, "cap on N for eigen-based experiments");
    sub->add_option("--threads", o.threads, "worker threads (0 = runtime default)");
  };

  auto* run_cmd = app.add_subcommand("run", "run the selected experiments and write a report");
  add_common(run_cmd, true);
  auto* val_cmd = app.add_subcommand("validate", "run only the validation experiment");
  add_common(val_cmd, false);
  std::string report_dir;
  auto* plot_cmd = app.add_subcommand("plot", "render SVG plots for an existing report directory");
  plot_cmd->add_option("report", report_dir, "report directory")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*plot_cmd) {
      const ExperimentReport rep = read_report(report_dir);
      for (const auto& notice : emit_plots(rep, report_dir)) std::cerr << "notice: " << notice << '\n';
      return 0;
    }
    ExperimentConfig cfg = resolve(o);
    if (*val_cmd) cfg.experiments = {"validate"};
    return execute(cfg);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rmm/dispersion_curves.hpp"
#include "rmm/error.hpp"
#include "rmm/parallel.hpp"
#include "rmmcli/config.hpp"
#include "rmmcli/pipeline.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw rmm::ValidationError("cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct RunArgs {
  std::string config;
  std::string output_dir;
  std::vector<std::string> sets;
};

int run_config(const RunArgs& a, std::optional<rmmcli::Stage> only) {
  const std::string text = rmmcli::apply_overrides(read_file(a.config), a.sets);
  rmmcli::RunConfig cfg =
      rmmcli::parse_config(text, std::filesystem::path(a.config).parent_path());
  if (!a.output_dir.empty()) cfg.output_dir = a.output_dir;
  if (only) cfg.stages = {*only};
  rmmcli::run_pipeline(cfg, std::cerr);
  std::cout << (cfg.output_dir / "manifest.json").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rmmid: relaxed micromorphic parameter identification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", rmmcli::kToolVersion);
  int jobs = 0;
  app.add_option("--jobs,-j", jobs, "Maximum worker threads (0: hardware)")->check(CLI::NonNegativeNumber);

  RunArgs run_args;
  auto add_run_options = [&](CLI::App* sub) {
    sub->add_option("config", run_args.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--output-dir,-o", run_args.output_dir, "Override output_dir");
    sub->add_option("--set", run_args.sets, "Override a config key, e.g. bloch.k_count=41");
  };
  auto* run = app.add_subcommand("run", "Run the stages toggled in the config");
  add_run_options(run);
  std::vector<std::pair<CLI::App*, rmmcli::Stage>> stage_cmds;
  for (rmmcli::Stage s : rmmcli::kStageOrder) {
    auto* sub = app.add_subcommand(rmmcli::stage_command(s),
                                   "Run only the " + rmmcli::stage_command(s) + " stage");
    add_run_options(sub);
    stage_cmds.emplace_back(sub, s);
  }
  std::vector<std::string> inputs;
  std::string out_csv;
  auto* exp = app.add_subcommand("export", "Merge dispersion curve CSVs into one overlay CSV");
  exp->add_option("--input,-i", inputs, "NAME=PATH of a curve CSV")->required();
  exp->add_option("--output,-o", out_csv, "Overlay CSV (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (jobs > 0) rmm::set_max_jobs(jobs);
    if (run->parsed()) return run_config(run_args, std::nullopt);
    for (const auto& [sub, stage] : stage_cmds) {
      if (sub->parsed()) return run_config(run_args, stage);
    }
    if (exp->parsed()) {
      std::vector<rmmcli::OverlaySource> sources;
      for (const auto& in : inputs) {
        const auto eq = in.find('=');
        if (eq == std::string::npos || eq == 0) {
          throw rmm::ValidationError("export: --input expects NAME=PATH, got " + in);
        }
        std::istringstream is(read_file(in.substr(eq + 1)));
        sources.push_back({in.substr(0, eq), rmm::read_curves_csv(is)});
      }
      if (out_csv.empty()) {
        rmmcli::export_overlay(std::cout, sources);
      } else {
        std::ofstream os(out_csv);
        if (!os) throw rmm::ValidationError("export: cannot write " + out_csv);
        rmmcli::export_overlay(os, sources);
      }
    }
    return 0;
  } catch (const rmm::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const rmm::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 3;
  }
}

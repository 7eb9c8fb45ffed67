// Command-line front end. Exit codes: 0 ok, 2 configuration/input error,
// 3 numeric failure, 1 anything else.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "sounder/experiment.hpp"

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out = "out";
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Master seed (overrides the config)");
  cmd->add_option("--threads", o.threads, "Worker threads (overrides the config)")->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "Output directory");
}

sounder::ExperimentConfig resolve(const CommonOptions& o) {
  sounder::ExperimentConfig c = sounder::load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.threads) c.threads = *o.threads;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Switched-array channel sounder: switching-sequence design and analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sounder::kToolVersion);

  CommonOptions opts;
  std::string sequence_path;
  auto* optimize = app.add_subcommand("optimize", "Anneal a switching sequence");
  auto* ambiguity = app.add_subcommand("ambiguity", "Sweep |X| for a saved sequence");
  auto* crlb = app.add_subcommand("crlb", "Closed-form and numeric CRLB");
  auto* compare = app.add_subcommand("compare", "Sequential vs random vs hybrid comparison");
  auto* effective = app.add_subcommand("effective-factor", "Effective elements at the reference direction");
  for (auto* cmd : {optimize, ambiguity, crlb, compare, effective}) add_common(cmd, opts);
  ambiguity->add_option("--sequence", sequence_path, "Sequence JSON from `optimize`")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const sounder::ExperimentConfig cfg = resolve(opts);
    sounder::CommandResult result;
    if (optimize->parsed())
      result = sounder::cmd_optimize(cfg, opts.out);
    else if (ambiguity->parsed())
      result = sounder::cmd_ambiguity(cfg, sequence_path, opts.out);
    else if (crlb->parsed())
      result = sounder::cmd_crlb(cfg, opts.out);
    else if (compare->parsed())
      result = sounder::cmd_compare(cfg, opts.out);
    else
      result = sounder::cmd_effective_factor(cfg, opts.out);
    std::cout << result.summary.dump(2) << "\n";
    if (result.exit_code != 0) std::cerr << "error: numeric failure, see outputs in " << opts.out << "\n";
    return result.exit_code;
  } catch (const sounder::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const sounder::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

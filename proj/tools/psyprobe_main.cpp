#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "psyprobe/commands.hpp"
#include "psyprobe/error.hpp"
#include "psyprobe/log.hpp"

namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  int jobs = 1;
};

psyprobe::ExperimentConfig load_with_overrides(const GlobalOptions& options) {
  psyprobe::ExperimentConfig config =
      psyprobe::load_experiment_config(options.config_path);
  if (options.seed) config.seed = *options.seed;
  if (options.out_dir) config.output_dir = *options.out_dir;
  return config;
}

void add_common(CLI::App* cmd, GlobalOptions* options) {
  cmd->add_option("--config", options->config_path, "experiment config JSON")
      ->required();
  cmd->add_option("--seed", options->seed, "override the config seed");
  cmd->add_option("--out", options->out_dir, "override the output directory");
  cmd->add_option("--jobs", options->jobs, "worker threads where supported")
      ->check(CLI::Range(1, 256));
}

}  // namespace

int main(int argc, char** argv) {
  using namespace psyprobe;
  CLI::App app{"psyprobe: forced-choice bias probes and posterior sampling for "
               "embedding models"};
  app.require_subcommand(1);

  GlobalOptions options;
  std::string outcome = "positive";

  CLI::App* bootstrap = app.add_subcommand("bootstrap", "resample the corpus into replicates");
  add_common(bootstrap, &options);
  CLI::App* train = app.add_subcommand("train-embeddings",
                                       "train skip-gram embeddings per replicate");
  add_common(train, &options);
  CLI::App* probe = app.add_subcommand("probe",
                                       "run 2AFC batteries and fit psychometric curves");
  add_common(probe, &options);
  CLI::App* sentiment = app.add_subcommand("sentiment", "train the sentiment classifier");
  add_common(sentiment, &options);
  CLI::App* sample_cmd = app.add_subcommand("sample",
                                            "draw embeddings conditioned on an outcome");
  add_common(sample_cmd, &options);
  sample_cmd->add_option("--outcome", outcome, "positive or negative")
      ->check(CLI::IsMember({"positive", "negative"}));
  CLI::App* analyze = app.add_subcommand("analyze", "posterior readouts and reports");
  add_common(analyze, &options);

  CLI11_PARSE(app, argc, argv);

  try {
    const ExperimentConfig config = load_with_overrides(options);
    if (bootstrap->parsed()) {
      cmd_bootstrap(config);
    } else if (train->parsed()) {
      cmd_train_embeddings(config, options.jobs);
    } else if (probe->parsed()) {
      cmd_probe(config);
    } else if (sentiment->parsed()) {
      cmd_sentiment(config);
    } else if (sample_cmd->parsed()) {
      cmd_sample(config, outcome);
    } else if (analyze->parsed()) {
      cmd_analyze(config);
    }
  } catch (const Error& e) {
    log_error(e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    log_error(e.what());
    return 3;
  }
  return 0;
}

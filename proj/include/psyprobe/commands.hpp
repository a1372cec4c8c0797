#pragma once

#include <string>
#include <vector>

#include "psyprobe/config.hpp"

namespace psyprobe {

// Every command writes its outputs atomically under config.output_dir and a
// manifest JSON recording the config hash, seed and output paths. Commands
// never mutate their inputs.

std::vector<std::string> cmd_bootstrap(const ExperimentConfig& config);
std::vector<std::string> cmd_train_embeddings(const ExperimentConfig& config, int jobs);
std::vector<std::string> cmd_probe(const ExperimentConfig& config);
std::vector<std::string> cmd_sentiment(const ExperimentConfig& config);
std::vector<std::string> cmd_sample(const ExperimentConfig& config,
                                    const std::string& outcome);
std::vector<std::string> cmd_analyze(const ExperimentConfig& config);

// exit-code classification: 0 ok, 2 config, 3 data, 4 numerical
int exit_code_for(const class Error& error);

// write-to-temp-then-rename; creates parent directories
void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace psyprobe

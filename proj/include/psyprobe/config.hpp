#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "psyprobe/analysis.hpp"
#include "psyprobe/probe.hpp"
#include "psyprobe/psychometrics.hpp"

namespace psyprobe {

// One JSON document per experiment; the manifest stamps its hash so every
// artifact is reproducible from config + seed alone.
struct ExperimentConfig {
  std::uint64_t seed = 0;  // required in the file: no entropy defaults
  std::string output_dir;
  std::string config_hash;  // FNV-1a of the raw config bytes

  std::optional<std::string> corpus;

  struct Bootstrap {
    int replicates = 32;
    double lambda = 1.0;
  } bootstrap;

  struct Embeddings {
    int dim = 100;
    int window = 5;
    int negative_samples = 5;
    int epochs = 5;
    double learning_rate = 0.025;
    int min_token_count = 5;
    double subsample_threshold = 0.0;
    std::optional<std::string> replicate_dir;  // default <output_dir>/replicates
  } embeddings;

  struct Probe {
    std::vector<CuePair> cue_pairs;
    std::vector<std::string> targets;
    int alpha_points = 21;
    std::vector<double> alpha_grid;  // explicit grid wins over alpha_points
    ScoringMode scoring = ScoringMode::SimilarityBlend;
    PsyFamily family = PsyFamily::Logistic;
    bool pooled = false;  // default per-replicate granularity
    double bias_epsilon = 0.01;
    std::optional<std::string> embedding_dir;  // default <output_dir>/embeddings
  } probe;

  struct Sentiment {
    std::optional<std::string> csv;
    std::optional<std::string> pos_dir;
    std::optional<std::string> neg_dir;
    std::optional<std::string> embedding_file;
    std::vector<int> hidden_dims = {32};
    int epochs = 50;
    int batch_size = 32;
    double learning_rate = 0.05;
    double momentum = 0.9;
    double holdout_fraction = 0.2;
    bool lowercase = true;
  } sentiment;

  struct Sampler {
    int warmup = 1000;
    int samples = 5000;
    double target_accept = 0.8;
    int max_tree_depth = 10;
    std::optional<std::string> model_file;  // default <output_dir>/sentiment/model.json
    std::optional<std::string> prior_file;  // default <output_dir>/sentiment/prior.json
  } sampler;

  struct Analysis {
    std::optional<std::string> lexicon_csv;
    std::optional<std::string> groups_csv;
    std::optional<std::string> validation_csv;
    std::optional<std::string> embedding_file;
    int pca_components = 2;
    DistanceMetric metric = DistanceMetric::Cosine;
    int permutations = 10000;
    int max_lag = 50;
  } analysis;

  // resolved helper paths
  std::string replicate_dir() const;
  std::string embedding_dir() const;
  std::vector<double> resolved_alpha_grid() const;
};

// Parses and validates the shared fields; command-specific validation happens
// in the command entry points. Throws ConfigError with field-level messages.
ExperimentConfig load_experiment_config(const std::string& path);

std::uint64_t fnv1a_hash(const std::string& bytes);
std::string hash_hex(std::uint64_t hash);

}  // namespace psyprobe

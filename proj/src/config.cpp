#include "psyprobe/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "psyprobe/error.hpp"

namespace psyprobe {

using nlohmann::json;

namespace {

[[noreturn]] void config_fail(const std::string& field, const std::string& message) {
  fail(ErrorCode::ConfigError, field + ": " + message);
}

template <typename T>
T get_or(const json& j, const std::string& field, const T& fallback) {
  if (!j.contains(field)) return fallback;
  try {
    return j.at(field).get<T>();
  } catch (const json::exception&) {
    config_fail(field, "has the wrong type");
  }
}

std::optional<std::string> get_opt_string(const json& j, const std::string& field) {
  if (!j.contains(field) || j.at(field).is_null()) return std::nullopt;
  if (!j.at(field).is_string()) config_fail(field, "must be a string");
  return j.at(field).get<std::string>();
}

}  // namespace

std::uint64_t fnv1a_hash(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t hash) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string ExperimentConfig::replicate_dir() const {
  if (bootstrap.replicates > 0 && embeddings.replicate_dir) {
    return *embeddings.replicate_dir;
  }
  return (std::filesystem::path(output_dir) / "replicates").string();
}

std::string ExperimentConfig::embedding_dir() const {
  if (probe.embedding_dir) return *probe.embedding_dir;
  return (std::filesystem::path(output_dir) / "embeddings").string();
}

std::vector<double> ExperimentConfig::resolved_alpha_grid() const {
  if (!probe.alpha_grid.empty()) return probe.alpha_grid;
  return uniform_alpha_grid(probe.alpha_points);
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) config_fail("config", "cannot open '" + path + "'");
  std::ostringstream raw;
  raw << in.rdbuf();

  json doc;
  try {
    doc = json::parse(raw.str());
  } catch (const json::exception& e) {
    config_fail("config", std::string("invalid JSON: ") + e.what());
  }

  ExperimentConfig config;
  config.config_hash = hash_hex(fnv1a_hash(raw.str()));

  if (!doc.contains("seed")) config_fail("seed", "is required; no entropy defaults");
  if (!doc.at("seed").is_number_unsigned() && !doc.at("seed").is_number_integer()) {
    config_fail("seed", "must be an integer");
  }
  config.seed = doc.at("seed").get<std::uint64_t>();

  if (!doc.contains("output_dir")) config_fail("output_dir", "is required");
  config.output_dir = doc.at("output_dir").get<std::string>();
  if (config.output_dir.empty()) config_fail("output_dir", "must not be empty");

  config.corpus = get_opt_string(doc, "corpus");

  if (doc.contains("bootstrap")) {
    const json& b = doc.at("bootstrap");
    config.bootstrap.replicates = get_or(b, "replicates", config.bootstrap.replicates);
    config.bootstrap.lambda = get_or(b, "lambda", config.bootstrap.lambda);
    if (config.bootstrap.replicates < 1) config_fail("bootstrap.replicates", "must be >= 1");
    if (!(config.bootstrap.lambda > 0.0)) config_fail("bootstrap.lambda", "must be positive");
  }

  if (doc.contains("embeddings")) {
    const json& e = doc.at("embeddings");
    auto& c = config.embeddings;
    c.dim = get_or(e, "dim", c.dim);
    c.window = get_or(e, "window", c.window);
    c.negative_samples = get_or(e, "negative_samples", c.negative_samples);
    c.epochs = get_or(e, "epochs", c.epochs);
    c.learning_rate = get_or(e, "learning_rate", c.learning_rate);
    c.min_token_count = get_or(e, "min_token_count", c.min_token_count);
    c.subsample_threshold = get_or(e, "subsample_threshold", c.subsample_threshold);
    c.replicate_dir = get_opt_string(e, "replicate_dir");
    if (c.dim < 2) config_fail("embeddings.dim", "must be >= 2");
    if (c.window < 1) config_fail("embeddings.window", "must be >= 1");
    if (c.negative_samples < 1) config_fail("embeddings.negative_samples", "must be >= 1");
  }

  if (doc.contains("probe")) {
    const json& p = doc.at("probe");
    auto& c = config.probe;
    if (p.contains("cue_pairs")) {
      if (!p.at("cue_pairs").is_array()) config_fail("probe.cue_pairs", "must be an array");
      for (std::size_t i = 0; i < p.at("cue_pairs").size(); ++i) {
        const json& jp = p.at("cue_pairs")[i];
        CuePair pair;
        const std::string where = "probe.cue_pairs[" + std::to_string(i) + "]";
        if (!jp.contains("cue1") || !jp.contains("cue2")) {
          config_fail(where, "needs cue1 and cue2");
        }
        pair.cue1_token = jp.at("cue1").get<std::string>();
        pair.cue2_token = jp.at("cue2").get<std::string>();
        pair.label = get_or(jp, "label",
                            pair.cue1_token + "/" + pair.cue2_token);
        if (pair.cue1_token.empty() || pair.cue2_token.empty()) {
          config_fail(where, "cues must not be empty");
        }
        c.cue_pairs.push_back(std::move(pair));
      }
    }
    c.targets = get_or(p, "targets", c.targets);
    c.alpha_points = get_or(p, "alpha_points", c.alpha_points);
    c.alpha_grid = get_or(p, "alpha_grid", c.alpha_grid);
    c.bias_epsilon = get_or(p, "bias_epsilon", c.bias_epsilon);
    c.embedding_dir = get_opt_string(p, "embedding_dir");
    const std::string scoring = get_or<std::string>(p, "scoring", "similarity_blend");
    if (scoring == "similarity_blend") {
      c.scoring = ScoringMode::SimilarityBlend;
    } else if (scoring == "mixed_vector_cosine") {
      c.scoring = ScoringMode::MixedVectorCosine;
    } else {
      config_fail("probe.scoring", "must be similarity_blend or mixed_vector_cosine");
    }
    const std::string family = get_or<std::string>(p, "family", "logistic");
    if (family == "logistic") {
      c.family = PsyFamily::Logistic;
    } else if (family == "cumulative_normal") {
      c.family = PsyFamily::CumulativeNormal;
    } else {
      config_fail("probe.family", "must be logistic or cumulative_normal");
    }
    const std::string gran = get_or<std::string>(p, "granularity", "per_replicate");
    if (gran == "pooled") {
      c.pooled = true;
    } else if (gran == "per_replicate") {
      c.pooled = false;
    } else {
      config_fail("probe.granularity", "must be per_replicate or pooled");
    }
    if (c.alpha_points < 2) config_fail("probe.alpha_points", "must be >= 2");
    for (std::size_t i = 0; i < c.alpha_grid.size(); ++i) {
      if (c.alpha_grid[i] < 0.0 || c.alpha_grid[i] > 1.0 ||
          (i > 0 && c.alpha_grid[i] <= c.alpha_grid[i - 1])) {
        config_fail("probe.alpha_grid", "must be strictly increasing within [0,1]");
      }
    }
  }

  if (doc.contains("sentiment")) {
    const json& s = doc.at("sentiment");
    auto& c = config.sentiment;
    c.csv = get_opt_string(s, "csv");
    c.pos_dir = get_opt_string(s, "pos_dir");
    c.neg_dir = get_opt_string(s, "neg_dir");
    c.embedding_file = get_opt_string(s, "embedding_file");
    c.hidden_dims = get_or(s, "hidden_dims", c.hidden_dims);
    c.epochs = get_or(s, "epochs", c.epochs);
    c.batch_size = get_or(s, "batch_size", c.batch_size);
    c.learning_rate = get_or(s, "learning_rate", c.learning_rate);
    c.momentum = get_or(s, "momentum", c.momentum);
    c.holdout_fraction = get_or(s, "holdout_fraction", c.holdout_fraction);
    c.lowercase = get_or(s, "lowercase", c.lowercase);
    for (int h : c.hidden_dims) {
      if (h < 1) config_fail("sentiment.hidden_dims", "entries must be >= 1");
    }
    if (c.hidden_dims.empty()) config_fail("sentiment.hidden_dims", "need >= 1 hidden layer");
    if (c.batch_size < 1) config_fail("sentiment.batch_size", "must be >= 1");
    if (!(c.holdout_fraction > 0.0 && c.holdout_fraction < 1.0)) {
      config_fail("sentiment.holdout_fraction", "must be in (0,1)");
    }
  }

  if (doc.contains("sampler")) {
    const json& s = doc.at("sampler");
    auto& c = config.sampler;
    c.warmup = get_or(s, "warmup", c.warmup);
    c.samples = get_or(s, "samples", c.samples);
    c.target_accept = get_or(s, "target_accept", c.target_accept);
    c.max_tree_depth = get_or(s, "max_tree_depth", c.max_tree_depth);
    c.model_file = get_opt_string(s, "model_file");
    c.prior_file = get_opt_string(s, "prior_file");
    if (c.warmup < 1) config_fail("sampler.warmup", "must be >= 1");
    if (c.samples < 1) config_fail("sampler.samples", "must be >= 1");
    if (!(c.target_accept > 0.0 && c.target_accept < 1.0)) {
      config_fail("sampler.target_accept", "must be in (0,1)");
    }
    if (c.max_tree_depth < 1 || c.max_tree_depth > 16) {
      config_fail("sampler.max_tree_depth", "must be in [1,16]");
    }
  }

  if (doc.contains("analysis")) {
    const json& a = doc.at("analysis");
    auto& c = config.analysis;
    c.lexicon_csv = get_opt_string(a, "lexicon_csv");
    c.groups_csv = get_opt_string(a, "groups_csv");
    c.validation_csv = get_opt_string(a, "validation_csv");
    c.embedding_file = get_opt_string(a, "embedding_file");
    c.pca_components = get_or(a, "pca_components", c.pca_components);
    c.permutations = get_or(a, "permutations", c.permutations);
    c.max_lag = get_or(a, "max_lag", c.max_lag);
    const std::string metric = get_or<std::string>(a, "metric", "cosine");
    if (metric == "cosine") {
      c.metric = DistanceMetric::Cosine;
    } else if (metric == "euclidean") {
      c.metric = DistanceMetric::Euclidean;
    } else {
      config_fail("analysis.metric", "must be cosine or euclidean");
    }
    if (c.pca_components < 1) config_fail("analysis.pca_components", "must be >= 1");
    if (c.permutations < 1) config_fail("analysis.permutations", "must be >= 1");
  }

  return config;
}

}  // namespace psyprobe

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "psyprobe/embedding.hpp"

namespace psyprobe {

struct PcaResult {
  std::vector<Vec> components;  // k x dim, orthonormal, descending eigenvalue
  std::vector<Vec> projections; // n x k, of the centered data
  std::vector<double> eigenvalues;
  std::vector<double> explained_variance_ratio;  // eigenvalue / total variance
  bool rank_deficient = false;  // fewer nonzero eigenvalues than requested
};

// Top-k principal directions of the sample covariance via power iteration
// with deflation. Each component's largest-magnitude entry is made positive.
PcaResult pca_fit_project(const std::vector<Vec>& samples, int k);

enum class DistanceMetric { Cosine, Euclidean };

// Mean over draws of (1 - cosine similarity), or of the Euclidean distance.
double mean_distance_to_samples(const Vec& word, const std::vector<Vec>& samples,
                                DistanceMetric metric = DistanceMetric::Cosine);

struct RankedWord {
  std::string token;
  std::string polarity;
  double mean_distance = 0.0;
};

// Ascending mean-distance order, ties broken lexicographically; unresolved
// lexicon tokens are skipped.
std::vector<RankedWord> rank_words(
    const std::vector<std::pair<std::string, std::string>>& lexicon,
    const EmbeddingTable& table, const std::vector<Vec>& samples,
    DistanceMetric metric = DistanceMetric::Cosine);

struct WordGroup {
  std::string label;
  std::vector<std::string> tokens;
  std::string source;
};

struct GroupComparison {
  double mean_a = 0.0;
  double mean_b = 0.0;
  double difference = 0.0;  // mean_a - mean_b
  double p_value = 1.0;     // two-sided permutation test
  int n_a = 0;
  int n_b = 0;
  std::vector<std::string> skipped_tokens;
};

GroupComparison compare_groups(const WordGroup& group_a, const WordGroup& group_b,
                               const EmbeddingTable& table,
                               const std::vector<Vec>& samples,
                               int permutations = 10000, std::uint64_t seed = 0,
                               DistanceMetric metric = DistanceMetric::Cosine);

struct Correlation {
  double rho = 0.0;
  double p_value = 1.0;  // t-distribution, n-2 dof, two-sided
  int n = 0;
};

Correlation pearson_correlation(const std::vector<double>& x,
                                const std::vector<double>& y);

struct ValidationEntry {
  std::string key;
  double value = 0.0;
  std::optional<double> dispersion;
};
using ValidationTable = std::vector<ValidationEntry>;

// CSV rows key,value[,dispersion] with an optional header line.
ValidationTable load_validation_csv(const std::string& path);

struct KeyedBias {
  std::string key;
  double pse = 0.0;
  double jnd = 0.0;
};

struct PseValidationReport {
  Correlation pse_vs_value;
  std::optional<Correlation> jnd_vs_dispersion;
  std::vector<std::string> matched_keys;
  std::vector<std::string> unmatched_bias_keys;
  std::vector<std::string> unmatched_table_keys;
};

// Inner-joins bias readouts with the external table on key and correlates
// PSE with value (and JND with dispersion where present).
PseValidationReport validate_pse_against_table(const std::vector<KeyedBias>& bias,
                                               const ValidationTable& table);

// CSV helpers for word groups and polarity lexicons: token,label per row.
std::vector<WordGroup> load_word_groups_csv(const std::string& path);
std::vector<std::pair<std::string, std::string>> load_lexicon_csv(const std::string& path);

}  // namespace psyprobe

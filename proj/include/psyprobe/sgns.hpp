#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "psyprobe/embedding.hpp"

namespace psyprobe {

struct TrainConfig {
  int dim = 100;
  int window = 5;
  int negative_samples = 5;
  int epochs = 5;
  double learning_rate = 0.025;
  int min_token_count = 5;
  // word-discard threshold for frequent words; 0 disables (the default)
  double subsample_threshold = 0.0;
  std::uint64_t seed = 1;

  void validate() const;  // dim >= 2, window >= 1, negative_samples >= 1
};

struct VocabEntry {
  std::string token;
  std::int64_t count = 0;
};

// Tokens ordered by descending count (ties lexicographic), counts filtered by
// min_token_count, plus the unigram noise distribution at power 0.75.
class Vocabulary {
 public:
  Vocabulary(std::vector<VocabEntry> entries, std::int64_t total_tokens_kept);

  std::size_t size() const { return entries_.size(); }
  const std::vector<VocabEntry>& entries() const { return entries_; }
  std::optional<std::size_t> index_of(const std::string& token) const;
  std::int64_t count_of(const std::string& token) const;  // 0 if absent
  std::int64_t total_tokens() const { return total_tokens_; }
  const std::vector<double>& noise_probabilities() const { return noise_; }

  // inverse-CDF lookup into the noise distribution, u in [0,1)
  std::size_t sample_noise(double u) const;

 private:
  std::vector<VocabEntry> entries_;
  std::int64_t total_tokens_ = 0;
  std::vector<double> noise_;      // normalized count^0.75
  std::vector<double> noise_cdf_;  // cumulative, for sampling
  std::unordered_map<std::string, std::size_t> index_;
};

Vocabulary build_vocab(std::istream& corpus, int min_token_count);
Vocabulary build_vocab_file(const std::string& corpus_path, int min_token_count);

// Negative-sampling loss and gradients for one (center, context, negatives)
// example; the trainer applies the same expressions in place.
//   loss = -log sigmoid(v.u_ctx) - sum_neg log sigmoid(-v.u_neg)
double sgns_pair_loss_and_grads(const Vec& center, const Vec& context,
                                const std::vector<Vec>& negatives,
                                Vec* d_center, Vec* d_context,
                                std::vector<Vec>* d_negatives);

struct TrainResult {
  EmbeddingTable table;
  std::vector<double> epoch_loss;  // mean pair loss per epoch
};

// Desk-scale skip-gram with negative sampling. Single-threaded and
// reproducible for a fixed seed; zero epochs returns the seeded random
// initialization.
TrainResult train_embeddings(const std::string& corpus_path, const TrainConfig& config);

}  // namespace psyprobe

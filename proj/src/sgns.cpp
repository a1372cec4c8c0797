#include "psyprobe/sgns.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_map>

#include "psyprobe/error.hpp"
#include "psyprobe/rng.hpp"
#include "psyprobe/stats_math.hpp"

namespace psyprobe {

void TrainConfig::validate() const {
  if (dim < 2) fail(ErrorCode::ConfigError, "dim must be >= 2");
  if (window < 1) fail(ErrorCode::ConfigError, "window must be >= 1");
  if (negative_samples < 1) fail(ErrorCode::ConfigError, "negative_samples must be >= 1");
  if (epochs < 0) fail(ErrorCode::ConfigError, "epochs must be >= 0");
  if (!(learning_rate > 0.0)) fail(ErrorCode::ConfigError, "learning_rate must be positive");
  if (min_token_count < 1) fail(ErrorCode::ConfigError, "min_token_count must be >= 1");
}

Vocabulary::Vocabulary(std::vector<VocabEntry> entries, std::int64_t total_tokens_kept)
    : entries_(std::move(entries)), total_tokens_(total_tokens_kept) {
  if (entries_.empty()) fail(ErrorCode::EmptyVocabulary, "vocabulary is empty");
  noise_.resize(entries_.size());
  noise_cdf_.resize(entries_.size());
  double total = 0.0;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    noise_[i] = std::pow(static_cast<double>(entries_[i].count), 0.75);
    total += noise_[i];
  }
  double cum = 0.0;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    noise_[i] /= total;
    cum += noise_[i];
    noise_cdf_[i] = cum;
  }
  noise_cdf_.back() = 1.0;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    index_.emplace(entries_[i].token, i);
  }
}

std::optional<std::size_t> Vocabulary::index_of(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::int64_t Vocabulary::count_of(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? 0 : entries_[it->second].count;
}

std::size_t Vocabulary::sample_noise(double u) const {
  auto it = std::lower_bound(noise_cdf_.begin(), noise_cdf_.end(), u);
  if (it == noise_cdf_.end()) --it;
  return static_cast<std::size_t>(it - noise_cdf_.begin());
}

Vocabulary build_vocab(std::istream& corpus, int min_token_count) {
  std::unordered_map<std::string, std::int64_t> counts;
  std::string line, token;
  while (std::getline(corpus, line)) {
    std::istringstream ss(line);
    while (ss >> token) ++counts[token];
  }
  std::vector<VocabEntry> kept;
  std::int64_t total = 0;
  for (const auto& [tok, count] : counts) {
    if (count >= min_token_count) {
      kept.push_back({tok, count});
      total += count;
    }
  }
  if (kept.empty()) fail(ErrorCode::EmptyVocabulary, "no token meets min_token_count");
  std::sort(kept.begin(), kept.end(), [](const VocabEntry& a, const VocabEntry& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.token < b.token;
  });
  return Vocabulary(std::move(kept), total);
}

Vocabulary build_vocab_file(const std::string& corpus_path, int min_token_count) {
  std::ifstream in(corpus_path);
  if (!in) fail(ErrorCode::IoError, "cannot open corpus '" + corpus_path + "'");
  return build_vocab(in, min_token_count);
}

double sgns_pair_loss_and_grads(const Vec& center, const Vec& context,
                                const std::vector<Vec>& negatives,
                                Vec* d_center, Vec* d_context,
                                std::vector<Vec>* d_negatives) {
  const std::size_t dim = center.size();
  d_center->assign(dim, 0.0);
  d_context->assign(dim, 0.0);
  d_negatives->assign(negatives.size(), Vec(dim, 0.0));

  const double z_pos = dot(center, context);
  double loss = -stats::log_sigmoid(z_pos);
  // d(-log sigmoid(z))/dz = sigmoid(z) - 1
  const double g_pos = stats::sigmoid(z_pos) - 1.0;
  for (std::size_t i = 0; i < dim; ++i) {
    (*d_center)[i] += g_pos * context[i];
    (*d_context)[i] += g_pos * center[i];
  }
  for (std::size_t n = 0; n < negatives.size(); ++n) {
    const double z_neg = dot(center, negatives[n]);
    loss += -stats::log_sigmoid(-z_neg);
    const double g_neg = stats::sigmoid(z_neg);
    for (std::size_t i = 0; i < dim; ++i) {
      (*d_center)[i] += g_neg * negatives[n][i];
      (*d_negatives)[n][i] = g_neg * center[i];
    }
  }
  return loss;
}

namespace {

std::vector<std::size_t> sentence_indices(const std::string& line, const Vocabulary& vocab) {
  std::vector<std::size_t> sentence;
  std::istringstream ss(line);
  std::string token;
  while (ss >> token) {
    if (auto idx = vocab.index_of(token)) sentence.push_back(*idx);
  }
  return sentence;
}

}  // namespace

TrainResult train_embeddings(const std::string& corpus_path, const TrainConfig& config) {
  config.validate();
  const Vocabulary vocab = build_vocab_file(corpus_path, config.min_token_count);
  const std::size_t vocab_size = vocab.size();
  const int dim = config.dim;

  Rng rng(config.seed);
  // input vectors uniform in [-0.5/dim, 0.5/dim], output vectors zero
  std::vector<Vec> syn0(vocab_size, Vec(dim));
  std::vector<Vec> syn1(vocab_size, Vec(dim, 0.0));
  for (std::size_t i = 0; i < vocab_size; ++i) {
    for (int j = 0; j < dim; ++j) {
      syn0[i][j] = (rng.uniform() - 0.5) / dim;
    }
  }

  TrainResult result;
  const double total_planned =
      static_cast<double>(vocab.total_tokens()) * std::max(config.epochs, 1);
  const double min_lr = config.learning_rate * 1e-4;
  double processed = 0.0;
  Vec err(dim);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::ifstream in(corpus_path);
    if (!in) fail(ErrorCode::IoError, "cannot reopen corpus '" + corpus_path + "'");
    double epoch_loss = 0.0;
    long epoch_pairs = 0;
    std::string line;
    while (std::getline(in, line)) {
      std::vector<std::size_t> sentence = sentence_indices(line, vocab);
      if (config.subsample_threshold > 0.0) {
        // word2vec-style frequent-word discarding
        std::vector<std::size_t> kept;
        kept.reserve(sentence.size());
        const double t = config.subsample_threshold;
        for (std::size_t idx : sentence) {
          const double freq = static_cast<double>(vocab.entries()[idx].count) /
                              vocab.total_tokens();
          const double keep = (std::sqrt(freq / t) + 1.0) * t / freq;
          if (keep >= 1.0 || rng.uniform() < keep) kept.push_back(idx);
        }
        sentence.swap(kept);
      }
      const std::size_t len = sentence.size();
      for (std::size_t pos = 0; pos < len; ++pos) {
        processed += 1.0;
        const double lr = std::max(
            config.learning_rate * (1.0 - processed / (total_planned + 1.0)), min_lr);
        // dynamic window: effective size uniform in [1, window]
        const int shrink = static_cast<int>(rng.below(config.window));
        const int reach = config.window - shrink;
        const std::size_t center = sentence[pos];
        for (int off = -reach; off <= reach; ++off) {
          if (off == 0) continue;
          const long ctx_pos = static_cast<long>(pos) + off;
          if (ctx_pos < 0 || ctx_pos >= static_cast<long>(len)) continue;
          const std::size_t context = sentence[ctx_pos];
          Vec& v = syn0[center];
          std::fill(err.begin(), err.end(), 0.0);
          double pair_loss = 0.0;
          // positive example plus negative_samples draws from the noise dist
          for (int k = 0; k <= config.negative_samples; ++k) {
            std::size_t target;
            double label;
            if (k == 0) {
              target = context;
              label = 1.0;
            } else {
              target = vocab.sample_noise(rng.uniform());
              if (target == context) continue;
              label = 0.0;
            }
            Vec& u = syn1[target];
            const double z = dot(v, u);
            pair_loss += label > 0.5 ? -stats::log_sigmoid(z) : -stats::log_sigmoid(-z);
            const double g = (label - stats::sigmoid(z)) * lr;
            for (int j = 0; j < dim; ++j) {
              err[j] += g * u[j];
              u[j] += g * v[j];
            }
          }
          for (int j = 0; j < dim; ++j) v[j] += err[j];
          epoch_loss += pair_loss;
          ++epoch_pairs;
        }
      }
    }
    const double mean_loss = epoch_pairs > 0 ? epoch_loss / epoch_pairs : 0.0;
    if (!std::isfinite(mean_loss)) {
      fail(ErrorCode::DivergedLoss, "loss became non-finite in epoch " +
                                        std::to_string(epoch + 1));
    }
    result.epoch_loss.push_back(mean_loss);
  }

  result.table = EmbeddingTable(dim);
  result.table.source = corpus_path;
  for (std::size_t i = 0; i < vocab_size; ++i) {
    result.table.add(vocab.entries()[i].token, syn0[i]);
  }
  return result;
}

}  // namespace psyprobe

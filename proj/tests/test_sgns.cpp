#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "psyprobe/error.hpp"
#include "psyprobe/rng.hpp"
#include "psyprobe/sgns.hpp"

using namespace psyprobe;

namespace {

struct TwoTopicCorpus {
  std::string path;
  std::vector<std::string> topic_a, topic_b;
};

// disjoint-topic corpus: every sentence stays inside one topic vocabulary
TwoTopicCorpus write_two_topic_corpus(const std::string& path, int sentences_per_topic,
                                      std::uint64_t seed) {
  TwoTopicCorpus corpus;
  corpus.path = path;
  for (int i = 0; i < 8; ++i) {
    corpus.topic_a.push_back("apple" + std::to_string(i));
    corpus.topic_b.push_back("brick" + std::to_string(i));
  }
  Rng rng(seed);
  std::ofstream out(path);
  for (int s = 0; s < sentences_per_topic * 2; ++s) {
    const auto& topic = (s % 2 == 0) ? corpus.topic_a : corpus.topic_b;
    for (int w = 0; w < 8; ++w) {
      out << topic[rng.below(topic.size())] << (w + 1 < 8 ? ' ' : '\n');
    }
  }
  return corpus;
}

double mean_pairwise_cosine(const EmbeddingTable& table,
                            const std::vector<std::string>& xs,
                            const std::vector<std::string>& ys, bool same_list) {
  double sum = 0.0;
  long count = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = same_list ? i + 1 : 0; j < ys.size(); ++j) {
      sum += cosine_similarity(table.at(xs[i]), table.at(ys[j]));
      ++count;
    }
  }
  return sum / count;
}

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("vocabulary building") {
  std::istringstream corpus("a a b");
  const Vocabulary vocab = build_vocab(corpus, 2);
  CHECK(vocab.size() == 1);
  CHECK(vocab.entries()[0].token == "a");
  CHECK(vocab.count_of("a") == 2);
  CHECK(vocab.count_of("b") == 0);

  std::istringstream corpus2("a a b b c");
  const Vocabulary v2 = build_vocab(corpus2, 1);
  CHECK(v2.size() == 3);
  // descending count, lexicographic ties
  CHECK(v2.entries()[0].token == "a");
  CHECK(v2.entries()[1].token == "b");
  CHECK(v2.entries()[2].token == "c");
  double total = 0.0;
  for (double p : v2.noise_probabilities()) total += p;
  CHECK(std::fabs(total - 1.0) < 1e-9);

  std::istringstream empty("x y");
  CHECK_THROWS_AS(build_vocab(empty, 5), Error);
}

TEST_CASE("noise sampling follows the 0.75-power distribution") {
  std::istringstream corpus("a a a a a a a a a a a a a a a a b b c");
  const Vocabulary vocab = build_vocab(corpus, 1);
  // weights: 16^.75 = 8, 2^.75 ~ 1.682, 1
  const double wa = std::pow(16.0, 0.75), wb = std::pow(2.0, 0.75), wc = 1.0;
  const double total = wa + wb + wc;
  CHECK(vocab.noise_probabilities()[0] == doctest::Approx(wa / total).epsilon(1e-12));
  Rng rng(77);
  long counts[3] = {0, 0, 0};
  const int n = 200000;
  for (int i = 0; i < n; ++i) counts[vocab.sample_noise(rng.uniform())]++;
  CHECK(static_cast<double>(counts[0]) / n == doctest::Approx(wa / total).epsilon(0.02));
  CHECK(static_cast<double>(counts[2]) / n == doctest::Approx(wc / total).epsilon(0.06));
}

TEST_CASE("pair loss gradient matches central finite differences") {
  Rng rng(31);
  const double h = 1e-5;
  for (int trial = 0; trial < 30; ++trial) {
    const int dim = 6;
    Vec center(dim), context(dim);
    std::vector<Vec> negatives(3, Vec(dim));
    for (double& x : center) x = rng.uniform(-1.0, 1.0);
    for (double& x : context) x = rng.uniform(-1.0, 1.0);
    for (Vec& n : negatives)
      for (double& x : n) x = rng.uniform(-1.0, 1.0);

    Vec d_center, d_context;
    std::vector<Vec> d_negatives;
    sgns_pair_loss_and_grads(center, context, negatives, &d_center, &d_context,
                             &d_negatives);

    auto loss_at = [&](const Vec& c, const Vec& ctx, const std::vector<Vec>& negs) {
      Vec a, b;
      std::vector<Vec> g;
      return sgns_pair_loss_and_grads(c, ctx, negs, &a, &b, &g);
    };
    for (int i = 0; i < dim; ++i) {
      Vec up = center, down = center;
      up[i] += h;
      down[i] -= h;
      const double fd = (loss_at(up, context, negatives) -
                         loss_at(down, context, negatives)) / (2.0 * h);
      if (std::fabs(fd) > 1e-8) {
        CHECK(std::fabs(d_center[i] - fd) / std::max(std::fabs(fd), 1e-12) < 1e-4);
      }
      Vec cup = context, cdown = context;
      cup[i] += h;
      cdown[i] -= h;
      const double fd_ctx = (loss_at(center, cup, negatives) -
                             loss_at(center, cdown, negatives)) / (2.0 * h);
      if (std::fabs(fd_ctx) > 1e-8) {
        CHECK(std::fabs(d_context[i] - fd_ctx) / std::max(std::fabs(fd_ctx), 1e-12) <
              1e-4);
      }
    }
    // one negative, one coordinate
    Vec nup = negatives[1], ndown = negatives[1];
    nup[2] += h;
    ndown[2] -= h;
    auto negs_up = negatives, negs_down = negatives;
    negs_up[1] = nup;
    negs_down[1] = ndown;
    const double fd_neg = (loss_at(center, context, negs_up) -
                           loss_at(center, context, negs_down)) / (2.0 * h);
    if (std::fabs(fd_neg) > 1e-8) {
      CHECK(std::fabs(d_negatives[1][2] - fd_neg) / std::max(std::fabs(fd_neg), 1e-12) <
            1e-4);
    }
  }
}

TEST_CASE("zero epochs returns the seeded random initialization") {
  const std::string path = tmp_path("sgns_zero_epochs.txt");
  {
    std::ofstream out(path);
    out << "a b c\nb c a\n";
  }
  TrainConfig config;
  config.dim = 4;
  config.epochs = 0;
  config.min_token_count = 1;
  config.seed = 5;
  const TrainResult r1 = train_embeddings(path, config);
  const TrainResult r2 = train_embeddings(path, config);
  CHECK(r1.epoch_loss.empty());
  REQUIRE(r1.table.size() == 3);
  for (std::size_t i = 0; i < r1.table.size(); ++i) {
    for (int j = 0; j < 4; ++j) {
      const double x = r1.table.vector_at(i)[j];
      CHECK(x == r2.table.vector_at(i)[j]);  // bit-reproducible
      CHECK(std::fabs(x) <= 0.5 / 4.0);      // documented init range
    }
  }
  std::filesystem::remove(path);
}

TEST_CASE("two disjoint topics separate in embedding space") {
  const std::string path = tmp_path("sgns_two_topics.txt");
  const TwoTopicCorpus corpus = write_two_topic_corpus(path, 400, 2024);

  // corpus-level oracle: no window pair ever crosses topics, because every
  // sentence is drawn from a single topic vocabulary
  {
    std::ifstream in(path);
    std::string line;
    long cross_pairs = 0;
    while (std::getline(in, line)) {
      std::istringstream ss(line);
      std::vector<std::string> toks;
      std::string t;
      while (ss >> t) toks.push_back(t);
      for (std::size_t i = 0; i < toks.size(); ++i) {
        for (std::size_t j = i + 1; j < std::min(toks.size(), i + 6); ++j) {
          if (toks[i][0] != toks[j][0]) ++cross_pairs;
        }
      }
    }
    REQUIRE(cross_pairs == 0);
  }

  TrainConfig config;
  config.dim = 16;
  config.window = 5;
  config.negative_samples = 5;
  config.epochs = 15;
  config.learning_rate = 0.05;
  config.min_token_count = 1;
  config.seed = 3;
  const TrainResult result = train_embeddings(path, config);

  const double intra_a =
      mean_pairwise_cosine(result.table, corpus.topic_a, corpus.topic_a, true);
  const double intra_b =
      mean_pairwise_cosine(result.table, corpus.topic_b, corpus.topic_b, true);
  const double inter =
      mean_pairwise_cosine(result.table, corpus.topic_a, corpus.topic_b, false);
  CHECK(0.5 * (intra_a + intra_b) - inter >= 0.2);

  // loss decreases from the first epoch to the last
  REQUIRE(result.epoch_loss.size() == 15);
  CHECK(result.epoch_loss.back() < result.epoch_loss.front());
  for (double l : result.epoch_loss) CHECK(std::isfinite(l));

  std::filesystem::remove(path);
}

TEST_CASE("training is bit-reproducible for a fixed seed") {
  const std::string path = tmp_path("sgns_repro.txt");
  write_two_topic_corpus(path, 50, 11);
  TrainConfig config;
  config.dim = 8;
  config.epochs = 2;
  config.min_token_count = 1;
  config.seed = 12;
  const TrainResult a = train_embeddings(path, config);
  const TrainResult b = train_embeddings(path, config);
  REQUIRE(a.table.size() == b.table.size());
  for (std::size_t i = 0; i < a.table.size(); ++i) {
    CHECK(a.table.tokens()[i] == b.table.tokens()[i]);
    for (int j = 0; j < 8; ++j) {
      CHECK(a.table.vector_at(i)[j] == b.table.vector_at(i)[j]);
    }
  }
  CHECK(a.epoch_loss == b.epoch_loss);
  std::filesystem::remove(path);
}

TEST_CASE("all components stay finite while training") {
  const std::string path = tmp_path("sgns_finite.txt");
  write_two_topic_corpus(path, 100, 5);
  TrainConfig config;
  config.dim = 8;
  config.epochs = 5;
  config.learning_rate = 0.5;  // aggressive but sane
  config.min_token_count = 1;
  const TrainResult result = train_embeddings(path, config);
  for (std::size_t i = 0; i < result.table.size(); ++i) {
    for (double x : result.table.vector_at(i)) CHECK(std::isfinite(x));
  }
  std::filesystem::remove(path);
}

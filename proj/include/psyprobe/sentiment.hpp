#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "psyprobe/embedding.hpp"

namespace psyprobe {

// rows of (document-average embedding, label); label 1 = positive
struct LabeledEmbeddingSet {
  std::vector<Vec> vectors;
  std::vector<int> labels;

  void validate() const;  // both classes present, vectors share dim
};

struct MlpConfig {
  std::vector<int> hidden_dims = {32};
  int epochs = 50;
  int batch_size = 32;
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::uint64_t seed = 1;
};

// Feed-forward p(positive | embedding): tanh hidden layers, logistic output.
class MlpClassifier {
 public:
  MlpClassifier() = default;
  MlpClassifier(int input_dim, const std::vector<int>& hidden_dims,
                std::uint64_t seed);

  int input_dim() const;
  std::vector<int> layer_dims() const;  // input, hidden..., 1

  double predict_proba(const Vec& s) const;             // strictly in (0,1)
  double log_proba(const Vec& s, bool positive) const;  // stable log p(outcome|s)
  Vec grad_log_proba_input(const Vec& s, bool positive) const;

  // forward pass; optionally records per-layer activations for backprop
  double output_logit(const Vec& s, std::vector<Vec>* activations) const;

  void save(const std::string& path) const;
  static MlpClassifier load(const std::string& path);

  struct Layer {
    int in = 0, out = 0;
    std::vector<double> weights;  // row-major, out x in
    std::vector<double> bias;
  };
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

 private:
  std::vector<Layer> layers_;
};

struct MlpTrainTrace {
  std::vector<double> epoch_loss;  // mean cross-entropy per epoch
};

// Mini-batch SGD with momentum on the cross-entropy.
MlpClassifier train_mlp(const LabeledEmbeddingSet& data, const MlpConfig& config,
                        MlpTrainTrace* trace = nullptr);

// Rank-based (Mann-Whitney) AUC; ties contribute 1/2.
double evaluate_auc(const MlpClassifier& classifier,
                    const LabeledEmbeddingSet& heldout);

// --- labeled-document ingestion ---

// Lowercases optionally, strips symbols, keeps alphanumeric runs.
std::vector<std::string> tokenize_document(const std::string& text, bool lowercase);

// Directory pair layout: every regular file under pos_dir / neg_dir is one
// document; files sorted by name for reproducibility. Documents whose tokens
// all fall outside the table are dropped.
LabeledEmbeddingSet load_labeled_dirs(const std::string& pos_dir,
                                      const std::string& neg_dir,
                                      const EmbeddingTable& table, bool lowercase);

// CSV of (text,label) rows with an optional header; label is "positive",
// "negative", 1 or 0. Quoted fields with doubled quotes are understood.
LabeledEmbeddingSet load_labeled_csv(const std::string& csv_path,
                                     const EmbeddingTable& table, bool lowercase);

}  // namespace psyprobe

#include "psyprobe/sentiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "psyprobe/error.hpp"
#include "psyprobe/rng.hpp"
#include "psyprobe/stats_math.hpp"

namespace psyprobe {

void LabeledEmbeddingSet::validate() const {
  if (vectors.size() != labels.size()) {
    fail(ErrorCode::LengthMismatch, "vectors and labels differ in length");
  }
  if (vectors.empty()) fail(ErrorCode::EmptyInput, "labeled set is empty");
  long positives = 0;
  const std::size_t dim = vectors.front().size();
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != dim) {
      fail(ErrorCode::DimMismatch, "row " + std::to_string(i) + " has wrong dim");
    }
    positives += labels[i] ? 1 : 0;
  }
  if (positives == 0 || positives == static_cast<long>(vectors.size())) {
    fail(ErrorCode::SingleClass, "both classes must be present");
  }
}

MlpClassifier::MlpClassifier(int input_dim, const std::vector<int>& hidden_dims,
                             std::uint64_t seed) {
  Rng rng(seed);
  int in = input_dim;
  for (int h : hidden_dims) {
    Layer layer;
    layer.in = in;
    layer.out = h;
    layer.weights.resize(static_cast<std::size_t>(h) * in);
    layer.bias.assign(h, 0.0);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& w : layer.weights) w = rng.uniform(-bound, bound);
    layers_.push_back(std::move(layer));
    in = h;
  }
  Layer out;
  out.in = in;
  out.out = 1;
  out.weights.resize(in);
  out.bias.assign(1, 0.0);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  for (double& w : out.weights) w = rng.uniform(-bound, bound);
  layers_.push_back(std::move(out));
}

int MlpClassifier::input_dim() const {
  return layers_.empty() ? 0 : layers_.front().in;
}

std::vector<int> MlpClassifier::layer_dims() const {
  std::vector<int> dims;
  if (layers_.empty()) return dims;
  dims.push_back(layers_.front().in);
  for (const Layer& layer : layers_) dims.push_back(layer.out);
  return dims;
}

// Forward pass; activations[l] is the output of layer l (tanh for hidden,
// raw logit for the final layer).
double MlpClassifier::output_logit(const Vec& s, std::vector<Vec>* activations) const {
  if (static_cast<int>(s.size()) != input_dim()) {
    fail(ErrorCode::DimMismatch, "input has dim " + std::to_string(s.size()) +
                                     ", classifier expects " + std::to_string(input_dim()));
  }
  if (activations) activations->clear();
  const Vec* prev = &s;
  Vec local;
  double logit = 0.0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    Vec next(layer.out);
    for (int o = 0; o < layer.out; ++o) {
      double z = layer.bias[o];
      const double* row = &layer.weights[static_cast<std::size_t>(o) * layer.in];
      for (int i = 0; i < layer.in; ++i) z += row[i] * (*prev)[i];
      next[o] = (l + 1 < layers_.size()) ? std::tanh(z) : z;
    }
    if (l + 1 == layers_.size()) logit = next[0];
    if (activations) {
      activations->push_back(std::move(next));
      prev = &activations->back();
    } else {
      local = std::move(next);
      prev = &local;
    }
  }
  return logit;
}

double MlpClassifier::predict_proba(const Vec& s) const {
  return stats::sigmoid(output_logit(s, nullptr));
}

double MlpClassifier::log_proba(const Vec& s, bool positive) const {
  const double z = output_logit(s, nullptr);
  return stats::log_sigmoid(positive ? z : -z);
}

Vec MlpClassifier::grad_log_proba_input(const Vec& s, bool positive) const {
  std::vector<Vec> activations;
  const double z = output_logit(s, &activations);
  // d log p / d logit: sigmoid(-z) for the positive outcome, -sigmoid(z) else
  const double d_logit = positive ? stats::sigmoid(-z) : -stats::sigmoid(z);

  Vec delta{d_logit};
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const Layer& layer = layers_[l];
    Vec delta_prev(layer.in, 0.0);
    for (int o = 0; o < layer.out; ++o) {
      const double* row = &layer.weights[static_cast<std::size_t>(o) * layer.in];
      for (int i = 0; i < layer.in; ++i) delta_prev[i] += row[i] * delta[o];
    }
    if (l > 0) {
      const Vec& a = activations[l - 1];
      for (int i = 0; i < layer.in; ++i) delta_prev[i] *= (1.0 - a[i] * a[i]);
    }
    delta = std::move(delta_prev);
  }
  return delta;
}

void MlpClassifier::save(const std::string& path) const {
  nlohmann::json doc;
  doc["format"] = "psyprobe-mlp";
  doc["version"] = 1;
  doc["layer_dims"] = layer_dims();
  nlohmann::json layer_list = nlohmann::json::array();
  for (const Layer& layer : layers_) {
    nlohmann::json jl;
    jl["in"] = layer.in;
    jl["out"] = layer.out;
    jl["weights"] = layer.weights;
    jl["bias"] = layer.bias;
    layer_list.push_back(std::move(jl));
  }
  doc["layers"] = std::move(layer_list);
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write model file '" + path + "'");
  out << doc.dump(2) << '\n';
}

MlpClassifier MlpClassifier::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open model file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::IoError, "bad model file '" + path + "': " + e.what());
  }
  if (doc.value("format", "") != "psyprobe-mlp" || doc.value("version", 0) != 1) {
    fail(ErrorCode::IoError, "unrecognized model format in '" + path + "'");
  }
  MlpClassifier model;
  for (const auto& jl : doc.at("layers")) {
    Layer layer;
    layer.in = jl.at("in").get<int>();
    layer.out = jl.at("out").get<int>();
    layer.weights = jl.at("weights").get<std::vector<double>>();
    layer.bias = jl.at("bias").get<std::vector<double>>();
    if (layer.weights.size() != static_cast<std::size_t>(layer.in) * layer.out ||
        layer.bias.size() != static_cast<std::size_t>(layer.out)) {
      fail(ErrorCode::IoError, "inconsistent layer shape in '" + path + "'");
    }
    model.layers_.push_back(std::move(layer));
  }
  if (model.layers_.empty() || model.layers_.back().out != 1) {
    fail(ErrorCode::IoError, "model must end in a single output unit");
  }
  return model;
}

MlpClassifier train_mlp(const LabeledEmbeddingSet& data, const MlpConfig& config,
                        MlpTrainTrace* trace) {
  data.validate();
  const int dim = static_cast<int>(data.vectors.front().size());
  MlpClassifier model(dim, config.hidden_dims, config.seed);
  Rng rng(config.seed + 1);

  auto& layers = model.layers();
  std::vector<std::vector<double>> vel_w(layers.size()), vel_b(layers.size());
  std::vector<std::vector<double>> grad_w(layers.size()), grad_b(layers.size());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    vel_w[l].assign(layers[l].weights.size(), 0.0);
    vel_b[l].assign(layers[l].bias.size(), 0.0);
    grad_w[l].assign(layers[l].weights.size(), 0.0);
    grad_b[l].assign(layers[l].bias.size(), 0.0);
  }

  std::vector<std::size_t> order(data.vectors.size());
  std::iota(order.begin(), order.end(), 0);
  if (trace) trace->epoch_loss.clear();

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Fisher-Yates with the seeded stream
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.below(i)]);
    }
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const double batch_n = static_cast<double>(stop - start);
      for (std::size_t l = 0; l < layers.size(); ++l) {
        std::fill(grad_w[l].begin(), grad_w[l].end(), 0.0);
        std::fill(grad_b[l].begin(), grad_b[l].end(), 0.0);
      }
      for (std::size_t k = start; k < stop; ++k) {
        const Vec& x = data.vectors[order[k]];
        const double y = data.labels[order[k]] ? 1.0 : 0.0;
        std::vector<Vec> activations;
        const double z = model.output_logit(x, &activations);
        epoch_loss += y > 0.5 ? -stats::log_sigmoid(z) : -stats::log_sigmoid(-z);
        Vec delta{stats::sigmoid(z) - y};
        for (std::size_t l = layers.size(); l-- > 0;) {
          const auto& layer = layers[l];
          const Vec& input = (l == 0) ? x : activations[l - 1];
          for (int o = 0; o < layer.out; ++o) {
            const double d = delta[o];
            double* gw = &grad_w[l][static_cast<std::size_t>(o) * layer.in];
            for (int i = 0; i < layer.in; ++i) gw[i] += d * input[i];
            grad_b[l][o] += d;
          }
          if (l == 0) break;
          Vec delta_prev(layer.in, 0.0);
          for (int o = 0; o < layer.out; ++o) {
            const double* row = &layer.weights[static_cast<std::size_t>(o) * layer.in];
            for (int i = 0; i < layer.in; ++i) delta_prev[i] += row[i] * delta[o];
          }
          const Vec& a = activations[l - 1];
          for (int i = 0; i < layer.in; ++i) delta_prev[i] *= (1.0 - a[i] * a[i]);
          delta = std::move(delta_prev);
        }
      }
      for (std::size_t l = 0; l < layers.size(); ++l) {
        for (std::size_t i = 0; i < layers[l].weights.size(); ++i) {
          vel_w[l][i] = config.momentum * vel_w[l][i] -
                        config.learning_rate * grad_w[l][i] / batch_n;
          layers[l].weights[i] += vel_w[l][i];
        }
        for (std::size_t i = 0; i < layers[l].bias.size(); ++i) {
          vel_b[l][i] = config.momentum * vel_b[l][i] -
                        config.learning_rate * grad_b[l][i] / batch_n;
          layers[l].bias[i] += vel_b[l][i];
        }
      }
    }
    const double mean_loss = epoch_loss / data.vectors.size();
    if (!std::isfinite(mean_loss)) {
      fail(ErrorCode::DivergedLoss, "loss became non-finite in epoch " +
                                        std::to_string(epoch + 1));
    }
    if (trace) trace->epoch_loss.push_back(mean_loss);
  }
  return model;
}

double evaluate_auc(const MlpClassifier& classifier,
                    const LabeledEmbeddingSet& heldout) {
  if (heldout.vectors.size() != heldout.labels.size()) {
    fail(ErrorCode::LengthMismatch, "vectors and labels differ in length");
  }
  long n_pos = 0, n_neg = 0;
  for (int y : heldout.labels) (y ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0) {
    fail(ErrorCode::SingleClass, "held-out set needs both classes");
  }
  struct Scored {
    double score;
    int label;
  };
  std::vector<Scored> rows;
  rows.reserve(heldout.vectors.size());
  for (std::size_t i = 0; i < heldout.vectors.size(); ++i) {
    rows.push_back({classifier.predict_proba(heldout.vectors[i]), heldout.labels[i]});
  }
  std::sort(rows.begin(), rows.end(),
            [](const Scored& a, const Scored& b) { return a.score < b.score; });
  // average ranks over tied scores
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    while (j < rows.size() && rows[j].score == rows[i].score) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k) {
      if (rows[k].label) rank_sum_pos += avg_rank;
    }
    i = j;
  }
  return (rank_sum_pos - 0.5 * n_pos * (n_pos + 1)) /
         (static_cast<double>(n_pos) * n_neg);
}

std::vector<std::string> tokenize_document(const std::string& text, bool lowercase) {
  std::vector<std::string> tokens;
  std::string current;
  for (char raw : text) {
    const unsigned char c = static_cast<unsigned char>(raw);
    if (std::isalnum(c)) {
      current.push_back(lowercase ? static_cast<char>(std::tolower(c)) : raw);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void append_documents(const std::string& dir, int label, const EmbeddingTable& table,
                      bool lowercase, LabeledEmbeddingSet* out) {
  if (!std::filesystem::is_directory(dir)) {
    fail(ErrorCode::IoError, "'" + dir + "' is not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    const std::vector<std::string> tokens = tokenize_document(read_file(path), lowercase);
    if (tokens.empty()) continue;
    try {
      out->vectors.push_back(average_embedding(tokens, table, OovPolicy::Skip));
      out->labels.push_back(label);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::AllOutOfVocabulary) throw;
    }
  }
}

// minimal RFC4180: quoted fields may contain commas and doubled quotes
std::vector<std::string> parse_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

}  // namespace

LabeledEmbeddingSet load_labeled_dirs(const std::string& pos_dir,
                                      const std::string& neg_dir,
                                      const EmbeddingTable& table, bool lowercase) {
  LabeledEmbeddingSet set;
  append_documents(pos_dir, 1, table, lowercase, &set);
  append_documents(neg_dir, 0, table, lowercase, &set);
  set.validate();
  return set;
}

LabeledEmbeddingSet load_labeled_csv(const std::string& csv_path,
                                     const EmbeddingTable& table, bool lowercase) {
  std::ifstream in(csv_path);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + csv_path + "'");
  LabeledEmbeddingSet set;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = parse_csv_row(line);
    if (fields.size() < 2) {
      fail(ErrorCode::IoError,
           "line " + std::to_string(line_no) + ": expected text,label");
    }
    const std::string& label_str = fields.back();
    if (line_no == 1 && (label_str == "label" || label_str == "sentiment")) continue;
    int label;
    if (label_str == "positive" || label_str == "1") {
      label = 1;
    } else if (label_str == "negative" || label_str == "0") {
      label = 0;
    } else {
      fail(ErrorCode::IoError,
           "line " + std::to_string(line_no) + ": bad label '" + label_str + "'");
    }
    const std::vector<std::string> tokens = tokenize_document(fields[0], lowercase);
    if (tokens.empty()) continue;
    try {
      set.vectors.push_back(average_embedding(tokens, table, OovPolicy::Skip));
      set.labels.push_back(label);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::AllOutOfVocabulary) throw;
    }
  }
  set.validate();
  return set;
}

}  // namespace psyprobe

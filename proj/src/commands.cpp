#include "psyprobe/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "psyprobe/bootstrap.hpp"
#include "psyprobe/error.hpp"
#include "psyprobe/log.hpp"
#include "psyprobe/rng.hpp"
#include "psyprobe/sampler.hpp"
#include "psyprobe/sentiment.hpp"
#include "psyprobe/sgns.hpp"
#include "psyprobe/svg_report.hpp"

namespace psyprobe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

std::string sanitize(const std::string& name) {
  std::string out;
  for (char c : name) {
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void write_manifest(const ExperimentConfig& config, const std::string& command,
                    std::vector<std::string>* outputs) {
  std::sort(outputs->begin(), outputs->end());
  json manifest;
  manifest["command"] = command;
  manifest["config_hash"] = config.config_hash;
  manifest["seed"] = config.seed;
  manifest["version"] = kToolVersion;
  manifest["outputs"] = *outputs;
  const std::string path =
      (fs::path(config.output_dir) / ("manifest_" + sanitize(command) + ".json")).string();
  write_text_atomic(path, manifest.dump(2) + "\n");
  outputs->push_back(path);
}

void require_file(const std::optional<std::string>& path, const std::string& field) {
  if (!path) fail(ErrorCode::ConfigError, field + ": is required for this command");
  if (!fs::exists(*path)) {
    fail(ErrorCode::ConfigError, field + ": path '" + *path + "' does not exist");
  }
}

std::vector<EmbeddingTable> load_replicate_tables(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    fail(ErrorCode::ConfigError,
         "embedding directory '" + dir + "' does not exist; run train-embeddings first");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".vec") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    fail(ErrorCode::ConfigError, "no .vec files under '" + dir + "'");
  }
  std::vector<EmbeddingTable> tables;
  tables.reserve(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    EmbeddingTable t = load_embedding_file(files[i].string());
    t.replicate_id = static_cast<int>(i);
    tables.push_back(std::move(t));
  }
  return tables;
}

void save_prior_json(const PriorSpec& prior, const std::string& path) {
  json doc;
  doc["format"] = "psyprobe-prior";
  doc["mean"] = prior.mean;
  doc["sd"] = prior.sd;
  write_text_atomic(path, doc.dump(2) + "\n");
}

PriorSpec load_prior_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open prior file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    fail(ErrorCode::IoError, "bad prior file '" + path + "': " + e.what());
  }
  PriorSpec prior;
  prior.mean = doc.at("mean").get<std::vector<double>>();
  prior.sd = doc.at("sd").get<std::vector<double>>();
  prior.validate();
  return prior;
}

}  // namespace

void write_text_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) fail(ErrorCode::IoError, "short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, target, ec);
  if (ec) fail(ErrorCode::IoError, "cannot rename into '" + path + "': " + ec.message());
}

int exit_code_for(const Error& error) {
  switch (error.code()) {
    case ErrorCode::ConfigError:
      return 2;
    case ErrorCode::DivergedLoss:
    case ErrorCode::AllOneClass:
    case ErrorCode::NotConverged:
    case ErrorCode::TooFewFits:
    case ErrorCode::NonFiniteDensityAtInit:
    case ErrorCode::DivergentTrajectory:
    case ErrorCode::DegenerateVariance:
    case ErrorCode::RankDeficient:
      return 4;
    default:
      return 3;
  }
}

std::vector<std::string> cmd_bootstrap(const ExperimentConfig& config) {
  require_file(config.corpus, "corpus");
  BootstrapPlan plan;
  plan.replicate_count = config.bootstrap.replicates;
  plan.lambda = config.bootstrap.lambda;
  plan.seed = config.seed;
  log_info("bootstrap: " + std::to_string(plan.replicate_count) + " replicates of '" +
           *config.corpus + "'");
  std::vector<std::string> outputs =
      make_replicates(*config.corpus, config.replicate_dir(), plan);
  write_manifest(config, "bootstrap", &outputs);
  return outputs;
}

std::vector<std::string> cmd_train_embeddings(const ExperimentConfig& config, int jobs) {
  const std::string rep_dir = config.replicate_dir();
  std::vector<fs::path> corpora;
  if (fs::is_directory(rep_dir)) {
    for (const auto& entry : fs::directory_iterator(rep_dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".txt") {
        corpora.push_back(entry.path());
      }
    }
    std::sort(corpora.begin(), corpora.end());
  }
  if (corpora.empty()) {
    // no bootstrap stage: train a single table straight from the corpus
    require_file(config.corpus, "corpus");
    corpora.push_back(*config.corpus);
  }

  const fs::path out_dir = fs::path(config.output_dir) / "embeddings";
  std::error_code ec;
  fs::create_directories(out_dir, ec);

  std::vector<std::string> outputs(corpora.size());
  std::vector<json> loss_traces(corpora.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string failure_message;
  std::mutex failure_mutex;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= corpora.size() || failed.load()) return;
      try {
        TrainConfig tc;
        tc.dim = config.embeddings.dim;
        tc.window = config.embeddings.window;
        tc.negative_samples = config.embeddings.negative_samples;
        tc.epochs = config.embeddings.epochs;
        tc.learning_rate = config.embeddings.learning_rate;
        tc.min_token_count = config.embeddings.min_token_count;
        tc.subsample_threshold = config.embeddings.subsample_threshold;
        tc.seed = config.seed + i;
        TrainResult result = train_embeddings(corpora[i].string(), tc);
        result.table.replicate_id = static_cast<int>(i);
        char name[32];
        std::snprintf(name, sizeof(name), "replicate_%02zu.vec", i);
        std::ostringstream text;
        serialize_embedding_text(result.table, text);
        const std::string path = (out_dir / name).string();
        write_text_atomic(path, text.str());
        outputs[i] = path;
        loss_traces[i] = json{{"replicate", i}, {"epoch_loss", result.epoch_loss}};
        log_info("trained embeddings for replicate " + std::to_string(i) + " (" +
                 std::to_string(result.table.size()) + " tokens)");
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        failed.store(true);
        if (failure_message.empty()) failure_message = e.what();
      }
    }
  };

  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(corpora.size())));
  std::vector<std::thread> threads;
  for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (failed.load()) throw Error(ErrorCode::DivergedLoss, failure_message);

  json trace_doc;
  trace_doc["replicates"] = loss_traces;
  const std::string trace_path = (out_dir / "training_loss.json").string();
  write_text_atomic(trace_path, trace_doc.dump(2) + "\n");
  outputs.push_back(trace_path);
  write_manifest(config, "train-embeddings", &outputs);
  return outputs;
}

namespace {

struct ProbeRow {
  std::string pair_label;
  std::string target;
  int n_replicates = 0;
  int n_converged = 0;
  int n_all_one_class = 0;
  double mean_pse = std::nan("");
  double std_pse = std::nan("");
  double mean_jnd = std::nan("");
  double mean_crossing = std::nan("");
  int crossings_out_of_range = 0;
  double pooled_pse = std::nan("");
  double pooled_jnd = std::nan("");
  bool pooled_converged = false;
  std::string direction = "undefined";
};

const char* direction_name(BiasDirection d) {
  switch (d) {
    case BiasDirection::AgainstCue1: return "against_cue1";
    case BiasDirection::AgainstCue2: return "against_cue2";
    case BiasDirection::Unbiased: return "unbiased";
  }
  return "undefined";
}

std::string direction_of(double pse_value, double epsilon) {
  if (pse_value < 0.5 - epsilon) return direction_name(BiasDirection::AgainstCue1);
  if (pse_value > 0.5 + epsilon) return direction_name(BiasDirection::AgainstCue2);
  return direction_name(BiasDirection::Unbiased);
}

}  // namespace

std::vector<std::string> cmd_probe(const ExperimentConfig& config) {
  if (config.probe.cue_pairs.empty()) {
    fail(ErrorCode::ConfigError, "probe.cue_pairs: at least one pair is required");
  }
  if (config.probe.targets.empty()) {
    fail(ErrorCode::ConfigError, "probe.targets: at least one target is required");
  }
  const std::vector<EmbeddingTable> tables = load_replicate_tables(config.embedding_dir());
  const std::vector<double> grid = config.resolved_alpha_grid();
  const fs::path out_dir = fs::path(config.output_dir) / "probe";

  std::vector<std::string> outputs;
  std::vector<ProbeRow> rows;
  std::vector<LabeledPoint> scatter;

  for (const CuePair& pair : config.probe.cue_pairs) {
    for (const std::string& target : config.probe.targets) {
      const std::string stem = sanitize(pair.label) + "__" + sanitize(target);
      TrialBattery battery{pair, target, grid, tables};
      const ResponseSet responses = run_battery(battery, config.probe.scoring);

      std::ostringstream csv;
      write_responses_csv(responses, csv);
      const std::string responses_path = (out_dir / ("responses_" + stem + ".csv")).string();
      write_text_atomic(responses_path, csv.str());
      outputs.push_back(responses_path);

      ProbeRow row;
      row.pair_label = pair.label;
      row.target = target;
      row.n_replicates = static_cast<int>(tables.size());

      // exact per-replicate crossing points (blend scoring only)
      json replicate_docs = json::array();
      std::vector<double> crossings_in_range;
      if (config.probe.scoring == ScoringMode::SimilarityBlend) {
        for (const EmbeddingTable& table : tables) {
          std::istringstream c1s(pair.cue1_token), c2s(pair.cue2_token), ws(target);
          std::vector<std::string> t1{std::istream_iterator<std::string>(c1s), {}};
          std::vector<std::string> t2{std::istream_iterator<std::string>(c2s), {}};
          std::vector<std::string> tw{std::istream_iterator<std::string>(ws), {}};
          const Vec c1 = average_embedding(t1, table, OovPolicy::Error);
          const Vec c2 = average_embedding(t2, table, OovPolicy::Error);
          const Vec w = average_embedding(tw, table, OovPolicy::Error);
          const CrossingAlpha crossing = crossing_alpha(c1, c2, w);
          json doc;
          doc["replicate"] = table.replicate_id;
          doc["crossing_alpha"] = crossing.alpha;
          doc["in_range"] = crossing.in_range;
          if (crossing.in_range) {
            crossings_in_range.push_back(crossing.alpha);
          } else {
            ++row.crossings_out_of_range;
          }
          replicate_docs.push_back(std::move(doc));
        }
        if (!crossings_in_range.empty()) {
          double sum = 0.0;
          for (double c : crossings_in_range) sum += c;
          row.mean_crossing = sum / crossings_in_range.size();
        }
      }

      // per-replicate fits and bootstrap summary
      std::vector<PsychometricFit> replicate_fits;
      const std::size_t per = grid.size();
      for (std::size_t r = 0; r < tables.size(); ++r) {
        ResponseSet one;
        one.records.assign(responses.records.begin() + r * per,
                           responses.records.begin() + (r + 1) * per);
        try {
          replicate_fits.push_back(fit_psychometric(one, config.probe.family));
        } catch (const Error& e) {
          if (e.code() == ErrorCode::AllOneClass) {
            ++row.n_all_one_class;
            continue;
          }
          throw;
        }
      }
      for (std::size_t i = 0; i < replicate_fits.size(); ++i) {
        if (replicate_fits[i].converged) ++row.n_converged;
      }
      try {
        const BootstrapSummary summary = bootstrap_summary(replicate_fits);
        row.mean_pse = summary.mean_pse;
        row.std_pse = summary.std_pse;
        row.mean_jnd = summary.mean_jnd;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::TooFewFits) throw;
        log_warn("probe " + stem + ": fewer than 2 converged per-replicate fits");
      }

      // pooled fit across replicates
      PsychometricFit pooled;
      bool have_pooled = false;
      std::vector<double> proportions(per, 0.0);
      for (std::size_t i = 0; i < responses.records.size(); ++i) {
        if (responses.records[i].choice == Choice::Cue2) {
          proportions[i % per] += 1.0 / tables.size();
        }
      }
      try {
        pooled = fit_psychometric(responses, config.probe.family);
        have_pooled = true;
        row.pooled_converged = pooled.converged;
        if (pooled.converged) {
          row.pooled_pse = pse(pooled);
          row.pooled_jnd = jnd(pooled);
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::AllOneClass && e.code() != ErrorCode::InsufficientAlphas) {
          throw;
        }
        log_warn("probe " + stem + ": pooled fit unavailable (" + e.what() + ")");
      }

      // headline PSE per the configured granularity
      const double headline =
          config.probe.pooled ? row.pooled_pse
                              : (std::isnan(row.mean_pse) ? row.mean_crossing : row.mean_pse);
      if (!std::isnan(headline)) {
        row.direction = direction_of(headline, config.probe.bias_epsilon);
      }

      json fit_doc;
      fit_doc["pair"] = pair.label;
      fit_doc["target"] = target;
      fit_doc["family"] =
          config.probe.family == PsyFamily::Logistic ? "logistic" : "cumulative_normal";
      fit_doc["granularity"] = config.probe.pooled ? "pooled" : "per_replicate";
      fit_doc["crossings"] = replicate_docs;
      const std::string family_name =
          config.probe.family == PsyFamily::Logistic ? "logistic" : "cumulative_normal";
      auto fit_record = [&](const PsychometricFit& fit) {
        return json{{"family", family_name},
                    {"mu", fit.location},
                    {"sigma", fit.scale},
                    {"pse", fit.converged ? json(pse(fit)) : json()},
                    {"jnd", fit.converged ? json(jnd(fit)) : json()},
                    {"loglik", fit.log_likelihood},
                    {"converged", fit.converged}};
      };
      json fits_json = json::array();
      for (const PsychometricFit& fit : replicate_fits) {
        fits_json.push_back(fit_record(fit));
      }
      fit_doc["replicate_fits"] = fits_json;
      if (have_pooled) fit_doc["pooled"] = fit_record(pooled);
      if (!std::isnan(row.mean_pse)) {
        fit_doc["bootstrap_summary"] = {{"mean_pse", row.mean_pse},
                                        {"std_pse", row.std_pse},
                                        {"mean_jnd", row.mean_jnd},
                                        {"n_fits", row.n_converged}};
      }
      fit_doc["direction"] = row.direction;
      const std::string fits_path = (out_dir / ("fits_" + stem + ".json")).string();
      write_text_atomic(fits_path, fit_doc.dump(2) + "\n");
      outputs.push_back(fits_path);

      const std::string plot_path = (out_dir / ("curve_" + stem + ".svg")).string();
      write_text_atomic(plot_path,
                        svg_psychometric_curves(replicate_fits,
                                                have_pooled ? &pooled : nullptr, grid,
                                                proportions, pair.label + " vs " + target));
      outputs.push_back(plot_path);

      if (!std::isnan(headline) && !std::isnan(row.mean_jnd)) {
        scatter.push_back({headline, row.mean_jnd, target,
                           static_cast<int>(&pair - config.probe.cue_pairs.data())});
      }
      rows.push_back(std::move(row));
    }
  }

  // bias report table, one row per (pair, target)
  std::ostringstream bias_csv;
  bias_csv << "pair,target,n_replicates,n_converged,n_all_one_class,mean_pse,std_pse,"
              "mean_jnd,mean_crossing,crossings_out_of_range,pooled_pse,pooled_jnd,"
              "direction\n";
  for (const ProbeRow& row : rows) {
    bias_csv << row.pair_label << ',' << row.target << ',' << row.n_replicates << ','
             << row.n_converged << ',' << row.n_all_one_class << ','
             << fmt_double(row.mean_pse) << ',' << fmt_double(row.std_pse) << ','
             << fmt_double(row.mean_jnd) << ',' << fmt_double(row.mean_crossing) << ','
             << row.crossings_out_of_range << ',' << fmt_double(row.pooled_pse) << ','
             << fmt_double(row.pooled_jnd) << ',' << row.direction << '\n';
  }
  const std::string bias_path = (out_dir / "bias_reports.csv").string();
  write_text_atomic(bias_path, bias_csv.str());
  outputs.push_back(bias_path);

  const std::string scatter_path = (out_dir / "scatter_pse_jnd.svg").string();
  write_text_atomic(scatter_path,
                    svg_scatter(scatter, "PSE (alpha units)", "JND (alpha units)",
                                "PSE vs JND by target"));
  outputs.push_back(scatter_path);

  write_manifest(config, "probe", &outputs);
  return outputs;
}

std::vector<std::string> cmd_sentiment(const ExperimentConfig& config) {
  require_file(config.sentiment.embedding_file, "sentiment.embedding_file");
  const EmbeddingTable table = load_embedding_file(*config.sentiment.embedding_file);

  LabeledEmbeddingSet all;
  if (config.sentiment.csv) {
    require_file(config.sentiment.csv, "sentiment.csv");
    all = load_labeled_csv(*config.sentiment.csv, table, config.sentiment.lowercase);
  } else if (config.sentiment.pos_dir && config.sentiment.neg_dir) {
    require_file(config.sentiment.pos_dir, "sentiment.pos_dir");
    require_file(config.sentiment.neg_dir, "sentiment.neg_dir");
    all = load_labeled_dirs(*config.sentiment.pos_dir, *config.sentiment.neg_dir, table,
                            config.sentiment.lowercase);
  } else {
    fail(ErrorCode::ConfigError,
         "sentiment: either csv or pos_dir/neg_dir must be configured");
  }

  // deterministic shuffled split
  Rng rng(config.seed);
  std::vector<std::size_t> order(all.vectors.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  const std::size_t holdout_n = std::max<std::size_t>(
      2, static_cast<std::size_t>(all.vectors.size() * config.sentiment.holdout_fraction));
  LabeledEmbeddingSet train, heldout;
  for (std::size_t i = 0; i < order.size(); ++i) {
    LabeledEmbeddingSet& dst = (i < holdout_n) ? heldout : train;
    dst.vectors.push_back(all.vectors[order[i]]);
    dst.labels.push_back(all.labels[order[i]]);
  }

  MlpConfig mlp_config;
  mlp_config.hidden_dims = config.sentiment.hidden_dims;
  mlp_config.epochs = config.sentiment.epochs;
  mlp_config.batch_size = config.sentiment.batch_size;
  mlp_config.learning_rate = config.sentiment.learning_rate;
  mlp_config.momentum = config.sentiment.momentum;
  mlp_config.seed = config.seed;

  MlpTrainTrace trace;
  log_info("sentiment: training on " + std::to_string(train.vectors.size()) +
           " documents, holding out " + std::to_string(heldout.vectors.size()));
  const MlpClassifier model = train_mlp(train, mlp_config, &trace);
  const double auc = evaluate_auc(model, heldout);
  log_info("sentiment: held-out AUC " + fmt_double(auc));

  const fs::path out_dir = fs::path(config.output_dir) / "sentiment";
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  const std::string model_path = (out_dir / "model.json").string();
  model.save(model_path + ".tmp");
  fs::rename(model_path + ".tmp", model_path, ec);
  if (ec) fail(ErrorCode::IoError, "cannot write '" + model_path + "'");

  // prior over embedding space, moment-matched to the training documents
  const PriorSpec prior = fit_prior(train.vectors);
  const std::string prior_path = (out_dir / "prior.json").string();
  save_prior_json(prior, prior_path);

  json metrics;
  metrics["auc"] = auc;
  metrics["n_train"] = train.vectors.size();
  metrics["n_heldout"] = heldout.vectors.size();
  metrics["epoch_loss"] = trace.epoch_loss;
  const std::string metrics_path = (out_dir / "metrics.json").string();
  write_text_atomic(metrics_path, metrics.dump(2) + "\n");

  std::vector<std::string> outputs{model_path, prior_path, metrics_path};
  write_manifest(config, "sentiment", &outputs);
  return outputs;
}

std::vector<std::string> cmd_sample(const ExperimentConfig& config,
                                    const std::string& outcome) {
  if (outcome != "positive" && outcome != "negative") {
    fail(ErrorCode::ConfigError, "outcome: must be positive or negative");
  }
  const fs::path sentiment_dir = fs::path(config.output_dir) / "sentiment";
  const std::string model_path =
      config.sampler.model_file.value_or((sentiment_dir / "model.json").string());
  const std::string prior_path =
      config.sampler.prior_file.value_or((sentiment_dir / "prior.json").string());
  if (!fs::exists(model_path)) {
    fail(ErrorCode::ConfigError,
         "sampler.model_file: '" + model_path + "' does not exist; run sentiment first");
  }
  if (!fs::exists(prior_path)) {
    fail(ErrorCode::ConfigError, "sampler.prior_file: '" + prior_path + "' does not exist");
  }
  const MlpClassifier model = MlpClassifier::load(model_path);
  const PriorSpec prior = load_prior_json(prior_path);
  const TargetDensity target = build_target(model, outcome == "positive", prior);

  SamplerConfig sc;
  sc.warmup = config.sampler.warmup;
  sc.samples = config.sampler.samples;
  sc.target_accept = config.sampler.target_accept;
  sc.max_tree_depth = config.sampler.max_tree_depth;
  sc.seed = config.seed;
  log_info("sample: " + std::to_string(sc.warmup) + " warmup + " +
           std::to_string(sc.samples) + " draws conditioned on " + outcome);
  const PosteriorSampleSet set = sample(target, prior.mean, sc);
  log_info("sample: mean acceptance " + fmt_double(set.mean_accept_stat) + ", " +
           std::to_string(set.divergence_count) + " divergences");

  const fs::path out_dir = fs::path(config.output_dir) / "sampler";
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  const std::string csv_path = (out_dir / ("samples_" + outcome + ".csv")).string();
  {
    std::ostringstream buffer;
    char buf[40];
    for (const Vec& draw : set.draws) {
      for (std::size_t i = 0; i < draw.size(); ++i) {
        std::snprintf(buf, sizeof(buf), i + 1 < draw.size() ? "%.9g," : "%.9g\n", draw[i]);
        buffer << buf;
      }
    }
    write_text_atomic(csv_path, buffer.str());
  }
  const std::string diag_path = (out_dir / ("diagnostics_" + outcome + ".json")).string();
  save_diagnostics_json(set, diag_path + ".tmp",
                        {{"outcome", outcome},
                         {"model_file", model_path},
                         {"prior_file", prior_path}});
  fs::rename(diag_path + ".tmp", diag_path, ec);
  if (ec) fail(ErrorCode::IoError, "cannot write '" + diag_path + "'");

  // lag-autocorrelation figure over the first few dimensions
  const int dims_to_plot = std::min(4, target.dim);
  std::vector<std::vector<double>> rho;
  for (int d = 0; d < dims_to_plot; ++d) {
    rho.push_back(autocorrelation(set.draws, d, std::min(config.analysis.max_lag,
                                                         static_cast<int>(set.draws.size()) - 2)));
  }
  const std::string acf_path = (out_dir / ("autocorrelation_" + outcome + ".svg")).string();
  write_text_atomic(acf_path, svg_acf(rho, "posterior autocorrelation (" + outcome + ")"));

  std::vector<std::string> outputs{csv_path, diag_path, acf_path};
  write_manifest(config, "sample-" + outcome, &outputs);
  return outputs;
}

std::vector<std::string> cmd_analyze(const ExperimentConfig& config) {
  const fs::path sampler_dir = fs::path(config.output_dir) / "sampler";
  const fs::path out_dir = fs::path(config.output_dir) / "analysis";
  std::vector<std::string> outputs;

  std::optional<EmbeddingTable> table;
  if (config.analysis.embedding_file) {
    require_file(config.analysis.embedding_file, "analysis.embedding_file");
    table = load_embedding_file(*config.analysis.embedding_file);
  }

  std::vector<std::pair<std::string, std::vector<Vec>>> sample_sets;
  for (const char* outcome : {"positive", "negative"}) {
    const fs::path p = sampler_dir / (std::string("samples_") + outcome + ".csv");
    if (fs::exists(p)) {
      sample_sets.emplace_back(outcome, load_samples_csv(p.string()));
    }
  }

  bool did_anything = false;

  // PCA projection of the posteriors; a shared basis over the pooled draws
  // keeps the two conditions comparable in one plot
  if (!sample_sets.empty()) {
    did_anything = true;
    std::vector<Vec> pooled;
    for (const auto& [_, draws] : sample_sets) {
      pooled.insert(pooled.end(), draws.begin(), draws.end());
    }
    const int k = std::min<int>(config.analysis.pca_components,
                                static_cast<int>(pooled.front().size()));
    const PcaResult pca = pca_fit_project(pooled, k);
    json pca_doc;
    pca_doc["eigenvalues"] = pca.eigenvalues;
    pca_doc["explained_variance_ratio"] = pca.explained_variance_ratio;
    pca_doc["rank_deficient"] = pca.rank_deficient;
    pca_doc["components"] = pca.components;
    json counts = json::array();
    std::vector<LabeledPoint> points;
    std::size_t offset = 0;
    for (std::size_t s = 0; s < sample_sets.size(); ++s) {
      const auto& [outcome, draws] = sample_sets[s];
      counts.push_back({{"outcome", outcome}, {"n_draws", draws.size()}});
      const std::size_t stride = std::max<std::size_t>(1, draws.size() / 400);
      for (std::size_t i = 0; i < draws.size(); i += stride) {
        const Vec& proj = pca.projections[offset + i];
        points.push_back({proj[0], proj.size() > 1 ? proj[1] : 0.0, "",
                          static_cast<int>(s)});
      }
      offset += draws.size();
    }
    pca_doc["sample_sets"] = std::move(counts);
    const std::string pca_json_path = (out_dir / "pca.json").string();
    write_text_atomic(pca_json_path, pca_doc.dump(2) + "\n");
    outputs.push_back(pca_json_path);
    const std::string pca_plot_path = (out_dir / "pca_projection.svg").string();
    write_text_atomic(pca_plot_path, svg_scatter(points, "PC1", "PC2",
                                                 "posterior draws, PCA projection"));
    outputs.push_back(pca_plot_path);
  }

  // lexicon ranking per outcome
  if (config.analysis.lexicon_csv) {
    require_file(config.analysis.lexicon_csv, "analysis.lexicon_csv");
    if (!table) fail(ErrorCode::ConfigError, "analysis.embedding_file: required for lexicon ranking");
    if (sample_sets.empty()) {
      fail(ErrorCode::ConfigError, "analysis: no sample CSVs found; run sample first");
    }
    did_anything = true;
    const auto lexicon = load_lexicon_csv(*config.analysis.lexicon_csv);
    for (const auto& [outcome, draws] : sample_sets) {
      const auto ranked = rank_words(lexicon, *table, draws, config.analysis.metric);
      std::ostringstream csv;
      csv << "token,polarity,mean_distance\n";
      for (const RankedWord& rw : ranked) {
        csv << rw.token << ',' << rw.polarity << ',' << fmt_double(rw.mean_distance) << '\n';
      }
      const std::string path = (out_dir / ("word_ranking_" + outcome + ".csv")).string();
      write_text_atomic(path, csv.str());
      outputs.push_back(path);
    }
  }

  // group comparison against each posterior
  if (config.analysis.groups_csv) {
    require_file(config.analysis.groups_csv, "analysis.groups_csv");
    if (!table) fail(ErrorCode::ConfigError, "analysis.embedding_file: required for group comparison");
    if (sample_sets.empty()) {
      fail(ErrorCode::ConfigError, "analysis: no sample CSVs found; run sample first");
    }
    const auto groups = load_word_groups_csv(*config.analysis.groups_csv);
    if (groups.size() < 2) {
      fail(ErrorCode::ConfigError, "analysis.groups_csv: need at least two labeled groups");
    }
    did_anything = true;
    json cmp_doc = json::array();
    std::vector<std::pair<std::string, double>> bars;
    for (const auto& [outcome, draws] : sample_sets) {
      const GroupComparison cmp =
          compare_groups(groups[0], groups[1], *table, draws, config.analysis.permutations,
                         config.seed, config.analysis.metric);
      cmp_doc.push_back({{"outcome", outcome},
                         {"group_a", groups[0].label},
                         {"group_b", groups[1].label},
                         {"mean_a", cmp.mean_a},
                         {"mean_b", cmp.mean_b},
                         {"difference", cmp.difference},
                         {"p_value", cmp.p_value},
                         {"n_a", cmp.n_a},
                         {"n_b", cmp.n_b},
                         {"skipped", cmp.skipped_tokens}});
      bars.emplace_back(groups[0].label + " | " + outcome, cmp.mean_a);
      bars.emplace_back(groups[1].label + " | " + outcome, cmp.mean_b);
    }
    const std::string cmp_path = (out_dir / "group_comparison.json").string();
    write_text_atomic(cmp_path, cmp_doc.dump(2) + "\n");
    outputs.push_back(cmp_path);
    const std::string bars_path = (out_dir / "group_distance.svg").string();
    write_text_atomic(bars_path,
                      svg_bars(bars, "mean distance to posterior", "group distances"));
    outputs.push_back(bars_path);
  }

  // external validation joins the probe bias table on target key
  if (config.analysis.validation_csv) {
    require_file(config.analysis.validation_csv, "analysis.validation_csv");
    const fs::path bias_path = fs::path(config.output_dir) / "probe" / "bias_reports.csv";
    if (!fs::exists(bias_path)) {
      fail(ErrorCode::ConfigError,
           "analysis.validation_csv: requires probe outputs; run probe first");
    }
    did_anything = true;
    const ValidationTable validation = load_validation_csv(*config.analysis.validation_csv);

    // average the per-pair readouts per target before joining
    std::ifstream bias_in(bias_path);
    std::string line;
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_target;
    long line_no = 0;
    while (std::getline(bias_in, line)) {
      ++line_no;
      if (line_no == 1 || line.empty()) continue;
      std::vector<std::string> fields;
      std::stringstream ss(line);
      std::string f;
      while (std::getline(ss, f, ',')) fields.push_back(f);
      if (fields.size() < 13) continue;
      const double mean_pse = std::atof(fields[5].c_str());
      const double mean_jnd = std::atof(fields[7].c_str());
      const double mean_crossing = std::atof(fields[8].c_str());
      const double pse_value = std::isnan(mean_pse) ? mean_crossing : mean_pse;
      if (std::isnan(pse_value)) continue;
      by_target[fields[1]].first.push_back(pse_value);
      by_target[fields[1]].second.push_back(std::isnan(mean_jnd) ? 0.0 : mean_jnd);
    }
    std::vector<KeyedBias> bias;
    for (const auto& [target, values] : by_target) {
      double pse_sum = 0.0, jnd_sum = 0.0;
      for (double v : values.first) pse_sum += v;
      for (double v : values.second) jnd_sum += v;
      bias.push_back({target, pse_sum / values.first.size(),
                      jnd_sum / values.second.size()});
    }
    const PseValidationReport report = validate_pse_against_table(bias, validation);
    json doc;
    doc["pse_vs_value"] = {{"rho", report.pse_vs_value.rho},
                           {"p_value", report.pse_vs_value.p_value},
                           {"n", report.pse_vs_value.n}};
    if (report.jnd_vs_dispersion) {
      doc["jnd_vs_dispersion"] = {{"rho", report.jnd_vs_dispersion->rho},
                                  {"p_value", report.jnd_vs_dispersion->p_value},
                                  {"n", report.jnd_vs_dispersion->n}};
    }
    doc["matched_keys"] = report.matched_keys;
    doc["unmatched_bias_keys"] = report.unmatched_bias_keys;
    doc["unmatched_table_keys"] = report.unmatched_table_keys;
    const std::string path = (out_dir / "validation.json").string();
    write_text_atomic(path, doc.dump(2) + "\n");
    outputs.push_back(path);
  }

  if (!did_anything) {
    fail(ErrorCode::ConfigError,
         "analysis: nothing to do; configure lexicon_csv, groups_csv, validation_csv "
         "or run sample first");
  }
  write_manifest(config, "analyze", &outputs);
  return outputs;
}

}  // namespace psyprobe

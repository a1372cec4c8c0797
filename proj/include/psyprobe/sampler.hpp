#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "psyprobe/embedding.hpp"
#include "psyprobe/sentiment.hpp"

namespace psyprobe {

// Diagonal Gaussian prior over embedding space, moment-matched to a reference
// population of embeddings.
struct PriorSpec {
  std::vector<double> mean;
  std::vector<double> sd;  // all > 0

  void validate() const;
  double log_density(const Vec& s) const;
  Vec gradient(const Vec& s) const;
};

PriorSpec fit_prior(const std::vector<Vec>& reference_population);

// Unnormalized log density plus its gradient.
struct TargetDensity {
  int dim = 0;
  std::function<double(const Vec&)> log_density;
  std::function<Vec(const Vec&)> gradient;
};

// log p(outcome|s) + log prior(s), gradients assembled from both terms
TargetDensity build_target(const MlpClassifier& classifier, bool positive_outcome,
                           const PriorSpec& prior);

TargetDensity gaussian_target(const Vec& mean, const Vec& sd);  // test helper

struct SamplerConfig {
  int warmup = 1000;
  int samples = 5000;
  double target_accept = 0.8;
  int max_tree_depth = 10;
  double divergence_threshold = 1000.0;  // Hamiltonian error cutoff
  std::uint64_t seed = 1;
  int chain_id = 0;
};

struct PosteriorSampleSet {
  std::vector<Vec> draws;  // post-warmup, one row per draw
  int warmup = 0;
  std::vector<double> step_size_trace;  // adapted step size per warmup iteration
  double step_size = 0.0;               // frozen after warmup
  double mean_accept_stat = 0.0;        // post-warmup mean acceptance statistic
  int divergence_count = 0;             // post-warmup divergent iterations
  std::uint64_t seed = 0;
  int chain_id = 0;
};

// One leapfrog step with unit mass matrix; grad must hold target.gradient at
// position on entry and holds the gradient at the new position on exit.
void leapfrog(const TargetDensity& target, Vec* position, Vec* momentum, Vec* grad,
              double step);

// No-U-Turn sampling with dual-averaging step-size adaptation during warmup.
// Deterministic for a fixed seed. Divergent iterations are recorded and the
// run continues; more than half the draws diverging is an error.
PosteriorSampleSet sample(const TargetDensity& target, const Vec& init,
                          const SamplerConfig& config);

// Normalized sample autocorrelation for lags 0..max_lag; lag 0 equals 1.
std::vector<double> autocorrelation(const std::vector<double>& series, int max_lag);
std::vector<double> autocorrelation(const std::vector<Vec>& samples, int dimension,
                                    int max_lag);

// n / (1 + 2 sum rho(k)) with Geyer initial-positive-sequence truncation
double effective_sample_size(const std::vector<double>& series);
double effective_sample_size(const std::vector<Vec>& samples, int dimension);

// CSV of draws plus a JSON sidecar with acceptance, per-dimension ESS summary
// and divergence count. extra_fields lets callers label provenance (model,
// prior, outcome).
void save_samples_csv(const PosteriorSampleSet& set, const std::string& path);
std::vector<Vec> load_samples_csv(const std::string& path);
void save_diagnostics_json(
    const PosteriorSampleSet& set, const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& extra_fields = {});

}  // namespace psyprobe

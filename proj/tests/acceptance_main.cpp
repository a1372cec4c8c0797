// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exit code 0 iff all pass.
//
// Criterion 13 drives the installed CLI binary; pass its path as --cli PATH.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "psyprobe/analysis.hpp"
#include "psyprobe/bootstrap.hpp"
#include "psyprobe/embedding.hpp"
#include "psyprobe/error.hpp"
#include "psyprobe/probe.hpp"
#include "psyprobe/psychometrics.hpp"
#include "psyprobe/rng.hpp"
#include "psyprobe/sampler.hpp"
#include "psyprobe/sentiment.hpp"
#include "psyprobe/sgns.hpp"
#include "psyprobe/stats_math.hpp"

using namespace psyprobe;
namespace fs = std::filesystem;

namespace {

struct CheckFailure {
  std::string message;
};

void require(bool condition, const std::string& message) {
  if (!condition) throw CheckFailure{message};
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Vec random_unit(Rng& rng, int dim) {
  Vec v(dim);
  double n = 0.0;
  do {
    for (double& x : v) x = rng.normal();
    n = norm(v);
  } while (n == 0.0);
  for (double& x : v) x /= n;
  return v;
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / xs.size();
}

double var_of(const std::vector<double>& xs) {
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / (xs.size() - 1);
}

// ---------------------------------------------------------------- criterion 1

void criterion_closed_form_vs_sweep(std::ostringstream& detail) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(2001);
  const int dim = 50;
  double worst = 0.0;
  int tested = 0;
  while (tested < 100) {
    const Vec c1 = random_unit(rng, dim);
    const Vec c2 = random_unit(rng, dim);
    const Vec w = random_unit(rng, dim);
    const CrossingAlpha crossing = crossing_alpha(c1, c2, w);
    if (crossing.alpha < 0.005 || crossing.alpha > 0.995) continue;
    // sweep oracle: first grid point where the decision is Cue2
    double flip = 1.0 + 1e-4;
    for (double alpha = 0.0; alpha <= 1.0 + 1e-12; alpha += 1e-4) {
      if (decide(std::min(alpha, 1.0), c1, c2, w) == Choice::Cue2) {
        flip = alpha;
        break;
      }
    }
    const double err = std::fabs(crossing.alpha - flip);
    worst = std::max(worst, err);
    require(err <= 1e-4, "triple " + std::to_string(tested) + ": |closed-form - sweep| = " +
                             fmt(err) + " > 1e-4");
    ++tested;
  }
  const double elapsed = seconds_since(start);
  require(elapsed < 5.0, "runtime " + fmt(elapsed) + "s >= 5s");
  detail << "worst |closed-form - sweep| " << fmt(worst) << ", " << fmt(elapsed) << "s";
}

// ---------------------------------------------------------------- criterion 2

void criterion_psychometric_recovery(std::ostringstream& detail) {
  const auto start = std::chrono::steady_clock::now();
  for (PsyFamily family : {PsyFamily::Logistic, PsyFamily::CumulativeNormal}) {
    Rng rng(16);
    PsychometricFit gen;
    gen.family = family;
    gen.location = 0.4;
    gen.scale = 0.05;
    ResponseSet rs;
    const auto grid = uniform_alpha_grid(21);
    for (int r = 0; r < 32; ++r) {
      for (double alpha : grid) {
        const bool cue2 = rng.uniform() < psychometric_value(gen, alpha);
        rs.records.push_back({r, alpha, cue2 ? Choice::Cue2 : Choice::Cue1, 0.0});
      }
    }
    const PsychometricFit fit = fit_psychometric(rs, family);
    const char* name = family == PsyFamily::Logistic ? "logistic" : "cumulative-normal";
    require(fit.converged, std::string(name) + ": fit did not converge");
    require(std::fabs(fit.location - 0.4) <= 0.02,
            std::string(name) + ": |mu - 0.4| = " + fmt(std::fabs(fit.location - 0.4)) +
                " > 0.02");
    require(std::fabs(fit.scale - 0.05) <= 0.05 * 0.2,
            std::string(name) + ": sigma " + fmt(fit.scale) + " outside 0.05 +/- 20%");
    detail << name << " mu " << fmt(fit.location) << " sigma " << fmt(fit.scale) << "; ";
  }
  const double elapsed = seconds_since(start);
  require(elapsed < 5.0, "runtime " + fmt(elapsed) + "s >= 5s");
  detail << fmt(elapsed) << "s";
}

// ---------------------------------------------------------------- criterion 3

double jnd_by_bisection(const PsychometricFit& fit) {
  double lo = 0.0, hi = 200.0 * fit.scale;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double gap = psychometric_value(fit, fit.location + 0.5 * mid) -
                       psychometric_value(fit, fit.location - 0.5 * mid);
    (gap < 0.5 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void criterion_jnd_closed_forms(std::ostringstream& detail) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(303);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    PsychometricFit fit;
    fit.converged = true;
    fit.location = rng.uniform(0.2, 0.8);
    fit.scale = rng.uniform(0.005, 0.5);
    for (PsyFamily family : {PsyFamily::Logistic, PsyFamily::CumulativeNormal}) {
      fit.family = family;
      const double closed = jnd(fit);
      const double numeric = jnd_by_bisection(fit);
      const double err = std::fabs(closed - numeric);
      worst = std::max(worst, err);
      require(err <= 1e-8, "sigma " + fmt(fit.scale) + ": |closed - bisection| = " +
                               fmt(err) + " > 1e-8");
    }
  }
  const double elapsed = seconds_since(start);
  require(elapsed < 1.0, "runtime " + fmt(elapsed) + "s >= 1s");
  detail << "worst error " << fmt(worst) << ", " << fmt(elapsed) << "s";
}

// ---------------------------------------------------------------- criterion 4

void criterion_cue_swap(std::ostringstream& detail) {
  Rng rng(404);
  double worst_pse = 0.0, worst_sigma = 0.0;
  for (int config_idx = 0; config_idx < 20; ++config_idx) {
    // jittered replicate tables so crossings spread over several grid cells
    std::vector<EmbeddingTable> tables, swapped;
    for (int r = 0; r < 8; ++r) {
      auto jitter = [&](double x, double y, double z) {
        return Vec{x + rng.uniform(-0.18, 0.18), y + rng.uniform(-0.18, 0.18),
                   z + rng.uniform(-0.18, 0.18)};
      };
      const Vec c1 = jitter(1.0, 0.0, 0.2);
      const Vec c2 = jitter(0.0, 1.0, 0.2);
      const Vec w = jitter(0.55, 0.45, 0.2);
      EmbeddingTable t(3);
      t.add("cue1", c1);
      t.add("cue2", c2);
      t.add("target", w);
      tables.push_back(std::move(t));
      EmbeddingTable s(3);
      s.add("cue1", c2);
      s.add("cue2", c1);
      s.add("target", w);
      swapped.push_back(std::move(s));
    }
    const auto grid = uniform_alpha_grid(21);
    const TrialBattery fwd{{"cue1", "cue2", "pair"}, "target", grid, tables};
    const TrialBattery rev{{"cue1", "cue2", "pair"}, "target", grid, swapped};
    PsychometricFit fit_fwd, fit_rev;
    try {
      fit_fwd = fit_psychometric(run_battery(fwd), PsyFamily::Logistic);
      fit_rev = fit_psychometric(run_battery(rev), PsyFamily::Logistic);
    } catch (const Error& e) {
      throw CheckFailure{std::string("configuration ") + std::to_string(config_idx) +
                         ": " + e.what()};
    }
    require(fit_fwd.converged && fit_rev.converged,
            "configuration " + std::to_string(config_idx) + ": fit did not converge");
    const double pse_err = std::fabs(fit_rev.location - (1.0 - fit_fwd.location));
    const double sigma_err = std::fabs(fit_rev.scale - fit_fwd.scale);
    worst_pse = std::max(worst_pse, pse_err);
    worst_sigma = std::max(worst_sigma, sigma_err);
    require(pse_err <= 1e-6, "configuration " + std::to_string(config_idx) +
                                 ": |PSE' - (1-PSE)| = " + fmt(pse_err) + " > 1e-6");
    require(sigma_err <= 1e-6, "configuration " + std::to_string(config_idx) +
                                   ": |sigma' - sigma| = " + fmt(sigma_err) + " > 1e-6");
  }
  detail << "worst PSE error " << fmt(worst_pse) << ", worst sigma error "
         << fmt(worst_sigma);
}

// ---------------------------------------------------------------- criterion 5

void criterion_poisson_bootstrap(std::ostringstream& detail) {
  const int n = 100000;
  std::ostringstream corpus;
  for (int i = 0; i < n; ++i) corpus << "line " << i << '\n';
  std::istringstream in(corpus.str());
  std::ostringstream out;
  poisson_resample_stream(in, out, 505);

  std::vector<int> counts(n, 0);
  std::istringstream result(out.str());
  std::string word;
  int id;
  while (result >> word >> id) counts[id]++;

  long zeros = 0, total = 0;
  long bucket[4] = {0, 0, 0, 0};
  for (int c : counts) {
    if (c == 0) ++zeros;
    total += c;
    bucket[c >= 3 ? 3 : c]++;
  }
  const double zero_fraction = static_cast<double>(zeros) / n;
  const double mean_emission = static_cast<double>(total) / n;
  require(std::fabs(zero_fraction - 0.3679) <= 0.01,
          "zero fraction " + fmt(zero_fraction) + " outside 0.3679 +/- 0.01");
  require(std::fabs(mean_emission - 1.0) <= 0.01,
          "mean emission " + fmt(mean_emission) + " outside 1.0 +/- 0.01");

  const double e = std::exp(-1.0);
  const double expected[4] = {n * e, n * e, n * e / 2.0, n * (1.0 - 2.5 * e)};
  double stat = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double d = bucket[k] - expected[k];
    stat += d * d / expected[k];
  }
  const double p = stats::chi_square_sf(stat, 3);
  require(p > 0.01, "chi-square p = " + fmt(p) + " <= 0.01");
  detail << "zero fraction " << fmt(zero_fraction) << ", mean " << fmt(mean_emission)
         << ", chi-square p " << fmt(p);
}

// ---------------------------------------------------------------- criterion 6

// corpus where the target token keeps company with one cue's topic words
void write_biased_corpus(const std::string& path, bool target_with_cue2,
                         std::uint64_t seed) {
  Rng rng(seed);
  std::ofstream out(path);
  for (int s = 0; s < 1200; ++s) {
    const bool topic_b = s % 2 == 1;
    const char* prefix = topic_b ? "brk" : "app";
    std::vector<std::string> words;
    for (int w = 0; w < 8; ++w) {
      words.push_back(prefix + std::to_string(rng.below(8)));
    }
    words[3] = topic_b ? "cuetwo" : "cueone";
    if (topic_b == target_with_cue2 && s % 4 < 2) words[5] = "occx";
    for (std::size_t w = 0; w < words.size(); ++w) {
      out << words[w] << (w + 1 < words.size() ? ' ' : '\n');
    }
  }
}

double pipeline_mean_pse(const fs::path& dir, bool target_with_cue2,
                         std::ostringstream& detail) {
  const std::string corpus = (dir / "corpus.txt").string();
  write_biased_corpus(corpus, target_with_cue2, 606);

  BootstrapPlan plan;
  plan.replicate_count = 8;
  plan.seed = 607;
  const auto replicate_paths = make_replicates(corpus, (dir / "reps").string(), plan);

  std::vector<EmbeddingTable> tables;
  for (std::size_t i = 0; i < replicate_paths.size(); ++i) {
    TrainConfig tc;
    tc.dim = 16;
    tc.window = 5;
    tc.negative_samples = 5;
    tc.epochs = 6;
    tc.learning_rate = 0.05;
    tc.min_token_count = 1;
    tc.seed = 608 + i;
    TrainResult result = train_embeddings(replicate_paths[i], tc);
    result.table.replicate_id = static_cast<int>(i);
    tables.push_back(std::move(result.table));
  }

  const TrialBattery battery{{"cueone", "cuetwo", "one/two"}, "occx",
                             uniform_alpha_grid(21), tables};
  const ResponseSet responses = run_battery(battery);

  std::vector<PsychometricFit> fits;
  const std::size_t per = battery.alpha_grid.size();
  for (std::size_t r = 0; r < tables.size(); ++r) {
    ResponseSet one;
    one.records.assign(responses.records.begin() + r * per,
                       responses.records.begin() + (r + 1) * per);
    fits.push_back(fit_psychometric(one, PsyFamily::Logistic));
  }
  const BootstrapSummary summary = bootstrap_summary(fits);

  // the exact crossing points must tell the same story as the fits
  std::vector<double> crossings;
  for (const EmbeddingTable& table : tables) {
    const CrossingAlpha c =
        crossing_alpha(table.at("cueone"), table.at("cuetwo"), table.at("occx"));
    if (c.in_range) crossings.push_back(c.alpha);
  }
  require(crossings.size() >= 2, "crossings left the [0,1] range");
  const double mean_crossing = mean_of(crossings);
  require((summary.mean_pse < 0.5) == (mean_crossing < 0.5),
          "fit PSE and crossing-point direction disagree");
  detail << (target_with_cue2 ? "cue2-weighted" : "cue1-weighted") << " mean PSE "
         << fmt(summary.mean_pse) << " (crossing " << fmt(mean_crossing) << "); ";
  return summary.mean_pse;
}

void criterion_end_to_end_direction(std::ostringstream& detail) {
  const auto start = std::chrono::steady_clock::now();
  const fs::path dir = fs::temp_directory_path() / "psyprobe_acceptance_c6";
  fs::remove_all(dir);
  fs::create_directories(dir / "fwd");
  fs::create_directories(dir / "rev");
  const double pse_with_cue2 = pipeline_mean_pse(dir / "fwd", true, detail);
  const double pse_with_cue1 = pipeline_mean_pse(dir / "rev", false, detail);
  fs::remove_all(dir);
  require(pse_with_cue2 < 0.5, "cue2-weighted construction: mean PSE " +
                                   fmt(pse_with_cue2) + " not < 0.5");
  require(pse_with_cue1 > 0.5, "mirrored construction: mean PSE " +
                                   fmt(pse_with_cue1) + " not > 0.5");
  const double elapsed = seconds_since(start);
  require(elapsed < 180.0, "runtime " + fmt(elapsed) + "s >= 180s");
  detail << fmt(elapsed) << "s";
}

// ---------------------------------------------------------------- criterion 7

void criterion_classifier_gradient(std::ostringstream& detail) {
  Rng rng(707);
  const double h = 1e-5;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 4 + static_cast<int>(rng.below(5));
    const std::vector<int> hidden = trial % 2 == 0 ? std::vector<int>{8}
                                                   : std::vector<int>{6, 5};
    const MlpClassifier model(dim, hidden, 7000 + trial);
    Vec s(dim);
    for (double& x : s) x = rng.uniform(-2.0, 2.0);
    const bool positive = trial % 3 != 0;
    const Vec grad = model.grad_log_proba_input(s, positive);
    for (int i = 0; i < dim; ++i) {
      Vec up = s, down = s;
      up[i] += h;
      down[i] -= h;
      const double fd = (model.log_proba(up, positive) -
                         model.log_proba(down, positive)) / (2.0 * h);
      const double rel = std::fabs(grad[i] - fd) / std::max(std::fabs(fd), 1e-8);
      worst = std::max(worst, rel);
      require(rel < 1e-4, "case " + std::to_string(trial) + " dim " +
                              std::to_string(i) + ": relative error " + fmt(rel));
    }
  }
  detail << "worst relative error " << fmt(worst) << " over 100 cases";
}

// ---------------------------------------------------------------- criterion 8

void criterion_classifier_auc(std::ostringstream& detail) {
  Rng rng(808);
  const int dim = 8;
  Vec direction = random_unit(rng, dim);
  auto draw_set = [&](int per_class) {
    LabeledEmbeddingSet set;
    for (int i = 0; i < 2 * per_class; ++i) {
      const int label = i % 2;
      Vec v(dim);
      for (int j = 0; j < dim; ++j) {
        v[j] = rng.normal() * 0.5 + (label ? 1.5 : -1.5) * direction[j];
      }
      set.vectors.push_back(std::move(v));
      set.labels.push_back(label);
    }
    return set;
  };
  const LabeledEmbeddingSet train = draw_set(150);
  const LabeledEmbeddingSet heldout = draw_set(75);
  MlpConfig config;
  config.epochs = 60;
  config.seed = 11;
  const MlpClassifier model = train_mlp(train, config);
  const double auc = evaluate_auc(model, heldout);
  require(auc >= 0.95, "held-out AUC " + fmt(auc) + " < 0.95");
  detail << "held-out AUC " << fmt(auc) << " on separable clusters";
}

// ---------------------------------------------------------------- criterion 9

void criterion_sampler_correctness(std::ostringstream& detail) {
  const auto start = std::chrono::steady_clock::now();

  // (a) 2-dim standard normal moments
  {
    const TargetDensity target = gaussian_target({0.0, 0.0}, {1.0, 1.0});
    SamplerConfig config;
    config.warmup = 1000;
    config.samples = 10000;
    config.seed = 909;
    const PosteriorSampleSet set = sample(target, {0.3, -0.3}, config);
    std::vector<double> x0(set.draws.size()), x1(set.draws.size());
    for (std::size_t i = 0; i < set.draws.size(); ++i) {
      x0[i] = set.draws[i][0];
      x1[i] = set.draws[i][1];
    }
    const double m0 = mean_of(x0), m1 = mean_of(x1);
    const double v0 = var_of(x0), v1 = var_of(x1);
    double cross = 0.0;
    for (std::size_t i = 0; i < x0.size(); ++i) cross += (x0[i] - m0) * (x1[i] - m1);
    cross /= x0.size() - 1;
    require(std::fabs(m0) <= 0.05 && std::fabs(m1) <= 0.05,
            "means (" + fmt(m0) + ", " + fmt(m1) + ") not within +/-0.05");
    require(std::fabs(v0 - 1.0) <= 0.1 && std::fabs(v1 - 1.0) <= 0.1 &&
                std::fabs(cross) <= 0.1,
            "covariance [" + fmt(v0) + ", " + fmt(cross) + "; ., " + fmt(v1) +
                "] not within +/-0.1 of identity");
    detail << "normal mean (" << fmt(m0) << ", " << fmt(m1) << ") var (" << fmt(v0)
           << ", " << fmt(v1) << "); ";
  }

  // (b) logistic-tilted Gaussian vs an independent random-walk Metropolis oracle
  {
    TargetDensity target;
    target.dim = 1;
    target.log_density = [](const Vec& s) {
      return -0.5 * s[0] * s[0] + stats::log_sigmoid(3.0 * s[0]);
    };
    target.gradient = [](const Vec& s) {
      return Vec{-s[0] + 3.0 * stats::sigmoid(-3.0 * s[0])};
    };
    SamplerConfig config;
    config.warmup = 1000;
    config.samples = 10000;
    config.seed = 910;
    const PosteriorSampleSet set = sample(target, {0.0}, config);
    std::vector<double> xs(set.draws.size());
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = set.draws[i][0];

    Rng rng(911);
    std::vector<double> oracle;
    oracle.reserve(1000000);
    double x = 0.0;
    double lp = -0.5 * x * x + stats::log_sigmoid(3.0 * x);
    for (int i = 0; i < 1000000; ++i) {
      const double prop = x + rng.normal();
      const double lp_prop = -0.5 * prop * prop + stats::log_sigmoid(3.0 * prop);
      if (std::log(std::max(rng.uniform(), 1e-300)) < lp_prop - lp) {
        x = prop;
        lp = lp_prop;
      }
      oracle.push_back(x);
    }
    auto batch_se = [](const std::vector<double>& chain) {
      const int batches = 50;
      const std::size_t len = chain.size() / batches;
      std::vector<double> means(batches);
      for (int b = 0; b < batches; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < len; ++i) s += chain[b * len + i];
        means[b] = s / len;
      }
      return std::sqrt(var_of(means) / batches);
    };
    const double mean_diff = std::fabs(mean_of(xs) - mean_of(oracle));
    const double mean_se = std::hypot(batch_se(xs), batch_se(oracle));
    require(mean_diff <= 3.0 * mean_se, "tilted mean differs by " + fmt(mean_diff) +
                                            " > 3 x SE " + fmt(mean_se));
    // variance comparison through batch means of squared values
    auto squared = [](std::vector<double> v) {
      for (double& x : v) x = x * x;
      return v;
    };
    const std::vector<double> xs2 = squared(xs);
    const std::vector<double> oracle2 = squared(oracle);
    const double var_diff = std::fabs(mean_of(xs2) - mean_of(oracle2));
    const double var_se = std::hypot(batch_se(xs2), batch_se(oracle2));
    require(var_diff <= 3.0 * var_se, "tilted second moment differs by " +
                                          fmt(var_diff) + " > 3 x SE " + fmt(var_se));
    detail << "tilted mean " << fmt(mean_of(xs)) << " (oracle " << fmt(mean_of(oracle))
           << "); ";
  }

  // (c) leapfrog reversibility
  {
    const TargetDensity target = gaussian_target({0.0, 0.0, 0.0}, {1.0, 0.7, 1.4});
    Rng rng(912);
    double worst = 0.0;
    for (int trial = 0; trial < 25; ++trial) {
      Vec q(3), p(3);
      for (double& v : q) v = rng.uniform(-2.0, 2.0);
      for (double& v : p) v = rng.normal();
      const Vec q0 = q, p0 = p;
      Vec grad = target.gradient(q);
      for (int i = 0; i < 30; ++i) leapfrog(target, &q, &p, &grad, 0.05);
      for (double& v : p) v = -v;
      for (int i = 0; i < 30; ++i) leapfrog(target, &q, &p, &grad, 0.05);
      for (int i = 0; i < 3; ++i) {
        worst = std::max(worst, std::fabs(q[i] - q0[i]));
        worst = std::max(worst, std::fabs(-p[i] - p0[i]));
      }
    }
    require(worst <= 1e-10, "leapfrog reversibility error " + fmt(worst) + " > 1e-10");
    detail << "reversibility " << fmt(worst);
  }

  const double elapsed = seconds_since(start);
  require(elapsed < 120.0, "runtime " + fmt(elapsed) + "s >= 120s");
  detail << ", " << fmt(elapsed) << "s";
}

// --------------------------------------------------------------- criterion 10

void criterion_mixing_diagnostics(std::ostringstream& detail) {
  const TargetDensity target = gaussian_target({0.0, 0.0}, {1.0, 1.0});
  SamplerConfig config;
  config.warmup = 1000;
  config.samples = 5000;
  config.seed = 1010;
  const PosteriorSampleSet set = sample(target, {0.0, 0.0}, config);
  double min_ess = 1e18;
  double worst_rho = 0.0;
  for (int d = 0; d < 2; ++d) {
    const auto rho = autocorrelation(set.draws, d, 20);
    for (int k = 10; k <= 20; ++k) {
      worst_rho = std::max(worst_rho, std::fabs(rho[k]));
      require(std::fabs(rho[k]) < 0.1, "dim " + std::to_string(d) + " lag " +
                                           std::to_string(k) + ": |rho| = " +
                                           fmt(std::fabs(rho[k])) + " >= 0.1");
    }
    const double ess = effective_sample_size(set.draws, d);
    min_ess = std::min(min_ess, ess);
    require(ess > 500.0, "dim " + std::to_string(d) + ": ESS " + fmt(ess) + " <= 500");
  }
  detail << "worst |rho(k>=10)| " << fmt(worst_rho) << ", min ESS " << fmt(min_ess)
         << " of 5000 draws";
}

// --------------------------------------------------------------- criterion 11

void criterion_posterior_direction(std::ostringstream& detail) {
  Rng rng(1111);
  const int dim = 8;
  const Vec axis = random_unit(rng, dim);

  LabeledEmbeddingSet train;
  for (int i = 0; i < 300; ++i) {
    const int label = i % 2;
    Vec v(dim);
    for (int j = 0; j < dim; ++j) {
      v[j] = rng.normal() * 0.5 + (label ? 1.2 : -1.2) * axis[j];
    }
    train.vectors.push_back(std::move(v));
    train.labels.push_back(label);
  }
  MlpConfig mlp_config;
  mlp_config.epochs = 50;
  mlp_config.seed = 5;
  const MlpClassifier model = train_mlp(train, mlp_config);
  const PriorSpec prior = fit_prior(train.vectors);

  SamplerConfig sampler_config;
  sampler_config.warmup = 500;
  sampler_config.samples = 3000;
  sampler_config.seed = 1112;
  const PosteriorSampleSet positive =
      sample(build_target(model, true, prior), prior.mean, sampler_config);
  sampler_config.seed = 1113;
  const PosteriorSampleSet negative =
      sample(build_target(model, false, prior), prior.mean, sampler_config);

  // lexicon words drawn from the same cluster construction
  EmbeddingTable table(dim);
  WordGroup pos_group{"positive-words", {}, "construction"};
  WordGroup neg_group{"negative-words", {}, "construction"};
  for (int i = 0; i < 20; ++i) {
    Vec vp(dim), vn(dim);
    for (int j = 0; j < dim; ++j) {
      vp[j] = rng.normal() * 0.5 + 1.2 * axis[j];
      vn[j] = rng.normal() * 0.5 - 1.2 * axis[j];
    }
    table.add("pos" + std::to_string(i), vp);
    pos_group.tokens.push_back("pos" + std::to_string(i));
    table.add("neg" + std::to_string(i), vn);
    neg_group.tokens.push_back("neg" + std::to_string(i));
  }

  const GroupComparison on_positive =
      compare_groups(pos_group, neg_group, table, positive.draws, 10000, 1114);
  const GroupComparison on_negative =
      compare_groups(pos_group, neg_group, table, negative.draws, 10000, 1115);
  require(on_positive.mean_a < on_positive.mean_b,
          "positive words are not closer to the positive-conditioned posterior");
  require(on_negative.mean_a > on_negative.mean_b,
          "sign did not flip for the negative-conditioned posterior");
  require(on_positive.p_value < 0.01,
          "positive conditioning p = " + fmt(on_positive.p_value) + " >= 0.01");
  require(on_negative.p_value < 0.01,
          "negative conditioning p = " + fmt(on_negative.p_value) + " >= 0.01");
  detail << "positive: d(pos) " << fmt(on_positive.mean_a) << " < d(neg) "
         << fmt(on_positive.mean_b) << " p " << fmt(on_positive.p_value)
         << "; negative: d(pos) " << fmt(on_negative.mean_a) << " > d(neg) "
         << fmt(on_negative.mean_b) << " p " << fmt(on_negative.p_value);
}

// --------------------------------------------------------------- criterion 12

void criterion_group_comparison(std::ostringstream& detail) {
  Rng rng(1212);
  EmbeddingTable table(3);
  WordGroup group_a{"a", {}, "construction"};
  WordGroup group_b{"b", {}, "construction"};
  for (int i = 0; i < 20; ++i) {
    table.add("a" + std::to_string(i),
              {1.0, rng.uniform(0.0, 0.15), rng.uniform(-0.05, 0.05)});
    group_a.tokens.push_back("a" + std::to_string(i));
    table.add("b" + std::to_string(i),
              {rng.uniform(0.55, 0.75), rng.uniform(0.6, 0.8), rng.uniform(-0.05, 0.05)});
    group_b.tokens.push_back("b" + std::to_string(i));
  }
  std::vector<Vec> samples;
  for (int i = 0; i < 50; ++i) {
    samples.push_back({1.0, rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05)});
  }
  const GroupComparison separated =
      compare_groups(group_a, group_b, table, samples, 10000, 7);
  require(std::fabs(separated.difference) >= 0.1,
          "engineered separation only " + fmt(std::fabs(separated.difference)));
  require(separated.p_value < 0.01, "p = " + fmt(separated.p_value) + " >= 0.01");

  const GroupComparison identical =
      compare_groups(group_a, group_a, table, samples, 10000, 7);
  require(std::fabs(identical.difference) < 1e-12,
          "identical groups differ by " + fmt(std::fabs(identical.difference)));
  detail << "separated |diff| " << fmt(std::fabs(separated.difference)) << " p "
         << fmt(separated.p_value) << "; identical |diff| "
         << fmt(std::fabs(identical.difference)) << " p " << fmt(identical.p_value);
}

// --------------------------------------------------------------- criterion 13

std::string cli_path;  // from --cli

void run_cli(const std::string& args) {
  const std::string command = cli_path + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(command.c_str());
  require(rc == 0, "CLI command failed (" + std::to_string(rc) + "): " + args);
}

std::map<std::string, std::string> snapshot_outputs(const fs::path& out_dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(out_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext != ".csv" && ext != ".json") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files[fs::relative(entry.path(), out_dir).string()] = ss.str();
  }
  return files;
}

void criterion_cli_determinism(std::ostringstream& detail) {
  require(!cli_path.empty() && fs::exists(cli_path),
          "pass --cli PATH pointing at the psyprobe binary");
  const fs::path dir = fs::temp_directory_path() / "psyprobe_acceptance_c13";
  fs::remove_all(dir);
  fs::create_directories(dir);

  // small but complete workspace
  write_biased_corpus((dir / "corpus.txt").string(), true, 1301);
  {
    std::ofstream reviews(dir / "reviews.csv");
    reviews << "text,label\n";
    Rng rng(1302);
    for (int i = 0; i < 80; ++i) {
      const bool positive = i % 2 == 0;
      const char* prefix = positive ? "app" : "brk";
      for (int w = 0; w < 10; ++w) {
        reviews << prefix << rng.below(8) << (w < 9 ? ' ' : ' ');
      }
      reviews << ',' << (positive ? "positive" : "negative") << '\n';
    }
    std::ofstream lexicon(dir / "lexicon.csv");
    for (int i = 0; i < 8; ++i) {
      lexicon << "app" << i << ",positive\nbrk" << i << ",negative\n";
    }
    std::ofstream groups(dir / "groups.csv");
    groups << "token,label\n";
    for (int i = 0; i < 4; ++i) groups << "app" << i << ",groupA\n";
    for (int i = 0; i < 4; ++i) groups << "brk" << i << ",groupB\n";
    std::ofstream validation(dir / "validation.csv");
    validation << "key,value\noccx,0.3\n";
  }
  {
    std::ofstream config(dir / "config.json");
    config << R"({
  "seed": 1303,
  "output_dir": ")" << (dir / "out").string() << R"(",
  "corpus": ")" << (dir / "corpus.txt").string() << R"(",
  "bootstrap": {"replicates": 2},
  "embeddings": {"dim": 12, "window": 5, "negative_samples": 5, "epochs": 3,
                  "learning_rate": 0.05, "min_token_count": 1},
  "probe": {
    "cue_pairs": [{"cue1": "cueone", "cue2": "cuetwo", "label": "one/two"}],
    "targets": ["occx"],
    "alpha_points": 21
  },
  "sentiment": {"csv": ")" << (dir / "reviews.csv").string() << R"(",
                 "embedding_file": ")" << (dir / "out/embeddings/replicate_00.vec").string() << R"(",
                 "hidden_dims": [12], "epochs": 15, "holdout_fraction": 0.25},
  "sampler": {"warmup": 200, "samples": 400},
  "analysis": {"lexicon_csv": ")" << (dir / "lexicon.csv").string() << R"(",
                "groups_csv": ")" << (dir / "groups.csv").string() << R"(",
                "embedding_file": ")" << (dir / "out/embeddings/replicate_00.vec").string() << R"(",
                "pca_components": 2, "permutations": 2000, "max_lag": 25}
})";
  }

  const std::string cfg = " --config " + (dir / "config.json").string();
  auto run_all = [&]() {
    run_cli("bootstrap" + cfg);
    run_cli("train-embeddings" + cfg + " --jobs 2");
    run_cli("probe" + cfg);
    run_cli("sentiment" + cfg);
    run_cli("sample --outcome positive" + cfg);
    run_cli("sample --outcome negative" + cfg);
    run_cli("analyze" + cfg);
  };
  run_all();
  const auto first = snapshot_outputs(dir / "out");
  require(!first.empty(), "no CSV/JSON outputs were produced");
  run_all();
  const auto second = snapshot_outputs(dir / "out");

  require(first.size() == second.size(),
          "output file sets differ between runs (" + std::to_string(first.size()) +
              " vs " + std::to_string(second.size()) + ")");
  int compared = 0;
  for (const auto& [name, content] : first) {
    const auto it = second.find(name);
    require(it != second.end(), "output '" + name + "' missing on rerun");
    require(it->second == content, "output '" + name + "' differs between runs");
    ++compared;
  }
  fs::remove_all(dir);
  detail << compared << " CSV/JSON outputs byte-identical across reruns";
}

struct Criterion {
  int id;
  std::string name;
  std::function<void(std::ostringstream&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--cli") cli_path = argv[i + 1];
  }

  const std::vector<Criterion> criteria = {
      {1, "closed-form crossing agrees with the 1e-4 grid sweep",
       criterion_closed_form_vs_sweep},
      {2, "psychometric recovery of (mu, sigma) from synthetic responses",
       criterion_psychometric_recovery},
      {3, "JND closed forms match bisection to 1e-8", criterion_jnd_closed_forms},
      {4, "cue-swap symmetry: PSE' = 1 - PSE, equal sigma", criterion_cue_swap},
      {5, "Poisson bootstrap statistics on 100k lines", criterion_poisson_bootstrap},
      {6, "end-to-end desk-scale bias direction", criterion_end_to_end_direction},
      {7, "classifier input gradient vs finite differences",
       criterion_classifier_gradient},
      {8, "classifier held-out AUC >= 0.95 on separable data", criterion_classifier_auc},
      {9, "sampler correctness: moments, oracle agreement, reversibility",
       criterion_sampler_correctness},
      {10, "mixing diagnostics: autocorrelation decay and ESS",
       criterion_mixing_diagnostics},
      {11, "posterior direction property with permutation significance",
       criterion_posterior_direction},
      {12, "group comparison significance and null behavior",
       criterion_group_comparison},
      {13, "CLI determinism: byte-identical CSV/JSON on rerun",
       criterion_cli_determinism},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    std::ostringstream detail;
    try {
      criterion.run(detail);
      std::printf("[PASS] criterion %2d: %s (%s)\n", criterion.id,
                  criterion.name.c_str(), detail.str().c_str());
    } catch (const CheckFailure& failure) {
      ++failures;
      std::printf("[FAIL] criterion %2d: %s -- %s\n", criterion.id,
                  criterion.name.c_str(), failure.message.c_str());
    } catch (const std::exception& e) {
      ++failures;
      std::printf("[FAIL] criterion %2d: %s -- unexpected error: %s\n", criterion.id,
                  criterion.name.c_str(), e.what());
    }
    std::fflush(stdout);
  }
  if (failures > 0) {
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}

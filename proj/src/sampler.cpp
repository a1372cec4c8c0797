#include "psyprobe/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "psyprobe/error.hpp"
#include "psyprobe/rng.hpp"

namespace psyprobe {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;
}

void PriorSpec::validate() const {
  if (mean.size() != sd.size() || mean.empty()) {
    fail(ErrorCode::DimMismatch, "prior mean/sd shapes disagree");
  }
  for (double s : sd) {
    if (!(s > 0.0)) fail(ErrorCode::ConfigError, "prior sd must be positive");
  }
}

double PriorSpec::log_density(const Vec& s) const {
  if (s.size() != mean.size()) fail(ErrorCode::DimMismatch, "prior dim mismatch");
  double lp = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double z = (s[i] - mean[i]) / sd[i];
    lp += -0.5 * z * z - std::log(sd[i]) - 0.5 * kLog2Pi;
  }
  return lp;
}

Vec PriorSpec::gradient(const Vec& s) const {
  if (s.size() != mean.size()) fail(ErrorCode::DimMismatch, "prior dim mismatch");
  Vec g(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    g[i] = -(s[i] - mean[i]) / (sd[i] * sd[i]);
  }
  return g;
}

PriorSpec fit_prior(const std::vector<Vec>& reference_population) {
  if (reference_population.size() < 2) {
    fail(ErrorCode::TooFewSamples, "prior needs >= 2 reference embeddings");
  }
  const std::size_t dim = reference_population.front().size();
  PriorSpec prior;
  prior.mean.assign(dim, 0.0);
  prior.sd.assign(dim, 0.0);
  for (const Vec& v : reference_population) {
    if (v.size() != dim) fail(ErrorCode::DimMismatch, "reference rows disagree on dim");
    for (std::size_t i = 0; i < dim; ++i) prior.mean[i] += v[i];
  }
  for (double& m : prior.mean) m /= reference_population.size();
  for (const Vec& v : reference_population) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = v[i] - prior.mean[i];
      prior.sd[i] += d * d;
    }
  }
  for (double& s : prior.sd) {
    s = std::sqrt(s / (reference_population.size() - 1));
    s = std::max(s, 1e-8);  // guard degenerate dimensions
  }
  return prior;
}

TargetDensity build_target(const MlpClassifier& classifier, bool positive_outcome,
                           const PriorSpec& prior) {
  prior.validate();
  if (classifier.input_dim() != static_cast<int>(prior.mean.size())) {
    fail(ErrorCode::DimMismatch, "classifier and prior dims disagree");
  }
  TargetDensity target;
  target.dim = classifier.input_dim();
  target.log_density = [&classifier, &prior, positive_outcome](const Vec& s) {
    return classifier.log_proba(s, positive_outcome) + prior.log_density(s);
  };
  target.gradient = [&classifier, &prior, positive_outcome](const Vec& s) {
    Vec g = classifier.grad_log_proba_input(s, positive_outcome);
    const Vec gp = prior.gradient(s);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += gp[i];
    return g;
  };
  return target;
}

TargetDensity gaussian_target(const Vec& mean, const Vec& sd) {
  TargetDensity target;
  target.dim = static_cast<int>(mean.size());
  target.log_density = [mean, sd](const Vec& s) {
    double lp = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double z = (s[i] - mean[i]) / sd[i];
      lp += -0.5 * z * z;
    }
    return lp;
  };
  target.gradient = [mean, sd](const Vec& s) {
    Vec g(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      g[i] = -(s[i] - mean[i]) / (sd[i] * sd[i]);
    }
    return g;
  };
  return target;
}

void leapfrog(const TargetDensity& target, Vec* position, Vec* momentum, Vec* grad,
              double step) {
  for (std::size_t i = 0; i < position->size(); ++i) {
    (*momentum)[i] += 0.5 * step * (*grad)[i];
  }
  for (std::size_t i = 0; i < position->size(); ++i) {
    (*position)[i] += step * (*momentum)[i];
  }
  *grad = target.gradient(*position);
  for (std::size_t i = 0; i < position->size(); ++i) {
    (*momentum)[i] += 0.5 * step * (*grad)[i];
  }
}

namespace {

struct Point {
  Vec theta;
  Vec r;
  Vec grad;
  double logp = 0.0;

  double hamiltonian() const {
    double k = 0.0;
    for (double ri : r) k += ri * ri;
    return logp - 0.5 * k;
  }
};

bool no_uturn(const Vec& theta_minus, const Vec& theta_plus, const Vec& r_minus,
              const Vec& r_plus) {
  double forward = 0.0, backward = 0.0;
  for (std::size_t i = 0; i < theta_minus.size(); ++i) {
    const double d = theta_plus[i] - theta_minus[i];
    forward += d * r_plus[i];
    backward += d * r_minus[i];
  }
  return forward >= 0.0 && backward >= 0.0;
}

struct NutsState {
  const TargetDensity* target;
  Rng* rng;
  double step;
  double log_u;
  double h0;
  double divergence_threshold;
  bool diverged = false;
  double accept_sum = 0.0;
  long accept_count = 0;
};

struct Subtree {
  Point minus, plus, proposal;
  long n_accept = 0;  // slice-acceptable leaves
  bool keep_going = true;
};

Point step_point(NutsState& st, const Point& from, int direction) {
  Point next = from;
  Vec r = next.r;
  leapfrog(*st.target, &next.theta, &r, &next.grad, direction * st.step);
  next.r = std::move(r);
  next.logp = st.target->log_density(next.theta);
  return next;
}

Subtree build_tree(NutsState& st, const Point& from, int direction, int depth) {
  if (depth == 0) {
    Subtree leaf;
    leaf.minus = step_point(st, from, direction);
    leaf.plus = leaf.minus;
    leaf.proposal = leaf.minus;
    const double h = leaf.minus.hamiltonian();
    const double energy_error = h - st.h0;
    leaf.n_accept = (st.log_u <= h) ? 1 : 0;
    leaf.keep_going = std::isfinite(h) && st.log_u < h + st.divergence_threshold;
    if (!leaf.keep_going) st.diverged = true;
    st.accept_sum += std::isfinite(energy_error) ? std::min(1.0, std::exp(energy_error)) : 0.0;
    st.accept_count += 1;
    return leaf;
  }
  Subtree inner = build_tree(st, from, direction, depth - 1);
  if (!inner.keep_going) return inner;
  const Point& edge = (direction == 1) ? inner.plus : inner.minus;
  Subtree outer = build_tree(st, edge, direction, depth - 1);
  if (direction == 1) {
    inner.plus = outer.plus;
  } else {
    inner.minus = outer.minus;
  }
  const long total = inner.n_accept + outer.n_accept;
  if (outer.n_accept > 0 &&
      st.rng->uniform() * static_cast<double>(total) < static_cast<double>(outer.n_accept)) {
    inner.proposal = outer.proposal;
  }
  inner.n_accept = total;
  inner.keep_going = outer.keep_going &&
                     no_uturn(inner.minus.theta, inner.plus.theta, inner.minus.r,
                              inner.plus.r);
  return inner;
}

double find_reasonable_step(const TargetDensity& target, const Point& init, Rng* rng) {
  double step = 1.0;
  Vec r(init.theta.size());
  for (double& ri : r) ri = rng->normal();
  Point p = init;
  p.r = r;
  const double h0 = p.hamiltonian();

  auto ratio_at = [&](double eps) {
    Point q = p;
    Vec rr = q.r;
    leapfrog(target, &q.theta, &rr, &q.grad, eps);
    q.r = std::move(rr);
    q.logp = target.log_density(q.theta);
    const double h1 = q.hamiltonian();
    return std::isfinite(h1) ? std::exp(h1 - h0) : 0.0;
  };

  double ratio = ratio_at(step);
  const double direction = ratio > 0.5 ? 1.0 : -1.0;
  for (int i = 0; i < 64; ++i) {
    if (direction > 0 ? ratio <= 0.5 : ratio >= 0.5) break;
    step *= direction > 0 ? 2.0 : 0.5;
    ratio = ratio_at(step);
  }
  return step;
}

}  // namespace

PosteriorSampleSet sample(const TargetDensity& target, const Vec& init,
                          const SamplerConfig& config) {
  if (config.warmup < 1 || config.samples < 1) {
    fail(ErrorCode::ConfigError, "warmup and samples must be >= 1");
  }
  Rng rng(config.seed);
  Point current;
  current.theta = init;
  current.logp = target.log_density(init);
  current.grad = target.gradient(init);
  if (!std::isfinite(current.logp)) {
    fail(ErrorCode::NonFiniteDensityAtInit, "log density at init is not finite");
  }
  for (double g : current.grad) {
    if (!std::isfinite(g)) {
      fail(ErrorCode::NonFiniteDensityAtInit, "gradient at init is not finite");
    }
  }

  PosteriorSampleSet out;
  out.warmup = config.warmup;
  out.seed = config.seed;
  out.chain_id = config.chain_id;
  out.draws.reserve(config.samples);
  out.step_size_trace.reserve(config.warmup);

  // dual averaging (standard constants): gamma, t0, kappa
  double step = find_reasonable_step(target, current, &rng);
  const double mu_da = std::log(10.0 * step);
  double log_step = std::log(step);
  double log_step_avg = 0.0;
  double h_avg = 0.0;
  constexpr double kGamma = 0.05;
  constexpr double kT0 = 10.0;
  constexpr double kKappa = 0.75;

  double accept_stat_sum = 0.0;
  const long total_iters = static_cast<long>(config.warmup) + config.samples;
  for (long iter = 1; iter <= total_iters; ++iter) {
    const bool warming = iter <= config.warmup;
    NutsState st;
    st.target = &target;
    st.rng = &rng;
    st.step = warming ? std::exp(log_step) : step;
    st.divergence_threshold = config.divergence_threshold;

    Point start = current;
    start.r.resize(start.theta.size());
    for (double& ri : start.r) ri = rng.normal();
    st.h0 = start.hamiltonian();
    st.log_u = st.h0 + std::log(std::max(rng.uniform(), 1e-300));

    Point minus = start, plus = start, proposal = start;
    long n_accept = 1;
    bool keep_going = true;
    for (int depth = 0; depth < config.max_tree_depth && keep_going; ++depth) {
      const int direction = rng.uniform() < 0.5 ? -1 : 1;
      Subtree tree = build_tree(st, direction == 1 ? plus : minus, direction, depth);
      if (direction == 1) {
        plus = tree.plus;
      } else {
        minus = tree.minus;
      }
      if (tree.keep_going && tree.n_accept > 0 &&
          rng.uniform() * static_cast<double>(n_accept) <
              static_cast<double>(tree.n_accept)) {
        proposal = tree.proposal;
      }
      n_accept += tree.n_accept;
      keep_going = tree.keep_going &&
                   no_uturn(minus.theta, plus.theta, minus.r, plus.r);
    }
    current = proposal;

    const double accept_stat =
        st.accept_count > 0 ? st.accept_sum / st.accept_count : 0.0;
    if (warming) {
      const double m = static_cast<double>(iter);
      const double eta = 1.0 / (m + kT0);
      h_avg = (1.0 - eta) * h_avg + eta * (config.target_accept - accept_stat);
      log_step = mu_da - std::sqrt(m) / kGamma * h_avg;
      const double w = std::pow(m, -kKappa);
      log_step_avg = w * log_step + (1.0 - w) * log_step_avg;
      out.step_size_trace.push_back(std::exp(log_step));
      if (iter == config.warmup) step = std::exp(log_step_avg);
    } else {
      out.draws.push_back(current.theta);
      accept_stat_sum += accept_stat;
      if (st.diverged) out.divergence_count += 1;
    }
  }

  out.step_size = step;
  out.mean_accept_stat = accept_stat_sum / config.samples;
  if (out.divergence_count * 2 > config.samples) {
    fail(ErrorCode::DivergentTrajectory,
         "more than half of the draws diverged (" +
             std::to_string(out.divergence_count) + "/" +
             std::to_string(config.samples) + ")");
  }
  return out;
}

std::vector<double> autocorrelation(const std::vector<double>& series, int max_lag) {
  const long n = static_cast<long>(series.size());
  if (max_lag < 0) fail(ErrorCode::ConfigError, "max_lag must be >= 0");
  if (n <= max_lag || n < 2) {
    fail(ErrorCode::TooFewSamples, "need more samples than max_lag");
  }
  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : series) var += (x - mean) * (x - mean);
  if (var == 0.0) fail(ErrorCode::DegenerateVariance, "series is constant");
  std::vector<double> rho(max_lag + 1);
  for (int k = 0; k <= max_lag; ++k) {
    double c = 0.0;
    for (long t = 0; t + k < n; ++t) {
      c += (series[t] - mean) * (series[t + k] - mean);
    }
    rho[k] = c / var;
  }
  return rho;
}

std::vector<double> autocorrelation(const std::vector<Vec>& samples, int dimension,
                                    int max_lag) {
  std::vector<double> series(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) series[i] = samples[i][dimension];
  return autocorrelation(series, max_lag);
}

double effective_sample_size(const std::vector<double>& series) {
  const long n = static_cast<long>(series.size());
  if (n < 100) fail(ErrorCode::TooFewSamples, "ESS needs >= 100 samples");
  const int max_lag = static_cast<int>(std::min<long>(n - 2, 2000));
  const std::vector<double> rho = autocorrelation(series, max_lag);
  // Geyer initial positive sequence: sum rho-pairs while they stay positive
  double tau = 0.0;
  for (int m = 0; 2 * m + 1 <= max_lag; ++m) {
    const double pair = rho[2 * m] + rho[2 * m + 1];
    if (pair <= 0.0) break;
    tau += pair;
  }
  tau = 2.0 * tau - 1.0;
  tau = std::max(tau, 1e-3);
  return static_cast<double>(n) / tau;
}

double effective_sample_size(const std::vector<Vec>& samples, int dimension) {
  std::vector<double> series(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) series[i] = samples[i][dimension];
  return effective_sample_size(series);
}

void save_samples_csv(const PosteriorSampleSet& set, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write '" + path + "'");
  char buf[40];
  for (const Vec& draw : set.draws) {
    for (std::size_t i = 0; i < draw.size(); ++i) {
      std::snprintf(buf, sizeof(buf), i + 1 < draw.size() ? "%.9g," : "%.9g\n", draw[i]);
      out << buf;
    }
  }
  if (!out) fail(ErrorCode::IoError, "short write to '" + path + "'");
}

std::vector<Vec> load_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "'");
  std::vector<Vec> draws;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Vec row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      try {
        row.push_back(std::stod(field));
      } catch (const std::exception&) {
        fail(ErrorCode::IoError, "bad sample value '" + field + "' in '" + path + "'");
      }
    }
    if (!draws.empty() && row.size() != draws.front().size()) {
      fail(ErrorCode::DimMismatch, "ragged sample rows in '" + path + "'");
    }
    draws.push_back(std::move(row));
  }
  return draws;
}

void save_diagnostics_json(
    const PosteriorSampleSet& set, const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& extra_fields) {
  nlohmann::json doc;
  for (const auto& [key, value] : extra_fields) doc[key] = value;
  doc["warmup"] = set.warmup;
  doc["samples"] = set.draws.size();
  doc["step_size"] = set.step_size;
  doc["mean_accept_stat"] = set.mean_accept_stat;
  doc["divergence_count"] = set.divergence_count;
  doc["seed"] = set.seed;
  doc["chain_id"] = set.chain_id;
  if (!set.draws.empty() && set.draws.size() >= 100) {
    const int dim = static_cast<int>(set.draws.front().size());
    std::vector<double> ess(dim);
    double lo = 0, hi = 0, sum = 0;
    for (int d = 0; d < dim; ++d) {
      ess[d] = effective_sample_size(set.draws, d);
      if (d == 0 || ess[d] < lo) lo = ess[d];
      if (d == 0 || ess[d] > hi) hi = ess[d];
      sum += ess[d];
    }
    doc["ess"] = {{"min", lo}, {"max", hi}, {"mean", sum / dim}, {"per_dimension", ess}};
  }
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write '" + path + "'");
  out << doc.dump(2) << '\n';
}

}  // namespace psyprobe

#include "psyprobe/psychometrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "psyprobe/error.hpp"
#include "psyprobe/stats_math.hpp"

namespace psyprobe {

namespace {

constexpr double kLogSqrt2Pi = 0.9189385332046727;
constexpr double kMinLogScale = -23.0;  // sigma floor ~1e-10
constexpr double kMaxLogScale = 5.0;

double family_cdf(PsyFamily family, double z) {
  return family == PsyFamily::Logistic ? stats::sigmoid(z) : stats::normal_cdf(z);
}

double family_log_cdf(PsyFamily family, double z) {
  return family == PsyFamily::Logistic ? stats::log_sigmoid(z) : stats::log_normal_cdf(z);
}

// Aggregated trials at one stimulus level: sufficient statistics for the fit.
struct Cell {
  double alpha;
  double n;       // trials
  double n_cue2;  // cue-2 answers
};

// dl/dz summed over a cell, plus the Fisher weight n * f^2 / (F (1-F)).
void cell_terms(PsyFamily family, const Cell& cell, double z, double* dldz,
                double* fisher) {
  if (family == PsyFamily::Logistic) {
    const double F = stats::sigmoid(z);
    *dldz = cell.n_cue2 - cell.n * F;
    *fisher = cell.n * F * (1.0 - F);
    return;
  }
  const double log_phi = -0.5 * z * z - kLogSqrt2Pi;
  const double log_cdf = stats::log_normal_cdf(z);
  const double log_sf = stats::log_normal_cdf(-z);
  // hazard ratios phi/Phi and phi/(1-Phi), stable in both tails
  const double h_pos = std::exp(log_phi - log_cdf);
  const double h_neg = std::exp(log_phi - log_sf);
  *dldz = cell.n_cue2 * h_pos - (cell.n - cell.n_cue2) * h_neg;
  *fisher = cell.n * std::exp(2.0 * log_phi - log_cdf - log_sf);
}

double total_log_likelihood(PsyFamily family, const std::vector<Cell>& cells,
                            double mu, double log_sigma) {
  const double sigma = std::exp(log_sigma);
  double ll = 0.0;
  for (const Cell& cell : cells) {
    const double z = (cell.alpha - mu) / sigma;
    ll += cell.n_cue2 * family_log_cdf(family, z) +
          (cell.n - cell.n_cue2) * family_log_cdf(family, -z);
  }
  return ll;
}

struct GradInfo {
  double g_mu, g_t;             // gradient wrt (mu, log sigma)
  double i_mm, i_mt, i_tt;      // expected information
};

GradInfo gradient_and_info(PsyFamily family, const std::vector<Cell>& cells,
                           double mu, double log_sigma) {
  const double sigma = std::exp(log_sigma);
  GradInfo out{0, 0, 0, 0, 0};
  for (const Cell& cell : cells) {
    const double z = (cell.alpha - mu) / sigma;
    double dldz, fisher;
    cell_terms(family, cell, z, &dldz, &fisher);
    out.g_mu += dldz * (-1.0 / sigma);
    out.g_t += dldz * (-z);
    out.i_mm += fisher / (sigma * sigma);
    out.i_mt += fisher * z / sigma;
    out.i_tt += fisher * z * z;
  }
  return out;
}

// crude location/scale guess from the empirical proportions
void initial_guess(const std::vector<Cell>& cells, double* mu0, double* t0) {
  const double lo = cells.front().alpha;
  const double hi = cells.back().alpha;
  double mu = 0.5 * (lo + hi);
  for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
    const double p0 = cells[i].n_cue2 / cells[i].n;
    const double p1 = cells[i + 1].n_cue2 / cells[i + 1].n;
    if (p0 <= 0.5 && p1 > 0.5) {
      const double frac = (p1 > p0) ? (0.5 - p0) / (p1 - p0) : 0.5;
      mu = cells[i].alpha + frac * (cells[i + 1].alpha - cells[i].alpha);
      break;
    }
  }
  *mu0 = mu;
  *t0 = std::log(std::max((hi - lo) / 8.0, 1e-3));
}

}  // namespace

double psychometric_value(const PsychometricFit& fit, double alpha) {
  return family_cdf(fit.family, (alpha - fit.location) / fit.scale);
}

PsychometricFit fit_psychometric(const ResponseSet& responses, PsyFamily family,
                                 const FitOptions& options) {
  std::vector<double> alphas;
  std::vector<int> ys;
  alphas.reserve(responses.records.size());
  ys.reserve(responses.records.size());
  for (const ResponseRecord& rec : responses.records) {
    alphas.push_back(rec.alpha);
    ys.push_back(rec.choice == Choice::Cue2 ? 1 : 0);
  }
  return fit_psychometric_raw(alphas, ys, family, options);
}

PsychometricFit fit_psychometric_raw(const std::vector<double>& alphas,
                                     const std::vector<int>& chose_cue2,
                                     PsyFamily family, const FitOptions& options) {
  if (alphas.size() != chose_cue2.size()) {
    fail(ErrorCode::LengthMismatch, "alphas and responses differ in length");
  }
  if (alphas.empty()) fail(ErrorCode::EmptyInput, "no responses to fit");

  std::map<double, Cell> by_alpha;
  long total_cue2 = 0;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    Cell& cell = by_alpha.try_emplace(alphas[i], Cell{alphas[i], 0.0, 0.0}).first->second;
    cell.n += 1.0;
    cell.n_cue2 += chose_cue2[i];
    total_cue2 += chose_cue2[i];
  }
  if (total_cue2 == 0 || total_cue2 == static_cast<long>(alphas.size())) {
    fail(ErrorCode::AllOneClass, "every response is the same choice");
  }
  if (by_alpha.size() < 4) {
    fail(ErrorCode::InsufficientAlphas,
         "need >= 4 distinct alpha values, got " + std::to_string(by_alpha.size()));
  }
  std::vector<Cell> cells;
  cells.reserve(by_alpha.size());
  for (const auto& [_, cell] : by_alpha) cells.push_back(cell);

  double mu, t;
  initial_guess(cells, &mu, &t);
  double ll = total_log_likelihood(family, cells, mu, t);

  PsychometricFit fit;
  fit.family = family;
  fit.n_trials = static_cast<int>(alphas.size());

  bool converged = false;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const GradInfo gi = gradient_and_info(family, cells, mu, t);
    const double grad_norm = std::hypot(gi.g_mu, gi.g_t);
    if (grad_norm < options.gradient_tolerance) {
      converged = true;
      break;
    }
    // Newton direction from the expected information (2x2 solve)
    double d_mu = 0.0, d_t = 0.0;
    const double det = gi.i_mm * gi.i_tt - gi.i_mt * gi.i_mt;
    bool have_newton = std::isfinite(det) && det > 1e-300;
    if (have_newton) {
      d_mu = (gi.i_tt * gi.g_mu - gi.i_mt * gi.g_t) / det;
      d_t = (gi.i_mm * gi.g_t - gi.i_mt * gi.g_mu) / det;
      if (!std::isfinite(d_mu) || !std::isfinite(d_t)) have_newton = false;
    }
    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      double dir_mu, dir_t;
      if (attempt == 0 && have_newton) {
        dir_mu = d_mu;
        dir_t = d_t;
      } else {
        // gradient ascent fallback, scaled to a unit-ish step
        const double scale = 1.0 / std::max(grad_norm, 1.0);
        dir_mu = gi.g_mu * scale;
        dir_t = gi.g_t * scale;
      }
      double step = 1.0;
      for (int halving = 0; halving < 50; ++halving) {
        const double mu_try = mu + step * dir_mu;
        const double t_try = std::clamp(t + step * dir_t, kMinLogScale, kMaxLogScale);
        const double ll_try = total_log_likelihood(family, cells, mu_try, t_try);
        if (std::isfinite(ll_try) && ll_try > ll) {
          mu = mu_try;
          t = t_try;
          ll = ll_try;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
    }
    if (!accepted) break;  // improvements fell below fp resolution of the LL
  }
  // Polish: near the optimum the LL changes by less than one ulp per Newton
  // step while the gradient still contracts quadratically. Drive the gradient
  // norm itself down with undamped Newton steps.
  if (!converged) {
    GradInfo gi = gradient_and_info(family, cells, mu, t);
    double gnorm = std::hypot(gi.g_mu, gi.g_t);
    for (int polish = 0; polish < 25 && gnorm >= options.gradient_tolerance; ++polish) {
      const double det = gi.i_mm * gi.i_tt - gi.i_mt * gi.i_mt;
      if (!(det > 1e-300) || !std::isfinite(det)) break;
      const double mu_try = mu + (gi.i_tt * gi.g_mu - gi.i_mt * gi.g_t) / det;
      const double t_try =
          std::clamp(t + (gi.i_mm * gi.g_t - gi.i_mt * gi.g_mu) / det, kMinLogScale,
                     kMaxLogScale);
      const GradInfo gt = gradient_and_info(family, cells, mu_try, t_try);
      const double gnorm_try = std::hypot(gt.g_mu, gt.g_t);
      if (!std::isfinite(gnorm_try) || gnorm_try >= gnorm) break;
      mu = mu_try;
      t = t_try;
      gi = gt;
      gnorm = gnorm_try;
    }
    ll = total_log_likelihood(family, cells, mu, t);
    converged = gnorm < options.gradient_tolerance;
  }

  fit.location = mu;
  fit.scale = std::exp(t);
  fit.log_likelihood = ll;
  fit.converged = converged;
  return fit;
}

double pse(const PsychometricFit& fit) {
  if (!fit.converged) fail(ErrorCode::NotConverged, "pse of a non-converged fit");
  return fit.location;
}

double jnd(const PsychometricFit& fit) {
  if (!fit.converged) fail(ErrorCode::NotConverged, "jnd of a non-converged fit");
  if (fit.family == PsyFamily::Logistic) {
    return 2.0 * fit.scale * std::log(3.0);
  }
  return 2.0 * fit.scale * stats::normal_quantile(0.75);
}

BiasReport bias_report(const PsychometricFit& fit, double epsilon) {
  BiasReport report;
  report.pse = pse(fit);
  report.jnd = jnd(fit);
  if (report.pse < 0.5 - epsilon) {
    report.direction = BiasDirection::AgainstCue1;
  } else if (report.pse > 0.5 + epsilon) {
    report.direction = BiasDirection::AgainstCue2;
  } else {
    report.direction = BiasDirection::Unbiased;
  }
  report.out_of_range = report.pse < 0.0 || report.pse > 1.0;
  return report;
}

BootstrapSummary bootstrap_summary(const std::vector<PsychometricFit>& fits) {
  std::vector<double> pses, jnds;
  for (const PsychometricFit& fit : fits) {
    if (!fit.converged) continue;
    pses.push_back(pse(fit));
    jnds.push_back(jnd(fit));
  }
  if (pses.size() < 2) {
    fail(ErrorCode::TooFewFits, "need >= 2 converged fits, got " +
                                    std::to_string(pses.size()));
  }
  BootstrapSummary summary;
  summary.n_fits = static_cast<int>(pses.size());
  double sum = 0.0;
  for (double p : pses) sum += p;
  summary.mean_pse = sum / pses.size();
  double ss = 0.0;
  for (double p : pses) ss += (p - summary.mean_pse) * (p - summary.mean_pse);
  summary.std_pse = std::sqrt(ss / (pses.size() - 1));
  double jsum = 0.0;
  for (double j : jnds) jsum += j;
  summary.mean_jnd = jsum / jnds.size();
  return summary;
}

}  // namespace psyprobe

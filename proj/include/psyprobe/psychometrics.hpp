#pragma once

#include <vector>

#include "psyprobe/probe.hpp"

namespace psyprobe {

enum class PsyFamily { Logistic, CumulativeNormal };

// Psi(alpha) = F((alpha - location) / scale), the probability of answering
// cue 2; F is the logistic or standard normal CDF.
struct PsychometricFit {
  PsyFamily family = PsyFamily::Logistic;
  double location = 0.0;  // mu, alpha units
  double scale = 0.0;     // sigma > 0, alpha units
  double log_likelihood = 0.0;
  int n_trials = 0;
  bool converged = false;
};

struct FitOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-8;
};

double psychometric_value(const PsychometricFit& fit, double alpha);

// Maximum-likelihood fit by damped Newton on (mu, log sigma), gradient-ascent
// fallback when the Newton step fails to improve.
PsychometricFit fit_psychometric(const ResponseSet& responses, PsyFamily family,
                                 const FitOptions& options = {});

// Raw entry point: chose_cue2[i] is 1 when trial i answered cue 2.
PsychometricFit fit_psychometric_raw(const std::vector<double>& alphas,
                                     const std::vector<int>& chose_cue2,
                                     PsyFamily family,
                                     const FitOptions& options = {});

// alpha at which Psi = 1/2; the location parameter for both families
double pse(const PsychometricFit& fit);

// Delta-alpha solving Psi(pse + d/2) - Psi(pse - d/2) = 1/2.
// Logistic: 2*sigma*ln 3. Cumulative normal: 2*sigma*probit(0.75).
double jnd(const PsychometricFit& fit);

enum class BiasDirection { AgainstCue1, AgainstCue2, Unbiased };

struct BiasReport {
  double pse = 0.0;
  double jnd = 0.0;
  BiasDirection direction = BiasDirection::Unbiased;
  bool out_of_range = false;  // pse outside [0,1]
};

BiasReport bias_report(const PsychometricFit& fit, double epsilon = 0.01);

struct BootstrapSummary {
  double mean_pse = 0.0;
  double std_pse = 0.0;  // sample standard deviation across replicates
  double mean_jnd = 0.0;
  int n_fits = 0;
};

// Across-replicate mean/std of PSE plus mean JND; non-converged fits are
// dropped, fewer than two survivors is an error.
BootstrapSummary bootstrap_summary(const std::vector<PsychometricFit>& fits);

}  // namespace psyprobe

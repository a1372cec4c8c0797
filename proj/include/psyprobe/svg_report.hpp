#pragma once

#include <string>
#include <vector>

#include "psyprobe/psychometrics.hpp"

namespace psyprobe {

struct LabeledPoint {
  double x = 0.0;
  double y = 0.0;
  std::string label;
  int series = 0;  // color index
};

// Standalone SVG strings with the plotted data embedded as an XML comment,
// so every figure can be re-derived without the binary outputs.

// per-replicate curves plus pooled curve plus empirical cue-2 proportions
std::string svg_psychometric_curves(const std::vector<PsychometricFit>& replicate_fits,
                                    const PsychometricFit* pooled,
                                    const std::vector<double>& alpha_grid,
                                    const std::vector<double>& proportion_cue2,
                                    const std::string& title);

std::string svg_scatter(const std::vector<LabeledPoint>& points,
                        const std::string& x_label, const std::string& y_label,
                        const std::string& title);

std::string svg_bars(const std::vector<std::pair<std::string, double>>& bars,
                     const std::string& y_label, const std::string& title);

std::string svg_acf(const std::vector<std::vector<double>>& rho_per_dim,
                    const std::string& title);

}  // namespace psyprobe

#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "psyprobe/embedding.hpp"

namespace psyprobe {

enum class Choice { Cue1, Cue2 };

// Default scoring blends similarities linearly in alpha; the alternative
// scores the cosine of the mixed stimulus vector against each cue and is
// exposed for comparison only.
enum class ScoringMode { SimilarityBlend, MixedVectorCosine };

// Cue tokens may each hold several whitespace-separated words; they are
// resolved through average_embedding.
struct CuePair {
  std::string cue1_token;
  std::string cue2_token;
  std::string label;
};

struct TrialBattery {
  CuePair cue_pair;
  std::string target_token;
  std::vector<double> alpha_grid;
  std::span<const EmbeddingTable> replicates;

  void validate() const;
};

struct ResponseRecord {
  int replicate = 0;
  double alpha = 0.0;
  Choice choice = Choice::Cue1;
  double margin = 0.0;  // score(cue1) - score(cue2)
};

struct ResponseSet {
  std::vector<ResponseRecord> records;
};

// CSV columns: replicate,alpha,choice,margin
void write_responses_csv(const ResponseSet& responses, std::ostream& out);
ResponseSet read_responses_csv(std::istream& in);

// 21 evenly spaced points on [0,1] by default
std::vector<double> uniform_alpha_grid(int points = 21);

// (1-alpha)*c1 + alpha*c2
Vec mix_stimulus(const Vec& c1, const Vec& c2, double alpha);

// Question-answering score of one cue as the answer to the blended stimulus.
// answer_index is 1 or 2.
double score(double alpha, const Vec& c1, const Vec& c2, const Vec& w,
             int answer_index, ScoringMode mode = ScoringMode::SimilarityBlend);

// score margin score(cue1) - score(cue2); the decision is its sign
double score_margin(double alpha, const Vec& c1, const Vec& c2, const Vec& w,
                    ScoringMode mode = ScoringMode::SimilarityBlend);

// Cue1 iff score(cue1) > score(cue2); ties go to Cue2.
Choice decide(double alpha, const Vec& c1, const Vec& c2, const Vec& w,
              ScoringMode mode = ScoringMode::SimilarityBlend);

ResponseSet run_battery(const TrialBattery& battery,
                        ScoringMode mode = ScoringMode::SimilarityBlend);

struct CrossingAlpha {
  double alpha = 0.0;
  bool in_range = false;  // alpha within [0,1]; never clamped
};

// Exact flip point of the blend-mode margin, which is affine in alpha:
//   margin(alpha) = (1-2*alpha)*(1-sim(c1,c2)) + sim(w,c1) - sim(w,c2)
CrossingAlpha crossing_alpha(const Vec& c1, const Vec& c2, const Vec& w);

}  // namespace psyprobe

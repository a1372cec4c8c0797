#include "psyprobe/probe.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "psyprobe/error.hpp"

namespace psyprobe {

namespace {

constexpr double kIdenticalCueTol = 1e-12;

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> words;
  std::istringstream ss(s);
  std::string w;
  while (ss >> w) words.push_back(w);
  return words;
}

Vec resolve_tokens(const std::string& token_field, const EmbeddingTable& table) {
  return average_embedding(split_words(token_field), table, OovPolicy::Error);
}

}  // namespace

void TrialBattery::validate() const {
  if (alpha_grid.empty()) fail(ErrorCode::EmptyInput, "alpha grid is empty");
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    if (alpha_grid[i] < 0.0 || alpha_grid[i] > 1.0) {
      fail(ErrorCode::AlphaOutOfRange, "grid point outside [0,1]");
    }
    if (i > 0 && !(alpha_grid[i] > alpha_grid[i - 1])) {
      fail(ErrorCode::AlphaOutOfRange, "alpha grid must be strictly increasing");
    }
  }
  if (replicates.empty()) fail(ErrorCode::EmptyInput, "battery has no replicate tables");
  const int dim = replicates.front().dim();
  for (const EmbeddingTable& t : replicates) {
    if (t.dim() != dim) fail(ErrorCode::DimMismatch, "replicates disagree on dim");
  }
}

std::vector<double> uniform_alpha_grid(int points) {
  if (points < 2) fail(ErrorCode::ConfigError, "alpha grid needs >= 2 points");
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) {
    grid[i] = static_cast<double>(i) / (points - 1);
  }
  return grid;
}

Vec mix_stimulus(const Vec& c1, const Vec& c2, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    fail(ErrorCode::AlphaOutOfRange, "alpha = " + std::to_string(alpha));
  }
  if (c1.size() != c2.size()) fail(ErrorCode::DimMismatch, "mix_stimulus dims differ");
  Vec s(c1.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = (1.0 - alpha) * c1[i] + alpha * c2[i];
  }
  return s;
}

double score(double alpha, const Vec& c1, const Vec& c2, const Vec& w,
             int answer_index, ScoringMode mode) {
  if (answer_index != 1 && answer_index != 2) {
    fail(ErrorCode::ConfigError, "answer_index must be 1 or 2");
  }
  if (mode == ScoringMode::SimilarityBlend) {
    // sim(cue, cue) = 1 exactly in the blended-similarity form
    const double s12 = cosine_similarity(c1, c2);
    if (answer_index == 1) {
      return (1.0 - alpha) + alpha * s12 + cosine_similarity(w, c1);
    }
    return (1.0 - alpha) * s12 + alpha + cosine_similarity(w, c2);
  }
  const Vec s = mix_stimulus(c1, c2, alpha);
  const Vec& cue = (answer_index == 1) ? c1 : c2;
  return cosine_similarity(s, cue) + cosine_similarity(w, cue);
}

double score_margin(double alpha, const Vec& c1, const Vec& c2, const Vec& w,
                    ScoringMode mode) {
  return score(alpha, c1, c2, w, 1, mode) - score(alpha, c1, c2, w, 2, mode);
}

Choice decide(double alpha, const Vec& c1, const Vec& c2, const Vec& w,
              ScoringMode mode) {
  return score_margin(alpha, c1, c2, w, mode) > 0.0 ? Choice::Cue1 : Choice::Cue2;
}

ResponseSet run_battery(const TrialBattery& battery, ScoringMode mode) {
  battery.validate();
  ResponseSet responses;
  responses.records.reserve(battery.replicates.size() * battery.alpha_grid.size());
  for (std::size_t r = 0; r < battery.replicates.size(); ++r) {
    const EmbeddingTable& table = battery.replicates[r];
    Vec c1, c2, w;
    try {
      c1 = resolve_tokens(battery.cue_pair.cue1_token, table);
      c2 = resolve_tokens(battery.cue_pair.cue2_token, table);
      w = resolve_tokens(battery.target_token, table);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::MissingToken) {
        fail(ErrorCode::MissingToken,
             "replicate " + std::to_string(r) + ": " + e.what());
      }
      throw;
    }
    const double s12 = cosine_similarity(c1, c2);
    if (s12 >= 1.0 - kIdenticalCueTol) {
      fail(ErrorCode::IdenticalCues,
           "replicate " + std::to_string(r) + ": cues are indistinguishable");
    }
    for (double alpha : battery.alpha_grid) {
      ResponseRecord rec;
      rec.replicate = static_cast<int>(r);
      rec.alpha = alpha;
      rec.margin = score_margin(alpha, c1, c2, w, mode);
      rec.choice = rec.margin > 0.0 ? Choice::Cue1 : Choice::Cue2;
      responses.records.push_back(rec);
    }
  }
  return responses;
}

CrossingAlpha crossing_alpha(const Vec& c1, const Vec& c2, const Vec& w) {
  const double s12 = cosine_similarity(c1, c2);
  if (s12 >= 1.0 - kIdenticalCueTol) {
    fail(ErrorCode::IdenticalCues, "cues are indistinguishable");
  }
  const double sw1 = cosine_similarity(w, c1);
  const double sw2 = cosine_similarity(w, c2);
  CrossingAlpha result;
  result.alpha = 0.5 + (sw1 - sw2) / (2.0 * (1.0 - s12));
  result.in_range = result.alpha >= 0.0 && result.alpha <= 1.0;
  return result;
}

void write_responses_csv(const ResponseSet& responses, std::ostream& out) {
  out << "replicate,alpha,choice,margin\n";
  char buf[96];
  for (const ResponseRecord& rec : responses.records) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%s,%.17g\n", rec.replicate, rec.alpha,
                  rec.choice == Choice::Cue1 ? "cue1" : "cue2", rec.margin);
    out << buf;
  }
}

ResponseSet read_responses_csv(std::istream& in) {
  ResponseSet responses;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;  // header
    ResponseRecord rec;
    char choice[16] = {0};
    if (std::sscanf(line.c_str(), "%d,%lg,%15[^,],%lg", &rec.replicate, &rec.alpha,
                    choice, &rec.margin) != 4) {
      fail(ErrorCode::IoError, "bad response row at line " + std::to_string(line_no));
    }
    const std::string c(choice);
    if (c == "cue1") {
      rec.choice = Choice::Cue1;
    } else if (c == "cue2") {
      rec.choice = Choice::Cue2;
    } else {
      fail(ErrorCode::IoError, "bad choice '" + c + "' at line " + std::to_string(line_no));
    }
    responses.records.push_back(rec);
  }
  return responses;
}

}  // namespace psyprobe

#include "psyprobe/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "psyprobe/error.hpp"
#include "psyprobe/rng.hpp"
#include "psyprobe/stats_math.hpp"

namespace psyprobe {

namespace {

constexpr double kPowerIterTol = 1e-9;
constexpr int kPowerIterMax = 20000;

void orthogonalize(Vec* v, const std::vector<Vec>& basis) {
  for (const Vec& b : basis) {
    const double proj = dot(*v, b);
    for (std::size_t i = 0; i < v->size(); ++i) (*v)[i] -= proj * b[i];
  }
}

bool normalize(Vec* v) {
  const double n = norm(*v);
  if (n == 0.0) return false;
  for (double& x : *v) x /= n;
  return true;
}

}  // namespace

PcaResult pca_fit_project(const std::vector<Vec>& samples, int k) {
  if (k < 1) fail(ErrorCode::ConfigError, "k must be >= 1");
  if (static_cast<long>(samples.size()) <= k) {
    fail(ErrorCode::TooFewSamples, "need more samples than components");
  }
  const std::size_t n = samples.size();
  const std::size_t dim = samples.front().size();
  for (const Vec& s : samples) {
    if (s.size() != dim) fail(ErrorCode::DimMismatch, "sample rows disagree on dim");
  }

  Vec mean(dim, 0.0);
  for (const Vec& s : samples) {
    for (std::size_t i = 0; i < dim; ++i) mean[i] += s[i];
  }
  for (double& m : mean) m /= static_cast<double>(n);

  std::vector<Vec> centered(n, Vec(dim));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < dim; ++i) centered[r][i] = samples[r][i] - mean[i];
  }

  std::vector<Vec> cov(dim, Vec(dim, 0.0));
  for (const Vec& row : centered) {
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = i; j < dim; ++j) cov[i][j] += row[i] * row[j];
    }
  }
  double total_var = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i; j < dim; ++j) {
      cov[i][j] /= static_cast<double>(n - 1);
      cov[j][i] = cov[i][j];
    }
    total_var += cov[i][i];
  }

  PcaResult result;
  const double eigen_floor = std::max(total_var, 1e-300) * 1e-12;
  Vec work(dim), next(dim);
  for (int comp = 0; comp < k; ++comp) {
    Rng rng(0x9e3779b9 + static_cast<std::uint64_t>(comp));
    for (double& x : work) x = rng.uniform(-1.0, 1.0);
    orthogonalize(&work, result.components);
    if (!normalize(&work)) {
      result.rank_deficient = true;
      break;
    }
    bool vanished = false;
    for (int iter = 0; iter < kPowerIterMax; ++iter) {
      for (std::size_t i = 0; i < dim; ++i) next[i] = dot(cov[i], work);
      orthogonalize(&next, result.components);
      if (!normalize(&next)) {
        vanished = true;
        break;
      }
      double delta = 0.0;
      for (std::size_t i = 0; i < dim; ++i) delta += std::fabs(next[i] - work[i]);
      work.swap(next);
      if (delta < kPowerIterTol) break;
    }
    if (vanished) {
      result.rank_deficient = true;
      break;
    }
    // Rayleigh quotient
    double eigenvalue = 0.0;
    for (std::size_t i = 0; i < dim; ++i) eigenvalue += work[i] * dot(cov[i], work);
    if (!(eigenvalue > eigen_floor)) {
      result.rank_deficient = true;
      break;
    }
    // sign convention: largest-magnitude entry positive
    std::size_t arg = 0;
    for (std::size_t i = 1; i < dim; ++i) {
      if (std::fabs(work[i]) > std::fabs(work[arg])) arg = i;
    }
    if (work[arg] < 0.0) {
      for (double& x : work) x = -x;
    }
    // deflate
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) cov[i][j] -= eigenvalue * work[i] * work[j];
    }
    result.components.push_back(work);
    result.eigenvalues.push_back(eigenvalue);
    result.explained_variance_ratio.push_back(
        total_var > 0.0 ? eigenvalue / total_var : 0.0);
  }

  result.projections.assign(n, Vec(result.components.size()));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < result.components.size(); ++c) {
      result.projections[r][c] = dot(centered[r], result.components[c]);
    }
  }
  return result;
}

double mean_distance_to_samples(const Vec& word, const std::vector<Vec>& samples,
                                DistanceMetric metric) {
  if (samples.empty()) fail(ErrorCode::TooFewSamples, "no samples");
  double total = 0.0;
  for (const Vec& s : samples) {
    if (metric == DistanceMetric::Cosine) {
      total += 1.0 - cosine_similarity(word, s);
    } else {
      if (word.size() != s.size()) fail(ErrorCode::DimMismatch, "distance dim mismatch");
      double d2 = 0.0;
      for (std::size_t i = 0; i < word.size(); ++i) {
        const double d = word[i] - s[i];
        d2 += d * d;
      }
      total += std::sqrt(d2);
    }
  }
  return total / static_cast<double>(samples.size());
}

std::vector<RankedWord> rank_words(
    const std::vector<std::pair<std::string, std::string>>& lexicon,
    const EmbeddingTable& table, const std::vector<Vec>& samples,
    DistanceMetric metric) {
  std::vector<RankedWord> ranked;
  for (const auto& [token, polarity] : lexicon) {
    const Vec* v = table.find(token);
    if (v == nullptr) continue;
    ranked.push_back({token, polarity, mean_distance_to_samples(*v, samples, metric)});
  }
  if (ranked.size() < 2) {
    fail(ErrorCode::NoResolvedTokens, "fewer than 2 lexicon tokens resolve");
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedWord& a, const RankedWord& b) {
    if (a.mean_distance != b.mean_distance) return a.mean_distance < b.mean_distance;
    return a.token < b.token;
  });
  return ranked;
}

GroupComparison compare_groups(const WordGroup& group_a, const WordGroup& group_b,
                               const EmbeddingTable& table,
                               const std::vector<Vec>& samples, int permutations,
                               std::uint64_t seed, DistanceMetric metric) {
  GroupComparison result;
  auto resolve = [&](const WordGroup& group, std::vector<double>* values) {
    for (const std::string& token : group.tokens) {
      const Vec* v = table.find(token);
      if (v == nullptr) {
        result.skipped_tokens.push_back(token);
        continue;
      }
      values->push_back(mean_distance_to_samples(*v, samples, metric));
    }
  };
  std::vector<double> values_a, values_b;
  resolve(group_a, &values_a);
  resolve(group_b, &values_b);
  if (values_a.size() < 2 || values_b.size() < 2) {
    fail(ErrorCode::GroupTooSmall, "each group needs >= 2 resolved tokens");
  }
  result.n_a = static_cast<int>(values_a.size());
  result.n_b = static_cast<int>(values_b.size());

  auto mean_of = [](const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += v[i];
    return s / static_cast<double>(hi - lo);
  };
  result.mean_a = mean_of(values_a, 0, values_a.size());
  result.mean_b = mean_of(values_b, 0, values_b.size());
  result.difference = result.mean_a - result.mean_b;

  std::vector<double> pool = values_a;
  pool.insert(pool.end(), values_b.begin(), values_b.end());
  Rng rng(seed);
  const double observed = std::fabs(result.difference);
  long hits = 0;
  for (int p = 0; p < permutations; ++p) {
    for (std::size_t i = pool.size(); i > 1; --i) {
      std::swap(pool[i - 1], pool[rng.below(i)]);
    }
    const double diff = mean_of(pool, 0, values_a.size()) -
                        mean_of(pool, values_a.size(), pool.size());
    if (std::fabs(diff) >= observed) ++hits;
  }
  result.p_value = static_cast<double>(hits + 1) / static_cast<double>(permutations + 1);
  return result;
}

Correlation pearson_correlation(const std::vector<double>& x,
                                const std::vector<double>& y) {
  if (x.size() != y.size()) fail(ErrorCode::LengthMismatch, "x and y differ in length");
  const long n = static_cast<long>(x.size());
  if (n < 3) fail(ErrorCode::LengthMismatch, "need >= 3 points");
  double mx = 0.0, my = 0.0;
  for (long i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (long i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    fail(ErrorCode::DegenerateVariance, "zero variance in correlation input");
  }
  Correlation corr;
  corr.n = static_cast<int>(n);
  corr.rho = sxy / std::sqrt(sxx * syy);
  const double r2 = corr.rho * corr.rho;
  if (r2 >= 1.0) {
    corr.p_value = 0.0;
  } else {
    const double t = corr.rho * std::sqrt((n - 2) / (1.0 - r2));
    corr.p_value = stats::student_t_two_sided_p(t, static_cast<double>(n - 2));
  }
  return corr;
}

PseValidationReport validate_pse_against_table(const std::vector<KeyedBias>& bias,
                                               const ValidationTable& table) {
  std::map<std::string, const ValidationEntry*> lookup;
  for (const ValidationEntry& entry : table) {
    lookup.emplace(entry.key, &entry);
  }
  PseValidationReport report;
  std::vector<double> pses, values, jnds, dispersions;
  bool all_have_dispersion = true;
  for (const KeyedBias& kb : bias) {
    auto it = lookup.find(kb.key);
    if (it == lookup.end()) {
      report.unmatched_bias_keys.push_back(kb.key);
      continue;
    }
    report.matched_keys.push_back(kb.key);
    pses.push_back(kb.pse);
    values.push_back(it->second->value);
    jnds.push_back(kb.jnd);
    if (it->second->dispersion) {
      dispersions.push_back(*it->second->dispersion);
    } else {
      all_have_dispersion = false;
    }
  }
  for (const ValidationEntry& entry : table) {
    bool matched = false;
    for (const std::string& k : report.matched_keys) {
      if (k == entry.key) {
        matched = true;
        break;
      }
    }
    if (!matched) report.unmatched_table_keys.push_back(entry.key);
  }
  if (report.matched_keys.size() < 3) {
    fail(ErrorCode::InsufficientOverlap, "only " +
                                             std::to_string(report.matched_keys.size()) +
                                             " keys overlap, need >= 3");
  }
  report.pse_vs_value = pearson_correlation(pses, values);
  if (all_have_dispersion && dispersions.size() == jnds.size()) {
    report.jnd_vs_dispersion = pearson_correlation(jnds, dispersions);
  }
  return report;
}

namespace {

std::vector<std::vector<std::string>> read_simple_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    rows.push_back(std::move(fields));
  }
  return rows;
}

bool looks_like_header(const std::vector<std::string>& row) {
  if (row.empty()) return false;
  char* end = nullptr;
  std::strtod(row.back().c_str(), &end);
  return row.size() >= 2 && end == row.back().c_str();
}

}  // namespace

ValidationTable load_validation_csv(const std::string& path) {
  const auto rows = read_simple_csv(path);
  ValidationTable table;
  std::map<std::string, bool> seen;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (i == 0 && looks_like_header(row)) continue;
    if (row.size() < 2) {
      fail(ErrorCode::IoError, "row " + std::to_string(i + 1) + ": expected key,value");
    }
    ValidationEntry entry;
    entry.key = row[0];
    if (seen.count(entry.key)) {
      fail(ErrorCode::DuplicateToken, "duplicate key '" + entry.key + "'");
    }
    seen[entry.key] = true;
    try {
      entry.value = std::stod(row[1]);
      if (row.size() >= 3 && !row[2].empty()) entry.dispersion = std::stod(row[2]);
    } catch (const std::exception&) {
      fail(ErrorCode::IoError, "row " + std::to_string(i + 1) + ": bad number");
    }
    if (!std::isfinite(entry.value) ||
        (entry.dispersion && !std::isfinite(*entry.dispersion))) {
      fail(ErrorCode::NonFinite, "row " + std::to_string(i + 1) + ": non-finite value");
    }
    table.push_back(std::move(entry));
  }
  if (table.empty()) fail(ErrorCode::EmptyInput, "no rows in '" + path + "'");
  return table;
}

std::vector<WordGroup> load_word_groups_csv(const std::string& path) {
  const auto rows = read_simple_csv(path);
  std::vector<WordGroup> groups;
  std::map<std::string, std::size_t> by_label;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (i == 0 && row.size() >= 2 && (row[0] == "token" || row[0] == "word")) continue;
    if (row.size() < 2) {
      fail(ErrorCode::IoError, "row " + std::to_string(i + 1) + ": expected token,label");
    }
    auto it = by_label.find(row[1]);
    if (it == by_label.end()) {
      by_label.emplace(row[1], groups.size());
      groups.push_back({row[1], {row[0]}, path});
    } else {
      groups[it->second].tokens.push_back(row[0]);
    }
  }
  if (groups.empty()) fail(ErrorCode::EmptyInput, "no rows in '" + path + "'");
  return groups;
}

std::vector<std::pair<std::string, std::string>> load_lexicon_csv(const std::string& path) {
  const auto rows = read_simple_csv(path);
  std::vector<std::pair<std::string, std::string>> lexicon;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (i == 0 && row.size() >= 2 && (row[0] == "token" || row[0] == "word")) continue;
    if (row.size() < 2) {
      fail(ErrorCode::IoError, "row " + std::to_string(i + 1) + ": expected token,polarity");
    }
    lexicon.emplace_back(row[0], row[1]);
  }
  if (lexicon.empty()) fail(ErrorCode::EmptyInput, "no rows in '" + path + "'");
  return lexicon;
}

}  // namespace psyprobe

#include "psyprobe/embedding.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "psyprobe/error.hpp"

namespace psyprobe {

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

bool EmbeddingTable::contains(const std::string& token) const {
  return index_.count(token) != 0;
}

const Vec* EmbeddingTable::find(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return nullptr;
  return &vectors_[it->second];
}

const Vec& EmbeddingTable::at(const std::string& token) const {
  const Vec* v = find(token);
  if (v == nullptr) fail(ErrorCode::MissingToken, "token '" + token + "' not in table");
  return *v;
}

void EmbeddingTable::add(const std::string& token, Vec v) {
  if (token.empty()) fail(ErrorCode::EmptyInput, "empty token");
  for (char c : token) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      fail(ErrorCode::EmptyInput, "token '" + token + "' contains whitespace");
    }
  }
  if (index_.count(token) != 0) {
    fail(ErrorCode::DuplicateToken, "token '" + token + "' already present");
  }
  if (dim_ == 0) dim_ = static_cast<int>(v.size());
  if (static_cast<int>(v.size()) != dim_) {
    fail(ErrorCode::DimMismatch, "token '" + token + "' has " +
                                     std::to_string(v.size()) + " components, expected " +
                                     std::to_string(dim_));
  }
  for (double x : v) {
    if (!std::isfinite(x)) {
      fail(ErrorCode::NonFinite, "token '" + token + "' has a non-finite component");
    }
  }
  index_.emplace(token, tokens_.size());
  tokens_.push_back(token);
  vectors_.push_back(std::move(v));
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream ss(line);
  std::string f;
  while (ss >> f) fields.push_back(f);
  return fields;
}

bool parse_double_full(const std::string& s, double* out) {
  const char* begin = s.c_str();
  char* end = nullptr;
  *out = std::strtod(begin, &end);
  return end == begin + s.size() && !s.empty();
}

bool parse_uint_full(const std::string& s, long* out) {
  const char* begin = s.c_str();
  char* end = nullptr;
  *out = std::strtol(begin, &end, 10);
  return end == begin + s.size() && !s.empty() && *out >= 0;
}

}  // namespace

EmbeddingTable parse_embedding_text(std::istream& in) {
  EmbeddingTable table;
  std::string line;
  long line_no = 0;
  bool saw_header = false;
  int dim = 0;

  auto parse_row = [&](const std::vector<std::string>& fields) {
    if (dim == 0) dim = static_cast<int>(fields.size()) - 1;
    if (static_cast<int>(fields.size()) != dim + 1) {
      fail(ErrorCode::DimMismatch,
           "line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
               " components, got " + std::to_string(fields.size() - 1));
    }
    Vec v(dim);
    for (int i = 0; i < dim; ++i) {
      double x;
      if (!parse_double_full(fields[i + 1], &x)) {
        fail(ErrorCode::NonFinite,
             "line " + std::to_string(line_no) + ": bad component '" + fields[i + 1] + "'");
      }
      if (!std::isfinite(x)) {
        fail(ErrorCode::NonFinite,
             "line " + std::to_string(line_no) + ": non-finite component");
      }
      v[i] = x;
    }
    try {
      table.add(fields[0], std::move(v));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::DuplicateToken) {
        fail(ErrorCode::DuplicateToken,
             "line " + std::to_string(line_no) + ": token '" + fields[0] + "'");
      }
      throw;
    }
  };

  while (std::getline(in, line)) {
    ++line_no;
    std::vector<std::string> fields = split_ws(line);
    if (fields.empty()) continue;
    if (line_no == 1 && fields.size() == 2) {
      // "count dim" header: both fields plain non-negative integers
      long count, header_dim;
      if (parse_uint_full(fields[0], &count) && parse_uint_full(fields[1], &header_dim)) {
        saw_header = true;
        dim = static_cast<int>(header_dim);
        continue;
      }
    }
    parse_row(fields);
  }
  (void)saw_header;
  if (table.size() == 0) fail(ErrorCode::EmptyInput, "no embedding entries found");
  return table;
}

EmbeddingTable load_embedding_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open embedding file '" + path + "'");
  EmbeddingTable t = parse_embedding_text(in);
  t.source = path;
  return t;
}

void serialize_embedding_text(const EmbeddingTable& table, std::ostream& out) {
  out << table.size() << ' ' << table.dim() << '\n';
  char buf[64];
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.tokens()[i];
    const Vec& v = table.vector_at(i);
    for (double x : v) {
      std::snprintf(buf, sizeof(buf), " %.6g", x);
      out << buf;
    }
    out << '\n';
  }
}

void save_embedding_file(const EmbeddingTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write embedding file '" + path + "'");
  serialize_embedding_text(table, out);
  if (!out) fail(ErrorCode::IoError, "short write to '" + path + "'");
}

double cosine_similarity(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) {
    fail(ErrorCode::DimMismatch, "cosine: " + std::to_string(a.size()) + " vs " +
                                     std::to_string(b.size()));
  }
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) fail(ErrorCode::ZeroVector, "cosine of all-zero vector");
  if (a == b) return 1.0;  // sim(v,v) = 1 exactly, not 1 +/- rounding
  return dot(a, b) / (na * nb);
}

Vec average_embedding(const std::vector<std::string>& tokens,
                      const EmbeddingTable& table, OovPolicy policy) {
  if (tokens.empty()) fail(ErrorCode::EmptyTokenList, "no tokens to average");
  Vec sum(table.dim(), 0.0);
  long resolved = 0;
  for (const std::string& token : tokens) {
    const Vec* v = table.find(token);
    if (v == nullptr) {
      if (policy == OovPolicy::Error) {
        fail(ErrorCode::MissingToken, "token '" + token + "' not in table");
      }
      continue;
    }
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += (*v)[i];
    ++resolved;
  }
  if (resolved == 0) fail(ErrorCode::AllOutOfVocabulary, "no token resolved");
  for (double& x : sum) x /= static_cast<double>(resolved);
  return sum;
}

}  // namespace psyprobe

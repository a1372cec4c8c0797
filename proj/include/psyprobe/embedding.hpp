#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace psyprobe {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b);
double norm(const Vec& a);

// Token -> dense vector map with fixed dimensionality. Entries keep insertion
// order so serialization is reproducible. Immutable once built; reads are safe
// from any number of threads.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  std::size_t size() const { return tokens_.size(); }

  bool contains(const std::string& token) const;
  const Vec* find(const std::string& token) const;  // nullptr if absent
  const Vec& at(const std::string& token) const;    // throws MissingToken

  // Enforces the table invariants: token non-empty with no whitespace and not
  // seen before, vector of exactly dim() finite components.
  void add(const std::string& token, Vec v);

  const std::vector<std::string>& tokens() const { return tokens_; }
  const Vec& vector_at(std::size_t i) const { return vectors_[i]; }

  std::string source;
  int replicate_id = -1;

 private:
  int dim_ = 0;
  std::vector<std::string> tokens_;
  std::vector<Vec> vectors_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Text vector format: optional "count dim" header line, then
// "token v1 ... v_dim" per line, whitespace separated.
EmbeddingTable parse_embedding_text(std::istream& in);
EmbeddingTable load_embedding_file(const std::string& path);

// Emits header + components at 6 significant digits.
void serialize_embedding_text(const EmbeddingTable& table, std::ostream& out);
void save_embedding_file(const EmbeddingTable& table, const std::string& path);

double cosine_similarity(const Vec& a, const Vec& b);

enum class OovPolicy { Skip, Error };

// Component-wise mean of the resolved token vectors. Skip drops unknown
// tokens; Error throws MissingToken on the first one.
Vec average_embedding(const std::vector<std::string>& tokens,
                      const EmbeddingTable& table, OovPolicy policy);

}  // namespace psyprobe

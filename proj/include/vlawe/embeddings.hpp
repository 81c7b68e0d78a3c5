#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "vlawe/common.hpp"

namespace vlawe {

// Pre-trained word vectors. Immutable once loaded; safe for concurrent reads.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dimension);

  std::size_t dimension() const { return dimension_; }
  std::size_t vocabulary_size() const { return words_.size(); }

  // Returns an empty span for unknown words.
  std::span<const double> lookup(std::string_view word) const;
  bool contains(std::string_view word) const;
  const std::vector<std::string>& words() const { return words_; }

  // Adds a word; rejects duplicates and wrong dimensions.
  void insert(std::string word, std::span<const double> vector);

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };
  std::size_t dimension_ = 0;
  std::vector<std::string> words_;
  std::vector<double> values_;
  std::unordered_map<std::string, std::size_t, Hash, std::equal_to<>> index_;
};

struct LoadOptions {
  std::optional<std::size_t> expected_dim;
  // When set, rows whose word is not in this set are skipped after parsing.
  // Keeps memory bounded when only a corpus vocabulary is needed.
  const std::unordered_set<std::string>* keep_words = nullptr;
  // Some published tables contain keys with embedded spaces. When set, a row
  // with more than d+1 fields (d already known) takes everything before the
  // last d fields as its key instead of failing.
  bool allow_multiword_keys = false;
};

// Reads a whitespace-separated `word v1 ... vd` text file (GloVe layout).
EmbeddingTable load_table(const std::filesystem::path& path, const LoadOptions& options = {});
EmbeddingTable load_table(std::istream& in, const LoadOptions& options = {});

struct TokenizedDocument {
  std::string source_id;
  std::vector<std::string> tokens;
  // Set by resolve(); the in-vocabulary subsequence of tokens.
  std::optional<std::vector<std::string>> known_tokens;
};

// Lowercases ASCII letters and splits on maximal runs of non-alphanumeric
// bytes. Bytes >= 0x80 count as word characters so UTF-8 words stay whole.
TokenizedDocument tokenize(std::string_view text, std::string source_id = {});

struct ResolvedDocument {
  TokenizedDocument document;  // known_tokens set
  Matrix vectors;              // one row per known token, table.dimension() columns
  std::size_t oov_count = 0;
};

ResolvedDocument resolve(const TokenizedDocument& doc, const EmbeddingTable& table);

}  // namespace vlawe

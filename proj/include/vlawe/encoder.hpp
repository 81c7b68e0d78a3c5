#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vlawe/codebook.hpp"
#include "vlawe/common.hpp"
#include "vlawe/embeddings.hpp"

namespace vlawe {

struct EncoderConfig {
  double alpha = 0.5;  // power-normalization exponent, in [0, 1]
  bool l2_normalize = true;

  void validate() const;
};

struct DocumentEmbedding {
  Vector values;  // k*d
  std::size_t k = 0;
  std::size_t d = 0;
  bool normalized = false;
  std::size_t oov_count = 0;
  std::size_t known_count = 0;
};

// Per-cluster residual sums, concatenated in cluster order. Each row of
// `doc_vectors` is one token occurrence.
Vector encode_raw(const Matrix& doc_vectors, const Codebook& codebook);

// sign(z) * |z|^alpha per component; zero stays zero.
Vector power_normalize(std::span<const double> v, double alpha);

// v / ||v||; the zero vector is returned unchanged.
Vector l2_normalize(std::span<const double> v);

DocumentEmbedding encode(const TokenizedDocument& doc, const EmbeddingTable& table,
                         const Codebook& codebook, const EncoderConfig& config);
DocumentEmbedding encode(const ResolvedDocument& doc, const Codebook& codebook,
                         const EncoderConfig& config);

// Average of the document's word vectors; zero when nothing resolved.
Vector encode_mean_baseline(const ResolvedDocument& doc, std::size_t dimension);
Vector encode_mean_baseline(const TokenizedDocument& doc, const EmbeddingTable& table);

// k-dimensional count of word-to-codeword assignments.
Vector encode_histogram(const ResolvedDocument& doc, const Codebook& codebook);

struct SparseVector {
  std::vector<std::uint32_t> indices;  // strictly increasing
  std::vector<double> values;

  bool operator==(const SparseVector&) const = default;
};

// Term-frequency bag of words over a vocabulary fixed at fit time.
class BowVocabulary {
 public:
  // Vocabulary is the sorted set of tokens seen in `training_docs`.
  static BowVocabulary fit(std::span<const TokenizedDocument> training_docs);

  std::size_t size() const { return terms_.size(); }
  const std::vector<std::string>& terms() const { return terms_; }
  // Tokens outside the vocabulary are ignored.
  SparseVector transform(const TokenizedDocument& doc) const;

 private:
  std::vector<std::string> terms_;
  std::map<std::string, std::uint32_t, std::less<>> index_;
};

}  // namespace vlawe

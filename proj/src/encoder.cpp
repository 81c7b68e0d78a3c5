#include "vlawe/encoder.hpp"

#include <cmath>
#include <set>

namespace vlawe {

void EncoderConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ConfigError("alpha must lie in [0, 1], got " + format_double(alpha));
  }
}

Vector encode_raw(const Matrix& doc_vectors, const Codebook& codebook) {
  const std::size_t d = codebook.dimension();
  Vector phi(codebook.k() * d, 0.0);
  if (doc_vectors.rows() > 0 && doc_vectors.cols() != d) {
    throw DataError("document vectors have dimension " + std::to_string(doc_vectors.cols()) +
                    ", codebook has " + std::to_string(d));
  }
  for (std::size_t t = 0; t < doc_vectors.rows(); ++t) {
    auto x = doc_vectors.row(t);
    const std::size_t i = assign(x, codebook);
    auto mu = codebook.centroids.row(i);
    double* v = phi.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) v[j] += x[j] - mu[j];
  }
  return phi;
}

Vector power_normalize(std::span<const double> v, double alpha) {
  EncoderConfig{alpha, false}.validate();
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double z = v[i];
    if (z == 0.0) {
      out[i] = 0.0;
    } else if (alpha == 1.0) {
      out[i] = z;
    } else {
      out[i] = std::copysign(std::pow(std::abs(z), alpha), z);
    }
  }
  return out;
}

Vector l2_normalize(std::span<const double> v) {
  const double norm = l2_norm(v);
  Vector out(v.begin(), v.end());
  if (norm > 0.0) {
    for (double& x : out) x /= norm;
  }
  return out;
}

DocumentEmbedding encode(const ResolvedDocument& doc, const Codebook& codebook,
                         const EncoderConfig& config) {
  config.validate();
  DocumentEmbedding emb;
  emb.k = codebook.k();
  emb.d = codebook.dimension();
  emb.oov_count = doc.oov_count;
  emb.known_count = doc.vectors.rows();
  emb.values = power_normalize(encode_raw(doc.vectors, codebook), config.alpha);
  if (config.l2_normalize) emb.values = l2_normalize(emb.values);
  emb.normalized = config.l2_normalize;
  return emb;
}

DocumentEmbedding encode(const TokenizedDocument& doc, const EmbeddingTable& table,
                         const Codebook& codebook, const EncoderConfig& config) {
  if (table.dimension() != codebook.dimension()) {
    throw DataError("embedding dimension " + std::to_string(table.dimension()) +
                    " does not match codebook dimension " +
                    std::to_string(codebook.dimension()));
  }
  return encode(resolve(doc, table), codebook, config);
}

Vector encode_mean_baseline(const ResolvedDocument& doc, std::size_t dimension) {
  Vector mean(dimension, 0.0);
  const std::size_t n = doc.vectors.rows();
  if (n == 0) return mean;
  if (doc.vectors.cols() != dimension) throw DataError("mean baseline: dimension mismatch");
  for (std::size_t t = 0; t < n; ++t) {
    auto x = doc.vectors.row(t);
    for (std::size_t j = 0; j < dimension; ++j) mean[j] += x[j];
  }
  for (double& m : mean) m /= static_cast<double>(n);
  return mean;
}

Vector encode_mean_baseline(const TokenizedDocument& doc, const EmbeddingTable& table) {
  return encode_mean_baseline(resolve(doc, table), table.dimension());
}

Vector encode_histogram(const ResolvedDocument& doc, const Codebook& codebook) {
  Vector counts(codebook.k(), 0.0);
  for (std::size_t t = 0; t < doc.vectors.rows(); ++t) {
    counts[assign(doc.vectors.row(t), codebook)] += 1.0;
  }
  return counts;
}

BowVocabulary BowVocabulary::fit(std::span<const TokenizedDocument> training_docs) {
  std::set<std::string, std::less<>> terms;
  for (const auto& doc : training_docs) terms.insert(doc.tokens.begin(), doc.tokens.end());
  BowVocabulary vocab;
  vocab.terms_.assign(terms.begin(), terms.end());
  for (std::uint32_t i = 0; i < vocab.terms_.size(); ++i) vocab.index_.emplace(vocab.terms_[i], i);
  return vocab;
}

SparseVector BowVocabulary::transform(const TokenizedDocument& doc) const {
  std::map<std::uint32_t, double> counts;
  for (const auto& token : doc.tokens) {
    auto it = index_.find(token);
    if (it != index_.end()) counts[it->second] += 1.0;
  }
  SparseVector out;
  for (const auto& [index, count] : counts) {
    out.indices.push_back(index);
    out.values.push_back(count);
  }
  return out;
}

}  // namespace vlawe

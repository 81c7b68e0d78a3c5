#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "vlawe/common.hpp"
#include "vlawe/embeddings.hpp"

namespace vlawe {

// k codewords of dimension d learned by k-means over word vectors.
struct Codebook {
  Matrix centroids;  // k x d
  double inertia = 0.0;
  int iterations_run = 0;
  std::uint64_t seed = 0;

  std::size_t k() const { return centroids.rows(); }
  std::size_t dimension() const { return centroids.cols(); }

  bool operator==(const Codebook&) const = default;
};

enum class DedupMode { kUniqueTypes, kAllTokens };

struct CodebookTrainingSet {
  Matrix vectors;  // n x d
  DedupMode dedup_mode = DedupMode::kUniqueTypes;
};

// Collects the word vectors of every known token in `documents`. In
// unique-types mode each distinct word contributes once, in order of first
// appearance.
CodebookTrainingSet build_training_set(std::span<const ResolvedDocument> documents,
                                       DedupMode mode = DedupMode::kUniqueTypes);

struct KMeansConfig {
  int max_iters = 100;
  double rel_tolerance = 1e-4;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

// Lloyd's algorithm seeded with k-means++. When `inertia_trace` is given it
// receives the within-cluster SSE after every update step.
Codebook train_codebook(const CodebookTrainingSet& data, std::size_t k, const KMeansConfig& config,
                        std::vector<double>* inertia_trace = nullptr);

// Index (0-based) of the nearest codeword; ties go to the lowest index.
std::size_t assign(std::span<const double> x, const Codebook& codebook);

void save_codebook(const Codebook& codebook, const std::filesystem::path& path);
void save_codebook(const Codebook& codebook, std::ostream& out);
Codebook load_codebook(const std::filesystem::path& path);
Codebook load_codebook(std::istream& in);

}  // namespace vlawe

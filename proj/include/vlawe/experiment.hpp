#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vlawe/codebook.hpp"
#include "vlawe/evaluation.hpp"

namespace vlawe {

// Everything a command needs to reproduce a run.
struct ExperimentSpec {
  std::filesystem::path embedding_path;
  std::filesystem::path corpus_path;
  TaskKind task = TaskKind::kBinary;
  std::size_t k = 10;
  double alpha = 0.5;
  bool l2_normalize = true;
  double C = 1.0;
  std::optional<std::size_t> pca_dim;
  int n_folds = 10;
  std::uint64_t seed = 0;
  EncoderKind encoder = EncoderKind::kVlawe;
  CodebookScope codebook_scope = CodebookScope::kPerFold;
  DedupMode dedup = DedupMode::kUniqueTypes;
  unsigned jobs = 1;
  bool lenient_embeddings = false;
  bool timings = false;

  void validate() const;
  PipelineConfig pipeline() const;
  // One-line JSON with every default materialized.
  std::string to_json() const;
};

struct LoadedInputs {
  LabeledCorpus corpus;
  EmbeddingTable table;
};

// Loads the corpus, then only the embedding rows its vocabulary needs.
LoadedInputs load_inputs(const ExperimentSpec& spec);

// Documents used for fitting: the predefined training split, else all.
std::vector<std::size_t> fitting_documents(const LabeledCorpus& corpus);

Codebook cmd_codebook(const ExperimentSpec& spec, const std::filesystem::path& out_path,
                      std::ostream& log);

struct EmbeddingDump {
  std::map<std::string, std::string> header;
  std::vector<std::string> ids;
  Matrix values;
};

void write_embedding_dump(const std::filesystem::path& path, const std::map<std::string, std::string>& header,
                          const std::vector<std::string>& ids, const Matrix& values);
// Reads `path` and its `path.header` sidecar.
EmbeddingDump read_embedding_dump(const std::filesystem::path& path);

EmbeddingDump cmd_encode(const ExperimentSpec& spec, const std::optional<std::filesystem::path>& codebook_path,
                         const std::filesystem::path& out_path, std::ostream& log);

EvalReport cmd_eval(const ExperimentSpec& spec, const std::optional<std::filesystem::path>& codebook_path,
                    std::ostream& log);

struct SweepRow {
  std::size_t k = 0;
  double metric = 0.0;
  double stddev = 0.0;
};

// Runs the evaluation for each k. With repeats > 1 every k is evaluated
// under `repeats` derived seeds and stddev is taken across those runs;
// otherwise across folds (0 for a predefined split).
std::vector<SweepRow> cmd_sweep_k(const ExperimentSpec& spec, const std::vector<std::size_t>& k_list,
                                  int repeats, std::ostream& log);
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

}  // namespace vlawe

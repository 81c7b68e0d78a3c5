#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vlawe/classifier.hpp"
#include "vlawe/codebook.hpp"
#include "vlawe/embeddings.hpp"
#include "vlawe/encoder.hpp"
#include "vlawe/pca.hpp"

namespace vlawe {

enum class TaskKind { kBinary, kMulticlass, kMultilabel };

std::string to_string(TaskKind kind);
TaskKind task_kind_from_string(std::string_view name);

struct CorpusDocument {
  std::string id;
  std::string text;
};

struct CorpusSplit {
  std::vector<std::size_t> train;  // document indices
  std::vector<std::size_t> test;
};

struct LabeledCorpus {
  std::vector<CorpusDocument> documents;
  std::vector<std::vector<std::string>> labels;  // parallel to documents
  std::optional<CorpusSplit> split;
  TaskKind task_kind = TaskKind::kMulticlass;

  std::size_t size() const { return documents.size(); }
};

// One document per line: id<TAB>label[,label...]<TAB>train|test|-<TAB>text
LabeledCorpus load_corpus(const std::filesystem::path& path, TaskKind kind);
LabeledCorpus load_corpus(std::istream& in, TaskKind kind);

struct Fold {
  std::vector<std::size_t> train;  // sorted document indices
  std::vector<std::size_t> test;
};

struct FoldPlan {
  std::vector<Fold> folds;
  bool stratified = true;  // false when some class had fewer members than folds
};

FoldPlan make_folds(const LabeledCorpus& corpus, int n_folds, std::uint64_t seed);

double accuracy(const std::vector<std::string>& predicted, const std::vector<std::string>& gold);
double micro_f1(const std::vector<std::vector<std::string>>& predicted,
                const std::vector<std::vector<std::string>>& gold);

enum class EncoderKind { kVlawe, kMean, kBow, kHistogram };
enum class CodebookScope { kPerFold, kShared };

std::string to_string(EncoderKind kind);
EncoderKind encoder_kind_from_string(std::string_view name);
std::string to_string(CodebookScope scope);
CodebookScope codebook_scope_from_string(std::string_view name);

struct PipelineConfig {
  EncoderKind encoder = EncoderKind::kVlawe;
  std::size_t k = 10;
  EncoderConfig encoding;
  ClassifierConfig svm;
  std::optional<std::size_t> pca_dim;
  int n_folds = 10;
  std::uint64_t seed = 0;
  CodebookScope codebook_scope = CodebookScope::kPerFold;
  DedupMode dedup = DedupMode::kUniqueTypes;
  int kmeans_max_iters = 100;
  double kmeans_rel_tolerance = 1e-4;
  unsigned jobs = 1;
  // Used for every fold instead of training one, when set.
  std::optional<Codebook> fixed_codebook;
};

// Tokenized and resolved documents, shared across folds.
struct PreparedCorpus {
  const LabeledCorpus* corpus = nullptr;
  std::size_t dimension = 0;  // embedding dimension
  std::vector<TokenizedDocument> tokens;
  std::vector<ResolvedDocument> resolved;
  std::size_t total_tokens = 0;
  std::size_t oov_tokens = 0;
};

PreparedCorpus prepare_corpus(const LabeledCorpus& corpus, const EmbeddingTable& table, unsigned jobs);

// Everything fitted on the training side of one fold.
struct FoldArtifacts {
  std::optional<Codebook> codebook;
  std::optional<PcaProjection> pca;
  ClassifierModel model;
  std::vector<std::vector<std::string>> predictions;  // parallel to fold.test
  double metric = 0.0;
};

Codebook train_corpus_codebook(const PreparedCorpus& prepared, std::span<const std::size_t> docs,
                               const PipelineConfig& config, std::uint64_t seed);

FoldArtifacts run_fold(const PreparedCorpus& prepared, const Fold& fold, const PipelineConfig& config,
                       std::size_t fold_index, const Codebook* shared_codebook = nullptr);

struct EvalReport {
  std::string metric_name;  // "accuracy" or "micro_f1"
  double value = 0.0;
  std::optional<std::vector<double>> per_fold;
  std::string config_echo;  // JSON object text
  bool stratified = true;
  std::size_t documents = 0;
  std::size_t total_tokens = 0;
  std::size_t oov_tokens = 0;
  std::optional<double> seconds;
};

std::string metric_name_for(TaskKind kind);
std::string config_to_json(const PipelineConfig& config);

EvalReport run_experiment(const LabeledCorpus& corpus, const EmbeddingTable& table,
                          const PipelineConfig& config);

// Machine-parseable JSON rendering, stable for identical inputs.
std::string report_to_json(const EvalReport& report);

}  // namespace vlawe

// vlawe: build codebooks, encode corpora and run classification experiments.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vlawe/experiment.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct Flags {
  std::string embeddings;
  std::string corpus;
  std::string task = "binary";
  std::size_t k = 10;
  double alpha = 0.5;
  bool no_l2 = false;
  double c = 1.0;
  std::size_t pca_dim = 0;
  int folds = 10;
  std::uint64_t seed = 0;
  std::string encoder = "vlawe";
  std::string codebook_scope = "per-fold";
  std::string dedup = "unique-types";
  unsigned jobs = 1;
  bool lenient = false;
  bool timings = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--embeddings", f.embeddings, "Word-vector text file (word v1 ... vd)")
      ->envname("VLAWE_EMBEDDINGS")
      ->required();
  cmd->add_option("--corpus", f.corpus, "Corpus TSV: id, labels, train|test|-, text")->required();
  cmd->add_option("--task", f.task, "binary | multiclass | multilabel")
      ->check(CLI::IsMember({"binary", "multiclass", "multilabel"}))
      ->capture_default_str();
  cmd->add_option("--k", f.k, "Codebook size")->capture_default_str();
  cmd->add_option("--alpha", f.alpha, "Power-normalization exponent")->capture_default_str();
  cmd->add_flag("--no-l2", f.no_l2, "Skip the final L2 normalization");
  cmd->add_option("--c", f.c, "SVM regularization parameter")->capture_default_str();
  cmd->add_option("--pca-dim", f.pca_dim, "Project features to this many principal components");
  cmd->add_option("--folds", f.folds, "Cross-validation folds when no split is given")->capture_default_str();
  cmd->add_option("--seed", f.seed, "Master random seed")->capture_default_str();
  cmd->add_option("--encoder", f.encoder, "vlawe | mean | bow | histogram")
      ->check(CLI::IsMember({"vlawe", "mean", "bow", "histogram"}))
      ->capture_default_str();
  cmd->add_option("--codebook-scope", f.codebook_scope, "per-fold | shared")
      ->check(CLI::IsMember({"per-fold", "shared"}))
      ->capture_default_str();
  cmd->add_flag_callback("--shared-codebook", [&f] { f.codebook_scope = "shared"; },
                         "Same as --codebook-scope shared");
  cmd->add_option("--dedup", f.dedup, "k-means training vectors: unique-types | all-tokens")
      ->check(CLI::IsMember({"unique-types", "all-tokens"}))
      ->capture_default_str();
  cmd->add_option("--jobs", f.jobs, "Worker threads (0 = all cores)")->capture_default_str();
  cmd->add_flag("--lenient-embeddings", f.lenient, "Accept embedding keys containing spaces");
}

vlawe::ExperimentSpec to_spec(const Flags& f) {
  vlawe::ExperimentSpec s;
  s.embedding_path = f.embeddings;
  s.corpus_path = f.corpus;
  s.task = vlawe::task_kind_from_string(f.task);
  s.k = f.k;
  s.alpha = f.alpha;
  s.l2_normalize = !f.no_l2;
  s.C = f.c;
  if (f.pca_dim > 0) s.pca_dim = f.pca_dim;
  s.n_folds = f.folds;
  s.seed = f.seed;
  s.encoder = vlawe::encoder_kind_from_string(f.encoder);
  s.codebook_scope = vlawe::codebook_scope_from_string(f.codebook_scope);
  s.dedup = f.dedup == "all-tokens" ? vlawe::DedupMode::kAllTokens : vlawe::DedupMode::kUniqueTypes;
  s.jobs = f.jobs;
  s.lenient_embeddings = f.lenient;
  s.timings = f.timings;
  s.validate();
  return s;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw vlawe::DataError("cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Document embeddings by locally aggregated word-vector residuals"};
  app.require_subcommand(1);

  Flags flags;
  std::string out_path;
  std::string codebook_path;
  std::string report_path;
  std::string csv_path;
  std::vector<std::size_t> k_list;
  int repeats = 1;

  auto* codebook = app.add_subcommand("codebook", "Train a k-means codebook on the corpus vocabulary");
  add_common(codebook, flags);
  codebook->add_option("--out", out_path, "Codebook output file")->required();

  auto* encode = app.add_subcommand("encode", "Encode every corpus document to a dump file");
  add_common(encode, flags);
  encode->add_option("--codebook", codebook_path, "Codebook file (vlawe/histogram encoders)");
  encode->add_option("--out", out_path, "Dump output file")->required();

  auto* eval = app.add_subcommand("eval", "Cross-validate or split-evaluate the full pipeline");
  add_common(eval, flags);
  eval->add_option("--codebook", codebook_path, "Use this codebook for every fold");
  eval->add_option("--report", report_path, "Also write the report here");
  eval->add_flag("--timings", flags.timings, "Include wall-clock seconds in the report");

  auto* sweep = app.add_subcommand("sweep-k", "Evaluate a range of codebook sizes");
  add_common(sweep, flags);
  sweep->add_option("--k-list", k_list, "Codebook sizes, e.g. --k-list 2 5 10")->required()->expected(1, -1);
  sweep->add_option("--repeats", repeats, "Reseeded runs per k")->capture_default_str();
  sweep->add_option("--csv", csv_path, "Write k,metric,stddev CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    const vlawe::ExperimentSpec spec = to_spec(flags);
    const auto optional_path = [](const std::string& p) {
      return p.empty() ? std::nullopt : std::optional<std::filesystem::path>(p);
    };
    if (codebook->parsed()) {
      vlawe::cmd_codebook(spec, out_path, std::cout);
    } else if (encode->parsed()) {
      vlawe::cmd_encode(spec, optional_path(codebook_path), out_path, std::cout);
    } else if (eval->parsed()) {
      const auto report = vlawe::cmd_eval(spec, optional_path(codebook_path), std::cout);
      const std::string json = vlawe::report_to_json(report);
      std::cout << json << '\n';
      if (!report_path.empty()) write_text(report_path, json + "\n");
    } else if (sweep->parsed()) {
      const auto rows = vlawe::cmd_sweep_k(spec, k_list, repeats, std::cout);
      const std::string csv = vlawe::sweep_to_csv(rows);
      std::cout << csv;
      if (!csv_path.empty()) write_text(csv_path, csv);
    }
  } catch (const vlawe::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}

#include "vlawe/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace vlawe {

void ExperimentSpec::validate() const {
  if (k < 1) throw ConfigError("--k must be at least 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("--alpha must lie in [0, 1]");
  if (!(C > 0.0)) throw ConfigError("--c must be positive");
  if (n_folds < 2) throw ConfigError("--folds must be at least 2");
  if (pca_dim && *pca_dim == 0) throw ConfigError("--pca-dim must be positive");
  if (pca_dim && encoder == EncoderKind::kBow) {
    throw ConfigError("--pca-dim cannot be combined with the bow encoder");
  }
}

PipelineConfig ExperimentSpec::pipeline() const {
  PipelineConfig p;
  p.encoder = encoder;
  p.k = k;
  p.encoding.alpha = alpha;
  p.encoding.l2_normalize = l2_normalize;
  p.svm.C = C;
  p.pca_dim = pca_dim;
  p.n_folds = n_folds;
  p.seed = seed;
  p.codebook_scope = codebook_scope;
  p.dedup = dedup;
  p.jobs = jobs;
  return p;
}

std::string ExperimentSpec::to_json() const {
  nlohmann::ordered_json j;
  j["embeddings"] = embedding_path.string();
  j["corpus"] = corpus_path.string();
  j["task"] = to_string(task);
  j["k"] = k;
  j["alpha"] = alpha;
  j["l2_normalize"] = l2_normalize;
  j["c"] = C;
  j["pca_dim"] = pca_dim ? nlohmann::ordered_json(*pca_dim) : nlohmann::ordered_json();
  j["folds"] = n_folds;
  j["seed"] = seed;
  j["encoder"] = to_string(encoder);
  j["codebook_scope"] = to_string(codebook_scope);
  j["dedup"] = dedup == DedupMode::kUniqueTypes ? "unique-types" : "all-tokens";
  j["jobs"] = jobs;
  j["lenient_embeddings"] = lenient_embeddings;
  return j.dump();
}

LoadedInputs load_inputs(const ExperimentSpec& spec) {
  spec.validate();
  if (!std::filesystem::exists(spec.corpus_path)) {
    throw DataError("corpus file not found: " + spec.corpus_path.string());
  }
  if (!std::filesystem::exists(spec.embedding_path)) {
    throw DataError("embedding file not found: " + spec.embedding_path.string());
  }
  LoadedInputs in;
  in.corpus = load_corpus(spec.corpus_path, spec.task);
  std::unordered_set<std::string> vocabulary;
  for (const auto& doc : in.corpus.documents) {
    for (auto& t : tokenize(doc.text).tokens) vocabulary.insert(std::move(t));
  }
  LoadOptions options;
  options.keep_words = &vocabulary;
  options.allow_multiword_keys = spec.lenient_embeddings;
  in.table = load_table(spec.embedding_path, options);
  return in;
}

std::vector<std::size_t> fitting_documents(const LabeledCorpus& corpus) {
  if (corpus.split) return corpus.split->train;
  std::vector<std::size_t> all(corpus.size());
  std::iota(all.begin(), all.end(), 0);
  return all;
}

Codebook cmd_codebook(const ExperimentSpec& spec, const std::filesystem::path& out_path,
                      std::ostream& log) {
  log << "spec " << spec.to_json() << '\n';
  const LoadedInputs in = load_inputs(spec);
  const PipelineConfig config = spec.pipeline();
  const PreparedCorpus prepared = prepare_corpus(in.corpus, in.table, spec.jobs);
  const auto docs = fitting_documents(in.corpus);
  const Codebook cb = train_corpus_codebook(prepared, docs, config, derive_seed(spec.seed, "kmeans-shared"));
  save_codebook(cb, out_path);
  log << "codebook k=" << cb.k() << " d=" << cb.dimension() << " inertia=" << format_double(cb.inertia)
      << " iterations=" << cb.iterations_run << " embedding_dim=" << cb.k() * cb.dimension() << '\n';
  return cb;
}

void write_embedding_dump(const std::filesystem::path& path,
                          const std::map<std::string, std::string>& header,
                          const std::vector<std::string>& ids, const Matrix& values) {
  if (ids.size() != values.rows()) throw ConfigError("dump ids and rows differ in count");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write embedding dump " + path.string());
  for (std::size_t r = 0; r < values.rows(); ++r) {
    out << ids[r];
    for (double v : values.row(r)) out << ' ' << format_double(v);
    out << '\n';
  }
  std::ofstream side(path.string() + ".header");
  if (!side) throw DataError("cannot write dump header " + path.string() + ".header");
  for (const auto& [key, value] : header) side << key << '=' << value << '\n';
  if (!out || !side) throw DataError("error writing embedding dump " + path.string());
}

EmbeddingDump read_embedding_dump(const std::filesystem::path& path) {
  EmbeddingDump dump;
  std::ifstream side(path.string() + ".header");
  if (!side) throw DataError("missing dump header " + path.string() + ".header");
  std::string line;
  while (std::getline(side, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("bad dump header line '" + line + "'");
    dump.header[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto it = dump.header.find("dim");
  if (it == dump.header.end()) throw DataError("dump header lacks 'dim'");
  const auto dim = static_cast<std::size_t>(std::stoull(it->second));
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding dump " + path.string());
  std::size_t line_no = 0;
  dump.values = Matrix(0, dim);
  Vector row(dim);
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string id, token;
    if (!(fields >> id)) continue;
    std::size_t j = 0;
    while (fields >> token) {
      if (j == dim) throw DataError("dump line " + std::to_string(line_no) + ": too many values");
      row[j++] = parse_double(token);
    }
    if (j != dim) throw DataError("dump line " + std::to_string(line_no) + ": too few values");
    dump.ids.push_back(id);
    dump.values.append_row(row);
  }
  return dump;
}

EmbeddingDump cmd_encode(const ExperimentSpec& spec,
                         const std::optional<std::filesystem::path>& codebook_path,
                         const std::filesystem::path& out_path, std::ostream& log) {
  log << "spec " << spec.to_json() << '\n';
  if (spec.encoder == EncoderKind::kBow) {
    throw ConfigError("the bow encoder has no fixed-width dump; use eval");
  }
  const bool needs_codebook = spec.encoder != EncoderKind::kMean;
  if (needs_codebook && !codebook_path) throw ConfigError("--codebook is required for this encoder");
  std::optional<Codebook> cb;
  if (needs_codebook) cb = load_codebook(*codebook_path);
  const LoadedInputs in = load_inputs(spec);
  if (cb && cb->dimension() != in.table.dimension()) {
    throw DataError("codebook dimension " + std::to_string(cb->dimension()) +
                    " does not match embedding dimension " + std::to_string(in.table.dimension()));
  }
  const PreparedCorpus prepared = prepare_corpus(in.corpus, in.table, spec.jobs);
  const EncoderConfig enc{spec.alpha, spec.l2_normalize};
  const std::size_t n = in.corpus.size();
  const std::size_t width = spec.encoder == EncoderKind::kVlawe       ? cb->k() * cb->dimension()
                            : spec.encoder == EncoderKind::kHistogram ? cb->k()
                                                                      : in.table.dimension();
  Matrix values(n, width);
  std::vector<std::size_t> zero_flags(n, 0);
  parallel_for(n, spec.jobs, [&](std::size_t i) {
    const auto& doc = prepared.resolved[i];
    Vector v;
    if (spec.encoder == EncoderKind::kVlawe) {
      v = encode(doc, *cb, enc).values;
    } else if (spec.encoder == EncoderKind::kHistogram) {
      v = power_normalize(encode_histogram(doc, *cb), spec.alpha);
      if (spec.l2_normalize) v = l2_normalize(v);
    } else {
      v = encode_mean_baseline(doc, in.table.dimension());
      if (spec.l2_normalize) v = l2_normalize(v);
    }
    zero_flags[i] = l2_norm(v) == 0.0;
    std::copy(v.begin(), v.end(), values.row(i).begin());
  });

  std::map<std::string, std::string> header{
      {"format", "vlawe-dump-1"},
      {"encoder", to_string(spec.encoder)},
      {"k", cb ? std::to_string(cb->k()) : "0"},
      {"d", std::to_string(in.table.dimension())},
      {"alpha", format_double(spec.alpha)},
      {"power_normalized", spec.encoder == EncoderKind::kMean ? "false" : "true"},
      {"l2_normalized", spec.l2_normalize ? "true" : "false"},
      {"pca_dim", spec.pca_dim ? std::to_string(*spec.pca_dim) : "none"},
      {"rows", std::to_string(n)},
  };
  if (spec.pca_dim) {
    const auto docs = fitting_documents(in.corpus);
    Matrix fit_rows(0, width);
    for (std::size_t i : docs) fit_rows.append_row(values.row(i));
    const PcaProjection proj = fit_pca(fit_rows, *spec.pca_dim);
    Matrix projected(n, *spec.pca_dim);
    for (std::size_t i = 0; i < n; ++i) {
      const Vector p = apply_pca(proj, values.row(i));
      std::copy(p.begin(), p.end(), projected.row(i).begin());
    }
    values = std::move(projected);
  }
  header["dim"] = std::to_string(values.cols());

  std::vector<std::string> ids;
  for (const auto& d : in.corpus.documents) ids.push_back(d.id);
  write_embedding_dump(out_path, header, ids, values);
  const std::size_t zeros = std::accumulate(zero_flags.begin(), zero_flags.end(), std::size_t{0});
  log << "encoded " << n << " documents dim=" << values.cols() << " tokens=" << prepared.total_tokens
      << " oov=" << prepared.oov_tokens << " zero_embeddings=" << zeros << '\n';
  return {std::move(header), std::move(ids), std::move(values)};
}

EvalReport cmd_eval(const ExperimentSpec& spec, const std::optional<std::filesystem::path>& codebook_path,
                    std::ostream& log) {
  log << "spec " << spec.to_json() << '\n';
  const auto start = std::chrono::steady_clock::now();
  PipelineConfig config = spec.pipeline();
  if (codebook_path) config.fixed_codebook = load_codebook(*codebook_path);
  const LoadedInputs in = load_inputs(spec);
  EvalReport report = run_experiment(in.corpus, in.table, config);
  if (spec.timings) {
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return report;
}

namespace {
double sample_stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}
}  // namespace

std::vector<SweepRow> cmd_sweep_k(const ExperimentSpec& spec, const std::vector<std::size_t>& k_list,
                                  int repeats, std::ostream& log) {
  log << "spec " << spec.to_json() << '\n';
  if (k_list.empty()) throw ConfigError("empty k list");
  if (repeats < 1) throw ConfigError("--repeats must be at least 1");
  const LoadedInputs in = load_inputs(spec);
  std::vector<SweepRow> rows;
  for (std::size_t k : k_list) {
    ExperimentSpec run = spec;
    run.k = k;
    run.validate();
    std::vector<double> values;
    std::vector<double> folds;
    for (int r = 0; r < repeats; ++r) {
      PipelineConfig config = run.pipeline();
      if (r > 0) config.seed = derive_seed(spec.seed, "repeat", static_cast<std::uint64_t>(r));
      const EvalReport report = run_experiment(in.corpus, in.table, config);
      values.push_back(report.value);
      if (report.per_fold) folds = *report.per_fold;
    }
    SweepRow row;
    row.k = k;
    row.metric = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    row.stddev = repeats > 1 ? sample_stddev(values) : sample_stddev(folds);
    log << "k=" << k << " metric=" << format_double(row.metric) << " stddev=" << format_double(row.stddev)
        << '\n';
    rows.push_back(row);
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "k,metric,stddev\n";
  for (const auto& r : rows) {
    out += std::to_string(r.k) + ',' + format_double(r.metric) + ',' + format_double(r.stddev) + '\n';
  }
  return out;
}

}  // namespace vlawe

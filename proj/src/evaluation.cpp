#include "vlawe/evaluation.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <unordered_set>

#include "json.hpp"

namespace vlawe {

std::string to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::kBinary: return "binary";
    case TaskKind::kMulticlass: return "multiclass";
    case TaskKind::kMultilabel: return "multilabel";
  }
  return "unknown";
}

TaskKind task_kind_from_string(std::string_view name) {
  if (name == "binary") return TaskKind::kBinary;
  if (name == "multiclass") return TaskKind::kMulticlass;
  if (name == "multilabel") return TaskKind::kMultilabel;
  throw ConfigError("unknown task kind '" + std::string(name) + "'");
}

std::string to_string(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::kVlawe: return "vlawe";
    case EncoderKind::kMean: return "mean";
    case EncoderKind::kBow: return "bow";
    case EncoderKind::kHistogram: return "histogram";
  }
  return "unknown";
}

EncoderKind encoder_kind_from_string(std::string_view name) {
  if (name == "vlawe") return EncoderKind::kVlawe;
  if (name == "mean") return EncoderKind::kMean;
  if (name == "bow") return EncoderKind::kBow;
  if (name == "histogram") return EncoderKind::kHistogram;
  throw ConfigError("unknown encoder '" + std::string(name) + "'");
}

std::string to_string(CodebookScope scope) {
  return scope == CodebookScope::kPerFold ? "per-fold" : "shared";
}

CodebookScope codebook_scope_from_string(std::string_view name) {
  if (name == "per-fold") return CodebookScope::kPerFold;
  if (name == "shared") return CodebookScope::kShared;
  throw ConfigError("unknown codebook scope '" + std::string(name) + "'");
}

LabeledCorpus load_corpus(std::istream& in, TaskKind kind) {
  LabeledCorpus corpus;
  corpus.task_kind = kind;
  CorpusSplit split;
  bool any_hint = false;
  std::unordered_set<std::string> ids;
  std::set<std::string> distinct_labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fail = [&](const std::string& why) {
      throw DataError("corpus line " + std::to_string(line_no) + ": " + why);
    };
    std::size_t tabs[3];
    std::size_t pos = 0;
    for (auto& t : tabs) {
      t = line.find('\t', pos);
      if (t == std::string::npos) fail("expected 4 tab-separated fields");
      pos = t + 1;
    }
    std::string id = line.substr(0, tabs[0]);
    const std::string label_field = line.substr(tabs[0] + 1, tabs[1] - tabs[0] - 1);
    const std::string hint = line.substr(tabs[1] + 1, tabs[2] - tabs[1] - 1);
    std::string text = line.substr(tabs[2] + 1);
    if (id.empty()) fail("empty document id");
    if (!ids.insert(id).second) fail("duplicate document id '" + id + "'");

    std::vector<std::string> labels;
    std::size_t start = 0;
    while (start <= label_field.size() && !label_field.empty()) {
      const std::size_t comma = std::min(label_field.find(',', start), label_field.size());
      std::string label = label_field.substr(start, comma - start);
      if (label.empty()) fail("empty label in '" + label_field + "'");
      if (std::find(labels.begin(), labels.end(), label) == labels.end()) labels.push_back(label);
      start = comma + 1;
    }
    if (kind != TaskKind::kMultilabel && labels.size() != 1) {
      fail("single-label task needs exactly one label, found " + std::to_string(labels.size()));
    }
    distinct_labels.insert(labels.begin(), labels.end());

    const std::size_t index = corpus.documents.size();
    if (hint == "train") {
      split.train.push_back(index);
      any_hint = true;
    } else if (hint == "test") {
      split.test.push_back(index);
      any_hint = true;
    } else if (hint != "-") {
      fail("split hint must be train, test or -, got '" + hint + "'");
    }
    corpus.documents.push_back({std::move(id), std::move(text)});
    corpus.labels.push_back(std::move(labels));
  }
  if (corpus.documents.empty()) throw DataError("corpus is empty");
  if (kind == TaskKind::kBinary && distinct_labels.size() > 2) {
    throw DataError("binary task has " + std::to_string(distinct_labels.size()) + " labels");
  }
  if (any_hint) {
    if (split.train.empty() || split.test.empty()) {
      throw DataError("predefined split needs both train and test documents");
    }
    corpus.split = std::move(split);
  }
  return corpus;
}

LabeledCorpus load_corpus(const std::filesystem::path& path, TaskKind kind) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file " + path.string());
  try {
    return load_corpus(in, kind);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

namespace {

std::string stratum_key(const std::vector<std::string>& labels) {
  std::vector<std::string> sorted = labels;
  std::sort(sorted.begin(), sorted.end());
  std::string key;
  for (const auto& l : sorted) key += l + '\x1f';
  return key;
}

}  // namespace

FoldPlan make_folds(const LabeledCorpus& corpus, int n_folds, std::uint64_t seed) {
  if (n_folds < 2) throw ConfigError("need at least 2 folds");
  if (corpus.split) throw ConfigError("corpus has a predefined split; use it instead of folds");
  const std::size_t n = corpus.size();
  const auto folds = static_cast<std::size_t>(n_folds);
  if (n < folds) {
    throw DataError("cannot make " + std::to_string(folds) + " folds from " + std::to_string(n) +
                    " documents");
  }
  std::map<std::string, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < n; ++i) strata[stratum_key(corpus.labels[i])].push_back(i);

  FoldPlan plan;
  for (const auto& [key, members] : strata) {
    if (members.size() < folds) plan.stratified = false;
  }
  if (!plan.stratified) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    strata.clear();
    strata.emplace("", std::move(all));
  }

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> fold_of(n);
  std::size_t next = 0;  // round-robin continues across strata to keep sizes within 1
  for (auto& [key, members] : strata) {
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t doc : members) {
      fold_of[doc] = next;
      next = (next + 1) % folds;
    }
  }
  plan.folds.resize(folds);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < folds; ++f) {
      (f == fold_of[i] ? plan.folds[f].test : plan.folds[f].train).push_back(i);
    }
  }
  return plan;
}

double accuracy(const std::vector<std::string>& predicted, const std::vector<std::string>& gold) {
  if (predicted.size() != gold.size()) throw ConfigError("accuracy: length mismatch");
  if (predicted.empty()) throw ConfigError("accuracy of an empty prediction list");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) hits += predicted[i] == gold[i];
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

double micro_f1(const std::vector<std::vector<std::string>>& predicted,
                const std::vector<std::vector<std::string>>& gold) {
  if (predicted.size() != gold.size()) throw ConfigError("micro_f1: length mismatch");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const std::set<std::string> p(predicted[i].begin(), predicted[i].end());
    const std::set<std::string> g(gold[i].begin(), gold[i].end());
    for (const auto& l : p) (g.contains(l) ? tp : fp) += 1;
    for (const auto& l : g) fn += !p.contains(l);
  }
  // 2PR/(P+R) written over the pooled counts; zero whenever TP is zero.
  if (tp == 0) return 0.0;
  return static_cast<double>(2 * tp) / static_cast<double>(2 * tp + fp + fn);
}

std::string metric_name_for(TaskKind kind) {
  return kind == TaskKind::kMultilabel ? "micro_f1" : "accuracy";
}

PreparedCorpus prepare_corpus(const LabeledCorpus& corpus, const EmbeddingTable& table,
                              unsigned jobs) {
  PreparedCorpus prepared;
  prepared.corpus = &corpus;
  prepared.dimension = table.dimension();
  const std::size_t n = corpus.size();
  prepared.tokens.resize(n);
  prepared.resolved.resize(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    prepared.tokens[i] = tokenize(corpus.documents[i].text, corpus.documents[i].id);
    prepared.resolved[i] = resolve(prepared.tokens[i], table);
  });
  for (const auto& r : prepared.resolved) {
    prepared.total_tokens += r.document.tokens.size();
    prepared.oov_tokens += r.oov_count;
  }
  return prepared;
}

Codebook train_corpus_codebook(const PreparedCorpus& prepared, std::span<const std::size_t> docs,
                               const PipelineConfig& config, std::uint64_t seed) {
  std::vector<ResolvedDocument> subset;
  subset.reserve(docs.size());
  for (std::size_t i : docs) subset.push_back(prepared.resolved[i]);
  const auto training = build_training_set(subset, config.dedup);
  KMeansConfig km;
  km.max_iters = config.kmeans_max_iters;
  km.rel_tolerance = config.kmeans_rel_tolerance;
  km.seed = seed;
  km.jobs = config.jobs;
  return train_codebook(training, config.k, km);
}

namespace {

ClassifierMode mode_for(TaskKind kind) {
  switch (kind) {
    case TaskKind::kBinary: return ClassifierMode::kBinary;
    case TaskKind::kMulticlass: return ClassifierMode::kMulticlassOvr;
    case TaskKind::kMultilabel: return ClassifierMode::kMultilabelOvr;
  }
  return ClassifierMode::kMulticlassOvr;
}

Matrix dense_features(const PreparedCorpus& prepared, std::span<const std::size_t> docs,
                      const PipelineConfig& config, const Codebook* codebook,
                      std::size_t dimension) {
  Matrix out(docs.size(), dimension);
  parallel_for(docs.size(), config.jobs, [&](std::size_t r) {
    const auto& doc = prepared.resolved[docs[r]];
    Vector v;
    switch (config.encoder) {
      case EncoderKind::kVlawe:
        v = encode(doc, *codebook, config.encoding).values;
        break;
      case EncoderKind::kHistogram:
        v = power_normalize(encode_histogram(doc, *codebook), config.encoding.alpha);
        if (config.encoding.l2_normalize) v = l2_normalize(v);
        break;
      case EncoderKind::kMean:
        v = encode_mean_baseline(doc, dimension);
        if (config.encoding.l2_normalize) v = l2_normalize(v);
        break;
      case EncoderKind::kBow:
        break;
    }
    std::copy(v.begin(), v.end(), out.row(r).begin());
  });
  return out;
}

FeatureMatrix bow_features(const PreparedCorpus& prepared, std::span<const std::size_t> docs,
                           const BowVocabulary& vocab, bool l2) {
  FeatureMatrix out(vocab.size());
  for (std::size_t i : docs) {
    SparseVector v = vocab.transform(prepared.tokens[i]);
    if (l2) {
      const Vector normed = l2_normalize(v.values);
      v.values = normed;
    }
    out.add_sparse_row(v);
  }
  return out;
}

std::vector<std::vector<std::string>> labels_of(const LabeledCorpus& corpus,
                                                std::span<const std::size_t> docs) {
  std::vector<std::vector<std::string>> out;
  out.reserve(docs.size());
  for (std::size_t i : docs) out.push_back(corpus.labels[i]);
  return out;
}

}  // namespace

FoldArtifacts run_fold(const PreparedCorpus& prepared, const Fold& fold, const PipelineConfig& config,
                       std::size_t fold_index, const Codebook* shared_codebook) {
  const LabeledCorpus& corpus = *prepared.corpus;
  if (fold.train.empty() || fold.test.empty()) throw DataError("fold with an empty side");
  FoldArtifacts art;

  const bool needs_codebook =
      config.encoder == EncoderKind::kVlawe || config.encoder == EncoderKind::kHistogram;
  const Codebook* codebook = shared_codebook;
  if (needs_codebook && codebook == nullptr) {
    art.codebook = train_corpus_codebook(prepared, fold.train, config,
                                         derive_seed(config.seed, "kmeans", fold_index));
    codebook = &*art.codebook;
  }

  FeatureMatrix train_x, test_x;
  if (config.encoder == EncoderKind::kBow) {
    if (config.pca_dim) throw ConfigError("PCA is not supported with the bag-of-words encoder");
    std::vector<TokenizedDocument> train_docs;
    for (std::size_t i : fold.train) train_docs.push_back(prepared.tokens[i]);
    const auto vocab = BowVocabulary::fit(train_docs);
    train_x = bow_features(prepared, fold.train, vocab, config.encoding.l2_normalize);
    test_x = bow_features(prepared, fold.test, vocab, config.encoding.l2_normalize);
  } else {
    std::size_t dimension = 0;
    if (config.encoder == EncoderKind::kVlawe) dimension = codebook->k() * codebook->dimension();
    if (config.encoder == EncoderKind::kHistogram) dimension = codebook->k();
    if (config.encoder == EncoderKind::kMean) dimension = prepared.dimension;
    Matrix train_dense = dense_features(prepared, fold.train, config, codebook, dimension);
    Matrix test_dense = dense_features(prepared, fold.test, config, codebook, dimension);
    if (config.pca_dim) {
      art.pca = fit_pca(train_dense, *config.pca_dim);
      auto project = [&](const Matrix& m) {
        Matrix out(m.rows(), *config.pca_dim);
        parallel_for(m.rows(), config.jobs, [&](std::size_t r) {
          const Vector p = apply_pca(*art.pca, m.row(r));
          std::copy(p.begin(), p.end(), out.row(r).begin());
        });
        return out;
      };
      train_dense = project(train_dense);
      test_dense = project(test_dense);
    }
    train_x = FeatureMatrix::from_dense(train_dense);
    test_x = FeatureMatrix::from_dense(test_dense);
  }

  ClassifierConfig svm = config.svm;
  svm.seed = derive_seed(config.seed, "svm", fold_index);
  svm.jobs = config.jobs;
  art.model = train(train_x, labels_of(corpus, fold.train), svm, mode_for(corpus.task_kind));

  art.predictions.resize(fold.test.size());
  for (std::size_t r = 0; r < fold.test.size(); ++r) art.predictions[r] = predict(art.model, test_x.row(r));
  const auto gold = labels_of(corpus, fold.test);
  if (corpus.task_kind == TaskKind::kMultilabel) {
    art.metric = micro_f1(art.predictions, gold);
  } else {
    std::vector<std::string> p, g;
    for (std::size_t r = 0; r < gold.size(); ++r) {
      p.push_back(art.predictions[r].front());
      g.push_back(gold[r].front());
    }
    art.metric = accuracy(p, g);
  }
  return art;
}

std::string config_to_json(const PipelineConfig& config) {
  nlohmann::ordered_json j;
  j["encoder"] = to_string(config.encoder);
  j["k"] = config.k;
  j["alpha"] = config.encoding.alpha;
  j["l2_normalize"] = config.encoding.l2_normalize;
  j["C"] = config.svm.C;
  j["svm_tolerance"] = config.svm.tolerance;
  j["svm_max_iters"] = config.svm.max_iters;
  j["pca_dim"] = config.pca_dim ? nlohmann::ordered_json(*config.pca_dim) : nlohmann::ordered_json();
  j["folds"] = config.n_folds;
  j["seed"] = config.seed;
  j["seeds"] = {{"folds", derive_seed(config.seed, "folds")},
                {"kmeans_fold0", derive_seed(config.seed, "kmeans", 0)},
                {"svm_fold0", derive_seed(config.seed, "svm", 0)}};
  j["codebook_scope"] = to_string(config.codebook_scope);
  j["dedup"] = config.dedup == DedupMode::kUniqueTypes ? "unique-types" : "all-tokens";
  j["kmeans_max_iters"] = config.kmeans_max_iters;
  j["kmeans_rel_tolerance"] = config.kmeans_rel_tolerance;
  j["fixed_codebook"] = config.fixed_codebook.has_value();
  return j.dump();
}

EvalReport run_experiment(const LabeledCorpus& corpus, const EmbeddingTable& table,
                          const PipelineConfig& config) {
  config.encoding.validate();
  config.svm.validate();
  if (config.k == 0) throw ConfigError("k must be positive");
  if (config.fixed_codebook && config.fixed_codebook->dimension() != table.dimension()) {
    throw DataError("codebook dimension does not match the embedding table");
  }

  EvalReport report;
  report.metric_name = metric_name_for(corpus.task_kind);
  report.config_echo = config_to_json(config);
  report.documents = corpus.size();

  std::vector<Fold> folds;
  if (corpus.split) {
    Fold f{corpus.split->train, corpus.split->test};
    std::sort(f.train.begin(), f.train.end());
    std::sort(f.test.begin(), f.test.end());
    folds.push_back(std::move(f));
  } else {
    FoldPlan plan = make_folds(corpus, config.n_folds, derive_seed(config.seed, "folds"));
    report.stratified = plan.stratified;
    folds = std::move(plan.folds);
  }

  const PreparedCorpus prepared = prepare_corpus(corpus, table, config.jobs);
  report.total_tokens = prepared.total_tokens;
  report.oov_tokens = prepared.oov_tokens;

  std::optional<Codebook> shared = config.fixed_codebook;
  const bool needs_codebook =
      config.encoder == EncoderKind::kVlawe || config.encoder == EncoderKind::kHistogram;
  if (needs_codebook && !shared && config.codebook_scope == CodebookScope::kShared) {
    std::vector<std::size_t> all(corpus.size());
    std::iota(all.begin(), all.end(), 0);
    shared = train_corpus_codebook(prepared, all, config, derive_seed(config.seed, "kmeans-shared"));
  }

  std::vector<double> values;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    values.push_back(run_fold(prepared, folds[f], config, f, shared ? &*shared : nullptr).metric);
  }
  report.value = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (!corpus.split) report.per_fold = values;
  return report;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["metric"] = report.metric_name;
  j["value"] = report.value;
  if (report.per_fold) {
    j["per_fold"] = *report.per_fold;
  } else {
    j["per_fold"] = nullptr;
  }
  j["stratified"] = report.stratified;
  j["documents"] = report.documents;
  j["tokens"] = report.total_tokens;
  j["oov_tokens"] = report.oov_tokens;
  j["config"] = nlohmann::ordered_json::parse(report.config_echo);
  if (report.seconds) j["seconds"] = *report.seconds;
  return j.dump(2);
}

}  // namespace vlawe

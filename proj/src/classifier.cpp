#include "vlawe/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <set>

namespace vlawe {

FeatureMatrix::RowView FeatureMatrix::row(std::size_t i) const {
  const std::size_t begin = offsets_[i];
  const std::size_t len = offsets_[i + 1] - begin;
  return {{indices_.data() + begin, len}, {values_.data() + begin, len}};
}

void FeatureMatrix::add_dense_row(std::span<const double> values) {
  if (values.size() != dimension_) {
    throw DataError("feature row of dimension " + std::to_string(values.size()) +
                    " added to matrix of dimension " + std::to_string(dimension_));
  }
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (values[j] != 0.0) {
      indices_.push_back(static_cast<std::uint32_t>(j));
      values_.push_back(values[j]);
    }
  }
  offsets_.push_back(indices_.size());
}

void FeatureMatrix::add_sparse_row(const SparseVector& row) {
  for (std::size_t t = 0; t < row.indices.size(); ++t) {
    if (row.indices[t] >= dimension_ || (t > 0 && row.indices[t] <= row.indices[t - 1])) {
      throw DataError("sparse feature row has out-of-range or unsorted indices");
    }
    if (row.values[t] == 0.0) continue;
    indices_.push_back(row.indices[t]);
    values_.push_back(row.values[t]);
  }
  offsets_.push_back(indices_.size());
}

FeatureMatrix FeatureMatrix::from_dense(const Matrix& dense) {
  FeatureMatrix m(dense.cols());
  for (std::size_t i = 0; i < dense.rows(); ++i) m.add_dense_row(dense.row(i));
  return m;
}

double dot(std::span<const double> w, const FeatureMatrix::RowView& x) {
  double s = 0.0;
  for (std::size_t t = 0; t < x.indices.size(); ++t) s += w[x.indices[t]] * x.values[t];
  return s;
}

std::string to_string(ClassifierMode mode) {
  switch (mode) {
    case ClassifierMode::kBinary: return "binary";
    case ClassifierMode::kMulticlassOvr: return "multiclass-ovr";
    case ClassifierMode::kMultilabelOvr: return "multilabel-ovr";
  }
  return "unknown";
}

ClassifierMode classifier_mode_from_string(std::string_view name) {
  if (name == "binary") return ClassifierMode::kBinary;
  if (name == "multiclass-ovr") return ClassifierMode::kMulticlassOvr;
  if (name == "multilabel-ovr") return ClassifierMode::kMultilabelOvr;
  throw DataError("unknown classifier mode '" + std::string(name) + "'");
}

void ClassifierConfig::validate() const {
  if (!(C > 0.0) || !std::isfinite(C)) throw ConfigError("C must be a positive finite number");
  if (!(tolerance > 0.0)) throw ConfigError("solver tolerance must be positive");
  if (max_iters < 1) throw ConfigError("solver max_iters must be at least 1");
}

// Dual coordinate descent for the L1-loss (hinge) SVM with shrinking. The
// bias is handled as an extra constant feature of value 1.
Vector train_binary_svm(const FeatureMatrix& x, std::span<const int> y, const ClassifierConfig& config,
                        std::uint64_t seed) {
  const std::size_t n = x.rows();
  const std::size_t dim = x.dimension();
  const double C = config.C;
  Vector w(dim + 1, 0.0);  // last entry is the bias
  std::vector<double> alpha(n, 0.0);
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = x.row(i);
    double sq = 1.0;
    for (double v : r.values) sq += v * v;
    diag[i] = sq;
  }
  std::vector<std::size_t> index(n);
  for (std::size_t i = 0; i < n; ++i) index[i] = i;
  std::mt19937_64 rng(seed);

  std::size_t active = n;
  double pg_max_old = std::numeric_limits<double>::infinity();
  double pg_min_old = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < config.max_iters; ++iter) {
    double pg_max_new = -std::numeric_limits<double>::infinity();
    double pg_min_new = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < active; ++i) {
      const std::size_t j = i + std::uniform_int_distribution<std::size_t>(0, active - i - 1)(rng);
      std::swap(index[i], index[j]);
    }
    for (std::size_t s = 0; s < active; ++s) {
      const std::size_t i = index[s];
      const auto r = x.row(i);
      const double yi = y[i];
      const double g = yi * (dot(w, r) + w[dim]) - 1.0;
      double pg = 0.0;
      if (alpha[i] == 0.0) {
        if (g > pg_max_old) {
          --active;
          std::swap(index[s], index[active]);
          --s;
          continue;
        }
        if (g < 0.0) pg = g;
      } else if (alpha[i] == C) {
        if (g < pg_min_old) {
          --active;
          std::swap(index[s], index[active]);
          --s;
          continue;
        }
        if (g > 0.0) pg = g;
      } else {
        pg = g;
      }
      pg_max_new = std::max(pg_max_new, pg);
      pg_min_new = std::min(pg_min_new, pg);
      if (std::abs(pg) > 1e-12) {
        const double old = alpha[i];
        alpha[i] = std::min(std::max(alpha[i] - g / diag[i], 0.0), C);
        const double delta = (alpha[i] - old) * yi;
        for (std::size_t t = 0; t < r.indices.size(); ++t) w[r.indices[t]] += delta * r.values[t];
        w[dim] += delta;
      }
    }
    if (pg_max_new - pg_min_new <= config.tolerance) {
      if (active < n) {
        // Converged on the shrunk set; continue on the full set.
        active = n;
        pg_max_old = std::numeric_limits<double>::infinity();
        pg_min_old = -std::numeric_limits<double>::infinity();
        continue;
      }
      // Stop only once the relative duality gap is within tolerance.
      const double primal = svm_primal_objective(x, y, w, C);
      double dual = 0.0;
      for (double a : alpha) dual += a;
      for (double v : w) dual -= 0.5 * v * v;
      if (primal - dual <= config.tolerance * primal) break;
    }
    pg_max_old = pg_max_new > 0.0 ? pg_max_new : std::numeric_limits<double>::infinity();
    pg_min_old = pg_min_new < 0.0 ? pg_min_new : -std::numeric_limits<double>::infinity();
  }
  return w;
}

double svm_primal_objective(const FeatureMatrix& x, std::span<const int> y, std::span<const double> wb,
                            double C) {
  const std::size_t dim = x.dimension();
  double reg = 0.0;
  for (double v : wb) reg += v * v;
  double loss = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double margin = y[i] * (dot(wb.first(dim), x.row(i)) + wb[dim]);
    loss += std::max(0.0, 1.0 - margin);
  }
  return 0.5 * reg + C * loss;
}

ClassifierModel train(const FeatureMatrix& x, const std::vector<std::vector<std::string>>& labels,
                      const ClassifierConfig& config, ClassifierMode mode) {
  config.validate();
  const std::size_t n = x.rows();
  if (labels.size() != n) {
    throw DataError("classifier: " + std::to_string(n) + " feature rows but " +
                    std::to_string(labels.size()) + " label entries");
  }
  if (n < 2) throw DataError("classifier needs at least two training examples");
  std::set<std::string> distinct;
  for (const auto& ls : labels) {
    if (mode != ClassifierMode::kMultilabelOvr && ls.size() != 1) {
      throw DataError("single-label classifier given an example with " +
                      std::to_string(ls.size()) + " labels");
    }
    distinct.insert(ls.begin(), ls.end());
  }
  ClassifierModel model;
  model.mode = mode;
  model.C = config.C;
  model.classes.assign(distinct.begin(), distinct.end());
  if (mode == ClassifierMode::kBinary && model.classes.size() != 2) {
    throw DataError("binary classifier needs exactly two distinct labels, got " +
                    std::to_string(model.classes.size()));
  }
  if (mode == ClassifierMode::kMulticlassOvr && model.classes.size() < 2) {
    throw DataError("multiclass classifier needs at least two distinct labels");
  }
  if (mode == ClassifierMode::kMultilabelOvr && model.classes.empty()) {
    throw DataError("multilabel classifier got no labels at all");
  }

  const std::size_t separators = mode == ClassifierMode::kBinary ? 1 : model.classes.size();
  const std::size_t dim = x.dimension();
  model.weights = Matrix(separators, dim);
  model.biases.assign(separators, 0.0);
  parallel_for(separators, config.jobs, [&](std::size_t c) {
    const std::string& positive = model.classes[c];
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      const bool hit = std::find(labels[i].begin(), labels[i].end(), positive) != labels[i].end();
      y[i] = hit ? 1 : -1;
    }
    const Vector wb = train_binary_svm(x, y, config, derive_seed(config.seed, "svm-class", c));
    std::copy_n(wb.begin(), dim, model.weights.row(c).begin());
    model.biases[c] = wb[dim];
  });
  return model;
}

namespace {

template <typename Features>
Vector scores_impl(const ClassifierModel& model, const Features& x) {
  Vector scores;
  for (std::size_t c = 0; c < model.weights.rows(); ++c) {
    scores.push_back(dot(model.weights.row(c), x) + model.biases[c]);
  }
  if (model.mode == ClassifierMode::kBinary) scores.push_back(-scores.front());
  return scores;
}

}  // namespace

Vector decision_scores(const ClassifierModel& model, std::span<const double> x) {
  if (x.size() != model.feature_dimension()) {
    throw DataError("feature vector has dimension " + std::to_string(x.size()) +
                    ", model expects " + std::to_string(model.feature_dimension()));
  }
  return scores_impl(model, x);
}

Vector decision_scores(const ClassifierModel& model, const FeatureMatrix::RowView& x) {
  if (!x.indices.empty() && x.indices.back() >= model.feature_dimension()) {
    throw DataError("sparse feature index beyond model dimension");
  }
  return scores_impl(model, x);
}

std::vector<std::string> predict_from_scores(const ClassifierModel& model,
                                             std::span<const double> scores) {
  std::vector<std::string> out;
  if (model.mode == ClassifierMode::kMultilabelOvr) {
    for (std::size_t c = 0; c < scores.size(); ++c) {
      if (scores[c] > 0.0) out.push_back(model.classes[c]);
    }
    return out;
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c) {
    if (scores[c] > scores[best]) best = c;
  }
  out.push_back(model.classes[best]);
  return out;
}

std::vector<std::string> predict(const ClassifierModel& model, std::span<const double> x) {
  return predict_from_scores(model, decision_scores(model, x));
}

std::vector<std::string> predict(const ClassifierModel& model, const FeatureMatrix::RowView& x) {
  return predict_from_scores(model, decision_scores(model, x));
}

namespace {
constexpr const char* kModelMagic = "VLAWE-SVM";
constexpr int kModelVersion = 1;
}  // namespace

void save_model(const ClassifierModel& model, std::ostream& out) {
  out << kModelMagic << ' ' << kModelVersion << '\n'
      << "mode " << to_string(model.mode) << '\n'
      << "feature_dim " << model.feature_dimension() << '\n'
      << "C " << format_double(model.C) << '\n'
      << "separators " << model.weights.rows() << '\n'
      << "classes " << model.classes.size() << '\n';
  for (const auto& c : model.classes) out << c << '\n';
  for (std::size_t r = 0; r < model.weights.rows(); ++r) {
    out << format_double(model.biases[r]);
    for (double v : model.weights.row(r)) out << ' ' << format_double(v);
    out << '\n';
  }
}

void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file " + path.string());
  save_model(model, out);
  if (!out) throw DataError("error writing model file " + path.string());
}

ClassifierModel load_model(std::istream& in) {
  auto expect_line = [&](const std::string& key) {
    std::string line;
    if (!std::getline(in, line) || line.rfind(key + " ", 0) != 0) {
      throw DataError("model file: missing '" + key + "' line");
    }
    return line.substr(key.size() + 1);
  };
  auto to_size = [](const std::string& s) {
    const double v = parse_double(s);
    if (v < 0 || v != std::floor(v)) throw DataError("model file: bad count '" + s + "'");
    return static_cast<std::size_t>(v);
  };
  std::string header;
  if (!std::getline(in, header) ||
      header != std::string(kModelMagic) + " " + std::to_string(kModelVersion)) {
    throw DataError("not a classifier model file");
  }
  ClassifierModel model;
  model.mode = classifier_mode_from_string(expect_line("mode"));
  const std::size_t dim = to_size(expect_line("feature_dim"));
  model.C = parse_double(expect_line("C"));
  const std::size_t separators = to_size(expect_line("separators"));
  const std::size_t n_classes = to_size(expect_line("classes"));
  for (std::size_t c = 0; c < n_classes; ++c) {
    std::string name;
    if (!std::getline(in, name)) throw DataError("model file truncated in class list");
    model.classes.push_back(name);
  }
  const std::size_t expected = model.mode == ClassifierMode::kBinary ? 1 : n_classes;
  if (separators != expected) throw DataError("model file: separator count does not match mode");
  model.weights = Matrix(separators, dim);
  model.biases.assign(separators, 0.0);
  std::string token;
  for (std::size_t r = 0; r < separators; ++r) {
    if (!(in >> token)) throw DataError("model file truncated in weight matrix");
    model.biases[r] = parse_double(token);
    for (std::size_t j = 0; j < dim; ++j) {
      if (!(in >> token)) throw DataError("model file truncated in weight matrix");
      model.weights(r, j) = parse_double(token);
    }
  }
  if (in >> token) throw DataError("model file: trailing data");
  return model;
}

ClassifierModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file " + path.string());
  return load_model(in);
}

}  // namespace vlawe

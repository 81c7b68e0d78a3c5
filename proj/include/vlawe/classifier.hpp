#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vlawe/common.hpp"
#include "vlawe/encoder.hpp"

namespace vlawe {

// Compressed sparse rows; dense embeddings are stored with their zeros
// dropped.
class FeatureMatrix {
 public:
  explicit FeatureMatrix(std::size_t dimension = 0) : dimension_(dimension) {}

  struct RowView {
    std::span<const std::uint32_t> indices;
    std::span<const double> values;
  };

  std::size_t rows() const { return offsets_.size() - 1; }
  std::size_t dimension() const { return dimension_; }
  RowView row(std::size_t i) const;

  void add_dense_row(std::span<const double> values);
  void add_sparse_row(const SparseVector& row);

  static FeatureMatrix from_dense(const Matrix& dense);

 private:
  std::size_t dimension_;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::uint32_t> indices_;
  std::vector<double> values_;
};

double dot(std::span<const double> w, const FeatureMatrix::RowView& x);

enum class ClassifierMode { kBinary, kMulticlassOvr, kMultilabelOvr };

std::string to_string(ClassifierMode mode);
ClassifierMode classifier_mode_from_string(std::string_view name);

struct ClassifierConfig {
  double C = 1.0;
  double tolerance = 1e-3;  // relative duality gap (and projected-gradient spread) at exit
  int max_iters = 1000;     // passes over the data
  std::uint64_t seed = 0;
  unsigned jobs = 1;

  void validate() const;
};

// Linear max-margin classifier. In binary mode a single separating vector
// is stored for classes[0]; the score of classes[1] is its negation.
struct ClassifierModel {
  ClassifierMode mode = ClassifierMode::kMulticlassOvr;
  std::vector<std::string> classes;
  Matrix weights;  // one row per stored separator
  Vector biases;
  double C = 1.0;

  std::size_t feature_dimension() const { return weights.cols(); }
  bool operator==(const ClassifierModel&) const = default;
};

// labels[i] holds one label for binary/multiclass, any number for multilabel.
ClassifierModel train(const FeatureMatrix& x, const std::vector<std::vector<std::string>>& labels,
                      const ClassifierConfig& config, ClassifierMode mode);

// Solves one +1/-1 problem: min 0.5*(|w|^2 + b^2) + C * sum hinge(y_i (w.x_i + b))
// by dual coordinate descent. Returns w with the bias appended.
Vector train_binary_svm(const FeatureMatrix& x, std::span<const int> y, const ClassifierConfig& config,
                        std::uint64_t seed);

// Primal objective of the formulation above; `wb` has the bias appended.
double svm_primal_objective(const FeatureMatrix& x, std::span<const int> y, std::span<const double> wb,
                            double C);

Vector decision_scores(const ClassifierModel& model, std::span<const double> x);
Vector decision_scores(const ClassifierModel& model, const FeatureMatrix::RowView& x);

// Binary/multiclass: one label (argmax, ties to the earlier class).
// Multilabel: every class with a positive score, possibly none.
std::vector<std::string> predict(const ClassifierModel& model, std::span<const double> x);
std::vector<std::string> predict(const ClassifierModel& model, const FeatureMatrix::RowView& x);
std::vector<std::string> predict_from_scores(const ClassifierModel& model, std::span<const double> scores);

void save_model(const ClassifierModel& model, std::ostream& out);
void save_model(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_model(std::istream& in);
ClassifierModel load_model(const std::filesystem::path& path);

}  // namespace vlawe

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vlawe {

/// Malformed input data, bad files, inconsistent dimensions.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or argument values supplied by the caller.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Vector = std::vector<double>;

// Row-major dense matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  // Appends a row; the first row fixes the column count.
  void append_row(std::span<const double> values);

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);

// Independent, reproducible sub-seed for a named random stream.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0);

// Runs body(i) for i in [0, n) on up to `jobs` threads. Each index is
// visited exactly once; callers write only to slot i, so results do not
// depend on the schedule. jobs == 0 means hardware concurrency.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& body);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);
// Strict parse of a whole token; throws DataError on garbage.
double parse_double(std::string_view token);

}  // namespace vlawe

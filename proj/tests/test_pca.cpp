#include <cmath>
#include <random>

#include "doctest.h"
#include "vlawe/pca.hpp"

using namespace vlawe;

namespace {

Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix m(rows, cols);
  for (auto& v : m.data()) v = g(rng);
  return m;
}

void check_orthonormal(const PcaProjection& p) {
  for (std::size_t a = 0; a < p.components.rows(); ++a) {
    for (std::size_t b = a; b < p.components.rows(); ++b) {
      const double d = dot(p.components.row(a), p.components.row(b));
      if (a == b) {
        CHECK(std::abs(d - 1.0) <= 1e-6);
      } else {
        CHECK(std::abs(d) <= 1e-6);
      }
    }
  }
}

// Largest eigenvalue of the sample covariance by power iteration.
double top_variance(const Matrix& x) {
  const std::size_t n = x.rows(), d = x.cols();
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j) / static_cast<double>(n);
  std::vector<double> v(d, 1.0), w(d);
  double lambda = 0.0;
  for (int it = 0; it < 5000; ++it) {
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += (x(i, j) - mean[j]) * v[j];
      for (std::size_t j = 0; j < d; ++j) w[j] += s * (x(i, j) - mean[j]) / static_cast<double>(n - 1);
    }
    lambda = l2_norm(w);
    for (std::size_t j = 0; j < d; ++j) v[j] = w[j] / lambda;
  }
  return lambda;
}

}  // namespace

TEST_CASE("rank-one data is reconstructed exactly from one component") {
  Matrix x(0, 2);
  for (double t : {-3.0, -1.0, 0.5, 2.0, 7.0}) x.append_row(std::vector<double>{1.0 + 2.0 * t, -4.0 + t});
  const auto p = fit_pca(x, 1);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto z = apply_pca(p, x.row(i));
    for (std::size_t j = 0; j < 2; ++j) {
      const double back = p.mean[j] + z[0] * p.components(0, j);
      CHECK(std::abs(back - x(i, j)) <= 1e-8);
    }
  }
}

TEST_CASE("full-dimension PCA is a rigid transform") {
  std::mt19937_64 rng(12);
  const auto x = random_matrix(rng, 40, 6);
  const auto p = fit_pca(x, 6);
  check_orthonormal(p);
  for (std::size_t a = 0; a < x.rows(); ++a) {
    const auto za = apply_pca(p, x.row(a));
    for (std::size_t b = a + 1; b < x.rows(); ++b) {
      const auto zb = apply_pca(p, x.row(b));
      CHECK(std::abs(std::sqrt(squared_distance(za, zb)) - std::sqrt(squared_distance(x.row(a), x.row(b)))) <=
            1e-6);
    }
  }
}

TEST_CASE("projections of training data are centred and ordered") {
  std::mt19937_64 rng(13);
  auto x = random_matrix(rng, 60, 10);
  for (std::size_t i = 0; i < x.rows(); ++i) x(i, 3) *= 5.0;  // dominant direction
  const auto p = fit_pca(x, 4);
  check_orthonormal(p);
  std::vector<double> mean(4, 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto z = apply_pca(p, x.row(i));
    for (std::size_t c = 0; c < 4; ++c) mean[c] += z[c] / static_cast<double>(x.rows());
  }
  for (double m : mean) CHECK(std::abs(m) <= 1e-6);
  for (std::size_t c = 1; c < 4; ++c) CHECK(p.explained_variance[c] <= p.explained_variance[c - 1]);
  CHECK(p.explained_variance[0] == doctest::Approx(top_variance(x)).epsilon(1e-6));
}

TEST_CASE("more dimensions than samples") {
  std::mt19937_64 rng(14);
  const auto x = random_matrix(rng, 8, 50);
  const auto p = fit_pca(x, 8);  // last axis has zero variance
  check_orthonormal(p);
  CHECK(p.output_dimension() == 8);
  CHECK(p.explained_variance[7] <= 1e-10);
}

TEST_CASE("fit is deterministic") {
  std::mt19937_64 rng(15);
  const auto x = random_matrix(rng, 30, 7);
  CHECK(fit_pca(x, 3) == fit_pca(x, 3));
}

TEST_CASE("PCA errors") {
  std::mt19937_64 rng(16);
  const auto x = random_matrix(rng, 5, 3);
  CHECK_THROWS_AS(fit_pca(x, 4), ConfigError);
  CHECK_THROWS_AS(fit_pca(x, 0), ConfigError);
  CHECK_THROWS_AS(fit_pca(Matrix(0, 3), 1), DataError);
  const auto p = fit_pca(x, 2);
  CHECK_THROWS_AS(apply_pca(p, std::vector<double>{1, 2}), DataError);
}

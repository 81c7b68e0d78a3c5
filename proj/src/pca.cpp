#include "vlawe/pca.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>

namespace vlawe {

PcaProjection fit_pca(const Matrix& samples, std::size_t m) {
  const std::size_t n = samples.rows();
  const std::size_t dim = samples.cols();
  if (n == 0 || dim == 0) throw DataError("PCA needs a non-empty sample matrix");
  if (m == 0 || m > std::min(n, dim)) {
    throw ConfigError("PCA target dimension " + std::to_string(m) + " must be in [1, " +
                      std::to_string(std::min(n, dim)) + "]");
  }
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMatrix> x(samples.data().data(), static_cast<Eigen::Index>(n),
                                static_cast<Eigen::Index>(dim));
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centred = x.rowwise() - mean;

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centred, Eigen::ComputeThinV);
  const Eigen::VectorXd& singular = svd.singularValues();
  const Eigen::MatrixXd& axes = svd.matrixV();  // dim x min(n, dim), columns sorted

  PcaProjection proj;
  proj.mean.assign(mean.data(), mean.data() + dim);
  proj.components = Matrix(m, dim);
  proj.explained_variance.resize(m);
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  for (std::size_t c = 0; c < m; ++c) {
    auto axis = axes.col(static_cast<Eigen::Index>(c));
    Eigen::Index pivot = 0;
    axis.cwiseAbs().maxCoeff(&pivot);
    const double sign = axis(pivot) < 0.0 ? -1.0 : 1.0;
    auto row = proj.components.row(c);
    for (std::size_t j = 0; j < dim; ++j) row[j] = sign * axis(static_cast<Eigen::Index>(j));
    const double s = singular(static_cast<Eigen::Index>(c));
    proj.explained_variance[c] = s * s / denom;
  }
  return proj;
}

Vector apply_pca(const PcaProjection& projection, std::span<const double> v) {
  const std::size_t dim = projection.input_dimension();
  if (v.size() != dim) {
    throw DataError("PCA input has dimension " + std::to_string(v.size()) + ", expected " +
                    std::to_string(dim));
  }
  Vector centred(dim);
  for (std::size_t j = 0; j < dim; ++j) centred[j] = v[j] - projection.mean[j];
  Vector out(projection.output_dimension());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = dot(projection.components.row(c), centred);
  return out;
}

}  // namespace vlawe

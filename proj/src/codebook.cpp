#include "vlawe/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_set>

namespace vlawe {

CodebookTrainingSet build_training_set(std::span<const ResolvedDocument> documents,
                                       DedupMode mode) {
  CodebookTrainingSet set;
  set.dedup_mode = mode;
  std::unordered_set<std::string> seen;
  for (const auto& doc : documents) {
    const auto& known = doc.document.known_tokens;
    if (!known) continue;
    for (std::size_t t = 0; t < known->size(); ++t) {
      if (mode == DedupMode::kUniqueTypes && !seen.insert((*known)[t]).second) continue;
      set.vectors.append_row(doc.vectors.row(t));
    }
  }
  return set;
}

std::size_t assign(std::span<const double> x, const Codebook& codebook) {
  if (x.size() != codebook.dimension()) {
    throw DataError("vector of dimension " + std::to_string(x.size()) +
                    " assigned against codebook of dimension " +
                    std::to_string(codebook.dimension()));
  }
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < codebook.k(); ++i) {
    const double d = squared_distance(x, codebook.centroids.row(i));
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  return best;
}

namespace {

struct Assignment {
  std::vector<std::size_t> cluster;
  std::vector<double> distance;  // squared distance to the assigned centroid
};

void assign_all(const Matrix& points, const Matrix& centroids, unsigned jobs, Assignment& out) {
  const std::size_t n = points.rows();
  out.cluster.resize(n);
  out.distance.resize(n);
  parallel_for(n, jobs, [&](std::size_t p) {
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < centroids.rows(); ++i) {
      const double d = squared_distance(points.row(p), centroids.row(i));
      if (d < best_dist) {
        best_dist = d;
        best = i;
      }
    }
    out.cluster[p] = best;
    out.distance[p] = best_dist;
  });
}

Matrix kmeanspp_init(const Matrix& points, std::size_t k, std::mt19937_64& rng) {
  const std::size_t n = points.rows();
  Matrix centroids(0, points.cols());
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::vector<bool> chosen(n, false);

  std::size_t next = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  for (std::size_t c = 0; c < k; ++c) {
    chosen[next] = true;
    centroids.append_row(points.row(next));
    if (c + 1 == k) break;
    double total = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      nearest[p] = std::min(nearest[p], squared_distance(points.row(p), points.row(next)));
      total += nearest[p];
    }
    if (total > 0.0) {
      const double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      double acc = 0.0;
      next = n;
      for (std::size_t p = 0; p < n; ++p) {
        if (nearest[p] <= 0.0) continue;
        acc += nearest[p];
        if (acc >= target) {
          next = p;
          break;
        }
      }
      if (next == n) {
        // Rounding left the target past the last positive weight.
        for (std::size_t p = n; p-- > 0;) {
          if (nearest[p] > 0.0) {
            next = p;
            break;
          }
        }
      }
    } else {
      // Every point coincides with a chosen centroid; take an unused index.
      std::vector<std::size_t> unused;
      for (std::size_t p = 0; p < n; ++p) {
        if (!chosen[p]) unused.push_back(p);
      }
      next = unused[std::uniform_int_distribution<std::size_t>(0, unused.size() - 1)(rng)];
    }
  }
  return centroids;
}

// Recomputes each centroid as the mean of its members, then repairs empty
// clusters by moving in the point farthest from its centroid.
void update_centroids(const Matrix& points, Assignment& assignment, Matrix& centroids) {
  const std::size_t k = centroids.rows();
  const std::size_t d = centroids.cols();
  std::vector<std::size_t> counts(k, 0);
  Matrix sums(k, d);
  for (std::size_t p = 0; p < points.rows(); ++p) {
    const std::size_t c = assignment.cluster[p];
    ++counts[c];
    auto row = points.row(p);
    auto sum = sums.row(c);
    for (std::size_t j = 0; j < d; ++j) sum[j] += row[j];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;
    auto centroid = centroids.row(c);
    auto sum = sums.row(c);
    for (std::size_t j = 0; j < d; ++j) centroid[j] = sum[j] / static_cast<double>(counts[c]);
  }
  for (std::size_t p = 0; p < points.rows(); ++p) {
    assignment.distance[p] = squared_distance(points.row(p), centroids.row(assignment.cluster[p]));
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] != 0) continue;
    std::size_t farthest = points.rows();
    double farthest_dist = -1.0;
    for (std::size_t p = 0; p < points.rows(); ++p) {
      if (counts[assignment.cluster[p]] > 1 && assignment.distance[p] > farthest_dist) {
        farthest_dist = assignment.distance[p];
        farthest = p;
      }
    }
    if (farthest == points.rows()) continue;  // n < k cannot happen past validation
    --counts[assignment.cluster[farthest]];
    assignment.cluster[farthest] = c;
    assignment.distance[farthest] = 0.0;
    counts[c] = 1;
    std::copy_n(points.row(farthest).begin(), d, centroids.row(c).begin());
  }
}

double total(const std::vector<double>& values) {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

}  // namespace

Codebook train_codebook(const CodebookTrainingSet& data, std::size_t k, const KMeansConfig& config,
                        std::vector<double>* inertia_trace) {
  const Matrix& points = data.vectors;
  if (k == 0) throw ConfigError("k must be positive");
  if (config.max_iters < 1) throw ConfigError("max_iters must be at least 1");
  if (!(config.rel_tolerance >= 0.0)) throw ConfigError("rel_tolerance must be non-negative");
  if (points.rows() < k) {
    throw DataError("k-means needs at least k=" + std::to_string(k) + " vectors, got " +
                    std::to_string(points.rows()));
  }
  for (double v : points.data()) {
    if (!std::isfinite(v)) throw DataError("k-means input contains a non-finite value");
  }

  std::mt19937_64 rng(config.seed);
  Codebook cb;
  cb.seed = config.seed;
  cb.centroids = kmeanspp_init(points, k, rng);

  Assignment assignment;
  std::vector<std::size_t> previous;
  double previous_inertia = std::numeric_limits<double>::infinity();
  if (inertia_trace) inertia_trace->clear();
  for (int iter = 1; iter <= config.max_iters; ++iter) {
    assign_all(points, cb.centroids, config.jobs, assignment);
    const bool unchanged = assignment.cluster == previous;
    previous = assignment.cluster;
    update_centroids(points, assignment, cb.centroids);
    const double inertia = total(assignment.distance);
    if (inertia_trace) inertia_trace->push_back(inertia);
    cb.inertia = inertia;
    cb.iterations_run = iter;
    if (unchanged || inertia == 0.0) break;
    if (std::isfinite(previous_inertia) &&
        previous_inertia - inertia <= config.rel_tolerance * previous_inertia) {
      break;
    }
    previous_inertia = inertia;
  }
  return cb;
}

namespace {
constexpr const char* kMagic = "VLAWE-CODEBOOK";
constexpr int kFormatVersion = 1;

template <typename T>
T read_field(std::istream& in, const std::string& name) {
  std::string key;
  T value{};
  if (!(in >> key) || key != name) throw DataError("codebook file: missing field '" + name + "'");
  if (!(in >> value)) throw DataError("codebook file: bad value for '" + name + "'");
  return value;
}
}  // namespace

void save_codebook(const Codebook& codebook, std::ostream& out) {
  out << kMagic << ' ' << kFormatVersion << '\n'
      << "k " << codebook.k() << '\n'
      << "d " << codebook.dimension() << '\n'
      << "seed " << codebook.seed << '\n'
      << "iterations " << codebook.iterations_run << '\n'
      << "inertia " << format_double(codebook.inertia) << '\n';
  for (std::size_t i = 0; i < codebook.k(); ++i) {
    auto row = codebook.centroids.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ' ';
      out << format_double(row[j]);
    }
    out << '\n';
  }
}

void save_codebook(const Codebook& codebook, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write codebook file " + path.string());
  save_codebook(codebook, out);
  if (!out) throw DataError("error writing codebook file " + path.string());
}

Codebook load_codebook(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kMagic) throw DataError("not a codebook file");
  if (version != kFormatVersion) {
    throw DataError("unsupported codebook format version " + std::to_string(version));
  }
  const auto k = read_field<std::size_t>(in, "k");
  const auto d = read_field<std::size_t>(in, "d");
  Codebook cb;
  cb.seed = read_field<std::uint64_t>(in, "seed");
  cb.iterations_run = read_field<int>(in, "iterations");
  cb.inertia = parse_double(read_field<std::string>(in, "inertia"));
  if (k == 0 || d == 0) throw DataError("codebook file: k and d must be positive");
  cb.centroids = Matrix(k, d);
  std::string token;
  std::size_t read = 0;
  for (; read < k * d && (in >> token); ++read) {
    const double v = parse_double(token);
    if (!std::isfinite(v)) throw DataError("codebook file: non-finite centroid value");
    cb.centroids.data()[read] = v;
  }
  if (read != k * d) {
    throw DataError("codebook file truncated: expected " + std::to_string(k * d) +
                    " centroid values, found " + std::to_string(read));
  }
  if (in >> token) throw DataError("codebook file: trailing data after centroid matrix");
  return cb;
}

Codebook load_codebook(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open codebook file " + path.string());
  return load_codebook(in);
}

}  // namespace vlawe

#include "videodna/vocab.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

namespace videodna {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd to_matrix(const std::vector<std::vector<float>>& rows) {
  if (rows.empty()) fail(Errc::empty_input, "no descriptors");
  const std::size_t dim = rows.front().size();
  MatrixXd m(rows.size(), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim) fail(Errc::dimension_mismatch, "ragged descriptor set");
    for (std::size_t j = 0; j < dim; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

// Assignment step: nearest centroid per point (ties to the lowest index)
// plus squared distances, via the expanded-form product.
struct AssignResult {
  std::vector<uint32_t> assign;
  VectorXd dist2;
  double objective = 0.0;
};

AssignResult assign_points(const MatrixXd& points, const MatrixXd& centroids) {
  const auto n = points.rows();
  const auto k = centroids.rows();
  const VectorXd p2 = points.rowwise().squaredNorm();
  const VectorXd c2 = centroids.rowwise().squaredNorm();
  const MatrixXd g = points * centroids.transpose();

  AssignResult r;
  r.assign.resize(std::size_t(n));
  r.dist2.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    uint32_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < k; ++c) {
      const double d = p2(i) + c2(c) - 2.0 * g(i, c);
      if (d < best_d) {
        best_d = d;
        best = uint32_t(c);
      }
    }
    r.assign[std::size_t(i)] = best;
    r.dist2(i) = std::max(0.0, best_d);
    r.objective += r.dist2(i);
  }
  return r;
}

// Distance-squared weighted probabilistic seeding.
MatrixXd seed_centroids(const MatrixXd& points, uint32_t k, std::mt19937_64& rng) {
  const auto n = points.rows();
  MatrixXd centroids(k, points.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centroids.row(0) = points.row(first(rng));

  VectorXd dist2 = (points.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (uint32_t c = 1; c < k; ++c) {
    const double total = dist2.sum();
    Eigen::Index pick = -1;
    if (total > 0.0) {
      double target = unit(rng) * total;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= dist2(i);
        if (target <= 0.0) {
          pick = i;
          break;
        }
      }
      if (pick < 0) pick = n - 1;
    } else {
      // remaining points all coincide with chosen centroids; take the first
      // point distinct from every centroid so far
      for (Eigen::Index i = 0; i < n && pick < 0; ++i) {
        bool dup = false;
        for (uint32_t c0 = 0; c0 < c && !dup; ++c0)
          dup = (points.row(i) - centroids.row(c0)).squaredNorm() == 0.0;
        if (!dup) pick = i;
      }
      if (pick < 0) fail(Errc::k_too_large, "k exceeds the number of distinct descriptors");
    }
    centroids.row(c) = points.row(pick);
    dist2 = dist2.cwiseMin((points.rowwise() - centroids.row(c)).rowwise().squaredNorm());
  }
  return centroids;
}

}  // namespace

Vocabulary train_vocabulary(const std::vector<std::vector<float>>& descriptors, uint32_t k,
                            uint64_t seed, uint32_t max_iters, DescriptorKind kind,
                            std::vector<double>* objective_trace) {
  if (descriptors.empty()) fail(Errc::empty_input, "no descriptors to cluster");
  if (k < 1) fail(Errc::k_too_large, "k must be at least 1");

  const MatrixXd points = to_matrix(descriptors);
  {
    std::set<std::vector<float>> distinct(descriptors.begin(), descriptors.end());
    if (k > distinct.size())
      fail(Errc::k_too_large, "k exceeds the number of distinct descriptors");
  }

  std::mt19937_64 rng(seed);
  MatrixXd centroids = seed_centroids(points, k, rng);

  AssignResult cur = assign_points(points, centroids);
  if (objective_trace) {
    objective_trace->clear();
    objective_trace->push_back(cur.objective);
  }

  for (uint32_t iter = 0; iter < max_iters; ++iter) {
    // means of each cluster
    MatrixXd sums = MatrixXd::Zero(k, points.cols());
    std::vector<std::size_t> counts(k, 0);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      sums.row(cur.assign[std::size_t(i)]) += points.row(i);
      counts[cur.assign[std::size_t(i)]]++;
    }
    for (uint32_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centroids.row(c) = sums.row(c) / double(counts[c]);
      } else {
        // re-seed an empty cluster to the point farthest from its centroid
        Eigen::Index far = 0;
        double far_d = -1.0;
        for (Eigen::Index i = 0; i < points.rows(); ++i) {
          const double d = (points.row(i) - centroids.row(c)).squaredNorm();
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        centroids.row(c) = points.row(far);
      }
    }

    AssignResult next = assign_points(points, centroids);
    if (objective_trace) objective_trace->push_back(next.objective);
    const bool stable = next.assign == cur.assign;
    cur = std::move(next);
    if (stable) break;
  }

  Vocabulary vocab;
  vocab.kind = kind;
  vocab.k = k;
  vocab.dim = uint32_t(points.cols());
  vocab.centroids.resize(std::size_t(k) * vocab.dim);
  for (uint32_t c = 0; c < k; ++c)
    for (uint32_t j = 0; j < vocab.dim; ++j)
      vocab.centroids[std::size_t(c) * vocab.dim + j] = float(centroids(c, j));
  return vocab;
}

uint32_t quantize(std::span<const float> descriptor, const Vocabulary& vocab) {
  if (descriptor.size() != vocab.dim)
    fail(Errc::dimension_mismatch, "descriptor dimension does not match vocabulary");
  uint32_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (uint32_t c = 0; c < vocab.k; ++c) {
    const float* row = vocab.centroids.data() + std::size_t(c) * vocab.dim;
    double d = 0.0;
    for (uint32_t j = 0; j < vocab.dim; ++j) {
      const double diff = double(descriptor[j]) - double(row[j]);
      d += diff * diff;
    }
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

IdfWeights compute_idf(const std::vector<std::vector<float>>& bags) {
  if (bags.empty()) fail(Errc::empty_input, "no bags for idf");
  const std::size_t d = bags.front().size();
  std::vector<uint64_t> df(d, 0);
  for (const auto& bag : bags) {
    if (bag.size() != d) fail(Errc::dimension_mismatch, "ragged bag set");
    for (std::size_t i = 0; i < d; ++i)
      if (bag[i] > 0.0f) df[i]++;
  }
  IdfWeights idf;
  idf.corpus_size = bags.size();
  idf.weights.resize(d);
  for (std::size_t i = 0; i < d; ++i)
    idf.weights[i] = float(std::log(double(1 + bags.size()) / double(1 + df[i])) + 1.0);
  return idf;
}

}  // namespace videodna

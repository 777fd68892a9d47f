#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "videodna/types.hpp"
#include "videodna/vocab.hpp"

namespace videodna {

// Learned binary embedding: code bit i is sign(projection.row(i) * x +
// offset(i)), with sign(0) = +1. Rows are unit norm. threshold is the
// Hamming decision threshold separating matching from non-matching codes.
struct MetricModel {
  Eigen::MatrixXf projection;  // n x d
  Eigen::VectorXf offset;      // n
  double threshold = 0.0;

  uint32_t bits() const { return uint32_t(projection.rows()); }
  uint32_t dim() const { return uint32_t(projection.cols()); }
};

using TrainingSet = PairSet;

struct TrainConfig {
  uint32_t bits = 64;            // n
  double threshold = -1.0;       // d0 stored on the model; < 0 means bits / 2
  uint32_t subspace_size = 10;
  double regularization = 1e-6;  // epsilon, relative to trace(C) / d
  uint64_t seed = 0;
};

struct PairWeights {
  std::vector<double> positives;
  std::vector<double> negatives;
};

Bitcode project(std::span<const float> x, const MetricModel& model);
Bitcode project(const VisualNucleotide& x, const MetricModel& model);

// Number of differing bits; equals popcount of the xor of the packed codes.
uint32_t hamming(const Bitcode& u, const Bitcode& v);

// sqrt(sum_i w_i^2 (x_i - y_i)^2)
double tfidf_distance(std::span<const float> x, std::span<const float> y, const IdfWeights& idf);
double tfidf_distance(const VisualNucleotide& x, const VisualNucleotide& y, const IdfWeights& idf);

// Cross-talk loss of the model's Hamming distances at its threshold:
// mean over positives of exp(sign(d - d0)) plus mean over negatives of
// exp(sign(d0 - d)). Optional weights multiply per-pair terms before the
// per-set normalization; uniform weights of 1 reproduce the plain loss.
double exp_loss(const MetricModel& model, const TrainingSet& pairs,
                const PairWeights* weights = nullptr);

struct WeakLearnerResult {
  Eigen::VectorXd direction;  // unit Euclidean norm
  double offset = 0.0;
  double exp_loss = 0.0;        // weighted 1-bit exponential loss at the split
  double weighted_error = 0.0;  // weighted fraction of misclassified pairs
  std::vector<Eigen::VectorXd> candidates;  // eigenvector directions examined
};

// One boosting round: builds weighted covariances of pair differences for
// both sets, solves the generalized symmetric eigenproblem
// C_neg v = lambda C_pos v, and picks the direction among the top
// subspace_size eigenvectors plus the split offset minimizing the weighted
// exponential loss of the 1-bit pair classifier. Offsets are searched over
// midpoints of consecutive sorted projections plus below-min / above-max
// sentinels.
WeakLearnerResult weak_learner(const TrainingSet& pairs, const PairWeights& weights,
                               const TrainConfig& config);

struct TrainDiagnostics {
  std::vector<double> round_exp_loss;  // boosted-margin exponential loss after each round
  std::vector<double> round_weighted_error;
  uint32_t requested_bits = 0;  // bits asked for; fewer installed on early stop
};

// AdaBoost over 1-bit pair classifiers. A round whose weighted error
// reaches 0.5 stops training early and truncates the model.
MetricModel train_metric(const TrainingSet& pairs, const TrainConfig& config,
                         TrainDiagnostics* diagnostics = nullptr);

// Fills dna.bitcodes by projecting every nucleotide.
void encode_sequence(VideoDna& dna, const MetricModel& model);

// Operating point where false-positive and false-negative rates meet, for
// distances of positive pairs (should be small) and negative pairs (should
// be large). Optionally reports the distance threshold achieving it.
double equal_error_rate(std::vector<double> positive_distances,
                        std::vector<double> negative_distances,
                        double* threshold_out = nullptr);

}  // namespace videodna

#include "videodna/metric.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <random>
#include <limits>
#include <numeric>

namespace videodna {

namespace {

using Eigen::MatrixXd;
using Eigen::MatrixXf;
using Eigen::VectorXd;
using Eigen::VectorXf;

const double kLossGood = std::exp(-1.0);
const double kLossBad = std::exp(1.0);

double sign_of(double v) { return v >= 0.0 ? 1.0 : -1.0; }

void check_pair_dims(const TrainingSet& pairs, Eigen::Index d) {
  for (const auto* set : {&pairs.positives, &pairs.negatives})
    for (const auto& [a, b] : *set)
      if (Eigen::Index(a.values.size()) != d || Eigen::Index(b.values.size()) != d)
        fail(Errc::dimension_mismatch, "training pair dimension mismatch");
}

// Matrices rebuilt once per training run: row-per-pair differences and
// row-per-element values (element 2p and 2p+1 belong to pair p).
struct PairMatrices {
  MatrixXf pos_diff, neg_diff;
  MatrixXf pos_elems, neg_elems;
  Eigen::Index dim = 0;
};

PairMatrices build_pair_matrices(const TrainingSet& pairs) {
  if (pairs.positives.empty() || pairs.negatives.empty())
    fail(Errc::empty_input, "both pair sets must be non-empty");
  PairMatrices m;
  m.dim = Eigen::Index(pairs.positives.front().first.values.size());
  check_pair_dims(pairs, m.dim);

  auto fill = [&](const std::vector<NucleotidePair>& set, MatrixXf& diff, MatrixXf& elems) {
    diff.resize(Eigen::Index(set.size()), m.dim);
    elems.resize(Eigen::Index(2 * set.size()), m.dim);
    for (Eigen::Index p = 0; p < Eigen::Index(set.size()); ++p) {
      const auto& [a, b] = set[std::size_t(p)];
      for (Eigen::Index j = 0; j < m.dim; ++j) {
        elems(2 * p, j) = a.values[std::size_t(j)];
        elems(2 * p + 1, j) = b.values[std::size_t(j)];
        diff(p, j) = a.values[std::size_t(j)] - b.values[std::size_t(j)];
      }
    }
  };
  fill(pairs.positives, m.pos_diff, m.pos_elems);
  fill(pairs.negatives, m.neg_diff, m.neg_elems);
  return m;
}

MatrixXd weighted_covariance(const MatrixXf& diffs, const std::vector<double>& w) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  VectorXf scale(diffs.rows());
  for (Eigen::Index i = 0; i < diffs.rows(); ++i) {
    const double wi = w[std::size_t(i)];
    if (wi < 0.0) fail(Errc::bad_format, "pair weights must be non-negative");
    scale(i) = float(std::sqrt(total > 0.0 ? wi / total : 0.0));
  }
  const MatrixXf scaled = scale.asDiagonal() * diffs;
  MatrixXf cov(diffs.cols(), diffs.cols());
  cov.setZero();
  cov.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
  MatrixXd out = cov.cast<double>();
  out.triangularView<Eigen::StrictlyUpper>() = out.transpose();
  return out;
}

void regularize(MatrixXd& cov, double epsilon_scale) {
  const double d = double(cov.rows());
  const double eps = std::max(epsilon_scale * cov.trace() / d, 1e-12);
  cov.diagonal().array() += eps;
}

struct SweepResult {
  double offset = 0.0;
  double loss = std::numeric_limits<double>::infinity();
  double error = 0.0;
};

// Finds the split threshold minimizing the weighted exponential loss of the
// 1-bit pair classifier, scanning midpoints of consecutive sorted element
// projections plus all-on-one-side sentinels. proj holds positive-pair
// elements first (2 per pair), then negative-pair elements.
SweepResult sweep_offsets(const std::vector<double>& proj, const std::vector<double>& wp,
                          const std::vector<double>& wn,
                          std::vector<int8_t>* outputs_at_best = nullptr) {
  const std::size_t np = wp.size(), nn = wn.size();
  const std::size_t n_elems = 2 * (np + nn);

  std::vector<uint32_t> order(n_elems);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](uint32_t a, uint32_t b) { return proj[a] < proj[b]; });

  const double wp_total = std::accumulate(wp.begin(), wp.end(), 0.0);
  const double wn_total = std::accumulate(wn.begin(), wn.end(), 0.0);
  const double w_total = wp_total + wn_total;

  // element below the threshold count per pair; pair is same-side at 0 or 2
  std::vector<uint8_t> below(np + nn, 0);
  double pos_same = wp_total, neg_same = wn_total;
  auto loss_now = [&] {
    return kLossGood * (pos_same + (wn_total - neg_same)) +
           kLossBad * ((wp_total - pos_same) + neg_same);
  };
  auto error_now = [&] {
    const double wrong = (wp_total - pos_same) + neg_same;
    return w_total > 0.0 ? wrong / w_total : 0.0;
  };

  SweepResult best;
  // sentinel below the minimum: every element on the + side
  const double vmin = proj[order.front()], vmax = proj[order.back()];
  best.offset = -(vmin - 1.0);
  best.loss = loss_now();
  best.error = error_now();
  if (outputs_at_best) outputs_at_best->assign(np + nn, +1);

  std::vector<int8_t> outputs;
  if (outputs_at_best) outputs.assign(np + nn, +1);

  std::size_t at = 0;
  while (at < n_elems) {
    const double v = proj[order[at]];
    // move every element with this projection below the threshold
    while (at < n_elems && proj[order[at]] == v) {
      const uint32_t e = order[at];
      const std::size_t pair = e / 2;
      const bool was_same = (below[pair] == 0 || below[pair] == 2);
      below[pair]++;
      const bool is_same = (below[pair] == 0 || below[pair] == 2);
      if (was_same != is_same) {
        const bool positive = pair < np;
        const double w = positive ? wp[pair] : wn[pair - np];
        if (positive)
          pos_same += is_same ? w : -w;
        else
          neg_same += is_same ? w : -w;
        if (outputs_at_best) outputs[pair] = is_same ? +1 : -1;
      }
      ++at;
    }
    const double threshold = at < n_elems ? 0.5 * (v + proj[order[at]]) : vmax + 1.0;
    const double loss = loss_now();
    if (loss < best.loss) {
      best.loss = loss;
      best.offset = -threshold;
      best.error = error_now();
      if (outputs_at_best) *outputs_at_best = outputs;
    }
  }
  return best;
}

struct RoundResult {
  VectorXd direction;
  double offset = 0.0;
  double loss = 0.0;
  double error = 0.0;
  std::vector<int8_t> pair_outputs;  // +1 same side, -1 split
  std::vector<VectorXd> candidates;
};

RoundResult run_weak_learner(const PairMatrices& m, const PairWeights& weights,
                             const TrainConfig& config) {
  if (weights.positives.size() != std::size_t(m.pos_diff.rows()) ||
      weights.negatives.size() != std::size_t(m.neg_diff.rows()))
    fail(Errc::length_mismatch, "pair weights do not align with pairs");

  MatrixXd cov_pos = weighted_covariance(m.pos_diff, weights.positives);
  MatrixXd cov_neg = weighted_covariance(m.neg_diff, weights.negatives);
  regularize(cov_pos, config.regularization);
  regularize(cov_neg, config.regularization);

  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> solver(cov_neg, cov_pos);
  if (solver.info() != Eigen::Success)
    fail(Errc::singular_covariance, "positive-pair covariance is not positive definite");

  const Eigen::Index subspace =
      std::min<Eigen::Index>(Eigen::Index(std::max(1u, config.subspace_size)), m.dim);

  RoundResult best;
  best.loss = std::numeric_limits<double>::infinity();
  std::vector<double> proj(std::size_t(2 * (m.pos_diff.rows() + m.neg_diff.rows())));
  for (Eigen::Index c = 0; c < subspace; ++c) {
    VectorXd dir = solver.eigenvectors().col(m.dim - 1 - c);  // eigenvalues ascend
    const double norm = dir.norm();
    if (!(norm > 0.0)) continue;
    dir /= norm;
    best.candidates.push_back(dir);

    const VectorXf dir_f = dir.cast<float>();
    const VectorXf proj_pos = m.pos_elems * dir_f;
    const VectorXf proj_neg = m.neg_elems * dir_f;
    for (Eigen::Index i = 0; i < proj_pos.size(); ++i) proj[std::size_t(i)] = proj_pos(i);
    for (Eigen::Index i = 0; i < proj_neg.size(); ++i)
      proj[std::size_t(proj_pos.size() + i)] = proj_neg(i);

    std::vector<int8_t> outputs;
    const SweepResult sweep = sweep_offsets(proj, weights.positives, weights.negatives, &outputs);
    if (sweep.loss < best.loss) {
      best.direction = dir;
      best.offset = sweep.offset;
      best.loss = sweep.loss;
      best.error = sweep.error;
      best.pair_outputs = std::move(outputs);
    }
  }
  if (best.candidates.empty())
    fail(Errc::weak_learner_failure, "no usable eigen direction");
  return best;
}

}  // namespace

Bitcode project(std::span<const float> x, const MetricModel& model) {
  if (x.size() != model.dim()) fail(Errc::dimension_mismatch, "nucleotide dimension != model");
  const Eigen::Map<const VectorXf> xv(x.data(), Eigen::Index(x.size()));
  const VectorXf activations = model.projection * xv + model.offset;
  const uint32_t n = model.bits();
  Bitcode code(n);
  for (uint32_t i = 0; i < n; ++i) code.set(i, activations(Eigen::Index(i)) >= 0.0f);
  return code;
}

Bitcode project(const VisualNucleotide& x, const MetricModel& model) {
  return project(std::span<const float>(x.values), model);
}

uint32_t hamming(const Bitcode& u, const Bitcode& v) {
  if (u.size() != v.size()) fail(Errc::length_mismatch, "bitcode lengths differ");
  const auto& a = u.bytes();
  const auto& b = v.bytes();
  uint32_t count = 0;
  std::size_t i = 0;
  for (; i + 8 <= a.size(); i += 8) {
    uint64_t wa, wb;
    std::memcpy(&wa, a.data() + i, 8);
    std::memcpy(&wb, b.data() + i, 8);
    count += uint32_t(std::popcount(wa ^ wb));
  }
  for (; i < a.size(); ++i) count += uint32_t(std::popcount(uint32_t(a[i] ^ b[i])));
  return count;
}

double tfidf_distance(std::span<const float> x, std::span<const float> y, const IdfWeights& idf) {
  if (x.size() != y.size() || x.size() != idf.weights.size())
    fail(Errc::dimension_mismatch, "tfidf operand dimensions differ");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = idf.weights[i];
    const double diff = double(x[i]) - double(y[i]);
    acc += w * w * diff * diff;
  }
  return std::sqrt(acc);
}

double tfidf_distance(const VisualNucleotide& x, const VisualNucleotide& y,
                      const IdfWeights& idf) {
  return tfidf_distance(std::span<const float>(x.values), std::span<const float>(y.values), idf);
}

double exp_loss(const MetricModel& model, const TrainingSet& pairs, const PairWeights* weights) {
  if (pairs.positives.empty() || pairs.negatives.empty())
    fail(Errc::empty_input, "both pair sets must be non-empty");
  if (weights && (weights->positives.size() != pairs.positives.size() ||
                  weights->negatives.size() != pairs.negatives.size()))
    fail(Errc::length_mismatch, "pair weights do not align with pairs");

  double pos_term = 0.0, neg_term = 0.0;
  for (std::size_t p = 0; p < pairs.positives.size(); ++p) {
    const auto& [a, b] = pairs.positives[p];
    const double d = hamming(project(a, model), project(b, model));
    const double w = weights ? weights->positives[p] : 1.0;
    pos_term += w * std::exp(sign_of(d - model.threshold));
  }
  for (std::size_t p = 0; p < pairs.negatives.size(); ++p) {
    const auto& [a, b] = pairs.negatives[p];
    const double d = hamming(project(a, model), project(b, model));
    const double w = weights ? weights->negatives[p] : 1.0;
    neg_term += w * std::exp(sign_of(model.threshold - d));
  }
  return pos_term / double(pairs.positives.size()) + neg_term / double(pairs.negatives.size());
}

WeakLearnerResult weak_learner(const TrainingSet& pairs, const PairWeights& weights,
                               const TrainConfig& config) {
  const PairMatrices m = build_pair_matrices(pairs);
  RoundResult r = run_weak_learner(m, weights, config);
  WeakLearnerResult out;
  out.direction = std::move(r.direction);
  out.offset = r.offset;
  out.exp_loss = r.loss;
  out.weighted_error = r.error;
  out.candidates = std::move(r.candidates);
  return out;
}

MetricModel train_metric(const TrainingSet& pairs, const TrainConfig& config,
                         TrainDiagnostics* diagnostics) {
  if (config.bits < 1) fail(Errc::bad_format, "bit count must be at least 1");
  const PairMatrices m = build_pair_matrices(pairs);
  const std::size_t np = pairs.positives.size(), nn = pairs.negatives.size();

  // Pure AdaBoost over 1-bit pair classifiers saturates once the running
  // weights reach the equilibrium of the weighted game (no hyperplane splits
  // more than half the reweighted negatives), which starves later rounds and
  // would repeat one bit forever. The round weights therefore mix the
  // AdaBoost weights with a per-round bootstrap jitter of the balanced
  // start, and alpha is capped by the bit's error under the pure weights so
  // the boosted-margin loss stays non-increasing.
  constexpr double kExploreMix = 0.5;

  // balanced start: each set carries half the mass
  PairWeights base;
  base.positives.assign(np, 0.5 / double(np));
  base.negatives.assign(nn, 0.5 / double(nn));
  PairWeights ada = base;  // pure AdaBoost running weights

  MetricModel model;
  model.projection.resize(config.bits, m.dim);
  model.offset.resize(config.bits);

  if (diagnostics) {
    diagnostics->round_exp_loss.clear();
    diagnostics->round_weighted_error.clear();
    diagnostics->requested_bits = config.bits;
  }

  std::vector<double> margin_pos(np, 0.0), margin_neg(nn, 0.0);
  PairWeights round_weights;
  round_weights.positives.resize(np);
  round_weights.negatives.resize(nn);
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  uint32_t installed = 0;
  for (uint32_t round = 0; round < config.bits; ++round) {
    // Bayesian-bootstrap jitter of the balanced weights, renormalized per
    // set so each class keeps half the exploration mass
    auto jitter = [&](const std::vector<double>& base_set, std::vector<double>& out) {
      out.resize(base_set.size());
      double total = 0.0;
      for (std::size_t p = 0; p < base_set.size(); ++p) {
        out[p] = base_set[p] * -std::log(1.0 - unit(rng) * (1.0 - 1e-15));
        total += out[p];
      }
      for (double& v : out) v *= 0.5 / total;
    };
    std::vector<double> explore_pos, explore_neg;
    jitter(base.positives, explore_pos);
    jitter(base.negatives, explore_neg);
    for (std::size_t p = 0; p < np; ++p)
      round_weights.positives[p] =
          (1.0 - kExploreMix) * ada.positives[p] + kExploreMix * explore_pos[p];
    for (std::size_t p = 0; p < nn; ++p)
      round_weights.negatives[p] =
          (1.0 - kExploreMix) * ada.negatives[p] + kExploreMix * explore_neg[p];

    RoundResult r = run_weak_learner(m, round_weights, config);
    if (r.error >= 0.5) break;  // cannot beat chance; stop and truncate

    model.projection.row(installed) = r.direction.cast<float>().transpose();
    model.offset(installed) = float(r.offset);
    ++installed;

    // error under the pure AdaBoost weights governs the margin-loss bound
    double ada_error = 0.0;
    for (std::size_t p = 0; p < np; ++p)
      if (r.pair_outputs[p] < 0) ada_error += ada.positives[p];
    for (std::size_t p = 0; p < nn; ++p)
      if (r.pair_outputs[np + p] > 0) ada_error += ada.negatives[p];

    const double limiting = std::max(r.error, ada_error);
    double alpha = 0.0;
    if (limiting < 0.5) {
      const double err = std::clamp(limiting, 1e-3, 0.5 - 1e-12);
      alpha = 0.5 * std::log((1.0 - err) / err);
    }

    if (alpha > 0.0) {
      // standard reweighting: y=+1 for positives, -1 for negatives; the weak
      // output is +1 when the pair lands on one side
      double total = 0.0;
      for (std::size_t p = 0; p < np; ++p) {
        margin_pos[p] += alpha * r.pair_outputs[p];
        ada.positives[p] *= std::exp(-alpha * double(r.pair_outputs[p]));
        total += ada.positives[p];
      }
      for (std::size_t p = 0; p < nn; ++p) {
        margin_neg[p] += alpha * double(r.pair_outputs[np + p]);
        ada.negatives[p] *= std::exp(alpha * double(r.pair_outputs[np + p]));  // y = -1
        total += ada.negatives[p];
      }
      for (double& v : ada.positives) v /= total;
      for (double& v : ada.negatives) v /= total;
    }

    if (diagnostics) {
      double loss = 0.0;
      for (std::size_t p = 0; p < np; ++p) loss += base.positives[p] * std::exp(-margin_pos[p]);
      for (std::size_t p = 0; p < nn; ++p) loss += base.negatives[p] * std::exp(margin_neg[p]);
      diagnostics->round_exp_loss.push_back(loss);
      diagnostics->round_weighted_error.push_back(r.error);
    }
  }

  if (installed == 0) fail(Errc::weak_learner_failure, "first boosting round cannot beat chance");
  model.projection.conservativeResize(installed, m.dim);
  model.offset.conservativeResize(installed);
  model.threshold = config.threshold >= 0.0 ? config.threshold : double(installed) / 2.0;
  return model;
}

void encode_sequence(VideoDna& dna, const MetricModel& model) {
  dna.bitcodes.clear();
  dna.bitcodes.reserve(dna.size());
  for (const auto& nucleotide : dna.nucleotides) dna.bitcodes.push_back(project(nucleotide, model));
}

double equal_error_rate(std::vector<double> positive_distances,
                        std::vector<double> negative_distances, double* threshold_out) {
  if (positive_distances.empty() || negative_distances.empty())
    fail(Errc::empty_input, "EER needs both distance sets");
  std::sort(positive_distances.begin(), positive_distances.end());
  std::sort(negative_distances.begin(), negative_distances.end());

  std::vector<double> candidates;
  candidates.reserve(positive_distances.size() + negative_distances.size() + 1);
  candidates.push_back(-std::numeric_limits<double>::infinity());
  candidates.insert(candidates.end(), positive_distances.begin(), positive_distances.end());
  candidates.insert(candidates.end(), negative_distances.begin(), negative_distances.end());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  double best_gap = std::numeric_limits<double>::infinity();
  double best_eer = 1.0, best_threshold = 0.0;
  for (const double t : candidates) {
    // match declared when distance <= t
    const auto fn = positive_distances.end() -
                    std::upper_bound(positive_distances.begin(), positive_distances.end(), t);
    const auto fp =
        std::upper_bound(negative_distances.begin(), negative_distances.end(), t) -
        negative_distances.begin();
    const double fnr = double(fn) / double(positive_distances.size());
    const double fpr = double(fp) / double(negative_distances.size());
    const double gap = std::abs(fnr - fpr);
    if (gap < best_gap) {
      best_gap = gap;
      best_eer = 0.5 * (fnr + fpr);
      best_threshold = t;
    }
  }
  if (threshold_out) *threshold_out = best_threshold;
  return best_eer;
}

}  // namespace videodna

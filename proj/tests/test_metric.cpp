#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "videodna/metric.hpp"
#include "videodna/mutate.hpp"

using namespace videodna;
using namespace videodna::testsupport;

namespace {

uint32_t hamming_oracle(const Bitcode& u, const Bitcode& v) {
  uint32_t count = 0;
  for (uint32_t i = 0; i < u.size(); ++i) count += u.get(i) != v.get(i);
  return count;
}

MetricModel identity_model(uint32_t n) {
  MetricModel m;
  m.projection = Eigen::MatrixXf::Identity(n, n);
  m.offset = Eigen::VectorXf::Zero(n);
  m.threshold = n / 2.0;
  return m;
}

VisualNucleotide nucleotide(std::vector<float> values) {
  VisualNucleotide nt;
  nt.values = std::move(values);
  return nt;
}

}  // namespace

TEST_CASE("hamming distance basics") {
  std::mt19937_64 rng(1);
  const Bitcode u = random_bitcode(64, rng);
  CHECK(hamming(u, u) == 0);

  Bitcode v(64);
  for (uint32_t i = 0; i < 64; ++i) v.set(i, !u.get(i));
  CHECK(hamming(u, v) == 64);

  Bitcode a(4), b(4);
  a.set(0, true);
  a.set(1, false);
  a.set(2, true);
  a.set(3, false);
  b.set(0, false);
  b.set(1, false);
  b.set(2, true);
  b.set(3, true);
  CHECK(hamming(a, b) == 2);

  Bitcode short_code(32);
  CHECK_THROWS_AS((void)hamming(u, short_code), Error);
}

TEST_CASE("hamming equals the bit-loop oracle and satisfies the metric axioms") {
  std::mt19937_64 rng(2);
  for (int it = 0; it < 2000; ++it) {
    const Bitcode a = random_bitcode(64, rng);
    const Bitcode b = random_bitcode(64, rng);
    const Bitcode c = random_bitcode(64, rng);
    const uint32_t ab = hamming(a, b);
    CHECK(ab == hamming_oracle(a, b));
    CHECK(ab == hamming(b, a));
    CHECK(hamming(a, a) == 0);
    CHECK(ab <= hamming(a, c) + hamming(c, b));
  }
}

TEST_CASE("hamming agrees with the sign-sum form") {
  // n/2 - sum(sign(xi * yi)) / 2 over the +-1 encoding
  std::mt19937_64 rng(3);
  for (int it = 0; it < 500; ++it) {
    const Bitcode a = random_bitcode(64, rng);
    const Bitcode b = random_bitcode(64, rng);
    int sum = 0;
    for (uint32_t i = 0; i < 64; ++i) {
      const int xa = a.get(i) ? 1 : -1;
      const int xb = b.get(i) ? 1 : -1;
      sum += xa * xb;
    }
    CHECK(double(hamming(a, b)) == 32.0 - 0.5 * double(sum));
  }
}

TEST_CASE("projection sign conventions") {
  const MetricModel m = identity_model(4);
  const Bitcode all_plus = project(nucleotide({0.5f, 1.0f, 2.0f, 3.0f}), m);
  for (uint32_t i = 0; i < 4; ++i) CHECK(all_plus.get(i));

  // activation exactly zero resolves to +1
  MetricModel shifted = identity_model(4);
  shifted.offset(1) = -2.0f;
  const Bitcode zero_bit = project(nucleotide({1.0f, 2.0f, -1.0f, 1.0f}), shifted);
  CHECK(zero_bit.get(1));
  CHECK_FALSE(zero_bit.get(2));

  CHECK_THROWS_AS((void)project(nucleotide({1.0f}), m), Error);
}

TEST_CASE("bitcodes render as hex with bit 0 in the most significant position") {
  std::mt19937_64 rng(4);
  const Bitcode code = random_bitcode(64, rng);
  const std::string hex = code.to_hex();
  CHECK(hex.size() == 16);
  CHECK(Bitcode::from_hex(hex, 64) == code);

  const Bitcode parsed = Bitcode::from_hex("223E9DF01ADB3E00", 64);
  CHECK(parsed.to_hex() == "223E9DF01ADB3E00");
  CHECK_FALSE(parsed.get(0));  // 0x2 = 0010
  CHECK_FALSE(parsed.get(1));
  CHECK(parsed.get(2));
  CHECK_FALSE(parsed.get(3));

  Bitcode leading(8);
  leading.set(0, true);
  CHECK(leading.to_hex() == "80");
}

TEST_CASE("bitcodes are invariant to positive row rescaling") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<float> value(-1.0f, 1.0f);
  for (int it = 0; it < 50; ++it) {
    MetricModel m;
    m.projection = Eigen::MatrixXf::NullaryExpr(8, 16, [&] { return value(rng); });
    m.offset = Eigen::VectorXf::NullaryExpr(8, [&] { return value(rng); });
    MetricModel scaled = m;
    scaled.projection.row(3) *= 7.5f;
    scaled.offset(3) *= 7.5f;

    std::vector<float> x(16);
    for (float& v : x) v = value(rng);
    CHECK(project(std::span<const float>(x), m) == project(std::span<const float>(x), scaled));
  }
}

TEST_CASE("tfidf distance formula") {
  IdfWeights ones;
  ones.weights = {1.0f, 1.0f};
  ones.corpus_size = 1;
  CHECK(tfidf_distance(nucleotide({1.0f, 2.0f}), nucleotide({1.0f, 2.0f}), ones) == 0.0);
  CHECK(tfidf_distance(nucleotide({1.0f, 0.0f}), nucleotide({0.0f, 1.0f}), ones) ==
        doctest::Approx(std::sqrt(2.0)));

  IdfWeights w;
  w.weights = {2.0f, 1.0f};
  w.corpus_size = 1;
  CHECK(tfidf_distance(nucleotide({1.0f, 0.0f}), nucleotide({0.0f, 1.0f}), w) ==
        doctest::Approx(std::sqrt(5.0)));
  CHECK_THROWS_AS((void)tfidf_distance(nucleotide({1.0f}), nucleotide({1.0f, 2.0f}), w), Error);
}

TEST_CASE("exponential cross-talk loss") {
  // 2-bit model separating by the first coordinate
  MetricModel m;
  m.projection = Eigen::MatrixXf::Zero(2, 2);
  m.projection(0, 0) = 1.0f;
  m.projection(1, 0) = 1.0f;
  m.offset = Eigen::VectorXf::Zero(2);
  m.threshold = 1.0;

  TrainingSet perfect;
  perfect.positives = {{nucleotide({1.0f, 0.0f}), nucleotide({2.0f, 5.0f})}};
  perfect.negatives = {{nucleotide({1.0f, 0.0f}), nucleotide({-1.0f, 0.0f})}};
  CHECK(exp_loss(m, perfect) == doctest::Approx(2.0 * std::exp(-1.0)));

  TrainingSet inverted;
  inverted.positives = perfect.negatives;
  inverted.negatives = perfect.positives;
  CHECK(exp_loss(m, inverted) == doctest::Approx(2.0 * std::exp(1.0)));

  // mixed 2+2 set against direct evaluation
  TrainingSet mixed;
  mixed.positives = {{nucleotide({1.0f, 0.0f}), nucleotide({2.0f, 0.0f})},
                     {nucleotide({1.0f, 0.0f}), nucleotide({-1.0f, 0.0f})}};
  mixed.negatives = {{nucleotide({1.0f, 0.0f}), nucleotide({-2.0f, 0.0f})},
                     {nucleotide({3.0f, 0.0f}), nucleotide({4.0f, 0.0f})}};
  const double want = 0.5 * (std::exp(-1.0) + std::exp(1.0))    // positives: d=0 then d=2
                      + 0.5 * (std::exp(-1.0) + std::exp(1.0));  // negatives: d=2 then d=0
  CHECK(exp_loss(m, mixed) == doctest::Approx(want));

  PairWeights w;
  w.positives = {1.0, 1.0};
  w.negatives = {1.0, 1.0};
  CHECK(exp_loss(m, mixed, &w) == doctest::Approx(want));
}

TEST_CASE("weak learner recovers the separating axis") {
  // positives identical, negatives differ only along the first axis
  const std::size_t d = 6;
  TrainingSet pairs;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<float> value(-1.0f, 1.0f);
  for (int p = 0; p < 40; ++p) {
    std::vector<float> x(d);
    for (float& v : x) v = value(rng);
    pairs.positives.push_back({nucleotide(x), nucleotide(x)});

    std::vector<float> base(d, 0.0f);
    std::vector<float> moved = base;
    moved[0] += float(2.0 + p % 3);
    pairs.negatives.push_back({nucleotide(base), nucleotide(moved)});
  }
  PairWeights w;
  w.positives.assign(40, 1.0 / 80.0);
  w.negatives.assign(40, 1.0 / 80.0);
  TrainConfig config;
  config.subspace_size = 3;

  const WeakLearnerResult r = weak_learner(pairs, w, config);
  CHECK(std::abs(std::abs(r.direction(0)) - 1.0) < 1e-6);
  CHECK(r.direction.tail(int(d) - 1).norm() < 1e-6);
  CHECK(r.weighted_error < 0.5);
}

TEST_CASE("weak learner offset minimizes the loss over its candidate set") {
  // generic pair cloud; verify against an exhaustive threshold scan
  const std::size_t d = 5;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<float> value(-2.0f, 2.0f);
  TrainingSet pairs;
  for (int p = 0; p < 30; ++p) {
    std::vector<float> a(d), b(d), c(d), e(d);
    for (float& v : a) v = value(rng);
    b = a;
    for (float& v : b) v += 0.05f * value(rng);
    for (float& v : c) v = value(rng);
    for (float& v : e) v = value(rng);
    pairs.positives.push_back({nucleotide(a), nucleotide(b)});
    pairs.negatives.push_back({nucleotide(c), nucleotide(e)});
  }
  PairWeights w;
  w.positives.assign(30, 1.0 / 60.0);
  w.negatives.assign(30, 1.0 / 60.0);
  TrainConfig config;
  config.subspace_size = 4;
  const WeakLearnerResult r = weak_learner(pairs, w, config);

  // brute force: every candidate direction, every element projection as
  // threshold boundary
  double best = std::numeric_limits<double>::infinity();
  for (const Eigen::VectorXd& dir : r.candidates) {
    std::vector<double> projections;
    auto project_elem = [&](const VisualNucleotide& nt) {
      double acc = 0.0;
      for (std::size_t i = 0; i < d; ++i) acc += double(float(dir(Eigen::Index(i)))) * nt.values[i];
      return acc;
    };
    for (const auto& [a, b] : pairs.positives) {
      projections.push_back(project_elem(a));
      projections.push_back(project_elem(b));
    }
    for (const auto& [a, b] : pairs.negatives) {
      projections.push_back(project_elem(a));
      projections.push_back(project_elem(b));
    }
    std::vector<double> thresholds = projections;
    std::sort(thresholds.begin(), thresholds.end());
    std::vector<double> candidates{thresholds.front() - 1.0, thresholds.back() + 1.0};
    for (std::size_t t = 0; t + 1 < thresholds.size(); ++t)
      candidates.push_back(0.5 * (thresholds[t] + thresholds[t + 1]));
    for (const double threshold : candidates) {
      double loss = 0.0;
      std::size_t idx = 0;
      for (std::size_t p = 0; p < pairs.positives.size(); ++p, idx += 2) {
        const bool same = (projections[idx] >= threshold) == (projections[idx + 1] >= threshold);
        loss += w.positives[p] * std::exp(same ? -1.0 : 1.0);
      }
      for (std::size_t p = 0; p < pairs.negatives.size(); ++p, idx += 2) {
        const bool same = (projections[idx] >= threshold) == (projections[idx + 1] >= threshold);
        loss += w.negatives[p] * std::exp(same ? 1.0 : -1.0);
      }
      best = std::min(best, loss);
    }
  }
  CHECK(r.exp_loss == doctest::Approx(best).epsilon(1e-9));
}

TEST_CASE("single-bit training separates 1-D clusters") {
  TrainingSet pairs;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<float> jitter(0.0f, 0.4f);
  for (int p = 0; p < 50; ++p) {
    const float side = p % 2 == 0 ? 1.0f : -1.0f;
    pairs.positives.push_back(
        {nucleotide({side + jitter(rng)}), nucleotide({side + jitter(rng)})});
    pairs.negatives.push_back(
        {nucleotide({1.0f + jitter(rng)}), nucleotide({-1.0f - jitter(rng)})});
  }
  TrainConfig config;
  config.bits = 1;
  config.threshold = 0.5;
  const MetricModel model = train_metric(pairs, config);
  REQUIRE(model.bits() == 1);
  for (const auto& [a, b] : pairs.positives)
    CHECK(hamming(project(a, model), project(b, model)) == 0);
  for (const auto& [a, b] : pairs.negatives)
    CHECK(hamming(project(a, model), project(b, model)) == 1);
}

TEST_CASE("boosting drives the margin loss down and beats the tfidf baseline") {
  // desk-scale pair set from mutated synthetic bags
  SynthConfig synth;
  synth.sequences = 6;
  synth.length = 60;
  synth.dim = 64;
  synth.seed = 99;
  const std::vector<VideoDna> corpus = synth_corpus(synth);
  std::vector<const VideoDna*> refs;
  for (const auto& dna : corpus) refs.push_back(&dna);

  std::vector<MutationSpec> specs;
  for (const MutationKind kind :
       {MutationKind::substitution_noise, MutationKind::quadrant_crop,
        MutationKind::histogram_rescale, MutationKind::overlay_inject}) {
    MutationSpec spec;
    spec.kind = kind;
    spec.strength = 1;
    specs.push_back(spec);
  }
  const PairSet train_pairs = generate_training_pairs(refs, specs, 600, 2400, 11);
  const PairSet held_out = generate_training_pairs(refs, specs, 300, 1200, 12);

  TrainConfig config;
  config.bits = 32;
  config.seed = 5;
  TrainDiagnostics diag;
  const MetricModel model = train_metric(train_pairs, config, &diag);
  REQUIRE(model.bits() == 32);
  REQUIRE(diag.round_exp_loss.size() == 32);
  for (std::size_t r = 0; r < diag.round_exp_loss.size(); ++r) {
    CHECK(diag.round_weighted_error[r] < 0.5);
    if (r > 0) CHECK(diag.round_exp_loss[r] <= diag.round_exp_loss[r - 1] + 1e-12);
  }

  // held-out EER: learned Hamming metric vs tf-idf weighted Euclidean
  std::vector<std::vector<float>> bags;
  for (const auto& dna : corpus)
    for (const auto& nt : dna.nucleotides) bags.push_back(nt.values);
  const IdfWeights idf = compute_idf(bags);

  std::vector<double> pos_learned, neg_learned, pos_baseline, neg_baseline;
  for (const auto& [a, b] : held_out.positives) {
    pos_learned.push_back(hamming(project(a, model), project(b, model)));
    pos_baseline.push_back(tfidf_distance(a, b, idf));
  }
  for (const auto& [a, b] : held_out.negatives) {
    neg_learned.push_back(hamming(project(a, model), project(b, model)));
    neg_baseline.push_back(tfidf_distance(a, b, idf));
  }
  const double eer_learned = equal_error_rate(pos_learned, neg_learned);
  const double eer_baseline = equal_error_rate(pos_baseline, neg_baseline);
  CHECK(eer_learned < eer_baseline);
}

TEST_CASE("training rejects degenerate inputs") {
  TrainingSet empty;
  TrainConfig config;
  CHECK_THROWS_AS((void)train_metric(empty, config), Error);

  TrainingSet ragged;
  ragged.positives = {{nucleotide({1.0f}), nucleotide({1.0f, 2.0f})}};
  ragged.negatives = {{nucleotide({1.0f}), nucleotide({2.0f})}};
  CHECK_THROWS_AS((void)train_metric(ragged, config), Error);
}

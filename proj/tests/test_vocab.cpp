#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "videodna/vocab.hpp"

using namespace videodna;

namespace {

std::vector<std::vector<float>> random_points(std::size_t count, std::size_t dim,
                                              std::mt19937_64& rng, float spread = 1.0f) {
  std::uniform_real_distribution<float> value(-spread, spread);
  std::vector<std::vector<float>> points(count, std::vector<float>(dim));
  for (auto& p : points)
    for (float& v : p) v = value(rng);
  return points;
}

}  // namespace

TEST_CASE("k=1 yields the mean of all descriptors") {
  std::mt19937_64 rng(1);
  const auto points = random_points(10, 3, rng);
  const Vocabulary vocab = train_vocabulary(points, 1, 7, 20);
  REQUIRE(vocab.k == 1);
  REQUIRE(vocab.dim == 3);
  for (std::size_t j = 0; j < 3; ++j) {
    double mean = 0.0;
    for (const auto& p : points) mean += p[j];
    mean /= double(points.size());
    CHECK(vocab.centroids[j] == doctest::Approx(mean).epsilon(1e-5));
  }
}

TEST_CASE("four tight clusters are recovered") {
  std::mt19937_64 rng(2);
  const float centers[4][2] = {{0, 0}, {10, 0}, {0, 10}, {10, 10}};
  std::normal_distribution<float> noise(0.0f, 0.1f);
  std::vector<std::vector<float>> points;
  for (int c = 0; c < 4; ++c)
    for (int i = 0; i < 50; ++i)
      points.push_back({centers[c][0] + noise(rng), centers[c][1] + noise(rng)});

  const Vocabulary vocab = train_vocabulary(points, 4, 3, 50);
  std::vector<bool> matched(4, false);
  for (uint32_t k = 0; k < 4; ++k) {
    const auto centroid = vocab.centroid(k);
    for (int c = 0; c < 4; ++c) {
      const double dx = centroid[0] - centers[c][0];
      const double dy = centroid[1] - centers[c][1];
      if (std::sqrt(dx * dx + dy * dy) < 0.5) {
        CHECK_FALSE(matched[c]);
        matched[c] = true;
      }
    }
  }
  for (int c = 0; c < 4; ++c) CHECK(matched[c]);
}

TEST_CASE("production vocabulary sizes") {
  std::mt19937_64 rng(3);
  const Vocabulary gray = train_vocabulary(random_points(4096, 64, rng), 2048, 11, 3,
                                           DescriptorKind::grayscale);
  CHECK(gray.k == 2048);
  CHECK(gray.centroids.size() == 2048u * 64u);
  const Vocabulary color =
      train_vocabulary(random_points(512, 16, rng), 124, 11, 5, DescriptorKind::color);
  CHECK(color.k == 124);
  CHECK(color.centroids.size() == 124u * 16u);
}

TEST_CASE("objective trace is non-increasing and training is deterministic") {
  std::mt19937_64 rng(4);
  const auto points = random_points(300, 8, rng);
  std::vector<double> trace;
  const Vocabulary a = train_vocabulary(points, 16, 42, 40, DescriptorKind::grayscale, &trace);
  REQUIRE(trace.size() >= 2);
  for (std::size_t t = 1; t < trace.size(); ++t)
    CHECK(trace[t] <= trace[t - 1] * (1.0 + 1e-9) + 1e-12);
  CHECK(trace.back() <= trace.front());

  const Vocabulary b = train_vocabulary(points, 16, 42, 40);
  CHECK(a.centroids == b.centroids);

  const Vocabulary c = train_vocabulary(points, 16, 43, 40);
  CHECK(c.centroids != a.centroids);
}

TEST_CASE("quantize picks the nearest centroid with low-index ties") {
  Vocabulary vocab;
  vocab.k = 8;
  vocab.dim = 2;
  vocab.centroids = {0, 0, 1, 0, 2, 0, 3, 0, 4, 0, 2, 2, 6, 0, 7, 0};

  const std::vector<float> exact = {3.0f, 0.0f};
  CHECK(quantize(exact, vocab) == 3);

  // equidistant from centroid 2 at (2,0) and centroid 5 at (2,2)
  const std::vector<float> tie = {2.0f, 1.0f};
  CHECK(quantize(tie, vocab) == 2);

  const std::vector<float> wrong_dim = {1.0f};
  CHECK_THROWS_AS((void)quantize(wrong_dim, vocab), Error);
}

TEST_CASE("quantize agrees with an exhaustive scan") {
  std::mt19937_64 rng(5);
  const auto centroid_points = random_points(64, 6, rng);
  const Vocabulary vocab = train_vocabulary(centroid_points, 32, 9, 10);
  const auto queries = random_points(1000, 6, rng);
  for (const auto& q : queries) {
    uint32_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (uint32_t c = 0; c < vocab.k; ++c) {
      double d = 0.0;
      for (uint32_t j = 0; j < vocab.dim; ++j) {
        const double diff = double(q[j]) - double(vocab.centroid(c)[j]);
        d += diff * diff;
      }
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    REQUIRE(quantize(q, vocab) == best);
  }
}

TEST_CASE("training rejects bad inputs") {
  CHECK_THROWS_AS((void)train_vocabulary({}, 1, 0, 10), Error);
  const std::vector<std::vector<float>> dup = {{1.0f, 2.0f}, {1.0f, 2.0f}, {3.0f, 4.0f}};
  CHECK_THROWS_AS((void)train_vocabulary(dup, 3, 0, 10), Error);  // only 2 distinct
  CHECK(train_vocabulary(dup, 2, 0, 10).k == 2);
}

TEST_CASE("idf weights follow the smoothed formula") {
  // word 0 in every bag, word 1 in none, word 2 in one of three
  const std::vector<std::vector<float>> bags = {
      {1, 0, 2}, {4, 0, 0}, {2, 0, 0}};
  const IdfWeights idf = compute_idf(bags);
  REQUIRE(idf.corpus_size == 3);
  CHECK(idf.weights[0] == doctest::Approx(1.0));
  CHECK(idf.weights[1] == doctest::Approx(std::log(4.0 / 1.0) + 1.0));
  CHECK(idf.weights[2] == doctest::Approx(std::log(4.0 / 2.0) + 1.0));

  const IdfWeights single = compute_idf({{3.0f, 0.0f}});
  CHECK(single.weights[0] == doctest::Approx(1.0));
  CHECK(single.weights[1] == doctest::Approx(std::log(2.0) + 1.0));

  CHECK_THROWS_AS((void)compute_idf({}), Error);
}

TEST_CASE("idf is permutation-equivariant") {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> coin(0, 2);
  std::vector<std::vector<float>> bags(7, std::vector<float>(10));
  for (auto& bag : bags)
    for (float& v : bag) v = float(coin(rng));

  std::vector<std::size_t> perm(10);
  std::iota(perm.begin(), perm.end(), 0u);
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<std::vector<float>> permuted = bags;
  for (std::size_t b = 0; b < bags.size(); ++b)
    for (std::size_t i = 0; i < 10; ++i) permuted[b][perm[i]] = bags[b][i];

  const IdfWeights base = compute_idf(bags);
  const IdfWeights shuffled = compute_idf(permuted);
  for (std::size_t i = 0; i < 10; ++i)
    CHECK(shuffled.weights[perm[i]] == base.weights[i]);
}

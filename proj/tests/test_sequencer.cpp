#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "videodna/sequencer.hpp"

using namespace videodna;

namespace {

Image solid_image(uint32_t w, uint32_t h, uint8_t r, uint8_t g, uint8_t b) {
  Image img;
  img.width = w;
  img.height = h;
  img.rgb.resize(std::size_t(w) * h * 3);
  for (std::size_t p = 0; p < std::size_t(w) * h; ++p) {
    img.rgb[3 * p] = r;
    img.rgb[3 * p + 1] = g;
    img.rgb[3 * p + 2] = b;
  }
  return img;
}

Image checkerboard(uint32_t w, uint32_t h, uint32_t cell) {
  Image img = solid_image(w, h, 0, 0, 0);
  for (uint32_t y = 0; y < h; ++y)
    for (uint32_t x = 0; x < w; ++x)
      if (((x / cell) + (y / cell)) % 2 == 0) {
        const std::size_t o = (std::size_t(y) * w + x) * 3;
        img.rgb[o] = img.rgb[o + 1] = img.rgb[o + 2] = 255;
      }
  return img;
}

Image noise_image(uint32_t w, uint32_t h, uint64_t seed) {
  Image img = solid_image(w, h, 0, 0, 0);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> byte(0, 255);
  for (uint8_t& v : img.rgb) v = uint8_t(byte(rng));
  return img;
}

Vocabulary trivial_vocab(uint32_t k, uint32_t dim, DescriptorKind kind) {
  // centroid i = i * unit mass on coordinate (i % dim)
  Vocabulary vocab;
  vocab.k = k;
  vocab.dim = dim;
  vocab.kind = kind;
  vocab.centroids.assign(std::size_t(k) * dim, 0.0f);
  for (uint32_t i = 0; i < k; ++i)
    vocab.centroids[std::size_t(i) * dim + (i % dim)] = float(i + 1);
  return vocab;
}

FrameBag bag_of(std::vector<float> histogram, double timestamp) {
  FrameBag bag;
  bag.histogram = std::move(histogram);
  bag.timestamp = timestamp;
  return bag;
}

}  // namespace

TEST_CASE("uniform frames produce no corners") {
  CHECK(extract_frame_features(solid_image(64, 64, 0, 0, 0), 450).points.empty());
  CHECK(extract_frame_features(solid_image(64, 64, 200, 200, 200), 450).points.empty());
}

TEST_CASE("checkerboard produces corners inside the unit square") {
  const FrameFeatures f = extract_frame_features(checkerboard(64, 64, 8), 450);
  REQUIRE(!f.points.empty());
  for (const FeaturePoint& p : f.points) {
    CHECK(p.x >= 0.0f);
    CHECK(p.x <= 1.0f);
    CHECK(p.y >= 0.0f);
    CHECK(p.y <= 1.0f);
  }
  // descriptors normalized, not all-zero
  double norm = 0.0;
  for (float v : f.points.front().gray_desc) norm += double(v) * v;
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("the strongest-point cap is respected on dense texture") {
  const Image noisy = noise_image(320, 240, 5);
  const FrameFeatures capped = extract_frame_features(noisy, 50);
  CHECK(capped.points.size() == 50);
  const FrameFeatures more = extract_frame_features(noisy, 450);
  CHECK(more.points.size() <= 450);
  CHECK(more.points.size() > 50);

  // identical input, identical output
  const FrameFeatures again = extract_frame_features(noisy, 50);
  REQUIRE(again.points.size() == capped.points.size());
  for (std::size_t i = 0; i < again.points.size(); ++i) {
    CHECK(again.points[i].x == capped.points[i].x);
    CHECK(again.points[i].gray_desc == capped.points[i].gray_desc);
  }
}

TEST_CASE("tiny frames are rejected, wide frames are downscaled") {
  CHECK_THROWS_AS((void)extract_frame_features(solid_image(8, 64, 0, 0, 0), 10), Error);
  CHECK_THROWS_AS((void)extract_frame_features(solid_image(64, 8, 0, 0, 0), 10), Error);
  // 640-wide checkerboard still works after the scale to 320
  const FrameFeatures f = extract_frame_features(checkerboard(640, 480, 40), 100);
  CHECK(!f.points.empty());
}

TEST_CASE("frame bags concatenate per-quadrant gray and color histograms") {
  const Vocabulary gray = trivial_vocab(8, kGrayDescriptorDim, DescriptorKind::grayscale);
  const Vocabulary color = trivial_vocab(4, kColorDescriptorDim, DescriptorKind::color);

  FrameFeatures f;
  FeaturePoint p;
  p.x = 0.25f;
  p.y = 0.25f;
  f.points.push_back(p);

  const FrameBag bag = build_frame_bag(f, gray, color, 0.0);
  const std::size_t block = 8 + 4;
  REQUIRE(bag.histogram.size() == 4 * block);

  const uint32_t gray_word = quantize(std::span<const float>(p.gray_desc), gray);
  const uint32_t color_word = quantize(std::span<const float>(p.color_desc), color);
  CHECK(bag.histogram[gray_word] == 1.0f);
  CHECK(bag.histogram[8 + color_word] == 1.0f);
  float total = 0.0f;
  for (float v : bag.histogram) total += v;
  CHECK(total == 2.0f);  // one point, one quadrant, two vocabularies
}

TEST_CASE("paper-scale vocabularies give d = 8688") {
  const Vocabulary gray = trivial_vocab(2048, kGrayDescriptorDim, DescriptorKind::grayscale);
  const Vocabulary color = trivial_vocab(124, kColorDescriptorDim, DescriptorKind::color);
  const FrameBag bag = build_frame_bag(FrameFeatures{}, gray, color, 0.10);
  CHECK(bag.histogram.size() == 8688);
}

TEST_CASE("the frame center lands in all four quadrants with 10% overlap") {
  const Vocabulary gray = trivial_vocab(4, kGrayDescriptorDim, DescriptorKind::grayscale);
  const Vocabulary color = trivial_vocab(2, kColorDescriptorDim, DescriptorKind::color);

  FrameFeatures f;
  FeaturePoint p;
  p.x = 0.5f;
  p.y = 0.5f;
  f.points.push_back(p);

  const FrameBag bag = build_frame_bag(f, gray, color, 0.10);
  const std::size_t block = 4 + 2;
  for (int q = 0; q < 4; ++q) {
    float quadrant_total = 0.0f;
    for (std::size_t i = 0; i < block; ++i) quadrant_total += bag.histogram[q * block + i];
    CHECK(quadrant_total == 2.0f);
  }
}

TEST_CASE("median pooling follows the interval rules") {
  SequencerConfig config;  // T=2, step=1

  SUBCASE("single frame per interval reproduces the bag") {
    const std::vector<FrameBag> bags = {bag_of({1, 2, 3}, 0.0), bag_of({4, 5, 6}, 1.0)};
    const VideoDna dna = sequence(bags, config);
    REQUIRE(dna.size() == 2);
    CHECK(dna.nucleotides[1].values == std::vector<float>{4, 5, 6});
    // interval 0 holds both frames: even count -> mean of middles
    CHECK(dna.nucleotides[0].values == std::vector<float>{2.5f, 3.5f, 4.5f});
  }

  SUBCASE("median is robust to one outlier among three") {
    const std::vector<FrameBag> bags = {bag_of({1}, 0.0), bag_of({5}, 0.5), bag_of({100}, 1.5)};
    const VideoDna dna = sequence(bags, config);
    CHECK(dna.nucleotides[0].values[0] == 5.0f);
  }

  SUBCASE("ten frames at 1 fps give nine two-frame intervals plus a tail") {
    std::vector<FrameBag> bags;
    for (int i = 0; i < 10; ++i) bags.push_back(bag_of({float(i)}, double(i)));
    const VideoDna dna = sequence(bags, config);
    REQUIRE(dna.size() == 10);
    CHECK(dna.empty_intervals.empty());
    for (int i = 0; i < 9; ++i)
      CHECK(dna.nucleotides[i].values[0] == doctest::Approx(i + 0.5));  // mean of i, i+1
    CHECK(dna.nucleotides[9].values[0] == 9.0f);  // single-frame tail
    CHECK(dna.nucleotides[3].interval_start == doctest::Approx(3.0));
    CHECK(dna.nucleotides[3].interval_length == doctest::Approx(2.0));
  }

  SUBCASE("interior gaps become flagged zero nucleotides") {
    const std::vector<FrameBag> bags = {bag_of({1}, 0.5), bag_of({2}, 5.5)};
    const VideoDna dna = sequence(bags, config);
    REQUIRE(dna.size() == 6);
    CHECK(dna.empty_intervals == std::vector<uint32_t>{1, 2, 3});
    CHECK(dna.nucleotides[2].values[0] == 0.0f);
    CHECK(dna.nucleotides[4].values[0] == 2.0f);
  }

  SUBCASE("empty input and bad timestamps are rejected") {
    CHECK_THROWS_AS((void)sequence({}, config), Error);
    const std::vector<FrameBag> unordered = {bag_of({1}, 1.0), bag_of({2}, 1.0)};
    CHECK_THROWS_AS((void)sequence(unordered, config), Error);
  }
}

TEST_CASE("median pooling ignores frame order and tolerates a minority of outliers") {
  std::mt19937_64 rng(7);
  SequencerConfig config;
  config.interval_length = 1.0;
  config.step = 1.0;

  std::vector<FrameBag> bags;
  for (int i = 0; i < 5; ++i) bags.push_back(bag_of({2.0f, 7.0f}, 0.1 + 0.15 * i));
  const VideoDna base = sequence(bags, config);

  // permuting values inside the interval changes nothing (timestamps keep order)
  std::vector<FrameBag> permuted = bags;
  std::vector<std::vector<float>> hists;
  for (const auto& b : permuted) hists.push_back(b.histogram);
  std::shuffle(hists.begin(), hists.end(), rng);
  for (std::size_t i = 0; i < permuted.size(); ++i) permuted[i].histogram = hists[i];
  CHECK(sequence(permuted, config).nucleotides[0].values == base.nucleotides[0].values);

  // replacing two of five identical bags with arbitrary outliers keeps the median
  std::vector<FrameBag> outliers = bags;
  outliers[1].histogram = {999.0f, -5.0f};
  outliers[4].histogram = {0.0f, 1e6f};
  CHECK(sequence(outliers, config).nucleotides[0].values == base.nucleotides[0].values);
}

#include "videodna/sequencer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace videodna {

namespace {

constexpr uint32_t kScaledWidth = 320;
constexpr int kPatchHalf = 8;
constexpr double kCornerThreshold = 1e-7;

struct GrayImage {
  uint32_t width = 0, height = 0;
  std::vector<float> v;  // luma in [0,1]

  float at(int x, int y) const { return v[std::size_t(y) * width + std::size_t(x)]; }
};

float luma(const Image& img, uint32_t x, uint32_t y) {
  const std::size_t o = (std::size_t(y) * img.width + x) * 3;
  return (0.299f * img.rgb[o] + 0.587f * img.rgb[o + 1] + 0.114f * img.rgb[o + 2]) / 255.0f;
}

Image downscale(const Image& img, uint32_t new_w) {
  const uint32_t new_h = std::max<uint32_t>(
      1, uint32_t(std::lround(double(img.height) * double(new_w) / double(img.width))));
  Image out;
  out.width = new_w;
  out.height = new_h;
  out.rgb.resize(std::size_t(new_w) * new_h * 3);
  for (uint32_t y = 0; y < new_h; ++y) {
    for (uint32_t x = 0; x < new_w; ++x) {
      // bilinear sample at the source-space pixel center
      const double sx = (x + 0.5) * double(img.width) / new_w - 0.5;
      const double sy = (y + 0.5) * double(img.height) / new_h - 0.5;
      const int x0 = std::clamp(int(std::floor(sx)), 0, int(img.width) - 1);
      const int y0 = std::clamp(int(std::floor(sy)), 0, int(img.height) - 1);
      const int x1 = std::min(x0 + 1, int(img.width) - 1);
      const int y1 = std::min(y0 + 1, int(img.height) - 1);
      const double fx = std::clamp(sx - x0, 0.0, 1.0);
      const double fy = std::clamp(sy - y0, 0.0, 1.0);
      for (int c = 0; c < 3; ++c) {
        auto px = [&](int xx, int yy) {
          return double(img.rgb[(std::size_t(yy) * img.width + std::size_t(xx)) * 3 + c]);
        };
        const double val = (1 - fx) * (1 - fy) * px(x0, y0) + fx * (1 - fy) * px(x1, y0) +
                           (1 - fx) * fy * px(x0, y1) + fx * fy * px(x1, y1);
        out.rgb[(std::size_t(y) * new_w + x) * 3 + c] = uint8_t(std::lround(val));
      }
    }
  }
  return out;
}

// hue-like scalar in [0,1); 0.5 for achromatic pixels
float hue_of(uint8_t r, uint8_t g, uint8_t b) {
  const double num = std::sqrt(3.0) * (double(g) - double(b));
  const double den = 2.0 * double(r) - double(g) - double(b);
  if (num == 0.0 && den == 0.0) return 0.5f;
  const double angle = std::atan2(num, den);  // [-pi, pi]
  double h = angle / (2.0 * std::numbers::pi) + 0.5;
  if (h >= 1.0) h -= 1.0;
  return float(h);
}

}  // namespace

FrameFeatures extract_frame_features(const Image& image, uint32_t max_points) {
  if (image.width < 16 || image.height < 16)
    fail(Errc::image_too_small, "frame must be at least 16x16");
  if (image.rgb.size() != std::size_t(image.width) * image.height * 3)
    fail(Errc::bad_format, "raster size does not match dimensions");

  const Image scaled = image.width > kScaledWidth ? downscale(image, kScaledWidth) : image;
  const int w = int(scaled.width), h = int(scaled.height);

  GrayImage gray;
  gray.width = scaled.width;
  gray.height = scaled.height;
  gray.v.resize(std::size_t(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      gray.v[std::size_t(y) * gray.width + std::size_t(x)] = luma(scaled, uint32_t(x), uint32_t(y));

  // central-difference gradients
  std::vector<float> gx(gray.v.size(), 0.0f), gy(gray.v.size(), 0.0f);
  for (int y = 1; y + 1 < h; ++y) {
    for (int x = 1; x + 1 < w; ++x) {
      const std::size_t o = std::size_t(y) * gray.width + std::size_t(x);
      gx[o] = 0.5f * (gray.at(x + 1, y) - gray.at(x - 1, y));
      gy[o] = 0.5f * (gray.at(x, y + 1) - gray.at(x, y - 1));
    }
  }

  // Harris response with a 5x5 box window
  std::vector<float> response(gray.v.size(), 0.0f);
  for (int y = 2; y + 2 < h; ++y) {
    for (int x = 2; x + 2 < w; ++x) {
      double sxx = 0, syy = 0, sxy = 0;
      for (int dy = -2; dy <= 2; ++dy) {
        for (int dx = -2; dx <= 2; ++dx) {
          const std::size_t o = std::size_t(y + dy) * gray.width + std::size_t(x + dx);
          sxx += double(gx[o]) * gx[o];
          syy += double(gy[o]) * gy[o];
          sxy += double(gx[o]) * gy[o];
        }
      }
      const double det = sxx * syy - sxy * sxy;
      const double trace = sxx + syy;
      response[std::size_t(y) * gray.width + std::size_t(x)] =
          float(det - 0.04 * trace * trace);
    }
  }

  // 3x3 non-max suppression, then rank by response
  struct Corner {
    int x, y;
    float r;
  };
  std::vector<Corner> corners;
  for (int y = 3; y + 3 < h; ++y) {
    for (int x = 3; x + 3 < w; ++x) {
      const float r = response[std::size_t(y) * gray.width + std::size_t(x)];
      if (r <= kCornerThreshold) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy)
        for (int dx = -1; dx <= 1 && is_max; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const float other = response[std::size_t(y + dy) * gray.width + std::size_t(x + dx)];
          if (other > r || (other == r && (dy < 0 || (dy == 0 && dx < 0)))) is_max = false;
        }
      if (is_max) corners.push_back({x, y, r});
    }
  }
  std::stable_sort(corners.begin(), corners.end(), [](const Corner& a, const Corner& b) {
    if (a.r != b.r) return a.r > b.r;
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  });
  if (corners.size() > max_points) corners.resize(max_points);

  FrameFeatures out;
  out.points.reserve(corners.size());
  for (const Corner& c : corners) {
    FeaturePoint p;
    p.x = float((c.x + 0.5) / w);
    p.y = float((c.y + 0.5) / h);

    // 16x16 patch, 4x4 cells x 4 orientation bins, L2-normalized
    const int px0 = std::clamp(c.x - kPatchHalf, 0, w - 2 * kPatchHalf);
    const int py0 = std::clamp(c.y - kPatchHalf, 0, h - 2 * kPatchHalf);
    double norm = 0.0;
    for (int dy = 0; dy < 2 * kPatchHalf; ++dy) {
      for (int dx = 0; dx < 2 * kPatchHalf; ++dx) {
        const int xx = px0 + dx, yy = py0 + dy;
        const std::size_t o = std::size_t(yy) * gray.width + std::size_t(xx);
        const double mag = std::hypot(double(gx[o]), double(gy[o]));
        if (mag == 0.0) continue;
        const double angle = std::atan2(double(gy[o]), double(gx[o]));  // [-pi, pi]
        int bin = int((angle + std::numbers::pi) / (std::numbers::pi / 2.0));
        bin = std::clamp(bin, 0, 3);
        const int cell = (dy / (kPatchHalf / 2)) * 4 + (dx / (kPatchHalf / 2));
        p.gray_desc[std::size_t(cell * 4 + bin)] += float(mag);
      }
    }
    for (float v : p.gray_desc) norm += double(v) * v;
    if (norm > 0.0) {
      const float inv = float(1.0 / std::sqrt(norm));
      for (float& v : p.gray_desc) v *= inv;
    }

    // 4x4 cells of mean hue
    std::array<double, kColorDescriptorDim> hue_sum{};
    std::array<uint32_t, kColorDescriptorDim> hue_count{};
    for (int dy = 0; dy < 2 * kPatchHalf; ++dy) {
      for (int dx = 0; dx < 2 * kPatchHalf; ++dx) {
        const int xx = px0 + dx, yy = py0 + dy;
        const std::size_t o = (std::size_t(yy) * scaled.width + std::size_t(xx)) * 3;
        const int cell = (dy / (kPatchHalf / 2)) * 4 + (dx / (kPatchHalf / 2));
        hue_sum[std::size_t(cell)] += hue_of(scaled.rgb[o], scaled.rgb[o + 1], scaled.rgb[o + 2]);
        hue_count[std::size_t(cell)]++;
      }
    }
    for (std::size_t c2 = 0; c2 < kColorDescriptorDim; ++c2)
      p.color_desc[c2] = hue_count[c2] ? float(hue_sum[c2] / hue_count[c2]) : 0.0f;

    out.points.push_back(p);
  }
  return out;
}

FrameBag build_frame_bag(const FrameFeatures& features, const Vocabulary& gray_vocab,
                         const Vocabulary& color_vocab, double overlap_fraction) {
  if (gray_vocab.dim != kGrayDescriptorDim || color_vocab.dim != kColorDescriptorDim)
    fail(Errc::dimension_mismatch, "vocabulary dimensions do not match descriptors");
  if (overlap_fraction < 0.0 || overlap_fraction >= 0.5)
    fail(Errc::bad_format, "overlap fraction must be in [0, 0.5)");

  const std::size_t block = gray_vocab.k + color_vocab.k;
  FrameBag bag;
  bag.timestamp = features.timestamp;
  bag.histogram.assign(4 * block, 0.0f);

  for (const FeaturePoint& p : features.points) {
    const uint32_t gray_word = quantize(std::span<const float>(p.gray_desc), gray_vocab);
    const uint32_t color_word = quantize(std::span<const float>(p.color_desc), color_vocab);
    for (int q = 0; q < 4; ++q) {
      const bool right = q & 1, bottom = q & 2;
      const double x_lo = right ? 0.5 - overlap_fraction : 0.0;
      const double x_hi = right ? 1.0 : 0.5 + overlap_fraction;
      const double y_lo = bottom ? 0.5 - overlap_fraction : 0.0;
      const double y_hi = bottom ? 1.0 : 0.5 + overlap_fraction;
      if (p.x >= x_lo && p.x <= x_hi && p.y >= y_lo && p.y <= y_hi) {
        bag.histogram[std::size_t(q) * block + gray_word] += 1.0f;
        bag.histogram[std::size_t(q) * block + gray_vocab.k + color_word] += 1.0f;
      }
    }
  }
  return bag;
}

VideoDna sequence(const std::vector<FrameBag>& bags, const SequencerConfig& config) {
  if (bags.empty()) fail(Errc::empty_input, "no frame bags to pool");
  if (config.interval_length <= 0.0 || config.step <= 0.0 ||
      config.step > config.interval_length)
    fail(Errc::bad_format, "need 0 < step <= T");
  const std::size_t d = bags.front().histogram.size();
  for (std::size_t i = 0; i < bags.size(); ++i) {
    if (bags[i].histogram.size() != d) fail(Errc::dimension_mismatch, "ragged frame bags");
    if (i > 0 && bags[i].timestamp <= bags[i - 1].timestamp)
      fail(Errc::bad_format, "frame timestamps must strictly increase");
  }

  const double last_ts = bags.back().timestamp;
  const std::size_t last_interval = std::size_t(std::floor(last_ts / config.step + 1e-9));

  VideoDna dna;
  dna.interval_length = config.interval_length;
  dna.step = config.step;
  dna.nucleotides.reserve(last_interval + 1);

  std::size_t lo = 0;  // first bag not before the interval start
  std::vector<float> column;
  for (std::size_t i = 0; i <= last_interval; ++i) {
    const double start = double(i) * config.step;
    const double end = start + config.interval_length;
    while (lo < bags.size() && bags[lo].timestamp < start) ++lo;
    std::size_t hi = lo;
    while (hi < bags.size() && bags[hi].timestamp < end) ++hi;

    VisualNucleotide nt;
    nt.interval_start = start;
    nt.interval_length = config.interval_length;
    nt.values.assign(d, 0.0f);
    const std::size_t count = hi - lo;
    if (count == 0) {
      dna.empty_intervals.push_back(uint32_t(i));
    } else {
      column.resize(count);
      for (std::size_t c = 0; c < d; ++c) {
        for (std::size_t f = 0; f < count; ++f) column[f] = bags[lo + f].histogram[c];
        auto mid = column.begin() + long(count / 2);
        std::nth_element(column.begin(), mid, column.end());
        if (count % 2 == 1) {
          nt.values[c] = *mid;
        } else {
          const float upper = *mid;
          const float lower = *std::max_element(column.begin(), mid);
          nt.values[c] = 0.5f * (lower + upper);
        }
      }
    }
    dna.nucleotides.push_back(std::move(nt));
  }
  return dna;
}

}  // namespace videodna

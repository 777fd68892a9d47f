#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "videodna/types.hpp"
#include "videodna/vocab.hpp"

namespace videodna {

inline constexpr uint32_t kGrayDescriptorDim = 64;
inline constexpr uint32_t kColorDescriptorDim = 16;

struct FeaturePoint {
  float x = 0.0f;  // normalized to [0,1]
  float y = 0.0f;
  std::array<float, kGrayDescriptorDim> gray_desc{};
  std::array<float, kColorDescriptorDim> color_desc{};
};

struct FrameFeatures {
  uint64_t frame_index = 0;
  double timestamp = 0.0;
  std::vector<FeaturePoint> points;
};

// Concatenated quadrant histograms of one frame, d = 4 * (k_gray + k_color).
struct FrameBag {
  std::vector<float> histogram;
  double timestamp = 0.0;
};

struct SequencerConfig {
  double interval_length = 2.0;  // T
  double step = 1.0;             // delta_T
  uint32_t max_points = 450;
  double overlap_fraction = 0.10;
};

// 8-bit RGB raster, row-major, 3 bytes per pixel.
struct Image {
  uint32_t width = 0;
  uint32_t height = 0;
  std::vector<uint8_t> rgb;
};

// Toy corner-based extractor: Harris-style response ranking, a 4x4 grid of
// 4-bin gradient-orientation histograms (64-dim grayscale descriptor) and a
// 4x4 grid of mean hue (16-dim color descriptor). Frames wider than 320
// pixels are scaled down to horizontal resolution 320 first. Deterministic
// for identical input. Caller fills frame_index / timestamp.
FrameFeatures extract_frame_features(const Image& image, uint32_t max_points);

// Quantizes every point in both vocabularies and accumulates per-quadrant
// histograms. A point contributes to every quadrant whose region, expanded
// by overlap_fraction of the frame size on its inner edges, contains it.
// Layout: [q0 gray, q0 color, q1 gray, q1 color, ...], quadrants ordered
// top-left, top-right, bottom-left, bottom-right.
FrameBag build_frame_bag(const FrameFeatures& features, const Vocabulary& gray_vocab,
                         const Vocabulary& color_vocab, double overlap_fraction);

// Median-pools frame bags over intervals [i*step, i*step + T). Intervals
// with no frames before the last populated one yield a zero nucleotide and
// are listed in empty_intervals; trailing empty intervals are omitted.
VideoDna sequence(const std::vector<FrameBag>& bags, const SequencerConfig& config);

}  // namespace videodna

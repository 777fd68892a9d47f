#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "videodna/types.hpp"

namespace videodna {

enum class DescriptorKind : uint8_t { grayscale = 0, color = 1 };

// k-means codebook quantizing raw descriptors into visual words.
struct Vocabulary {
  std::vector<float> centroids;  // k x dim, row-major
  DescriptorKind kind = DescriptorKind::grayscale;
  uint32_t k = 0;
  uint32_t dim = 0;

  std::span<const float> centroid(uint32_t i) const {
    return {centroids.data() + std::size_t(i) * dim, dim};
  }
};

// Inverse-document-frequency weights over visual words.
struct IdfWeights {
  std::vector<float> weights;
  uint64_t corpus_size = 0;
};

// Lloyd's k-means with distance-squared weighted probabilistic seeding.
// Deterministic for a fixed seed. Empty clusters are re-seeded to the point
// farthest from its current centroid. If objective_trace is given, it
// receives the objective after seeding and after every iteration.
Vocabulary train_vocabulary(const std::vector<std::vector<float>>& descriptors, uint32_t k,
                            uint64_t seed, uint32_t max_iters,
                            DescriptorKind kind = DescriptorKind::grayscale,
                            std::vector<double>* objective_trace = nullptr);

// Index of the nearest centroid by Euclidean distance; ties go to the
// lowest index.
uint32_t quantize(std::span<const float> descriptor, const Vocabulary& vocab);

// Smoothed idf: weights[i] = ln((1 + N) / (1 + df_i)) + 1.
IdfWeights compute_idf(const std::vector<std::vector<float>>& bags);

}  // namespace videodna

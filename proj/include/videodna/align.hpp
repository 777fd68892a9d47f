#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "videodna/metric.hpp"
#include "videodna/types.hpp"

namespace videodna {

enum class ScoreMode : uint8_t { bitcode, tfidf };

struct ScoringParams {
  ScoreMode mode = ScoreMode::bitcode;
  double match_scale = 2.0;         // s0
  double gap_penalty = -1.0;        // per gapped element, <= 0
  double bitcode_threshold = 32.0;  // d0; bitcode mode
  const IdfWeights* idf = nullptr;  // tfidf mode
  double distance_scale = 1.0;      // rho; tfidf mode
  // Above this many cells the traceback matrix is not materialized and the
  // path is recovered from row checkpoints instead.
  std::size_t traceback_area_limit = std::size_t(1) << 24;
};

struct AlignStep {
  enum class Kind : uint8_t { match, gap_in_x, gap_in_y };
  Kind kind = Kind::match;
  uint32_t i = 0;  // x index (match, gap_in_y)
  uint32_t j = 0;  // y index (match, gap_in_x)
};

struct Alignment {
  double score = 0.0;
  std::vector<AlignStep> path;
  // Half-open index ranges consumed in each sequence; empty path -> 0-0.
  uint32_t x_begin = 0, x_end = 0;
  uint32_t y_begin = 0, y_end = 0;
};

// Affine map from distance to signed similarity: bitcode mode
// s0 * (d0 - hamming) / d0, tfidf mode s0 * (1 - distance / rho).
double score_substitution(const Bitcode& a, const Bitcode& b, const ScoringParams& params);
double score_substitution(const VisualNucleotide& a, const VisualNucleotide& b,
                          const ScoringParams& params);

// Smith-Waterman local alignment with linear gap penalty. Backtracking ties
// prefer diagonal, then up (gap_in_y), then left (gap_in_x); among equal
// maximal cells the smallest (i, j) wins.
Alignment local_align(const VideoDna& x, const VideoDna& y, const ScoringParams& params);

// Same recursion restricted to |(j - i) - diagonal_center| <= band_halfwidth;
// cells outside the band read as 0.
Alignment banded_local_align(const VideoDna& x, const VideoDna& y, const ScoringParams& params,
                             int64_t diagonal_center, uint32_t band_halfwidth);
Alignment banded_local_align(std::span<const Bitcode> x, std::span<const Bitcode> y,
                             const ScoringParams& params, int64_t diagonal_center,
                             uint32_t band_halfwidth);

// Needleman-Wunsch global alignment: no floor, gap-penalized boundaries,
// path spans both sequences fully.
Alignment global_align(const VideoDna& x, const VideoDna& y, const ScoringParams& params);

// Re-accumulates the path score; must reproduce Alignment::score.
double recompute_path_score(const VideoDna& x, const VideoDna& y, const Alignment& alignment,
                            const ScoringParams& params);

// Text format: "score=<s> xspan=<b>-<e> yspan=<b>-<e>" then one step per
// line: "M i j", "GX j" or "GY i".
std::string format_alignment(const Alignment& alignment);
Alignment parse_alignment(const std::string& text);

}  // namespace videodna

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "videodna/types.hpp"

namespace videodna {

enum class MutationKind : uint8_t {
  // spatial: operate on one nucleotide's bag
  substitution_noise,
  quadrant_crop,
  histogram_rescale,
  overlay_inject,
  // temporal: operate on the sequence
  indel,
  fade_blend,
  local_speed,
  substitution_segment,
  time_shift,
};

bool is_spatial(MutationKind kind);
std::string to_string(MutationKind kind);
MutationKind mutation_kind_from_string(const std::string& name);

struct MutationSpec {
  MutationKind kind = MutationKind::substitution_noise;
  int strength = 1;  // 1..3
  std::map<std::string, double> params;  // kind-specific overrides
  uint64_t seed = 0;

  double param(const std::string& key, double fallback) const;
};

// Spatial mutation of a single bag; deterministic for a fixed seed.
VisualNucleotide mutate_nucleotide(const VisualNucleotide& x, const MutationSpec& spec);

struct MutatedSequence {
  VideoDna dna;
  // output position -> input position, kGapIndex where the output has no
  // source interval; strictly monotone over non-gap entries
  std::vector<int32_t> source_map;
};

// Applies specs in order, composing groundtruth maps. Spatial specs apply
// per-nucleotide; temporal specs rewrite the timeline.
MutatedSequence mutate_sequence(const VideoDna& s, const std::vector<MutationSpec>& specs);

// Samples n_pos nucleotides uniformly over the corpus and pairs each with a
// mutation of itself under a spec drawn from specs; negatives pair
// nucleotides of distinct source_ids. Deterministic per seed.
PairSet generate_training_pairs(const std::vector<const VideoDna*>& corpus,
                                const std::vector<MutationSpec>& specs, std::size_t n_pos,
                                std::size_t n_neg, uint64_t seed);

// Text config, one spec per line: "kind strength key=val ...".
std::vector<MutationSpec> parse_mutation_specs(const std::string& text);
std::string format_mutation_specs(const std::vector<MutationSpec>& specs);

// Synthetic bag-of-features corpora for training and benchmarks: sparse
// non-negative bags with mild temporal correlation, one distinct source id
// per sequence.
struct SynthConfig {
  std::size_t sequences = 100;
  std::size_t length = 600;
  uint32_t dim = 1152;
  uint64_t seed = 7;
  double interval_length = 2.0;
  double step = 1.0;
};

std::vector<VideoDna> synth_corpus(const SynthConfig& config);

}  // namespace videodna

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "videodna/errors.hpp"

namespace videodna {

// Bag-of-features vector describing one fixed-length time interval of video.
struct VisualNucleotide {
  std::vector<float> values;
  double interval_start = 0.0;
  double interval_length = 0.0;

  std::size_t dim() const { return values.size(); }
};

// Packed binary embedding of a nucleotide. Bit 0 lives in the most
// significant bit of byte 0, so the hex rendering reads left to right.
// A set bit encodes +1, a clear bit -1.
class Bitcode {
 public:
  Bitcode() = default;
  explicit Bitcode(uint32_t n_bits) : n_bits_(n_bits), bytes_((n_bits + 7) / 8, 0) {}

  uint32_t size() const { return n_bits_; }
  bool empty() const { return n_bits_ == 0; }

  bool get(uint32_t i) const { return (bytes_[i >> 3] >> (7 - (i & 7))) & 1u; }
  void set(uint32_t i, bool plus) {
    const uint8_t mask = uint8_t(1u << (7 - (i & 7)));
    if (plus)
      bytes_[i >> 3] |= mask;
    else
      bytes_[i >> 3] &= uint8_t(~mask);
  }

  const std::vector<uint8_t>& bytes() const { return bytes_; }
  std::vector<uint8_t>& bytes() { return bytes_; }

  std::string to_hex() const;
  static Bitcode from_hex(const std::string& hex, uint32_t n_bits);

  friend bool operator==(const Bitcode&, const Bitcode&) = default;

 private:
  uint32_t n_bits_ = 0;
  std::vector<uint8_t> bytes_;
};

// Timed sequence of visual nucleotides for one video. Nucleotide i covers
// the interval [i*step, i*step + interval_length).
struct VideoDna {
  std::vector<VisualNucleotide> nucleotides;
  std::vector<Bitcode> bitcodes;  // empty, or one code per nucleotide
  double interval_length = 2.0;   // T
  double step = 1.0;              // delta_T
  std::string source_id;
  std::vector<uint32_t> empty_intervals;  // intervals pooled from no frames

  std::size_t size() const { return nucleotides.size(); }
  std::size_t dim() const { return nucleotides.empty() ? 0 : nucleotides.front().values.size(); }
  bool has_bitcodes() const { return !bitcodes.empty(); }
};

using NucleotidePair = std::pair<VisualNucleotide, VisualNucleotide>;

// Gap sentinel for index maps (alignment rows, mutation groundtruth).
inline constexpr int32_t kGapIndex = -1;

// Positive pairs share a source interval (one side mutated); negative pairs
// come from distinct sources.
struct PairSet {
  std::vector<NucleotidePair> positives;
  std::vector<NucleotidePair> negatives;
};

}  // namespace videodna

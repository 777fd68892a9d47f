#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "videodna/align.hpp"
#include "videodna/types.hpp"

namespace videodna {

struct IndexedSequence {
  uint64_t id = 0;
  uint32_t length = 0;
  std::string source_id;
};

struct Posting {
  uint64_t sequence_id = 0;
  uint32_t position = 0;

  friend auto operator<=>(const Posting&, const Posting&) = default;
};

// Inverted index over bitcode bands: each code is split into `bands`
// equal-width bit slices and every (sequence, position) is posted under all
// of them. Frozen after build; safe for concurrent readers.
class BandIndex {
 public:
  using Bucket = std::unordered_map<uint64_t, std::vector<Posting>>;

  BandIndex() = default;
  BandIndex(uint32_t code_bits, uint32_t bands);

  uint32_t code_bits() const { return code_bits_; }
  uint32_t bands() const { return bands_; }
  uint32_t band_width_bits() const { return bands_ ? code_bits_ / bands_ : 0; }

  const std::vector<IndexedSequence>& catalog() const { return catalog_; }
  const std::vector<Bucket>& postings() const { return postings_; }
  std::vector<IndexedSequence>& catalog() { return catalog_; }
  std::vector<Bucket>& postings() { return postings_; }

  std::size_t total_positions() const;

  bool has_codes() const { return !codes_.empty(); }
  const std::vector<Bitcode>& codes(uint64_t sequence_id) const;

  // The index file carries postings and catalog only; sequences must be
  // re-attached (in catalog order) before banded refinement can run.
  void attach_codes(const std::vector<const VideoDna*>& sequences);
  void set_codes(std::vector<std::vector<Bitcode>> codes) { codes_ = std::move(codes); }

  static uint64_t band_value(const Bitcode& code, uint32_t band, uint32_t width_bits);

 private:
  uint32_t code_bits_ = 0;
  uint32_t bands_ = 0;
  std::vector<IndexedSequence> catalog_;
  std::vector<Bucket> postings_;           // one bucket map per band
  std::vector<std::vector<Bitcode>> codes_;  // per catalog entry
};

struct SeedHit {
  uint64_t sequence_id = 0;
  uint32_t db_position = 0;
  uint32_t query_position = 0;

  int64_t diagonal() const { return int64_t(db_position) - int64_t(query_position); }
  friend auto operator<=>(const SeedHit&, const SeedHit&) = default;
};

struct Candidate {
  uint64_t sequence_id = 0;
  int64_t diagonal = 0;  // representative diagonal of the bucket
  uint32_t hit_count = 0;
  double score = 0.0;
  std::optional<Alignment> alignment;
};

struct SearchParams {
  uint32_t min_seeds = 3;
  uint32_t diagonal_slack = 2;  // diagonal bin width
  uint32_t band_halfwidth = 8;
  uint32_t shortlist_cap = 50;
  ScoringParams scoring;
};

struct SearchResult {
  uint64_t sequence_id = 0;
  int64_t db_offset = 0;  // db position aligned with query position 0
  double score = 0.0;
  Alignment alignment;
};

// Builds the inverted index; ids are assigned in input order. All sequences
// must carry bitcodes of equal width and bands must divide that width.
BandIndex build_index(const std::vector<const VideoDna*>& sequences, uint32_t bands);

// All postings colliding with the query on at least one band, collapsed to
// one hit per (sequence, db position, query position) and canonically
// sorted.
std::vector<SeedHit> seed_hits(const VideoDna& query, const BandIndex& index);

// FASTA-style diagonal chaining: hits bucketed by (sequence, diagonal bin);
// buckets with at least min_seeds hits become candidates ordered by
// hit_count descending, ties by sequence then diagonal ascending.
std::vector<Candidate> chain_diagonals(const std::vector<SeedHit>& hits, uint32_t min_seeds,
                                       uint32_t diagonal_slack);

// Seed, chain, refine the top shortlist_cap candidates with banded local
// alignment and rank by alignment score (ties by sequence id, then offset).
std::vector<SearchResult> search(const VideoDna& query, const BandIndex& index,
                                 const SearchParams& params);

}  // namespace videodna

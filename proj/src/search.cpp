#include "videodna/search.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace videodna {

namespace {

int64_t floor_div(int64_t a, int64_t b) {
  int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

void check_query(const VideoDna& query, const BandIndex& index) {
  if (query.size() == 0) fail(Errc::empty_query, "query is empty");
  if (!query.has_bitcodes()) fail(Errc::missing_bitcodes, "query has no bitcodes");
  if (query.bitcodes.front().size() != index.code_bits())
    fail(Errc::band_mismatch, "query bitcode width does not match index");
}

}  // namespace

BandIndex::BandIndex(uint32_t code_bits, uint32_t bands)
    : code_bits_(code_bits), bands_(bands), postings_(bands) {}

std::size_t BandIndex::total_positions() const {
  std::size_t n = 0;
  for (const IndexedSequence& seq : catalog_) n += seq.length;
  return n;
}

const std::vector<Bitcode>& BandIndex::codes(uint64_t sequence_id) const {
  if (sequence_id >= codes_.size())
    fail(Errc::missing_bitcodes, "sequence codes are not attached to the index");
  return codes_[std::size_t(sequence_id)];
}

void BandIndex::attach_codes(const std::vector<const VideoDna*>& sequences) {
  if (sequences.size() != catalog_.size())
    fail(Errc::band_mismatch, "sequence count does not match the catalog");
  std::vector<std::vector<Bitcode>> codes;
  codes.reserve(sequences.size());
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    const VideoDna& dna = *sequences[s];
    if (!dna.has_bitcodes()) fail(Errc::missing_bitcodes, "sequence has no bitcodes");
    if (dna.size() != catalog_[s].length)
      fail(Errc::band_mismatch, "sequence length does not match the catalog");
    if (dna.bitcodes.front().size() != code_bits_)
      fail(Errc::band_mismatch, "bitcode width does not match the index");
    codes.push_back(dna.bitcodes);
  }
  codes_ = std::move(codes);
}

uint64_t BandIndex::band_value(const Bitcode& code, uint32_t band, uint32_t width_bits) {
  uint64_t value = 0;
  const uint32_t first = band * width_bits;
  for (uint32_t b = 0; b < width_bits; ++b)
    value = (value << 1) | uint64_t(code.get(first + b));
  return value;
}

BandIndex build_index(const std::vector<const VideoDna*>& sequences, uint32_t bands) {
  if (sequences.empty()) fail(Errc::empty_input, "nothing to index");
  if (bands == 0) fail(Errc::band_mismatch, "need at least one band");

  uint32_t code_bits = 0;
  for (const VideoDna* dna : sequences) {
    if (!dna->has_bitcodes())
      fail(Errc::missing_bitcodes, "all indexed sequences need bitcodes");
    const uint32_t n = dna->bitcodes.front().size();
    if (code_bits == 0) code_bits = n;
    if (n != code_bits) fail(Errc::band_mismatch, "mixed bitcode widths");
  }
  if (code_bits == 0 || code_bits % bands != 0)
    fail(Errc::band_mismatch, "band count must divide the bitcode width");
  const uint32_t width = code_bits / bands;
  if (width > 64) fail(Errc::band_mismatch, "band width above 64 bits");

  BandIndex index(code_bits, bands);
  std::vector<std::vector<Bitcode>> codes;
  codes.reserve(sequences.size());
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    const VideoDna& dna = *sequences[s];
    index.catalog().push_back({uint64_t(s), uint32_t(dna.size()), dna.source_id});
    codes.push_back(dna.bitcodes);
    for (uint32_t pos = 0; pos < dna.size(); ++pos)
      for (uint32_t band = 0; band < bands; ++band)
        index.postings()[band][BandIndex::band_value(dna.bitcodes[pos], band, width)].push_back(
            {uint64_t(s), pos});
  }
  for (auto& bucket_map : index.postings())
    for (auto& [value, postings] : bucket_map) std::sort(postings.begin(), postings.end());
  index.set_codes(std::move(codes));
  return index;
}

std::vector<SeedHit> seed_hits(const VideoDna& query, const BandIndex& index) {
  check_query(query, index);
  const uint32_t width = index.band_width_bits();

  std::vector<SeedHit> hits;
  for (uint32_t qpos = 0; qpos < query.size(); ++qpos) {
    for (uint32_t band = 0; band < index.bands(); ++band) {
      const uint64_t value = BandIndex::band_value(query.bitcodes[qpos], band, width);
      const auto& bucket_map = index.postings()[band];
      const auto it = bucket_map.find(value);
      if (it == bucket_map.end()) continue;
      for (const Posting& p : it->second)
        hits.push_back({p.sequence_id, p.position, qpos});
    }
  }
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
  return hits;
}

std::vector<Candidate> chain_diagonals(const std::vector<SeedHit>& hits, uint32_t min_seeds,
                                       uint32_t diagonal_slack) {
  const int64_t slack = std::max<uint32_t>(1, diagonal_slack);

  struct Bucket {
    std::vector<int64_t> diagonals;
  };
  std::map<std::pair<uint64_t, int64_t>, Bucket> buckets;
  for (const SeedHit& hit : hits)
    buckets[{hit.sequence_id, floor_div(hit.diagonal(), slack)}].diagonals.push_back(
        hit.diagonal());

  std::vector<Candidate> out;
  for (auto& [key, bucket] : buckets) {
    if (bucket.diagonals.size() < min_seeds) continue;
    std::sort(bucket.diagonals.begin(), bucket.diagonals.end());
    Candidate c;
    c.sequence_id = key.first;
    c.diagonal = bucket.diagonals[(bucket.diagonals.size() - 1) / 2];  // lower median
    c.hit_count = uint32_t(bucket.diagonals.size());
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    if (a.hit_count != b.hit_count) return a.hit_count > b.hit_count;
    if (a.sequence_id != b.sequence_id) return a.sequence_id < b.sequence_id;
    return a.diagonal < b.diagonal;
  });
  return out;
}

std::vector<SearchResult> search(const VideoDna& query, const BandIndex& index,
                                 const SearchParams& params) {
  check_query(query, index);
  if (index.catalog().empty() || index.total_positions() == 0)
    fail(Errc::empty_index, "index holds no sequences");
  if (!index.has_codes())
    fail(Errc::missing_bitcodes, "index has no attached sequence codes");
  if (params.scoring.mode != ScoreMode::bitcode)
    fail(Errc::mode_mismatch, "search refinement runs in bitcode mode");

  std::vector<Candidate> shortlist =
      chain_diagonals(seed_hits(query, index), params.min_seeds, params.diagonal_slack);
  if (shortlist.size() > params.shortlist_cap) shortlist.resize(params.shortlist_cap);

  std::vector<SearchResult> results;
  results.reserve(shortlist.size());
  for (const Candidate& candidate : shortlist) {
    const auto& db_codes = index.codes(candidate.sequence_id);
    const Alignment alignment =
        banded_local_align(std::span<const Bitcode>(query.bitcodes),
                           std::span<const Bitcode>(db_codes), params.scoring,
                           candidate.diagonal, params.band_halfwidth);
    if (alignment.path.empty()) continue;
    SearchResult r;
    r.sequence_id = candidate.sequence_id;
    r.db_offset = int64_t(alignment.y_begin) - int64_t(alignment.x_begin);
    r.score = alignment.score;
    r.alignment = alignment;
    results.push_back(std::move(r));
  }
  std::sort(results.begin(), results.end(), [](const SearchResult& a, const SearchResult& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.sequence_id != b.sequence_id) return a.sequence_id < b.sequence_id;
    return a.db_offset < b.db_offset;
  });
  return results;
}

}  // namespace videodna

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "videodna/search.hpp"

using namespace videodna;
using namespace videodna::testsupport;

namespace {

ScoringParams bitcode_params(double threshold = 32.0) {
  ScoringParams p;
  p.mode = ScoreMode::bitcode;
  p.bitcode_threshold = threshold;
  return p;
}

SearchParams default_search() {
  SearchParams p;
  p.scoring = bitcode_params();
  return p;
}

}  // namespace

TEST_CASE("every position lands in every band") {
  std::mt19937_64 rng(1);
  const VideoDna dna = random_code_dna(5, 64, rng);
  const BandIndex index = build_index({&dna}, 4);
  std::size_t postings = 0;
  for (const auto& bucket_map : index.postings())
    for (const auto& [value, list] : bucket_map) postings += list.size();
  CHECK(postings == 20);
  CHECK(index.total_positions() == 5);
  CHECK(index.band_width_bits() == 16);
}

TEST_CASE("identical codes share buckets in all bands") {
  std::mt19937_64 rng(2);
  const Bitcode code = random_bitcode(64, rng);
  const VideoDna dna = dna_from_codes({code, random_bitcode(64, rng), code});
  const BandIndex index = build_index({&dna}, 4);
  for (uint32_t band = 0; band < 4; ++band) {
    const uint64_t value = BandIndex::band_value(code, band, 16);
    const auto& postings = index.postings()[band].at(value);
    bool has0 = false, has2 = false;
    for (const Posting& p : postings) {
      has0 |= p.position == 0;
      has2 |= p.position == 2;
    }
    CHECK(has0);
    CHECK(has2);
  }
}

TEST_CASE("band extraction follows the packed bit order") {
  Bitcode code(64);
  code.set(0, true);   // MSB of band 0
  code.set(17, true);  // second bit of band 1
  CHECK(BandIndex::band_value(code, 0, 16) == 0x8000);
  CHECK(BandIndex::band_value(code, 1, 16) == 0x4000);
  CHECK(BandIndex::band_value(code, 2, 16) == 0);
}

TEST_CASE("index construction validates its inputs") {
  std::mt19937_64 rng(3);
  const VideoDna dna = random_code_dna(4, 64, rng);
  CHECK_THROWS_AS((void)build_index({}, 4), Error);
  CHECK_THROWS_AS((void)build_index({&dna}, 5), Error);  // 5 does not divide 64
  VideoDna no_codes = dna;
  no_codes.bitcodes.clear();
  CHECK_THROWS_AS((void)build_index({&no_codes}, 4), Error);
}

TEST_CASE("self retrieval hits every indexed position") {
  std::mt19937_64 rng(4);
  const VideoDna dna = random_code_dna(40, 64, rng);
  const BandIndex index = build_index({&dna}, 4);
  const std::vector<SeedHit> hits = seed_hits(dna, index);
  for (uint32_t pos = 0; pos < 40; ++pos) {
    bool found = false;
    for (const SeedHit& hit : hits)
      found |= hit.db_position == pos && hit.query_position == pos;
    CHECK(found);
  }
  // canonical ordering
  for (std::size_t h = 1; h < hits.size(); ++h) CHECK(hits[h - 1] < hits[h]);
}

TEST_CASE("one flipped bit leaves at least B-1 intact bands, collapsed to one hit") {
  std::mt19937_64 rng(5);
  for (int it = 0; it < 100; ++it) {
    const Bitcode original = random_bitcode(64, rng);
    const VideoDna dna = dna_from_codes({original});
    const BandIndex index = build_index({&dna}, 4);

    Bitcode probe = original;
    const uint32_t flip = std::uniform_int_distribution<uint32_t>(0, 63)(rng);
    probe.set(flip, !probe.get(flip));

    uint32_t intact_bands = 0;
    for (uint32_t band = 0; band < 4; ++band)
      if (BandIndex::band_value(probe, band, 16) == BandIndex::band_value(original, band, 16))
        ++intact_bands;
    CHECK(intact_bands == 3);

    const std::vector<SeedHit> hits = seed_hits(dna_from_codes({probe}), index);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].db_position == 0);
  }
}

TEST_CASE("any code within hamming distance B-1 of an indexed code seeds a hit") {
  std::mt19937_64 rng(6);
  for (int it = 0; it < 300; ++it) {
    const Bitcode original = random_bitcode(64, rng);
    const VideoDna dna = dna_from_codes({original});
    const BandIndex index = build_index({&dna}, 4);
    Bitcode probe = original;
    const uint32_t flips = std::uniform_int_distribution<uint32_t>(1, 3)(rng);
    std::set<uint32_t> positions;
    while (positions.size() < flips)
      positions.insert(std::uniform_int_distribution<uint32_t>(0, 63)(rng));
    for (uint32_t b : positions) probe.set(b, !probe.get(b));
    CHECK(!seed_hits(dna_from_codes({probe}), index).empty());
  }
}

TEST_CASE("random band collisions match the expected rate") {
  std::mt19937_64 rng(7);
  const std::size_t trials = 1000000;
  std::size_t collisions = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const uint64_t a = rng(), b = rng();
    bool collide = false;
    for (int band = 0; band < 4; ++band)
      collide |= ((a >> (16 * band)) & 0xFFFF) == ((b >> (16 * band)) & 0xFFFF);
    collisions += collide;
  }
  const double p = 1.0 - std::pow(1.0 - std::pow(2.0, -16.0), 4.0);
  const double sigma = std::sqrt(double(trials) * p * (1.0 - p));
  CHECK(std::abs(double(collisions) - double(trials) * p) <= 3.0 * sigma);
}

TEST_CASE("diagonal chaining buckets hits") {
  SUBCASE("five hits on one diagonal clear the threshold") {
    std::vector<SeedHit> hits;
    for (uint32_t q = 0; q < 5; ++q) hits.push_back({7, q + 20, q});
    const auto candidates = chain_diagonals(hits, 3, 1);
    REQUIRE(candidates.size() == 1);
    CHECK(candidates[0].sequence_id == 7);
    CHECK(candidates[0].diagonal == 20);
    CHECK(candidates[0].hit_count == 5);
  }

  SUBCASE("scattered hits never reach the threshold") {
    std::vector<SeedHit> hits;
    for (uint32_t q = 0; q < 6; ++q) hits.push_back({7, q * 10, q});
    CHECK(chain_diagonals(hits, 2, 1).empty());
  }

  SUBCASE("two occurrences in one sequence give two candidates") {
    std::vector<SeedHit> hits;
    for (uint32_t q = 0; q < 4; ++q) {
      hits.push_back({3, q + 10, q});
      hits.push_back({3, q + 50, q});
    }
    const auto candidates = chain_diagonals(hits, 3, 1);
    REQUIRE(candidates.size() == 2);
    CHECK(candidates[0].diagonal == 10);
    CHECK(candidates[1].diagonal == 50);
  }
}

TEST_CASE("an exact excerpt is retrieved at rank one with full score") {
  std::mt19937_64 rng(8);
  std::vector<VideoDna> db;
  for (int s = 0; s < 8; ++s)
    db.push_back(random_code_dna(80, 64, rng, "db-" + std::to_string(s)));
  std::vector<const VideoDna*> refs;
  for (const auto& dna : db) refs.push_back(&dna);
  const BandIndex index = build_index(refs, 4);

  const std::size_t source = 5, offset = 33, length = 10;
  VideoDna query = dna_from_codes(
      {db[source].bitcodes.begin() + offset, db[source].bitcodes.begin() + offset + length});

  const auto results = search(query, index, default_search());
  REQUIRE(!results.empty());
  CHECK(results[0].sequence_id == source);
  CHECK(results[0].db_offset == int64_t(offset));
  CHECK(results[0].score == doctest::Approx(20.0));

  // deterministic given identical inputs
  const auto again = search(query, index, default_search());
  REQUIRE(again.size() == results.size());
  CHECK(again[0].sequence_id == results[0].sequence_id);
  CHECK(again[0].score == results[0].score);
}

TEST_CASE("an excerpt with two ruined codes still wins with bounded score loss") {
  std::mt19937_64 rng(9);
  std::vector<VideoDna> db;
  for (int s = 0; s < 6; ++s)
    db.push_back(random_code_dna(60, 64, rng, "db-" + std::to_string(s)));
  std::vector<const VideoDna*> refs;
  for (const auto& dna : db) refs.push_back(&dna);
  const BandIndex index = build_index(refs, 4);

  const std::size_t source = 2, offset = 17, length = 10;
  std::vector<Bitcode> codes(
      {db[source].bitcodes.begin() + offset, db[source].bitcodes.begin() + offset + length});
  for (const std::size_t ruined : {std::size_t(3), std::size_t(6)}) {
    for (uint32_t b = 0; b < 64; ++b) codes[ruined].set(b, !codes[ruined].get(b));
  }
  const auto results = search(dna_from_codes(std::move(codes)), index, default_search());
  REQUIRE(!results.empty());
  CHECK(results[0].sequence_id == source);
  CHECK(std::llabs(results[0].db_offset - int64_t(offset)) <= 1);
  // eight exact matches, two positions either mismatched or gapped
  CHECK(results[0].score >= 2.0 * 8 + 2.0 * (-2.0));
}

TEST_CASE("search validates query and index state") {
  std::mt19937_64 rng(10);
  const VideoDna dna = random_code_dna(20, 64, rng);
  const BandIndex index = build_index({&dna}, 4);

  CHECK_THROWS_AS((void)search(VideoDna{}, index, default_search()), Error);

  VideoDna query_no_codes;
  query_no_codes.nucleotides.resize(3);
  CHECK_THROWS_AS((void)search(query_no_codes, index, default_search()), Error);

  const VideoDna narrow = random_code_dna(3, 32, rng);
  CHECK_THROWS_AS((void)seed_hits(narrow, index), Error);

  // codes detach on a file-loaded index until sequences are re-attached
  BandIndex detached = build_index({&dna}, 4);
  detached.set_codes({});
  const VideoDna query = random_code_dna(3, 64, rng);
  CHECK_THROWS_AS((void)search(query, detached, default_search()), Error);
  detached.attach_codes({&dna});
  CHECK_NOTHROW((void)search(query, detached, default_search()));
}

TEST_CASE("catalog permutations relabel but do not change results") {
  std::mt19937_64 rng(11);
  std::vector<VideoDna> db;
  for (int s = 0; s < 5; ++s)
    db.push_back(random_code_dna(50, 64, rng, "src-" + std::to_string(s)));

  const std::vector<const VideoDna*> order_a = {&db[0], &db[1], &db[2], &db[3], &db[4]};
  const std::vector<const VideoDna*> order_b = {&db[3], &db[0], &db[4], &db[2], &db[1]};
  const BandIndex index_a = build_index(order_a, 4);
  const BandIndex index_b = build_index(order_b, 4);

  VideoDna query = dna_from_codes({db[2].bitcodes.begin() + 5, db[2].bitcodes.begin() + 15});
  const auto results_a = search(query, index_a, default_search());
  const auto results_b = search(query, index_b, default_search());
  REQUIRE(!results_a.empty());
  REQUIRE(!results_b.empty());
  CHECK(index_a.catalog()[results_a[0].sequence_id].source_id ==
        index_b.catalog()[results_b[0].sequence_id].source_id);
  CHECK(results_a[0].db_offset == results_b[0].db_offset);
  CHECK(results_a[0].score == results_b[0].score);
}

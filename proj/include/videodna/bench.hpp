#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "videodna/metric.hpp"
#include "videodna/mutate.hpp"
#include "videodna/search.hpp"

namespace videodna {

// Retrieval benchmark: windows drawn from the corpus, mutated, encoded and
// searched; a query counts as correct when the top result names its source
// sequence within the offset tolerance of the mutation groundtruth.
struct QueryPlan {
  std::size_t queries_per_length = 500;
  std::vector<uint32_t> lengths = {10};
  std::vector<MutationSpec> specs;  // cycled over queries; empty -> unmutated
  uint64_t seed = 1;
  uint32_t tolerance = 1;  // intervals
  SearchParams search;
  uint32_t threads = 1;
};

struct BenchCell {
  std::size_t queries = 0;
  std::size_t correct = 0;

  double precision() const { return queries ? double(correct) / double(queries) : 0.0; }
};

struct BenchReport {
  std::map<std::pair<std::string, int>, BenchCell> by_kind_strength;
  std::map<uint32_t, BenchCell> by_length;
  std::vector<double> latencies_ms;  // one entry per query, wall clock
  std::size_t corpus_sequences = 0;
  std::size_t corpus_nucleotides = 0;

  double latency_mean_ms() const;
  double latency_median_ms() const;
  std::string kinds_tsv() const;    // deterministic given the plan seed
  std::string lengths_tsv() const;  // deterministic given the plan seed
  std::string latency_tsv() const;
};

// corpus sequences must carry both values (for query mutation) and bitcodes
// consistent with model; the index must be built over the same corpus.
BenchReport run_bench(const std::vector<VideoDna>& corpus, const MetricModel& model,
                      const BandIndex& index, const QueryPlan& plan);

}  // namespace videodna

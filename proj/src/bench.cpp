#include "videodna/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <set>
#include <thread>

#include "videodna/textfmt.hpp"

namespace videodna {

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

struct QueryTask {
  VideoDna query;          // mutated and encoded
  std::size_t source = 0;  // corpus sequence index
  // db offsets consistent with the groundtruth map; temporal edits shift
  // different parts of the query onto different diagonals
  std::vector<int64_t> expected_offsets;
  std::string kind = "none";
  int strength = 0;
  uint32_t length = 0;
};

double percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double rank = p * double(values.size() - 1);
  const std::size_t lo = std::size_t(std::floor(rank));
  const std::size_t hi = std::min(values.size() - 1, lo + 1);
  const double f = rank - double(lo);
  return values[lo] * (1.0 - f) + values[hi] * f;
}

}  // namespace

double BenchReport::latency_mean_ms() const {
  if (latencies_ms.empty()) return 0.0;
  double sum = 0.0;
  for (double v : latencies_ms) sum += v;
  return sum / double(latencies_ms.size());
}

double BenchReport::latency_median_ms() const { return percentile(latencies_ms, 0.5); }

std::string BenchReport::kinds_tsv() const {
  std::string out = "# precision@1 by mutation kind and strength\n";
  out += "kind\tstrength\tqueries\tcorrect\tprecision\n";
  for (const auto& [key, cell] : by_kind_strength) {
    out += key.first + "\t" + std::to_string(key.second) + "\t" + std::to_string(cell.queries) +
           "\t" + std::to_string(cell.correct) + "\t" + format_double(cell.precision()) + "\n";
  }
  return out;
}

std::string BenchReport::lengths_tsv() const {
  std::string out = "# precision@1 by query length (intervals)\n";
  out += "length\tqueries\tcorrect\tprecision\n";
  for (const auto& [length, cell] : by_length) {
    out += std::to_string(length) + "\t" + std::to_string(cell.queries) + "\t" +
           std::to_string(cell.correct) + "\t" + format_double(cell.precision()) + "\n";
  }
  return out;
}

std::string BenchReport::latency_tsv() const {
  std::string out = "# wall-clock search latency per query, milliseconds\n";
  out += "queries\tmean\tp50\tp90\tp99\n";
  out += std::to_string(latencies_ms.size()) + "\t" + format_double(latency_mean_ms()) + "\t" +
         format_double(percentile(latencies_ms, 0.5)) + "\t" +
         format_double(percentile(latencies_ms, 0.9)) + "\t" +
         format_double(percentile(latencies_ms, 0.99)) + "\n";
  return out;
}

BenchReport run_bench(const std::vector<VideoDna>& corpus, const MetricModel& model,
                      const BandIndex& index, const QueryPlan& plan) {
  if (corpus.size() < 2) fail(Errc::corpus_too_small, "benchmark needs at least two sequences");
  {
    std::set<std::string> sources;
    for (const VideoDna& dna : corpus) sources.insert(dna.source_id);
    if (sources.size() != corpus.size())
      fail(Errc::corpus_too_small, "corpus sources must be pairwise distinct");
  }
  const uint32_t max_length = *std::max_element(plan.lengths.begin(), plan.lengths.end());
  for (const VideoDna& dna : corpus)
    if (dna.size() < max_length)
      fail(Errc::corpus_too_small, "corpus sequences shorter than the longest query");

  // draw all queries up front so the worker pool stays deterministic
  std::mt19937_64 rng(plan.seed);
  std::uniform_int_distribution<std::size_t> seq_dist(0, corpus.size() - 1);
  std::vector<QueryTask> tasks;
  std::size_t query_counter = 0;
  for (const uint32_t length : plan.lengths) {
    for (std::size_t q = 0; q < plan.queries_per_length; ++q, ++query_counter) {
      const std::size_t s = seq_dist(rng);
      std::uniform_int_distribution<std::size_t> off_dist(0, corpus[s].size() - length);
      const std::size_t offset = off_dist(rng);

      VideoDna window;
      window.interval_length = corpus[s].interval_length;
      window.step = corpus[s].step;
      window.source_id = "query";
      window.nucleotides.assign(corpus[s].nucleotides.begin() + long(offset),
                                corpus[s].nucleotides.begin() + long(offset + length));

      QueryTask task;
      task.source = s;
      task.length = length;
      if (!plan.specs.empty()) {
        MutationSpec spec = plan.specs[query_counter % plan.specs.size()];
        spec.seed = splitmix64(plan.seed ^ splitmix64(query_counter));
        task.kind = to_string(spec.kind);
        task.strength = spec.strength;
        MutatedSequence mutated = mutate_sequence(window, {spec});
        task.query = std::move(mutated.dna);
        for (std::size_t k = 0; k < mutated.source_map.size(); ++k) {
          if (mutated.source_map[k] == kGapIndex) continue;
          const int64_t shift = int64_t(mutated.source_map[k]) - int64_t(k);
          if (task.expected_offsets.empty() || task.expected_offsets.back() != int64_t(offset) + shift)
            task.expected_offsets.push_back(int64_t(offset) + shift);
        }
        if (task.expected_offsets.empty()) task.expected_offsets.push_back(int64_t(offset));
      } else {
        task.query = std::move(window);
        task.expected_offsets.push_back(int64_t(offset));
      }
      encode_sequence(task.query, model);
      tasks.push_back(std::move(task));
    }
  }

  BenchReport report;
  report.corpus_sequences = corpus.size();
  for (const VideoDna& dna : corpus) report.corpus_nucleotides += dna.size();
  report.latencies_ms.resize(tasks.size());

  std::vector<uint8_t> correct(tasks.size(), 0);
  const uint32_t workers =
      std::max<uint32_t>(1, std::min<uint32_t>(plan.threads, uint32_t(tasks.size())));
  auto run_range = [&](uint32_t w) {
    for (std::size_t t = w; t < tasks.size(); t += workers) {
      const auto t0 = std::chrono::steady_clock::now();
      const std::vector<SearchResult> results = search(tasks[t].query, index, plan.search);
      const auto t1 = std::chrono::steady_clock::now();
      report.latencies_ms[t] = std::chrono::duration<double, std::milli>(t1 - t0).count();
      if (!results.empty()) {
        const SearchResult& top = results.front();
        if (top.sequence_id == uint64_t(tasks[t].source)) {
          for (const int64_t expected : tasks[t].expected_offsets)
            if (std::llabs(top.db_offset - expected) <= int64_t(plan.tolerance)) {
              correct[t] = 1;
              break;
            }
        }
      }
    }
  };
  if (workers == 1) {
    run_range(0);
  } else {
    std::vector<std::thread> pool;
    for (uint32_t w = 0; w < workers; ++w) pool.emplace_back(run_range, w);
    for (auto& th : pool) th.join();
  }

  for (std::size_t t = 0; t < tasks.size(); ++t) {
    auto& kind_cell = report.by_kind_strength[{tasks[t].kind, tasks[t].strength}];
    kind_cell.queries++;
    kind_cell.correct += correct[t];
    auto& length_cell = report.by_length[tasks[t].length];
    length_cell.queries++;
    length_cell.correct += correct[t];
  }
  return report;
}

}  // namespace videodna

#pragma once

#include <random>
#include <vector>

#include "videodna/align.hpp"
#include "videodna/types.hpp"

namespace videodna::testsupport {

inline Bitcode random_bitcode(uint32_t bits, std::mt19937_64& rng) {
  Bitcode code(bits);
  std::bernoulli_distribution bit(0.5);
  for (uint32_t i = 0; i < bits; ++i) code.set(i, bit(rng));
  return code;
}

inline VideoDna dna_from_codes(std::vector<Bitcode> codes, std::string source = "seq") {
  VideoDna dna;
  dna.source_id = std::move(source);
  dna.nucleotides.resize(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i) {
    dna.nucleotides[i].interval_start = double(i);
    dna.nucleotides[i].interval_length = 2.0;
  }
  dna.bitcodes = std::move(codes);
  return dna;
}

inline VideoDna random_code_dna(std::size_t length, uint32_t bits, std::mt19937_64& rng,
                                std::string source = "seq") {
  std::vector<Bitcode> codes;
  codes.reserve(length);
  for (std::size_t i = 0; i < length; ++i) codes.push_back(random_bitcode(bits, rng));
  return dna_from_codes(std::move(codes), std::move(source));
}

// Exhaustive local-alignment oracle: enumerates every monotone step sequence
// over every pair of start positions. Stays independent of the DP engine.
template <class ScoreFn>
double brute_force_local_score(std::size_t m, std::size_t n, const ScoreFn& score, double gap) {
  double best = 0.0;
  auto dfs = [&](auto&& self, std::size_t i, std::size_t j, double acc) -> void {
    if (i < m && j < n) {
      const double with_match = acc + score(uint32_t(i), uint32_t(j));
      if (with_match > best) best = with_match;
      self(self, i + 1, j + 1, with_match);
    }
    if (i < m) self(self, i + 1, j, acc + gap);
    if (j < n) self(self, i, j + 1, acc + gap);
  };
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) dfs(dfs, i, j, 0.0);
  return best;
}

// Exhaustive global-alignment oracle over full-span monotone step sequences.
template <class ScoreFn>
double brute_force_global_score(std::size_t m, std::size_t n, const ScoreFn& score, double gap) {
  double best = -std::numeric_limits<double>::infinity();
  auto dfs = [&](auto&& self, std::size_t i, std::size_t j, double acc) -> void {
    if (i == m && j == n) {
      if (acc > best) best = acc;
      return;
    }
    if (i < m && j < n) self(self, i + 1, j + 1, acc + score(uint32_t(i), uint32_t(j)));
    if (i < m) self(self, i + 1, j, acc + gap);
    if (j < n) self(self, i, j + 1, acc + gap);
  };
  dfs(dfs, 0, 0, 0.0);
  return best;
}

inline bool same_alignment(const Alignment& a, const Alignment& b) {
  if (a.score != b.score || a.path.size() != b.path.size()) return false;
  if (a.x_begin != b.x_begin || a.x_end != b.x_end) return false;
  if (a.y_begin != b.y_begin || a.y_end != b.y_end) return false;
  for (std::size_t s = 0; s < a.path.size(); ++s) {
    if (a.path[s].kind != b.path[s].kind) return false;
    if (a.path[s].kind != AlignStep::Kind::gap_in_x && a.path[s].i != b.path[s].i) return false;
    if (a.path[s].kind != AlignStep::Kind::gap_in_y && a.path[s].j != b.path[s].j) return false;
  }
  return true;
}

}  // namespace videodna::testsupport

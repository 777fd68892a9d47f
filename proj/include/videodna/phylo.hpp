#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "videodna/align.hpp"
#include "videodna/types.hpp"

namespace videodna {

struct DistanceMatrix {
  std::vector<std::string> labels;
  std::vector<double> values;  // row-major square matrix

  std::size_t size() const { return labels.size(); }
  double at(std::size_t i, std::size_t j) const { return values[i * labels.size() + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * labels.size() + j]; }
  void validate() const;  // symmetry, zero diagonal, non-negative
};

struct PhyloNode {
  std::string label;  // leaves only
  std::vector<std::pair<int, double>> neighbors;  // (node, branch length)
  std::vector<int> joined;  // nodes merged into this one, in join order

  bool is_leaf() const { return joined.empty(); }
};

// Unrooted when produced by neighbor joining (internal nodes of degree 3),
// rooted when parsed from Newick. top is the last-created or root node.
struct PhyloTree {
  std::vector<PhyloNode> nodes;
  int top = -1;
  bool rooted = false;

  std::size_t leaf_count() const;
};

// Gap-ratio distance of the optimal local alignment: gap steps / path
// length, 1 for an empty path.
double pairwise_distance(const VideoDna& x, const VideoDna& y, const ScoringParams& params);

// Aligns every unordered pair once (optionally across threads) and mirrors
// the result.
DistanceMatrix distance_matrix(const std::vector<const VideoDna*>& sequences,
                               const ScoringParams& params, uint32_t threads = 1);

// Saitou-Nei neighbor joining; deterministic, Q-criterion ties broken by the
// lowest index pair. Negative branch lengths are clamped to zero with the
// deficit moved to the sibling edge.
PhyloTree neighbor_joining(const DistanceMatrix& m);

// Multiple alignment, one gapped row per input; entries are indices into the
// source sequence or -1 for a gap.
struct Msa {
  std::vector<std::string> labels;
  std::vector<std::vector<int32_t>> rows;

  std::size_t columns() const { return rows.empty() ? 0 : rows.front().size(); }
};

// Progressive alignment following the guide tree's join order: profile
// columns are means of their non-gap member nucleotides, aligned globally in
// tfidf mode; established gaps are never removed.
Msa progressive_msa(const std::vector<const VideoDna*>& sequences, const PhyloTree& tree,
                    const ScoringParams& params);

// Unrooted trees are midpoint-rooted for display; parsed trees render back
// byte-identically.
std::string to_newick(const PhyloTree& tree);
PhyloTree parse_newick(const std::string& text);

}  // namespace videodna

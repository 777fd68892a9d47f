#include "videodna/phylo.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <thread>

#include "videodna/textfmt.hpp"

namespace videodna {

namespace {

constexpr double kSymmetryTolerance = 1e-9;

std::vector<std::string> sequence_labels(const std::vector<const VideoDna*>& sequences) {
  std::vector<std::string> labels;
  labels.reserve(sequences.size());
  std::set<std::string> seen;
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    std::string label = sequences[i]->source_id;
    if (label.empty() || seen.count(label)) label += "#" + std::to_string(i);
    seen.insert(label);
    labels.push_back(std::move(label));
  }
  return labels;
}

double edge_length(const PhyloTree& tree, int a, int b) {
  for (const auto& [n, len] : tree.nodes[std::size_t(a)].neighbors)
    if (n == b) return len;
  fail(Errc::invalid_matrix, "nodes are not adjacent");
}

bool needs_quoting(const std::string& label) {
  if (label.empty()) return true;
  for (char c : label)
    if (std::isspace(static_cast<unsigned char>(c)) || std::string("()[]{}:;,'\"").find(c) != std::string::npos)
      return true;
  return false;
}

std::string escape_label(const std::string& label) {
  if (!needs_quoting(label)) return label;
  std::string out = "'";
  for (char c : label) {
    out += c;
    if (c == '\'') out += '\'';
  }
  out += "'";
  return out;
}

void emit_subtree(const PhyloTree& tree, int node, int parent, std::string& out) {
  const PhyloNode& n = tree.nodes[std::size_t(node)];
  std::vector<int> children;
  for (const auto& [nb, len] : n.neighbors)
    if (nb != parent) children.push_back(nb);
  if (children.empty()) {
    out += escape_label(n.label);
  } else {
    out += "(";
    for (std::size_t c = 0; c < children.size(); ++c) {
      if (c > 0) out += ",";
      emit_subtree(tree, children[c], node, out);
      out += ":" + format_double(edge_length(tree, node, children[c]));
    }
    out += ")";
    if (!n.label.empty()) out += escape_label(n.label);
  }
}

// Distances from one node to all others along the tree.
std::vector<double> tree_distances(const PhyloTree& tree, int from) {
  std::vector<double> dist(tree.nodes.size(), -1.0);
  std::vector<int> stack{from};
  dist[std::size_t(from)] = 0.0;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (const auto& [v, len] : tree.nodes[std::size_t(u)].neighbors) {
      if (dist[std::size_t(v)] >= 0.0) continue;
      dist[std::size_t(v)] = dist[std::size_t(u)] + len;
      stack.push_back(v);
    }
  }
  return dist;
}

std::vector<int> tree_path(const PhyloTree& tree, int from, int to) {
  std::vector<int> parent(tree.nodes.size(), -1);
  std::vector<int> stack{from};
  parent[std::size_t(from)] = from;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    if (u == to) break;
    for (const auto& [v, len] : tree.nodes[std::size_t(u)].neighbors) {
      if (parent[std::size_t(v)] != -1) continue;
      parent[std::size_t(v)] = u;
      stack.push_back(v);
    }
  }
  std::vector<int> path;
  for (int u = to; u != from; u = parent[std::size_t(u)]) path.push_back(u);
  path.push_back(from);
  std::reverse(path.begin(), path.end());
  return path;
}

// Roots an unrooted tree at the midpoint of its longest leaf-to-leaf path by
// splitting the edge the midpoint falls on.
PhyloTree midpoint_root(const PhyloTree& tree) {
  std::vector<int> leaves;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i)
    if (tree.nodes[i].is_leaf()) leaves.push_back(int(i));
  if (leaves.size() < 2) fail(Errc::invalid_matrix, "tree needs at least two leaves");

  // double sweep: farthest leaf from an arbitrary leaf, then farthest from it
  auto farthest_leaf = [&](int from) {
    const auto dist = tree_distances(tree, from);
    int best = from;
    double best_d = -1.0;
    for (int leaf : leaves)
      if (dist[std::size_t(leaf)] > best_d) {
        best_d = dist[std::size_t(leaf)];
        best = leaf;
      }
    return std::pair<int, double>(best, best_d);
  };
  const int a = farthest_leaf(leaves.front()).first;
  const auto [b, diameter] = farthest_leaf(a);

  PhyloTree rooted = tree;
  if (diameter <= 0.0) {
    // degenerate zero-length tree; hang the root off leaf a's neighborhood
    rooted.top = a;
    rooted.rooted = true;
    return rooted;
  }

  const std::vector<int> path = tree_path(tree, a, b);
  double walked = 0.0;
  const double half = diameter / 2.0;
  for (std::size_t e = 0; e + 1 < path.size(); ++e) {
    const int u = path[e], v = path[e + 1];
    const double len = edge_length(tree, u, v);
    if (walked + len >= half || e + 2 == path.size()) {
      const double from_u = half - walked;
      // new root node splitting edge (u, v)
      const int root = int(rooted.nodes.size());
      rooted.nodes.push_back({});
      auto& ru = rooted.nodes[std::size_t(u)].neighbors;
      auto& rv = rooted.nodes[std::size_t(v)].neighbors;
      for (auto& [n, l] : ru)
        if (n == v) {
          n = root;
          l = std::max(0.0, from_u);
        }
      for (auto& [n, l] : rv)
        if (n == u) {
          n = root;
          l = std::max(0.0, len - from_u);
        }
      rooted.nodes[std::size_t(root)].neighbors = {{u, std::max(0.0, from_u)},
                                                   {v, std::max(0.0, len - from_u)}};
      rooted.top = root;
      rooted.rooted = true;
      return rooted;
    }
    walked += len;
  }
  fail(Errc::invalid_matrix, "midpoint rooting failed");
}

struct NewickParser {
  const std::string& text;
  std::size_t at = 0;
  PhyloTree tree;

  explicit NewickParser(const std::string& t) : text(t) {}

  char peek() {
    if (at >= text.size()) fail(Errc::bad_format, "unexpected end of newick text");
    return text[at];
  }

  int parse_node() {
    const int node = int(tree.nodes.size());
    tree.nodes.push_back({});
    if (peek() == '(') {
      ++at;
      while (true) {
        const int child = parse_node();
        double len = 0.0;
        if (at < text.size() && text[at] == ':') {
          ++at;
          std::size_t used = 0;
          len = std::stod(text.substr(at), &used);
          at += used;
        }
        tree.nodes[std::size_t(node)].neighbors.push_back({child, len});
        tree.nodes[std::size_t(child)].neighbors.push_back({node, len});
        tree.nodes[std::size_t(node)].joined.push_back(child);
        if (peek() == ',') {
          ++at;
          continue;
        }
        if (peek() == ')') {
          ++at;
          break;
        }
        fail(Errc::bad_format, "expected ',' or ')' in newick text");
      }
    }
    tree.nodes[std::size_t(node)].label = parse_label();
    return node;
  }

  std::string parse_label() {
    std::string label;
    if (at < text.size() && text[at] == '\'') {
      ++at;
      while (true) {
        if (at >= text.size()) fail(Errc::bad_format, "unterminated quoted label");
        if (text[at] == '\'') {
          if (at + 1 < text.size() && text[at + 1] == '\'') {
            label += '\'';
            at += 2;
            continue;
          }
          ++at;
          break;
        }
        label += text[at++];
      }
    } else {
      while (at < text.size() && std::string("(),:;").find(text[at]) == std::string::npos)
        label += text[at++];
    }
    return label;
  }
};

}  // namespace

void DistanceMatrix::validate() const {
  const std::size_t n = labels.size();
  if (values.size() != n * n) fail(Errc::invalid_matrix, "matrix size does not match labels");
  for (std::size_t i = 0; i < n; ++i) {
    if (at(i, i) != 0.0) fail(Errc::invalid_matrix, "diagonal must be zero");
    for (std::size_t j = 0; j < n; ++j) {
      if (at(i, j) < 0.0) fail(Errc::invalid_matrix, "distances must be non-negative");
      if (std::abs(at(i, j) - at(j, i)) > kSymmetryTolerance)
        fail(Errc::invalid_matrix, "matrix must be symmetric");
    }
  }
}

std::size_t PhyloTree::leaf_count() const {
  std::size_t n = 0;
  for (const PhyloNode& node : nodes)
    if (node.is_leaf()) ++n;
  return n;
}

double pairwise_distance(const VideoDna& x, const VideoDna& y, const ScoringParams& params) {
  const Alignment alignment = local_align(x, y, params);
  if (alignment.path.empty()) return 1.0;
  std::size_t gaps = 0;
  for (const AlignStep& step : alignment.path)
    if (step.kind != AlignStep::Kind::match) ++gaps;
  return double(gaps) / double(alignment.path.size());
}

DistanceMatrix distance_matrix(const std::vector<const VideoDna*>& sequences,
                               const ScoringParams& params, uint32_t threads) {
  if (sequences.size() < 2) fail(Errc::empty_input, "need at least two sequences");

  DistanceMatrix m;
  m.labels = sequence_labels(sequences);
  const std::size_t n = sequences.size();
  m.values.assign(n * n, 0.0);

  std::vector<std::pair<std::size_t, std::size_t>> work;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) work.push_back({i, j});

  const uint32_t workers = std::max<uint32_t>(1, std::min<uint32_t>(threads, uint32_t(work.size())));
  std::vector<double> results(work.size());
  auto run_range = [&](std::size_t w) {
    for (std::size_t t = w; t < work.size(); t += workers)
      results[t] = pairwise_distance(*sequences[work[t].first], *sequences[work[t].second], params);
  };
  if (workers == 1) {
    run_range(0);
  } else {
    std::vector<std::thread> pool;
    for (uint32_t w = 0; w < workers; ++w) pool.emplace_back(run_range, w);
    for (auto& t : pool) t.join();
  }
  for (std::size_t t = 0; t < work.size(); ++t) {
    m.at(work[t].first, work[t].second) = results[t];
    m.at(work[t].second, work[t].first) = results[t];
  }
  return m;
}

PhyloTree neighbor_joining(const DistanceMatrix& m) {
  m.validate();
  const std::size_t n = m.size();
  if (n < 2) fail(Errc::invalid_matrix, "need at least two labels");

  PhyloTree tree;
  for (const std::string& label : m.labels) tree.nodes.push_back({label, {}, {}});

  if (n == 2) {
    const double d = m.at(0, 1);
    tree.nodes.push_back({});
    tree.nodes[2].joined = {0, 1};
    tree.nodes[2].neighbors = {{0, d / 2.0}, {1, d / 2.0}};
    tree.nodes[0].neighbors = {{2, d / 2.0}};
    tree.nodes[1].neighbors = {{2, d / 2.0}};
    tree.top = 2;
    tree.rooted = true;  // display-rooted midpoint of the single edge
    return tree;
  }

  // working copy indexed by node id
  std::vector<int> active(n);
  std::iota(active.begin(), active.end(), 0);
  std::vector<std::vector<double>> dist(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) dist[i][j] = m.at(i, j);

  auto d_of = [&](int a, int b) { return dist[std::size_t(a)][std::size_t(b)]; };

  auto add_edge = [&](int a, int b, double len) {
    tree.nodes[std::size_t(a)].neighbors.push_back({b, len});
    tree.nodes[std::size_t(b)].neighbors.push_back({a, len});
  };

  while (active.size() > 3) {
    const std::size_t r = active.size();
    std::vector<double> row_sum(r, 0.0);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j)
        if (i != j) row_sum[i] += d_of(active[i], active[j]);

    double best_q = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 1;
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = i + 1; j < r; ++j) {
        const double q = double(r - 2) * d_of(active[i], active[j]) - row_sum[i] - row_sum[j];
        if (q < best_q) {
          best_q = q;
          bi = i;
          bj = j;
        }
      }
    }

    const int a = active[bi], b = active[bj];
    const double dab = d_of(a, b);
    double la = 0.5 * dab + (row_sum[bi] - row_sum[bj]) / (2.0 * double(r - 2));
    double lb = dab - la;
    if (la < 0.0) {  // clamp, moving the deficit to the sibling edge
      lb += la;
      la = 0.0;
    }
    if (lb < 0.0) {
      la = std::max(0.0, la + lb);
      lb = 0.0;
    }

    const int u = int(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[std::size_t(u)].joined = {a, b};
    add_edge(u, a, la);
    add_edge(u, b, lb);

    for (auto& row : dist) row.push_back(0.0);
    dist.push_back(std::vector<double>(tree.nodes.size(), 0.0));
    for (std::size_t t = 0; t < r; ++t) {
      const int c = active[t];
      if (c == a || c == b) continue;
      const double v = 0.5 * (d_of(a, c) + d_of(b, c) - dab);
      dist[std::size_t(u)][std::size_t(c)] = v;
      dist[std::size_t(c)][std::size_t(u)] = v;
    }

    active.erase(active.begin() + long(bj));
    active.erase(active.begin() + long(bi));
    active.push_back(u);
  }

  // final star over the last three nodes
  const int a = active[0], b = active[1], c = active[2];
  const int u = int(tree.nodes.size());
  tree.nodes.push_back({});
  tree.nodes[std::size_t(u)].joined = {a, b, c};
  const double la = std::max(0.0, 0.5 * (d_of(a, b) + d_of(a, c) - d_of(b, c)));
  const double lb = std::max(0.0, 0.5 * (d_of(a, b) + d_of(b, c) - d_of(a, c)));
  const double lc = std::max(0.0, 0.5 * (d_of(a, c) + d_of(b, c) - d_of(a, b)));
  add_edge(u, a, la);
  add_edge(u, b, lb);
  add_edge(u, c, lc);
  tree.top = u;
  tree.rooted = false;
  return tree;
}

Msa progressive_msa(const std::vector<const VideoDna*>& sequences, const PhyloTree& tree,
                    const ScoringParams& params) {
  if (sequences.empty()) fail(Errc::empty_input, "no sequences");
  if (params.mode != ScoreMode::tfidf)
    fail(Errc::mode_mismatch, "progressive alignment runs on mean profiles in tfidf mode");
  if (params.idf == nullptr) fail(Errc::mode_mismatch, "tfidf mode requires idf weights");

  const std::vector<std::string> labels = sequence_labels(sequences);
  // leaves must match sequence labels one to one
  std::vector<int> leaf_of_sequence(sequences.size(), -1);
  {
    std::size_t tree_leaves = 0;
    for (std::size_t node = 0; node < tree.nodes.size(); ++node) {
      if (!tree.nodes[node].is_leaf()) continue;
      ++tree_leaves;
      const auto it = std::find(labels.begin(), labels.end(), tree.nodes[node].label);
      if (it == labels.end())
        fail(Errc::label_mismatch, "tree leaf has no sequence: " + tree.nodes[node].label);
      leaf_of_sequence[std::size_t(it - labels.begin())] = int(node);
    }
    if (tree_leaves != sequences.size())
      fail(Errc::label_mismatch, "leaf count does not match sequence count");
    for (int leaf : leaf_of_sequence)
      if (leaf < 0) fail(Errc::label_mismatch, "sequence missing from the tree");
  }

  const std::size_t d = sequences.front()->dim();
  for (const VideoDna* s : sequences)
    if (s->dim() != d) fail(Errc::dimension_mismatch, "sequence dimensions differ");

  struct Profile {
    std::vector<std::size_t> members;            // sequence indices
    std::vector<std::vector<int32_t>> rows;      // per member: column -> src index or gap
    std::vector<VisualNucleotide> column_means;  // mean of non-gap member nucleotides
  };

  auto leaf_profile = [&](std::size_t seq_index) {
    Profile p;
    p.members = {seq_index};
    const VideoDna& dna = *sequences[seq_index];
    p.rows.resize(1);
    p.rows[0].resize(dna.size());
    std::iota(p.rows[0].begin(), p.rows[0].end(), 0);
    p.column_means.reserve(dna.size());
    for (const auto& nt : dna.nucleotides) p.column_means.push_back(nt);
    return p;
  };

  auto merge = [&](const Profile& pa, const Profile& pb) {
    // align the two column-mean pseudo-sequences globally
    VideoDna va, vb;
    va.nucleotides = pa.column_means;
    vb.nucleotides = pb.column_means;
    const Alignment alignment = global_align(va, vb, params);

    Profile out;
    out.members = pa.members;
    out.members.insert(out.members.end(), pb.members.begin(), pb.members.end());
    out.rows.resize(out.members.size());

    const std::size_t cols = alignment.path.size();
    for (auto& row : out.rows) row.reserve(cols);
    out.column_means.reserve(cols);

    for (const AlignStep& step : alignment.path) {
      const bool take_a = step.kind != AlignStep::Kind::gap_in_x;  // consumes a column of pa
      const bool take_b = step.kind != AlignStep::Kind::gap_in_y;  // consumes a column of pb
      for (std::size_t r = 0; r < pa.rows.size(); ++r)
        out.rows[r].push_back(take_a ? pa.rows[r][step.i] : kGapIndex);
      for (std::size_t r = 0; r < pb.rows.size(); ++r)
        out.rows[pa.rows.size() + r].push_back(take_b ? pb.rows[r][step.j] : kGapIndex);

      VisualNucleotide mean;
      mean.values.assign(d, 0.0f);
      std::size_t contributors = 0;
      for (std::size_t r = 0; r < out.members.size(); ++r) {
        const int32_t src = out.rows[r].back();
        if (src == kGapIndex) continue;
        const auto& values = sequences[out.members[r]]->nucleotides[std::size_t(src)].values;
        for (std::size_t v = 0; v < d; ++v) mean.values[v] += values[v];
        ++contributors;
      }
      if (contributors > 0)
        for (float& v : mean.values) v /= float(contributors);
      out.column_means.push_back(std::move(mean));
    }
    return out;
  };

  // follow the join order recorded in the tree
  std::vector<Profile> profiles(tree.nodes.size());
  std::vector<bool> ready(tree.nodes.size(), false);
  auto build = [&](auto&& self, int node) -> void {
    if (ready[std::size_t(node)]) return;
    const PhyloNode& pn = tree.nodes[std::size_t(node)];
    if (pn.is_leaf()) {
      const auto it = std::find(labels.begin(), labels.end(), pn.label);
      profiles[std::size_t(node)] = leaf_profile(std::size_t(it - labels.begin()));
    } else {
      for (int child : pn.joined) self(self, child);
      Profile acc = profiles[std::size_t(pn.joined.front())];
      for (std::size_t c = 1; c < pn.joined.size(); ++c)
        acc = merge(acc, profiles[std::size_t(pn.joined[c])]);
      profiles[std::size_t(node)] = std::move(acc);
    }
    ready[std::size_t(node)] = true;
  };
  if (tree.top < 0) fail(Errc::invalid_matrix, "tree has no top node");
  build(build, tree.top);

  const Profile& final_profile = profiles[std::size_t(tree.top)];
  Msa msa;
  msa.labels = labels;
  msa.rows.resize(sequences.size());
  for (std::size_t r = 0; r < final_profile.members.size(); ++r)
    msa.rows[final_profile.members[r]] = final_profile.rows[r];
  return msa;
}

std::string to_newick(const PhyloTree& tree) {
  if (tree.nodes.empty()) fail(Errc::invalid_matrix, "empty tree");
  const PhyloTree display = tree.rooted ? tree : midpoint_root(tree);
  std::string out;
  emit_subtree(display, display.top, -1, out);
  out += ";";
  return out;
}

PhyloTree parse_newick(const std::string& text) {
  NewickParser parser(text);
  const int root = parser.parse_node();
  if (parser.at >= text.size() || text[parser.at] != ';')
    fail(Errc::bad_format, "newick text must end with ';'");
  parser.tree.top = root;
  parser.tree.rooted = true;
  return parser.tree;
}

}  // namespace videodna

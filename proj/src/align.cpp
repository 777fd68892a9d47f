#include "videodna/align.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "videodna/textfmt.hpp"

namespace videodna {

namespace {

enum : uint8_t { kStop = 0, kDiag = 1, kUp = 2, kLeft = 3 };

void validate_gap(const ScoringParams& params) {
  if (params.gap_penalty > 0.0) fail(Errc::bad_format, "gap penalty must be non-positive");
}

struct BitcodeScorer {
  std::span<const Bitcode> x, y;
  double scale, threshold;

  double operator()(uint32_t i, uint32_t j) const {
    return scale * (threshold - double(hamming(x[i], y[j]))) / threshold;
  }
};

struct TfidfScorer {
  const VideoDna* x;
  const VideoDna* y;
  const IdfWeights* idf;
  double scale, rho;

  double operator()(uint32_t i, uint32_t j) const {
    return scale * (1.0 - tfidf_distance(x->nucleotides[i], y->nucleotides[j], *idf) / rho);
  }
};

BitcodeScorer make_bitcode_scorer(std::span<const Bitcode> x, std::span<const Bitcode> y,
                                  const ScoringParams& params) {
  if (params.mode != ScoreMode::bitcode) fail(Errc::mode_mismatch, "params not in bitcode mode");
  if (x.empty() || y.empty()) fail(Errc::empty_input, "cannot align an empty sequence");
  if (params.bitcode_threshold <= 0.0)
    fail(Errc::bad_format, "bitcode threshold must be positive");
  if (x.front().size() != y.front().size())
    fail(Errc::length_mismatch, "bitcode widths differ between sequences");
  validate_gap(params);
  return {x, y, params.match_scale, params.bitcode_threshold};
}

TfidfScorer make_tfidf_scorer(const VideoDna& x, const VideoDna& y, const ScoringParams& params) {
  if (params.mode != ScoreMode::tfidf) fail(Errc::mode_mismatch, "params not in tfidf mode");
  if (x.size() == 0 || y.size() == 0) fail(Errc::empty_input, "cannot align an empty sequence");
  if (params.idf == nullptr) fail(Errc::mode_mismatch, "tfidf mode requires idf weights");
  if (x.dim() != params.idf->weights.size() || y.dim() != params.idf->weights.size())
    fail(Errc::dimension_mismatch, "sequence dimension does not match idf weights");
  if (params.distance_scale <= 0.0) fail(Errc::bad_format, "distance scale must be positive");
  validate_gap(params);
  return {&x, &y, params.idf, params.match_scale, params.distance_scale};
}

// One DP row; identical arithmetic is reused by the checkpoint replay so the
// recovered path matches the full-traceback one bit for bit.
template <class ScoreFn>
void compute_row(std::size_t i, std::size_t n, const ScoreFn& score, double gap, bool local,
                 const std::vector<double>& prev_row, std::vector<double>& cur_row,
                 uint8_t* codes_row) {
  cur_row[0] = local ? 0.0 : double(i) * gap;
  if (codes_row) codes_row[0] = local ? kStop : kUp;
  for (std::size_t j = 1; j <= n; ++j) {
    const double diag = prev_row[j - 1] + score(uint32_t(i - 1), uint32_t(j - 1));
    const double up = prev_row[j] + gap;
    const double left = cur_row[j - 1] + gap;
    double best = diag;
    uint8_t code = kDiag;
    if (up > best) {
      best = up;
      code = kUp;
    }
    if (left > best) {
      best = left;
      code = kLeft;
    }
    if (local && best <= 0.0) {
      best = 0.0;
      code = kStop;
    }
    cur_row[j] = best;
    if (codes_row) codes_row[j] = code;
  }
}

struct WalkState {
  std::size_t i = 0, j = 0;
  std::vector<AlignStep> reversed;
  bool done = false;
};

// Applies one traceback step; returns false on a stop code.
inline bool apply_code(WalkState& w, uint8_t code) {
  switch (code) {
    case kDiag:
      w.reversed.push_back({AlignStep::Kind::match, uint32_t(w.i - 1), uint32_t(w.j - 1)});
      --w.i;
      --w.j;
      return true;
    case kUp:
      w.reversed.push_back({AlignStep::Kind::gap_in_y, uint32_t(w.i - 1), 0});
      --w.i;
      return true;
    case kLeft:
      w.reversed.push_back({AlignStep::Kind::gap_in_x, 0, uint32_t(w.j - 1)});
      --w.j;
      return true;
    default:
      return false;
  }
}

Alignment finish(WalkState& w, double score, std::size_t end_i, std::size_t end_j) {
  Alignment out;
  out.score = score;
  out.path.assign(w.reversed.rbegin(), w.reversed.rend());
  if (out.path.empty()) {
    out.x_begin = out.x_end = 0;
    out.y_begin = out.y_end = 0;
  } else {
    out.x_begin = uint32_t(w.i);
    out.x_end = uint32_t(end_i);
    out.y_begin = uint32_t(w.j);
    out.y_end = uint32_t(end_j);
  }
  return out;
}

template <class ScoreFn>
Alignment dp_align(std::size_t m, std::size_t n, const ScoreFn& score, double gap, bool local,
                   std::size_t area_limit) {
  const std::size_t width = n + 1;
  const bool overflow = (m + 1) > (std::size_t(-1) / width);
  const bool full = !overflow && (m + 1) * width <= area_limit;

  std::vector<double> prev(width), cur(width);
  for (std::size_t j = 0; j < width; ++j) prev[j] = local ? 0.0 : double(j) * gap;

  double best_val = 0.0;
  std::size_t best_i = 0, best_j = 0;
  auto track_best = [&](std::size_t i, const std::vector<double>& row) {
    if (!local) return;
    for (std::size_t j = 1; j <= n; ++j)
      if (row[j] > best_val) {
        best_val = row[j];
        best_i = i;
        best_j = j;
      }
  };

  if (full) {
    std::vector<uint8_t> codes((m + 1) * width);
    for (std::size_t j = 0; j < width; ++j) codes[j] = (local || j == 0) ? kStop : kLeft;
    for (std::size_t i = 1; i <= m; ++i) {
      compute_row(i, n, score, gap, local, prev, cur, codes.data() + i * width);
      track_best(i, cur);
      std::swap(prev, cur);
    }
    const double end_score = local ? best_val : prev[n];
    WalkState w;
    w.i = local ? best_i : m;
    w.j = local ? best_j : n;
    if (local && best_val <= 0.0) return finish(w, 0.0, 0, 0);
    const std::size_t end_i = w.i, end_j = w.j;
    while (!(w.i == 0 && w.j == 0)) {
      if (!apply_code(w, codes[w.i * width + w.j])) break;
    }
    return finish(w, end_score, end_i, end_j);
  }

  // Row checkpoints plus per-block traceback replay.
  const std::size_t block = std::max<std::size_t>(1, std::size_t(std::sqrt(8.0 * double(m + 1))));
  std::vector<std::vector<double>> checkpoints;
  checkpoints.push_back(prev);
  for (std::size_t i = 1; i <= m; ++i) {
    compute_row(i, n, score, gap, local, prev, cur, nullptr);
    track_best(i, cur);
    std::swap(prev, cur);
    if (i % block == 0) checkpoints.push_back(prev);
  }
  const double end_score = local ? best_val : prev[n];

  WalkState w;
  w.i = local ? best_i : m;
  w.j = local ? best_j : n;
  if (local && best_val <= 0.0) return finish(w, 0.0, 0, 0);
  const std::size_t end_i = w.i, end_j = w.j;

  std::vector<uint8_t> block_codes(block * width);
  std::vector<double> replay_prev(width), replay_cur(width);
  bool done = false;
  while (!done) {
    if (w.i == 0) {
      if (local) break;
      while (w.j > 0) apply_code(w, kLeft);
      break;
    }
    const std::size_t r0 = ((w.i - 1) / block) * block;
    const std::size_t r1 = std::min(m, r0 + block);
    replay_prev = checkpoints[r0 / block];
    for (std::size_t i = r0 + 1; i <= r1; ++i) {
      compute_row(i, n, score, gap, local, replay_prev, replay_cur,
                  block_codes.data() + (i - r0 - 1) * width);
      std::swap(replay_prev, replay_cur);
    }
    while (w.i > r0) {
      if (!apply_code(w, block_codes[(w.i - r0 - 1) * width + w.j])) {
        done = true;
        break;
      }
      if (!local && w.i == 0 && w.j == 0) {
        done = true;
        break;
      }
    }
  }
  return finish(w, end_score, end_i, end_j);
}

template <class ScoreFn>
Alignment dp_banded(std::size_t m, std::size_t n, const ScoreFn& score, double gap,
                    int64_t center, uint32_t halfwidth) {
  const std::size_t width = n + 1;
  const std::size_t bandwidth = 2 * std::size_t(halfwidth) + 1;
  std::vector<double> prev(width, 0.0), cur(width, 0.0);
  std::vector<uint8_t> codes((m + 1) * bandwidth, kStop);

  double best_val = 0.0;
  std::size_t best_i = 0, best_j = 0;
  for (std::size_t i = 1; i <= m; ++i) {
    const int64_t lo = int64_t(i) + center - int64_t(halfwidth);
    const int64_t hi = int64_t(i) + center + int64_t(halfwidth);
    const int64_t jlo = std::max<int64_t>(1, lo);
    const int64_t jhi = std::min<int64_t>(int64_t(n), hi);
    std::fill(cur.begin(), cur.end(), 0.0);
    for (int64_t j = jlo; j <= jhi; ++j) {
      const double diag = prev[std::size_t(j - 1)] + score(uint32_t(i - 1), uint32_t(j - 1));
      const double up = prev[std::size_t(j)] + gap;
      const double left = cur[std::size_t(j - 1)] + gap;
      double best = diag;
      uint8_t code = kDiag;
      if (up > best) {
        best = up;
        code = kUp;
      }
      if (left > best) {
        best = left;
        code = kLeft;
      }
      if (best <= 0.0) {
        best = 0.0;
        code = kStop;
      }
      cur[std::size_t(j)] = best;
      codes[i * bandwidth + std::size_t(j - lo)] = code;
      if (best > best_val) {
        best_val = best;
        best_i = i;
        best_j = std::size_t(j);
      }
    }
    std::swap(prev, cur);
  }

  WalkState w;
  w.i = best_i;
  w.j = best_j;
  if (best_val <= 0.0) return finish(w, 0.0, 0, 0);
  const std::size_t end_i = w.i, end_j = w.j;
  while (w.i > 0) {
    const int64_t lo = int64_t(w.i) + center - int64_t(halfwidth);
    const uint8_t code = codes[w.i * bandwidth + std::size_t(int64_t(w.j) - lo)];
    if (!apply_code(w, code)) break;
  }
  return finish(w, best_val, end_i, end_j);
}

std::span<const Bitcode> codes_of(const VideoDna& dna) {
  if (!dna.has_bitcodes())
    fail(Errc::mode_mismatch, "bitcode scoring requires sequences with bitcodes");
  return dna.bitcodes;
}

}  // namespace

double score_substitution(const Bitcode& a, const Bitcode& b, const ScoringParams& params) {
  if (params.mode != ScoreMode::bitcode) fail(Errc::mode_mismatch, "params not in bitcode mode");
  if (params.bitcode_threshold <= 0.0)
    fail(Errc::bad_format, "bitcode threshold must be positive");
  return params.match_scale * (params.bitcode_threshold - double(hamming(a, b))) /
         params.bitcode_threshold;
}

double score_substitution(const VisualNucleotide& a, const VisualNucleotide& b,
                          const ScoringParams& params) {
  if (params.mode != ScoreMode::tfidf) fail(Errc::mode_mismatch, "params not in tfidf mode");
  if (params.idf == nullptr) fail(Errc::mode_mismatch, "tfidf mode requires idf weights");
  if (params.distance_scale <= 0.0) fail(Errc::bad_format, "distance scale must be positive");
  return params.match_scale * (1.0 - tfidf_distance(a, b, *params.idf) / params.distance_scale);
}

Alignment local_align(const VideoDna& x, const VideoDna& y, const ScoringParams& params) {
  if (x.size() == 0 || y.size() == 0) fail(Errc::empty_input, "cannot align an empty sequence");
  if (params.mode == ScoreMode::bitcode) {
    const auto scorer = make_bitcode_scorer(codes_of(x), codes_of(y), params);
    return dp_align(x.size(), y.size(), scorer, params.gap_penalty, true,
                    params.traceback_area_limit);
  }
  const auto scorer = make_tfidf_scorer(x, y, params);
  return dp_align(x.size(), y.size(), scorer, params.gap_penalty, true,
                  params.traceback_area_limit);
}

Alignment banded_local_align(const VideoDna& x, const VideoDna& y, const ScoringParams& params,
                             int64_t diagonal_center, uint32_t band_halfwidth) {
  if (x.size() == 0 || y.size() == 0) fail(Errc::empty_input, "cannot align an empty sequence");
  if (params.mode == ScoreMode::bitcode) {
    const auto scorer = make_bitcode_scorer(codes_of(x), codes_of(y), params);
    return dp_banded(x.size(), y.size(), scorer, params.gap_penalty, diagonal_center,
                     band_halfwidth);
  }
  const auto scorer = make_tfidf_scorer(x, y, params);
  return dp_banded(x.size(), y.size(), scorer, params.gap_penalty, diagonal_center,
                   band_halfwidth);
}

Alignment banded_local_align(std::span<const Bitcode> x, std::span<const Bitcode> y,
                             const ScoringParams& params, int64_t diagonal_center,
                             uint32_t band_halfwidth) {
  const auto scorer = make_bitcode_scorer(x, y, params);
  return dp_banded(x.size(), y.size(), scorer, params.gap_penalty, diagonal_center,
                   band_halfwidth);
}

Alignment global_align(const VideoDna& x, const VideoDna& y, const ScoringParams& params) {
  if (x.size() == 0 || y.size() == 0) fail(Errc::empty_input, "cannot align an empty sequence");
  if (params.mode == ScoreMode::bitcode) {
    const auto scorer = make_bitcode_scorer(codes_of(x), codes_of(y), params);
    return dp_align(x.size(), y.size(), scorer, params.gap_penalty, false,
                    params.traceback_area_limit);
  }
  const auto scorer = make_tfidf_scorer(x, y, params);
  return dp_align(x.size(), y.size(), scorer, params.gap_penalty, false,
                  params.traceback_area_limit);
}

double recompute_path_score(const VideoDna& x, const VideoDna& y, const Alignment& alignment,
                            const ScoringParams& params) {
  double score = 0.0;
  for (const AlignStep& step : alignment.path) {
    if (step.kind == AlignStep::Kind::match) {
      if (params.mode == ScoreMode::bitcode)
        score += score_substitution(x.bitcodes[step.i], y.bitcodes[step.j], params);
      else
        score += score_substitution(x.nucleotides[step.i], y.nucleotides[step.j], params);
    } else {
      score += params.gap_penalty;
    }
  }
  return score;
}

std::string format_alignment(const Alignment& alignment) {
  std::string out = "score=" + format_double(alignment.score);
  out += " xspan=" + std::to_string(alignment.x_begin) + "-" + std::to_string(alignment.x_end);
  out += " yspan=" + std::to_string(alignment.y_begin) + "-" + std::to_string(alignment.y_end);
  out += "\n";
  for (const AlignStep& step : alignment.path) {
    switch (step.kind) {
      case AlignStep::Kind::match:
        out += "M " + std::to_string(step.i) + " " + std::to_string(step.j) + "\n";
        break;
      case AlignStep::Kind::gap_in_x:
        out += "GX " + std::to_string(step.j) + "\n";
        break;
      case AlignStep::Kind::gap_in_y:
        out += "GY " + std::to_string(step.i) + "\n";
        break;
    }
  }
  return out;
}

Alignment parse_alignment(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header)) fail(Errc::bad_format, "empty alignment text");

  Alignment out;
  std::istringstream hs(header);
  std::string token;
  bool have_score = false;
  while (hs >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) fail(Errc::bad_format, "malformed alignment header");
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "score") {
      out.score = parse_double(value);
      have_score = true;
    } else if (key == "xspan" || key == "yspan") {
      const auto dash = value.find('-');
      if (dash == std::string::npos) fail(Errc::bad_format, "malformed span");
      const uint32_t b = uint32_t(std::stoul(value.substr(0, dash)));
      const uint32_t e = uint32_t(std::stoul(value.substr(dash + 1)));
      if (key == "xspan") {
        out.x_begin = b;
        out.x_end = e;
      } else {
        out.y_begin = b;
        out.y_end = e;
      }
    } else {
      fail(Errc::bad_format, "unknown alignment header field: " + key);
    }
  }
  if (!have_score) fail(Errc::bad_format, "alignment header missing score");

  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    AlignStep step;
    if (kind == "M") {
      step.kind = AlignStep::Kind::match;
      if (!(ls >> step.i >> step.j)) fail(Errc::bad_format, "malformed match step");
    } else if (kind == "GX") {
      step.kind = AlignStep::Kind::gap_in_x;
      if (!(ls >> step.j)) fail(Errc::bad_format, "malformed gap step");
    } else if (kind == "GY") {
      step.kind = AlignStep::Kind::gap_in_y;
      if (!(ls >> step.i)) fail(Errc::bad_format, "malformed gap step");
    } else {
      fail(Errc::bad_format, "unknown alignment step: " + kind);
    }
    out.path.push_back(step);
  }
  return out;
}

}  // namespace videodna

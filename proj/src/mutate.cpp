#include "videodna/mutate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "videodna/textfmt.hpp"

namespace videodna {

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

uint64_t derive_seed(uint64_t seed, uint64_t salt) { return splitmix64(seed ^ splitmix64(salt)); }

double strength_value(const MutationSpec& spec, const char* key, const double table[3]) {
  if (spec.strength < 1 || spec.strength > 3)
    fail(Errc::bad_format, "mutation strength must be 1, 2 or 3");
  const auto it = spec.params.find(key);
  return it != spec.params.end() ? it->second : table[spec.strength - 1];
}

double bag_mass(const std::vector<float>& v) {
  double m = 0.0;
  for (float x : v) m += x;
  return m;
}

void renormalize_mass(std::vector<float>& v, double target) {
  const double mass = bag_mass(v);
  if (mass <= 0.0 || target <= 0.0) return;
  const float f = float(target / mass);
  for (float& x : v) x *= f;
}

std::vector<std::size_t> pick_distinct(std::mt19937_64& rng, std::size_t count, std::size_t lo,
                                       std::size_t hi) {
  std::set<std::size_t> chosen;
  std::uniform_int_distribution<std::size_t> dist(lo, hi - 1);
  while (chosen.size() < count && chosen.size() < hi - lo) chosen.insert(dist(rng));
  return {chosen.begin(), chosen.end()};
}

// fixed sparse pattern over the bottom-quadrant blocks, shared by every call
std::vector<std::size_t> overlay_pattern(std::size_t block, std::size_t count) {
  std::mt19937_64 rng(0x0B5E55EDC0FFEEull);
  std::vector<std::size_t> bins = pick_distinct(rng, count, 0, block);
  return bins;
}

VisualNucleotide make_foreign_nucleotide(std::size_t d, std::mt19937_64& rng, double mass) {
  VisualNucleotide nt;
  nt.values.assign(d, 0.0f);
  const std::size_t active = std::max<std::size_t>(4, d / 18);
  std::uniform_int_distribution<std::size_t> word(0, d - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < active; ++i)
    nt.values[word(rng)] += float(-std::log(1.0 - unit(rng) * (1.0 - 1e-12)));
  renormalize_mass(nt.values, mass);
  return nt;
}

struct Span {
  std::size_t start = 0;
  std::size_t length = 0;
};

Span pick_span(std::mt19937_64& rng, const MutationSpec& spec, std::size_t seq_len,
               double default_fraction) {
  Span s;
  const auto len_it = spec.params.find("span_length");
  if (len_it != spec.params.end())
    s.length = std::size_t(len_it->second);
  else
    s.length = std::max<std::size_t>(1, std::size_t(std::lround(default_fraction * seq_len)));
  s.length = std::min(s.length, seq_len);
  const auto start_it = spec.params.find("span_start");
  if (start_it != spec.params.end()) {
    s.start = std::min(std::size_t(start_it->second), seq_len - s.length);
  } else {
    std::uniform_int_distribution<std::size_t> dist(0, seq_len - s.length);
    s.start = dist(rng);
  }
  return s;
}

}  // namespace

bool is_spatial(MutationKind kind) {
  switch (kind) {
    case MutationKind::substitution_noise:
    case MutationKind::quadrant_crop:
    case MutationKind::histogram_rescale:
    case MutationKind::overlay_inject:
      return true;
    default:
      return false;
  }
}

std::string to_string(MutationKind kind) {
  switch (kind) {
    case MutationKind::substitution_noise: return "substitution_noise";
    case MutationKind::quadrant_crop: return "quadrant_crop";
    case MutationKind::histogram_rescale: return "histogram_rescale";
    case MutationKind::overlay_inject: return "overlay_inject";
    case MutationKind::indel: return "indel";
    case MutationKind::fade_blend: return "fade_blend";
    case MutationKind::local_speed: return "local_speed";
    case MutationKind::substitution_segment: return "substitution_segment";
    case MutationKind::time_shift: return "time_shift";
  }
  return "unknown";
}

MutationKind mutation_kind_from_string(const std::string& name) {
  for (int k = int(MutationKind::substitution_noise); k <= int(MutationKind::time_shift); ++k)
    if (to_string(MutationKind(k)) == name) return MutationKind(k);
  fail(Errc::bad_format, "unknown mutation kind: " + name);
}

double MutationSpec::param(const std::string& key, double fallback) const {
  const auto it = params.find(key);
  return it != params.end() ? it->second : fallback;
}

VisualNucleotide mutate_nucleotide(const VisualNucleotide& x, const MutationSpec& spec) {
  if (!is_spatial(spec.kind))
    fail(Errc::kind_mismatch, to_string(spec.kind) + " is not a per-nucleotide mutation");
  const std::size_t d = x.values.size();
  if (d == 0 || d % 4 != 0)
    fail(Errc::dimension_mismatch, "bag dimension must be a positive multiple of 4");
  const std::size_t block = d / 4;

  std::mt19937_64 rng(spec.seed);
  VisualNucleotide out = x;

  switch (spec.kind) {
    case MutationKind::substitution_noise: {
      static const double kFractions[3] = {0.05, 0.15, 0.30};
      const double fraction = strength_value(spec, "fraction", kFractions);
      if (fraction == 0.0) break;
      for (std::size_t q = 0; q < 4; ++q) {
        float* quad = out.values.data() + q * block;
        double mass = 0.0;
        for (std::size_t i = 0; i < block; ++i) mass += quad[i];
        if (mass <= 0.0) continue;
        for (std::size_t i = 0; i < block; ++i) quad[i] *= float(1.0 - fraction);
        const std::size_t targets = std::max<std::size_t>(1, block / 32);
        const auto bins = pick_distinct(rng, targets, 0, block);
        const float add = float(fraction * mass / double(bins.size()));
        for (std::size_t bin : bins) quad[bin] += add;
      }
      break;
    }
    case MutationKind::quadrant_crop: {
      static const double kCrop[3] = {0.1, 0.25, 0.5};
      const double c = strength_value(spec, "c", kCrop);
      const double original_mass = bag_mass(out.values);
      std::size_t quadrant;
      const auto it = spec.params.find("quadrant");
      if (it != spec.params.end()) {
        quadrant = std::size_t(it->second);
        if (quadrant > 3) fail(Errc::bad_format, "quadrant must be 0..3");
      } else {
        quadrant = std::uniform_int_distribution<std::size_t>(0, 3)(rng);
      }
      float* quad = out.values.data() + quadrant * block;
      for (std::size_t i = 0; i < block; ++i) quad[i] *= float(1.0 - c);
      renormalize_mass(out.values, original_mass);
      break;
    }
    case MutationKind::histogram_rescale: {
      static const double kGamma[3] = {0.9, 0.75, 0.5};
      const double gamma = strength_value(spec, "gamma", kGamma);
      const double original_mass = bag_mass(out.values);
      for (float& v : out.values) v = v > 0.0f ? float(std::pow(double(v), gamma)) : 0.0f;
      renormalize_mass(out.values, original_mass);
      break;
    }
    case MutationKind::overlay_inject: {
      static const double kWeight[3] = {0.05, 0.10, 0.20};
      const double weight = strength_value(spec, "weight", kWeight);
      const double mass = bag_mass(out.values);
      if (mass <= 0.0 || weight == 0.0) break;
      const auto bins = overlay_pattern(block, std::max<std::size_t>(2, block / 24));
      const float add = float(weight * mass / double(2 * bins.size()));
      for (std::size_t q = 2; q < 4; ++q)  // bottom quadrants
        for (std::size_t bin : bins) out.values[q * block + bin] += add;
      break;
    }
    default:
      break;
  }
  return out;
}

MutatedSequence mutate_sequence(const VideoDna& s, const std::vector<MutationSpec>& specs) {
  if (s.size() == 0) fail(Errc::empty_sequence, "cannot mutate an empty sequence");

  MutatedSequence cur;
  cur.dna = s;
  cur.source_map.resize(s.size());
  std::iota(cur.source_map.begin(), cur.source_map.end(), 0);

  for (const MutationSpec& spec : specs) {
    const std::size_t len = cur.dna.size();
    if (len == 0) break;
    std::mt19937_64 rng(spec.seed);

    std::vector<VisualNucleotide> next_values;
    std::vector<int32_t> step_map;  // next position -> current position or gap

    if (is_spatial(spec.kind)) {
      next_values.reserve(len);
      step_map.resize(len);
      std::iota(step_map.begin(), step_map.end(), 0);
      for (std::size_t i = 0; i < len; ++i) {
        MutationSpec per = spec;
        per.seed = derive_seed(spec.seed, i);
        next_values.push_back(mutate_nucleotide(cur.dna.nucleotides[i], per));
      }
    } else {
      switch (spec.kind) {
        case MutationKind::indel: {
          static const double kFraction[3] = {0.05, 0.10, 0.20};
          const double fraction = strength_value(spec, "fraction", kFraction);
          int op = int(spec.param("op", 0));
          if (op == 0) op = std::uniform_int_distribution<int>(1, 2)(rng);
          const Span span = pick_span(rng, spec, len, fraction);
          if (op == 1) {  // delete
            for (std::size_t i = 0; i < len; ++i) {
              if (i >= span.start && i < span.start + span.length) continue;
              next_values.push_back(cur.dna.nucleotides[i]);
              step_map.push_back(int32_t(i));
            }
            if (next_values.empty()) {  // deleting everything keeps one element
              next_values.push_back(cur.dna.nucleotides[0]);
              step_map.push_back(0);
            }
          } else {  // insert blackness (featureless, zero bags)
            const std::size_t d = cur.dna.dim();
            for (std::size_t i = 0; i < len; ++i) {
              if (i == span.start) {
                for (std::size_t t = 0; t < span.length; ++t) {
                  VisualNucleotide black;
                  black.values.assign(d, 0.0f);
                  next_values.push_back(std::move(black));
                  step_map.push_back(kGapIndex);
                }
              }
              next_values.push_back(cur.dna.nucleotides[i]);
              step_map.push_back(int32_t(i));
            }
          }
          break;
        }
        case MutationKind::fade_blend: {
          static const double kFraction[3] = {0.05, 0.10, 0.20};
          const double fraction = strength_value(spec, "fraction", kFraction);
          const Span span = pick_span(rng, spec, len, fraction);
          next_values = cur.dna.nucleotides;
          step_map.resize(len);
          std::iota(step_map.begin(), step_map.end(), 0);
          const std::size_t fade = std::max<std::size_t>(1, span.length / 4);
          for (std::size_t t = 0; t < span.length; ++t) {
            const std::size_t i = span.start + t;
            double black = 1.0;  // blend toward featureless
            if (t < fade) black = double(t + 1) / double(fade + 1);
            const std::size_t from_end = span.length - 1 - t;
            if (from_end < fade) black = std::min(black, double(from_end + 1) / double(fade + 1));
            for (float& v : next_values[i].values) v *= float(1.0 - black);
          }
          break;
        }
        case MutationKind::local_speed: {
          static const double kFactor[3] = {1.25, 1.5, 2.0};
          const double factor = strength_value(spec, "factor", kFactor);
          if (factor <= 0.0) fail(Errc::bad_format, "speed factor must be positive");
          static const double kSpanFraction = 0.5;
          const Span span = pick_span(rng, spec, len, kSpanFraction);
          const std::size_t out_len =
              std::max<std::size_t>(1, std::size_t(std::lround(double(span.length) / factor)));
          for (std::size_t i = 0; i < span.start; ++i) {
            next_values.push_back(cur.dna.nucleotides[i]);
            step_map.push_back(int32_t(i));
          }
          int32_t prev_src = -1;
          for (std::size_t t = 0; t < out_len; ++t) {
            const std::size_t src = span.start +
                std::min(span.length - 1, std::size_t(std::floor(double(t) * factor + 0.5)));
            next_values.push_back(cur.dna.nucleotides[src]);
            // repeats of a slowed-down source interval carry no unique origin
            step_map.push_back(int32_t(src) == prev_src ? kGapIndex : int32_t(src));
            if (int32_t(src) != prev_src) prev_src = int32_t(src);
          }
          for (std::size_t i = span.start + span.length; i < len; ++i) {
            next_values.push_back(cur.dna.nucleotides[i]);
            step_map.push_back(int32_t(i));
          }
          break;
        }
        case MutationKind::substitution_segment: {
          static const double kFraction[3] = {0.05, 0.10, 0.20};
          const double fraction = strength_value(spec, "fraction", kFraction);
          const Span span = pick_span(rng, spec, len, fraction);
          const double mass = bag_mass(cur.dna.nucleotides[span.start].values);
          next_values = cur.dna.nucleotides;
          step_map.resize(len);
          std::iota(step_map.begin(), step_map.end(), 0);
          for (std::size_t t = 0; t < span.length; ++t) {
            next_values[span.start + t] =
                make_foreign_nucleotide(cur.dna.dim(), rng, mass > 0.0 ? mass : 100.0);
            step_map[span.start + t] = kGapIndex;
          }
          break;
        }
        case MutationKind::time_shift: {
          static const double kOffset[3] = {0.25, 0.4, 0.5};
          const double offset = strength_value(spec, "offset", kOffset);
          // without raw frame bags the shift resolves to the nearest interval
          const int64_t shift = std::llround(offset);
          for (std::size_t i = 0; i < len; ++i) {
            const int64_t src = int64_t(i) + shift;
            if (src < 0 || src >= int64_t(len)) continue;
            next_values.push_back(cur.dna.nucleotides[std::size_t(src)]);
            step_map.push_back(int32_t(src));
          }
          if (next_values.empty()) {
            next_values.push_back(cur.dna.nucleotides[0]);
            step_map.push_back(0);
          }
          break;
        }
        default:
          fail(Errc::kind_mismatch, "unsupported mutation kind");
      }
    }

    // compose with the accumulated groundtruth map
    std::vector<int32_t> composed(next_values.size());
    for (std::size_t i = 0; i < next_values.size(); ++i) {
      const int32_t mid = step_map[i];
      composed[i] = mid == kGapIndex ? kGapIndex : cur.source_map[std::size_t(mid)];
    }
    cur.dna.nucleotides = std::move(next_values);
    cur.dna.bitcodes.clear();
    cur.source_map = std::move(composed);
    for (std::size_t i = 0; i < cur.dna.nucleotides.size(); ++i) {
      cur.dna.nucleotides[i].interval_start = double(i) * cur.dna.step;
      cur.dna.nucleotides[i].interval_length = cur.dna.interval_length;
    }
  }
  return cur;
}

PairSet generate_training_pairs(const std::vector<const VideoDna*>& corpus,
                                const std::vector<MutationSpec>& specs, std::size_t n_pos,
                                std::size_t n_neg, uint64_t seed) {
  if (corpus.empty()) fail(Errc::empty_input, "empty corpus");
  std::set<std::string> sources;
  std::size_t total = 0;
  for (const VideoDna* dna : corpus) {
    sources.insert(dna->source_id);
    total += dna->size();
  }
  if (sources.size() < 2)
    fail(Errc::insufficient_sources, "training pairs need at least two distinct sources");
  if (total == 0) fail(Errc::empty_input, "corpus has no nucleotides");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> seq_dist(0, corpus.size() - 1);

  auto sample = [&]() -> std::pair<std::size_t, std::size_t> {
    while (true) {
      const std::size_t s = seq_dist(rng);
      if (corpus[s]->size() == 0) continue;
      std::uniform_int_distribution<std::size_t> pos_dist(0, corpus[s]->size() - 1);
      return {s, pos_dist(rng)};
    }
  };

  PairSet out;
  out.positives.reserve(n_pos);
  for (std::size_t p = 0; p < n_pos; ++p) {
    const auto [s, i] = sample();
    const VisualNucleotide& nt = corpus[s]->nucleotides[i];
    if (specs.empty()) {
      out.positives.emplace_back(nt, nt);
    } else {
      std::uniform_int_distribution<std::size_t> spec_dist(0, specs.size() - 1);
      MutationSpec spec = specs[spec_dist(rng)];
      spec.seed = derive_seed(seed, 0x706F5000u + p);
      out.positives.emplace_back(nt, mutate_nucleotide(nt, spec));
    }
  }

  out.negatives.reserve(n_neg);
  for (std::size_t p = 0; p < n_neg; ++p) {
    while (true) {
      const auto [s1, i1] = sample();
      const auto [s2, i2] = sample();
      if (corpus[s1]->source_id == corpus[s2]->source_id) continue;
      out.negatives.emplace_back(corpus[s1]->nucleotides[i1], corpus[s2]->nucleotides[i2]);
      break;
    }
  }
  return out;
}

std::vector<MutationSpec> parse_mutation_specs(const std::string& text) {
  std::vector<MutationSpec> specs;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string kind;
    int strength = 0;
    if (!(ls >> kind >> strength)) fail(Errc::bad_format, "malformed mutation spec: " + line);
    MutationSpec spec;
    spec.kind = mutation_kind_from_string(kind);
    spec.strength = strength;
    if (strength < 1 || strength > 3) fail(Errc::bad_format, "strength must be 1..3");
    std::string kv;
    while (ls >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) fail(Errc::bad_format, "expected key=value: " + kv);
      const std::string key = kv.substr(0, eq);
      const double value = parse_double(kv.substr(eq + 1));
      if (key == "seed")
        spec.seed = uint64_t(value);
      else
        spec.params[key] = value;
    }
    specs.push_back(std::move(spec));
  }
  return specs;
}

std::string format_mutation_specs(const std::vector<MutationSpec>& specs) {
  std::string out;
  for (const MutationSpec& spec : specs) {
    out += to_string(spec.kind) + " " + std::to_string(spec.strength);
    for (const auto& [key, value] : spec.params) out += " " + key + "=" + format_double(value);
    if (spec.seed != 0) out += " seed=" + format_double(double(spec.seed));
    out += "\n";
  }
  return out;
}

std::vector<VideoDna> synth_corpus(const SynthConfig& config) {
  if (config.sequences == 0 || config.length == 0 || config.dim == 0)
    fail(Errc::bad_format, "synthetic corpus needs sequences, length and dim > 0");
  std::vector<VideoDna> corpus;
  corpus.reserve(config.sequences);
  const std::size_t active = std::max<std::size_t>(8, config.dim / 18);

  for (std::size_t s = 0; s < config.sequences; ++s) {
    std::mt19937_64 rng(derive_seed(config.seed, s));
    std::uniform_int_distribution<std::size_t> word(0, config.dim - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    VideoDna dna;
    dna.interval_length = config.interval_length;
    dna.step = config.step;
    dna.source_id = "synth-" + std::to_string(s);
    dna.nucleotides.reserve(config.length);

    // evolving active set gives neighbouring intervals shared content
    std::vector<std::size_t> words(active);
    std::vector<float> masses(active);
    for (std::size_t a = 0; a < active; ++a) {
      words[a] = word(rng);
      masses[a] = float(1.0 + 9.0 * unit(rng));
    }
    for (std::size_t i = 0; i < config.length; ++i) {
      for (std::size_t a = 0; a < active; ++a) {
        if (unit(rng) < 0.5) {
          words[a] = word(rng);
          masses[a] = float(1.0 + 9.0 * unit(rng));
        } else {
          masses[a] *= float(0.9 + 0.2 * unit(rng));
        }
      }
      // busy and sparse intervals differ wildly in total feature mass
      const float scale = float(std::exp(3.0 * unit(rng) - 1.5));
      VisualNucleotide nt;
      nt.interval_start = double(i) * config.step;
      nt.interval_length = config.interval_length;
      nt.values.assign(config.dim, 0.0f);
      for (std::size_t a = 0; a < active; ++a) nt.values[words[a]] += masses[a] * scale;
      dna.nucleotides.push_back(std::move(nt));
    }
    corpus.push_back(std::move(dna));
  }
  return corpus;
}

}  // namespace videodna

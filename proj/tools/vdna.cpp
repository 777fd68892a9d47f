#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>

#include "videodna/bench.hpp"
#include "videodna/io.hpp"
#include "videodna/phylo.hpp"

namespace fs = std::filesystem;
using namespace videodna;

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::string slurp_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open: " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail(Errc::io_error, "cannot open for writing: " + path);
  out << text;
  if (!out) fail(Errc::io_error, "write failed: " + path);
}

// corpus directory: manifest.tsv (one relative path per line) or *.vdna sorted
std::vector<std::string> corpus_files(const std::string& dir) {
  std::vector<std::string> files;
  const fs::path manifest = fs::path(dir) / "manifest.tsv";
  if (fs::exists(manifest)) {
    std::ifstream in(manifest);
    std::string line;
    while (std::getline(in, line)) {
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      const auto tab = line.find('\t');
      files.push_back(line.substr(0, tab == std::string::npos ? line.size() : tab));
    }
  } else {
    if (!fs::is_directory(dir)) fail(Errc::io_error, "not a directory: " + dir);
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.path().extension() == ".vdna") files.push_back(entry.path().filename().string());
    std::sort(files.begin(), files.end());
  }
  if (files.empty()) fail(Errc::empty_input, "no .vdna files under " + dir);
  return files;
}

std::vector<VideoDna> load_corpus(const std::string& dir) {
  std::vector<VideoDna> corpus;
  for (const std::string& rel : corpus_files(dir))
    corpus.push_back(read_video_dna((fs::path(dir) / rel).string(), rel));
  return corpus;
}

std::vector<MutationSpec> load_specs(const std::string& path, uint64_t base_seed) {
  std::vector<MutationSpec> specs = parse_mutation_specs(slurp_text(path));
  for (std::size_t i = 0; i < specs.size(); ++i)
    if (specs[i].seed == 0) specs[i].seed = splitmix64(base_seed ^ (0xABCDull + i));
  return specs;
}

std::vector<MutationSpec> default_bench_specs() {
  std::vector<MutationSpec> specs;
  for (const MutationKind kind :
       {MutationKind::substitution_noise, MutationKind::quadrant_crop,
        MutationKind::histogram_rescale, MutationKind::overlay_inject, MutationKind::indel,
        MutationKind::time_shift}) {
    MutationSpec spec;
    spec.kind = kind;
    spec.strength = 1;
    specs.push_back(spec);
  }
  return specs;
}

struct ScoringCli {
  std::string mode = "bitcode";
  std::string model_path;
  std::string idf_path;
  double threshold = -1.0;  // bitcode d0; <0 -> from model or 32
  double rho = 1.0;
  double s0 = 2.0;
  double gap = -1.0;

  void add_options(CLI::App* cmd, bool with_mode = true) {
    if (with_mode)
      cmd->add_option("--mode", mode, "scoring mode: bitcode or tfidf")
          ->check(CLI::IsMember({"bitcode", "tfidf"}));
    cmd->add_option("--model", model_path, "metric model (.vdmm), supplies d0");
    cmd->add_option("--d0", threshold, "bitcode decision threshold override");
    cmd->add_option("--idf", idf_path, "idf weights (.vdif) for tfidf mode");
    cmd->add_option("--rho", rho, "tfidf distance scale");
    cmd->add_option("--s0", s0, "match score scale")->capture_default_str();
    cmd->add_option("--gap", gap, "gap penalty (non-positive)")->capture_default_str();
  }

  // idf storage must outlive the params
  IdfWeights idf;

  ScoringParams build() {
    ScoringParams p;
    p.match_scale = s0;
    p.gap_penalty = gap;
    if (mode == "bitcode") {
      p.mode = ScoreMode::bitcode;
      double d0 = threshold;
      if (d0 < 0.0 && !model_path.empty()) d0 = read_metric_model(model_path).threshold;
      if (d0 < 0.0) d0 = 32.0;
      p.bitcode_threshold = d0;
    } else {
      p.mode = ScoreMode::tfidf;
      if (idf_path.empty()) fail(Errc::mode_mismatch, "tfidf mode needs --idf");
      idf = read_idf(idf_path);
      p.idf = &idf;
      p.distance_scale = rho;
    }
    return p;
  }
};

std::string msa_to_tsv(const Msa& msa) {
  std::string out = "# one row per sequence; entries are source indices or '-'\n";
  for (std::size_t r = 0; r < msa.rows.size(); ++r) {
    out += msa.labels[r];
    for (const int32_t e : msa.rows[r])
      out += e == kGapIndex ? "\t-" : "\t" + std::to_string(e);
    out += "\n";
  }
  return out;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    spit_text(path, text);
}

int run_cli(int argc, char** argv) {
  CLI::App app{"video DNA toolkit: sequencing, metric learning, search, alignment, phylogeny"};
  app.require_subcommand(1);
  app.set_config("--config", "videodna.toml", "key=value configuration file");

  // vocab-train
  auto* vocab_cmd = app.add_subcommand("vocab-train", "cluster descriptors into a vocabulary");
  std::vector<std::string> vt_features;
  std::string vt_kind = "gray", vt_out;
  uint32_t vt_k = 256, vt_iters = 25;
  uint64_t vt_seed = 1;
  vocab_cmd->add_option("--features", vt_features, "feature text files")->required();
  vocab_cmd->add_option("--kind", vt_kind, "gray or color")
      ->check(CLI::IsMember({"gray", "color"}));
  vocab_cmd->add_option("-k,--words", vt_k, "vocabulary size")->capture_default_str();
  vocab_cmd->add_option("--iters", vt_iters, "max Lloyd iterations")->capture_default_str();
  vocab_cmd->add_option("--seed", vt_seed, "rng seed")->capture_default_str();
  vocab_cmd->add_option("-o,--out", vt_out, "output .vdvc")->required();
  vocab_cmd->callback([&] {
    const bool gray = vt_kind == "gray";
    std::vector<std::vector<float>> descriptors;
    for (const std::string& path : vt_features)
      for (const FrameFeatures& f : read_feature_file(path))
        for (const FeaturePoint& p : f.points) {
          if (gray)
            descriptors.emplace_back(p.gray_desc.begin(), p.gray_desc.end());
          else
            descriptors.emplace_back(p.color_desc.begin(), p.color_desc.end());
        }
    const Vocabulary vocab =
        train_vocabulary(descriptors, vt_k, vt_seed, vt_iters,
                         gray ? DescriptorKind::grayscale : DescriptorKind::color);
    write_vocabulary(vt_out, vocab);
    std::cout << "trained " << vocab.k << " words over " << descriptors.size()
              << " descriptors\n";
  });

  // idf
  auto* idf_cmd = app.add_subcommand("idf", "compute idf weights over a corpus");
  std::string idf_db, idf_out;
  idf_cmd->add_option("--db", idf_db, "corpus directory")->required();
  idf_cmd->add_option("-o,--out", idf_out, "output .vdif")->required();
  idf_cmd->callback([&] {
    std::vector<std::vector<float>> bags;
    for (const VideoDna& dna : load_corpus(idf_db))
      for (const VisualNucleotide& nt : dna.nucleotides) bags.push_back(nt.values);
    write_idf(idf_out, compute_idf(bags));
    std::cout << "idf over " << bags.size() << " nucleotides\n";
  });

  // sequence
  auto* seq_cmd = app.add_subcommand("sequence", "pool frame features into video DNA");
  std::string sq_features, sq_ppm_dir, sq_gray, sq_color, sq_out;
  double sq_interval = 2.0, sq_step = 1.0, sq_overlap = 0.10, sq_fps = 25.0;
  uint32_t sq_max_points = 450;
  seq_cmd->add_option("--features", sq_features, "feature text file");
  seq_cmd->add_option("--ppm-dir", sq_ppm_dir, "directory of P6 frames (sorted order)");
  seq_cmd->add_option("--fps", sq_fps, "frame rate for --ppm-dir timestamps")
      ->capture_default_str();
  seq_cmd->add_option("--gray-vocab", sq_gray, "grayscale vocabulary")->required();
  seq_cmd->add_option("--color-vocab", sq_color, "color vocabulary")->required();
  seq_cmd->add_option("--interval", sq_interval, "interval length T, seconds")
      ->capture_default_str();
  seq_cmd->add_option("--step", sq_step, "interval step, seconds")->capture_default_str();
  seq_cmd->add_option("--overlap", sq_overlap, "quadrant overlap fraction")
      ->capture_default_str();
  seq_cmd->add_option("--max-points", sq_max_points, "strongest points kept per frame")
      ->capture_default_str();
  seq_cmd->add_option("-o,--out", sq_out, "output .vdna")->required();
  seq_cmd->callback([&] {
    const Vocabulary gray = read_vocabulary(sq_gray);
    const Vocabulary color = read_vocabulary(sq_color);
    std::vector<FrameFeatures> frames;
    if (!sq_features.empty()) {
      frames = read_feature_file(sq_features);
    } else if (!sq_ppm_dir.empty()) {
      std::vector<std::string> paths;
      for (const auto& entry : fs::directory_iterator(sq_ppm_dir))
        if (entry.path().extension() == ".ppm") paths.push_back(entry.path().string());
      std::sort(paths.begin(), paths.end());
      if (paths.empty()) fail(Errc::empty_input, "no .ppm frames under " + sq_ppm_dir);
      for (std::size_t i = 0; i < paths.size(); ++i) {
        FrameFeatures f = extract_frame_features(read_ppm(paths[i]), sq_max_points);
        f.frame_index = i;
        f.timestamp = double(i) / sq_fps;
        frames.push_back(std::move(f));
      }
    } else {
      fail(Errc::empty_input, "need --features or --ppm-dir");
    }
    std::vector<FrameBag> bags;
    bags.reserve(frames.size());
    SequencerConfig config{sq_interval, sq_step, sq_max_points, sq_overlap};
    for (const FrameFeatures& f : frames) {
      FrameBag bag = build_frame_bag(f, gray, color, sq_overlap);
      bag.timestamp = f.timestamp;
      bags.push_back(std::move(bag));
    }
    VideoDna dna = sequence(bags, config);
    dna.source_id = sq_out;
    write_video_dna(sq_out, dna);
    std::cout << "sequenced " << dna.size() << " nucleotides of dimension " << dna.dim() << "\n";
  });

  // metric-train
  auto* mt_cmd = app.add_subcommand("metric-train", "boost a mutation-invariant binary metric");
  std::string mt_pos_a, mt_pos_b, mt_neg_a, mt_neg_b, mt_out, mt_trace;
  uint32_t mt_bits = 64, mt_subspace = 10;
  uint64_t mt_seed = 1;
  double mt_d0 = -1.0, mt_calibrate = 0.0;
  mt_cmd->add_option("--pos-a", mt_pos_a, "positive pairs, first elements (.vdna)")->required();
  mt_cmd->add_option("--pos-b", mt_pos_b, "positive pairs, second elements (.vdna)")->required();
  mt_cmd->add_option("--neg-a", mt_neg_a, "negative pairs, first elements (.vdna)")->required();
  mt_cmd->add_option("--neg-b", mt_neg_b, "negative pairs, second elements (.vdna)")->required();
  mt_cmd->add_option("--bits", mt_bits, "code width n")->capture_default_str();
  mt_cmd->add_option("--subspace", mt_subspace, "eigen subspace size")->capture_default_str();
  mt_cmd->add_option("--seed", mt_seed, "rng seed")->capture_default_str();
  mt_cmd->add_option("--d0", mt_d0, "decision threshold (default n/2)");
  mt_cmd->add_option("--calibrate-d0", mt_calibrate,
                     "hold out this fraction of pairs and set d0 at their EER threshold");
  mt_cmd->add_option("--trace", mt_trace, "per-round TSV output");
  mt_cmd->add_option("-o,--out", mt_out, "output .vdmm")->required();
  mt_cmd->callback([&] {
    auto load_pairs = [](const std::string& a_path, const std::string& b_path) {
      const VideoDna a = read_video_dna(a_path);
      const VideoDna b = read_video_dna(b_path);
      if (a.size() != b.size()) fail(Errc::length_mismatch, "pair files differ in length");
      std::vector<NucleotidePair> pairs;
      pairs.reserve(a.size());
      for (std::size_t i = 0; i < a.size(); ++i)
        pairs.emplace_back(a.nucleotides[i], b.nucleotides[i]);
      return pairs;
    };
    TrainingSet pairs;
    pairs.positives = load_pairs(mt_pos_a, mt_pos_b);
    pairs.negatives = load_pairs(mt_neg_a, mt_neg_b);

    TrainingSet held;
    if (mt_calibrate > 0.0) {
      const auto split = [&](std::vector<NucleotidePair>& set) {
        const std::size_t keep =
            set.size() - std::size_t(double(set.size()) * std::min(0.5, mt_calibrate));
        std::vector<NucleotidePair> out(set.begin() + long(keep), set.end());
        set.resize(keep);
        return out;
      };
      held.positives = split(pairs.positives);
      held.negatives = split(pairs.negatives);
    }

    TrainConfig config;
    config.bits = mt_bits;
    config.threshold = mt_d0;
    config.subspace_size = mt_subspace;
    config.seed = mt_seed;
    TrainDiagnostics diag;
    MetricModel model = train_metric(pairs, config, &diag);

    if (mt_calibrate > 0.0 && !held.positives.empty() && !held.negatives.empty()) {
      std::vector<double> pos, neg;
      for (const auto& [a, b] : held.positives)
        pos.push_back(hamming(project(a, model), project(b, model)));
      for (const auto& [a, b] : held.negatives)
        neg.push_back(hamming(project(a, model), project(b, model)));
      double threshold = model.threshold;
      const double eer = equal_error_rate(pos, neg, &threshold);
      model.threshold = threshold;
      std::cout << "calibrated d0=" << format_double(threshold) << " at held-out EER "
                << format_double(eer) << "\n";
    }

    write_metric_model(mt_out, model);
    if (model.bits() < diag.requested_bits)
      std::cout << "early stop: installed " << model.bits() << " of " << diag.requested_bits
                << " bits\n";
    if (!mt_trace.empty()) {
      std::string tsv = "# round\tweighted_error\tmargin_exp_loss\n";
      for (std::size_t r = 0; r < diag.round_exp_loss.size(); ++r)
        tsv += std::to_string(r) + "\t" + format_double(diag.round_weighted_error[r]) + "\t" +
               format_double(diag.round_exp_loss[r]) + "\n";
      spit_text(mt_trace, tsv);
    }
    std::cout << "trained " << model.bits() << "-bit metric over dimension " << model.dim()
              << ", d0=" << format_double(model.threshold) << "\n";
  });

  // encode
  auto* enc_cmd = app.add_subcommand("encode", "project nucleotides to bitcodes");
  std::string en_model, en_in, en_out;
  enc_cmd->add_option("--model", en_model, "metric model (.vdmm)")->required();
  enc_cmd->add_option("input", en_in, "input .vdna")->required();
  enc_cmd->add_option("-o,--out", en_out, "output .vdna")->required();
  enc_cmd->callback([&] {
    const MetricModel model = read_metric_model(en_model);
    VideoDna dna = read_video_dna(en_in);
    encode_sequence(dna, model);
    write_video_dna(en_out, dna);
    std::cout << "encoded " << dna.size() << " nucleotides to " << model.bits()
              << "-bit codes\n";
  });

  // index-build
  auto* ib_cmd = app.add_subcommand("index-build", "build the inverted band index");
  std::string ib_db, ib_out;
  uint32_t ib_bands = 4;
  ib_cmd->add_option("--db", ib_db, "corpus directory of encoded .vdna")->required();
  ib_cmd->add_option("--bands", ib_bands, "bands per code")->capture_default_str();
  ib_cmd->add_option("-o,--out", ib_out, "output .vdix")->required();
  ib_cmd->callback([&] {
    const std::vector<VideoDna> corpus = load_corpus(ib_db);
    std::vector<const VideoDna*> refs;
    for (const VideoDna& dna : corpus) refs.push_back(&dna);
    const BandIndex index = build_index(refs, ib_bands);
    write_band_index(ib_out, index);
    std::cout << "indexed " << index.total_positions() << " positions in "
              << index.catalog().size() << " sequences\n";
  });

  // search
  auto* se_cmd = app.add_subcommand("search", "seed-and-extend search against an index");
  std::string se_index, se_db, se_query, se_out, se_alignment_out;
  SearchParams se_params;
  ScoringCli se_scoring;
  se_cmd->add_option("--index", se_index, "index file (.vdix)")->required();
  se_cmd->add_option("--db", se_db, "corpus directory backing the index")->required();
  se_cmd->add_option("query", se_query, "query .vdna with bitcodes")->required();
  se_cmd->add_option("--min-seeds", se_params.min_seeds, "hits to shortlist a diagonal")
      ->capture_default_str();
  se_cmd->add_option("--slack", se_params.diagonal_slack, "diagonal bin width")
      ->capture_default_str();
  se_cmd->add_option("--halfwidth", se_params.band_halfwidth, "refinement band halfwidth")
      ->capture_default_str();
  se_cmd->add_option("--cap", se_params.shortlist_cap, "candidates refined")
      ->capture_default_str();
  se_scoring.add_options(se_cmd, false);
  se_cmd->add_option("-o,--out", se_out, "results TSV (default stdout)");
  se_cmd->add_option("--alignment-out", se_alignment_out, "write the rank-1 alignment text");
  se_cmd->callback([&] {
    BandIndex index = read_band_index(se_index);
    std::vector<VideoDna> corpus;
    std::vector<const VideoDna*> refs;
    corpus.reserve(index.catalog().size());
    for (const IndexedSequence& seq : index.catalog()) {
      corpus.push_back(
          read_video_dna((fs::path(se_db) / seq.source_id).string(), seq.source_id));
      refs.push_back(&corpus.back());
    }
    index.attach_codes(refs);

    const VideoDna query = read_video_dna(se_query);
    se_params.scoring = se_scoring.build();
    const auto results = search(query, index, se_params);

    std::string tsv = "# rank\tseq_id\toffset\tscore\n";
    for (std::size_t r = 0; r < results.size(); ++r)
      tsv += std::to_string(r + 1) + "\t" + std::to_string(results[r].sequence_id) + "\t" +
             std::to_string(results[r].db_offset) + "\t" + format_double(results[r].score) +
             "\n";
    emit(se_out, tsv);
    if (!se_alignment_out.empty() && !results.empty())
      spit_text(se_alignment_out, format_alignment(results.front().alignment));
  });

  // align
  auto* al_cmd = app.add_subcommand("align", "align two sequences");
  std::string al_x, al_y, al_out, al_banded;
  bool al_global = false;
  ScoringCli al_scoring;
  al_cmd->add_option("x", al_x, "first .vdna")->required();
  al_cmd->add_option("y", al_y, "second .vdna")->required();
  al_scoring.add_options(al_cmd);
  al_cmd->add_flag("--global", al_global, "global alignment instead of local");
  al_cmd->add_option("--banded", al_banded, "banded local alignment, center:halfwidth");
  al_cmd->add_option("-o,--out", al_out, "output path (default stdout)");
  al_cmd->callback([&] {
    const VideoDna x = read_video_dna(al_x);
    const VideoDna y = read_video_dna(al_y);
    const ScoringParams params = al_scoring.build();
    Alignment alignment;
    if (!al_banded.empty()) {
      const auto colon = al_banded.find(':');
      if (colon == std::string::npos)
        fail(Errc::bad_format, "--banded expects center:halfwidth");
      alignment = banded_local_align(x, y, params, std::stoll(al_banded.substr(0, colon)),
                                     uint32_t(std::stoul(al_banded.substr(colon + 1))));
    } else if (al_global) {
      alignment = global_align(x, y, params);
    } else {
      alignment = local_align(x, y, params);
    }
    emit(al_out, format_alignment(alignment));
  });

  // msa
  auto* msa_cmd = app.add_subcommand("msa", "progressive multiple alignment");
  std::vector<std::string> msa_inputs;
  std::string msa_out;
  ScoringCli msa_scoring;
  msa_scoring.mode = "tfidf";
  msa_cmd->add_option("inputs", msa_inputs, "two or more .vdna files")->required();
  msa_scoring.add_options(msa_cmd, false);
  msa_cmd->add_option("-o,--out", msa_out, "output TSV (default stdout)");
  msa_cmd->callback([&] {
    std::vector<VideoDna> seqs;
    seqs.reserve(msa_inputs.size());
    std::vector<const VideoDna*> refs;
    for (const std::string& path : msa_inputs) {
      seqs.push_back(read_video_dna(path));
      refs.push_back(&seqs.back());
    }
    const ScoringParams params = msa_scoring.build();
    const DistanceMatrix m = distance_matrix(refs, params);
    const PhyloTree tree = neighbor_joining(m);
    emit(msa_out, msa_to_tsv(progressive_msa(refs, tree, params)));
  });

  // phylo
  auto* ph_cmd = app.add_subcommand("phylo", "pairwise distances, guide tree, dendrogram");
  std::vector<std::string> ph_inputs;
  std::string ph_matrix_out, ph_newick_out;
  uint32_t ph_threads = 1;
  ScoringCli ph_scoring;
  ph_cmd->add_option("inputs", ph_inputs, "two or more .vdna files")->required();
  ph_scoring.add_options(ph_cmd);
  ph_cmd->add_option("--matrix-out", ph_matrix_out, "distance matrix TSV path");
  ph_cmd->add_option("--newick-out", ph_newick_out, "dendrogram path (default stdout)");
  ph_cmd->add_option("--threads", ph_threads, "alignment worker threads")
      ->envname("VIDEODNA_THREADS")
      ->capture_default_str();
  ph_cmd->callback([&] {
    std::vector<VideoDna> seqs;
    seqs.reserve(ph_inputs.size());
    std::vector<const VideoDna*> refs;
    for (const std::string& path : ph_inputs) {
      seqs.push_back(read_video_dna(path));
      refs.push_back(&seqs.back());
    }
    const ScoringParams params = ph_scoring.build();
    const DistanceMatrix m = distance_matrix(refs, params, ph_threads);
    if (!ph_matrix_out.empty()) spit_text(ph_matrix_out, distance_matrix_to_tsv(m));
    emit(ph_newick_out, to_newick(neighbor_joining(m)) + "\n");
  });

  // mutate
  auto* mu_cmd = app.add_subcommand("mutate", "simulate post-production mutations");
  std::string mu_in, mu_specs, mu_out, mu_map_out;
  uint64_t mu_seed = 1;
  mu_cmd->add_option("input", mu_in, "input .vdna")->required();
  mu_cmd->add_option("--specs", mu_specs, "mutation spec file")->required();
  mu_cmd->add_option("--seed", mu_seed, "base seed for specs without one")
      ->capture_default_str();
  mu_cmd->add_option("-o,--out", mu_out, "output .vdna")->required();
  mu_cmd->add_option("--map-out", mu_map_out, "groundtruth map TSV");
  mu_cmd->callback([&] {
    const VideoDna dna = read_video_dna(mu_in);
    const MutatedSequence mutated = mutate_sequence(dna, load_specs(mu_specs, mu_seed));
    write_video_dna(mu_out, mutated.dna);
    if (!mu_map_out.empty()) {
      std::string tsv = "# output_index\tinput_index(-1 for gap)\n";
      for (std::size_t i = 0; i < mutated.source_map.size(); ++i)
        tsv += std::to_string(i) + "\t" + std::to_string(mutated.source_map[i]) + "\n";
      spit_text(mu_map_out, tsv);
    }
    std::cout << "mutated to " << mutated.dna.size() << " nucleotides\n";
  });

  // bench
  auto* be_cmd = app.add_subcommand("bench", "retrieval benchmark over a corpus");
  std::string be_db, be_model, be_specs, be_prefix = "bench";
  std::vector<uint32_t> be_lengths = {10};
  std::size_t be_queries = 500;
  uint64_t be_seed = 1;
  uint32_t be_tolerance = 1, be_threads = 1, be_bands = 4;
  SearchParams be_params;
  be_cmd->add_option("--db", be_db, "corpus directory of encoded .vdna")->required();
  be_cmd->add_option("--model", be_model, "metric model (.vdmm)")->required();
  be_cmd->add_option("--queries", be_queries, "queries per length")->capture_default_str();
  be_cmd->add_option("--lengths", be_lengths, "query lengths in intervals")
      ->delimiter(',')
      ->capture_default_str();
  be_cmd->add_option("--specs", be_specs, "mutation spec file (default: strength-1 set)");
  be_cmd->add_option("--seed", be_seed, "benchmark seed")->capture_default_str();
  be_cmd->add_option("--tolerance", be_tolerance, "offset tolerance, intervals")
      ->capture_default_str();
  be_cmd->add_option("--threads", be_threads, "query worker threads")
      ->envname("VIDEODNA_THREADS")
      ->capture_default_str();
  be_cmd->add_option("--bands", be_bands, "index bands per code")->capture_default_str();
  be_cmd->add_option("--min-seeds", be_params.min_seeds, "hits to shortlist a diagonal")
      ->capture_default_str();
  be_cmd->add_option("--cap", be_params.shortlist_cap, "candidates refined")
      ->capture_default_str();
  be_cmd->add_option("--out-prefix", be_prefix, "report file prefix")->capture_default_str();
  be_cmd->callback([&] {
    const MetricModel model = read_metric_model(be_model);
    const std::vector<VideoDna> corpus = load_corpus(be_db);
    std::vector<const VideoDna*> refs;
    for (const VideoDna& dna : corpus) refs.push_back(&dna);
    const BandIndex index = build_index(refs, be_bands);

    QueryPlan plan;
    plan.queries_per_length = be_queries;
    plan.lengths = be_lengths;
    plan.specs = be_specs.empty() ? default_bench_specs() : load_specs(be_specs, be_seed);
    plan.seed = be_seed;
    plan.tolerance = be_tolerance;
    plan.threads = be_threads;
    plan.search = be_params;
    plan.search.scoring.mode = ScoreMode::bitcode;
    plan.search.scoring.bitcode_threshold = model.threshold;

    const BenchReport report = run_bench(corpus, model, index, plan);
    spit_text(be_prefix + ".kinds.tsv", report.kinds_tsv());
    spit_text(be_prefix + ".lengths.tsv", report.lengths_tsv());
    spit_text(be_prefix + ".latency.tsv", report.latency_tsv());
    std::cout << "corpus: " << report.corpus_sequences << " sequences, "
              << report.corpus_nucleotides << " nucleotides\n";
    std::cout << report.lengths_tsv();
    std::cout << "median latency " << format_double(report.latency_median_ms()) << " ms, mean "
              << format_double(report.latency_mean_ms()) << " ms\n";
  });

  // synth
  auto* sy_cmd = app.add_subcommand("synth", "generate a synthetic corpus for benchmarks");
  std::string sy_out;
  SynthConfig sy_config;
  sy_cmd->add_option("--sequences", sy_config.sequences, "sequence count")
      ->capture_default_str();
  sy_cmd->add_option("--length", sy_config.length, "nucleotides per sequence")
      ->capture_default_str();
  sy_cmd->add_option("--dim", sy_config.dim, "bag dimension")->capture_default_str();
  sy_cmd->add_option("--seed", sy_config.seed, "rng seed")->capture_default_str();
  sy_cmd->add_option("-o,--out", sy_out, "output directory")->required();
  sy_cmd->callback([&] {
    fs::create_directories(sy_out);
    const std::vector<VideoDna> corpus = synth_corpus(sy_config);
    std::string manifest = "# file\tsource_id\n";
    for (std::size_t s = 0; s < corpus.size(); ++s) {
      char name[32];
      std::snprintf(name, sizeof(name), "%05zu.vdna", s);
      write_video_dna((fs::path(sy_out) / name).string(), corpus[s]);
      manifest += std::string(name) + "\t" + corpus[s].source_id + "\n";
    }
    spit_text((fs::path(sy_out) / "manifest.tsv").string(), manifest);
    std::cout << "wrote " << corpus.size() << " sequences to " << sy_out << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

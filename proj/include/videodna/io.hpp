#pragma once

#include <string>
#include <vector>

#include "videodna/metric.hpp"
#include "videodna/search.hpp"
#include "videodna/sequencer.hpp"
#include "videodna/textfmt.hpp"
#include "videodna/types.hpp"
#include "videodna/vocab.hpp"

namespace videodna {

// All binary formats are little-endian with a 4-byte magic and u32 version.

void write_vocabulary(const std::string& path, const Vocabulary& vocab);  // VDVC
Vocabulary read_vocabulary(const std::string& path);

void write_idf(const std::string& path, const IdfWeights& idf);  // VDIF
IdfWeights read_idf(const std::string& path);

// VDNA stores T, step, nucleotide values and optional packed bitcodes (code
// width must be a byte multiple). source_id is not stored; reading assigns
// the given one (defaults to the path).
void write_video_dna(const std::string& path, const VideoDna& dna);
VideoDna read_video_dna(const std::string& path, const std::string& source_id = "");

void write_metric_model(const std::string& path, const MetricModel& model);  // VDMM
MetricModel read_metric_model(const std::string& path);

// VDIX stores catalog and postings only; re-attach codes before searching.
void write_band_index(const std::string& path, const BandIndex& index);
BandIndex read_band_index(const std::string& path);

// Text feature files: one point per line,
// "frame_index timestamp x y g0..g63 c0..c15", frames grouped and in order.
std::vector<FrameFeatures> read_feature_file(const std::string& path);
void write_feature_file(const std::string& path, const std::vector<FrameFeatures>& frames);

Image read_ppm(const std::string& path);  // binary P6
void write_ppm(const std::string& path, const Image& image);

std::string distance_matrix_to_tsv(const struct DistanceMatrix& m);

}  // namespace videodna

#include "videodna/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>

#include "videodna/phylo.hpp"

namespace videodna {

namespace {

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) fail(Errc::io_error, "cannot open for writing: " + path);
  }

  void magic(const char m[4]) { out_.write(m, 4); }
  void u8(uint8_t v) { out_.write(reinterpret_cast<const char*>(&v), 1); }
  void u16(uint16_t v) { out_.write(reinterpret_cast<const char*>(&v), 2); }
  void u32(uint32_t v) { out_.write(reinterpret_cast<const char*>(&v), 4); }
  void u64(uint64_t v) { out_.write(reinterpret_cast<const char*>(&v), 8); }
  void f32(float v) { out_.write(reinterpret_cast<const char*>(&v), 4); }
  void bytes(const void* data, std::size_t n) {
    out_.write(reinterpret_cast<const char*>(data), std::streamsize(n));
  }
  void text(const std::string& s) {
    u32(uint32_t(s.size()));
    bytes(s.data(), s.size());
  }
  void close() {
    out_.close();
    if (!out_) fail(Errc::io_error, "write failed: " + path_);
  }

 private:
  std::ofstream out_;
  std::string path_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) fail(Errc::io_error, "cannot open: " + path);
  }

  void expect_magic(const char m[4]) {
    char buf[4];
    read(buf, 4);
    if (std::memcmp(buf, m, 4) != 0)
      fail(Errc::bad_format, path_ + ": bad magic, expected " + std::string(m, 4));
  }
  void expect_version(uint32_t v) {
    const uint32_t got = u32();
    if (got != v)
      fail(Errc::bad_format, path_ + ": unsupported version " + std::to_string(got));
  }
  uint8_t u8() {
    uint8_t v;
    read(&v, 1);
    return v;
  }
  uint16_t u16() {
    uint16_t v;
    read(&v, 2);
    return v;
  }
  uint32_t u32() {
    uint32_t v;
    read(&v, 4);
    return v;
  }
  uint64_t u64() {
    uint64_t v;
    read(&v, 8);
    return v;
  }
  float f32() {
    float v;
    read(&v, 4);
    return v;
  }
  std::string text() {
    const uint32_t n = u32();
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }
  void read(void* data, std::size_t n) {
    in_.read(reinterpret_cast<char*>(data), std::streamsize(n));
    if (std::size_t(in_.gcount()) != n)
      fail(Errc::bad_format, path_ + ": unexpected end of file");
  }
  void expect_eof() {
    char c;
    in_.read(&c, 1);
    if (!in_.eof()) fail(Errc::bad_format, path_ + ": trailing bytes");
  }

 private:
  std::ifstream in_;
  std::string path_;
};

}  // namespace

void write_vocabulary(const std::string& path, const Vocabulary& vocab) {
  if (vocab.centroids.size() != std::size_t(vocab.k) * vocab.dim)
    fail(Errc::bad_format, "vocabulary centroids do not match k x dim");
  Writer w(path);
  w.magic("VDVC");
  w.u32(1);
  w.u8(uint8_t(vocab.kind));
  w.u32(vocab.k);
  w.u32(vocab.dim);
  w.bytes(vocab.centroids.data(), vocab.centroids.size() * sizeof(float));
  w.close();
}

Vocabulary read_vocabulary(const std::string& path) {
  Reader r(path);
  r.expect_magic("VDVC");
  r.expect_version(1);
  Vocabulary vocab;
  vocab.kind = DescriptorKind(r.u8());
  vocab.k = r.u32();
  vocab.dim = r.u32();
  vocab.centroids.resize(std::size_t(vocab.k) * vocab.dim);
  r.read(vocab.centroids.data(), vocab.centroids.size() * sizeof(float));
  r.expect_eof();
  return vocab;
}

void write_idf(const std::string& path, const IdfWeights& idf) {
  Writer w(path);
  w.magic("VDIF");
  w.u32(1);
  w.u32(uint32_t(idf.weights.size()));
  w.u64(idf.corpus_size);
  w.bytes(idf.weights.data(), idf.weights.size() * sizeof(float));
  w.close();
}

IdfWeights read_idf(const std::string& path) {
  Reader r(path);
  r.expect_magic("VDIF");
  r.expect_version(1);
  IdfWeights idf;
  const uint32_t d = r.u32();
  idf.corpus_size = r.u64();
  idf.weights.resize(d);
  r.read(idf.weights.data(), std::size_t(d) * sizeof(float));
  r.expect_eof();
  return idf;
}

void write_video_dna(const std::string& path, const VideoDna& dna) {
  const uint32_t d = uint32_t(dna.dim());
  const uint32_t n = dna.has_bitcodes() ? dna.bitcodes.front().size() : 0;
  if (n % 8 != 0) fail(Errc::bad_format, "bitcode width must be a byte multiple for VDNA files");
  if (dna.has_bitcodes() && dna.bitcodes.size() != dna.size())
    fail(Errc::bad_format, "bitcode count does not match nucleotide count");

  Writer w(path);
  w.magic("VDNA");
  w.u32(1);
  w.f32(float(dna.interval_length));
  w.f32(float(dna.step));
  w.u32(d);
  w.u32(n);
  w.u64(dna.size());
  for (const auto& nt : dna.nucleotides) {
    if (nt.values.size() != d) fail(Errc::bad_format, "ragged nucleotide dimensions");
    w.bytes(nt.values.data(), std::size_t(d) * sizeof(float));
  }
  for (const auto& code : dna.bitcodes) {
    if (code.size() != n) fail(Errc::bad_format, "ragged bitcode widths");
    w.bytes(code.bytes().data(), code.bytes().size());
  }
  w.close();
}

VideoDna read_video_dna(const std::string& path, const std::string& source_id) {
  Reader r(path);
  r.expect_magic("VDNA");
  r.expect_version(1);
  VideoDna dna;
  dna.interval_length = r.f32();
  dna.step = r.f32();
  const uint32_t d = r.u32();
  const uint32_t n = r.u32();
  const uint64_t count = r.u64();
  dna.source_id = source_id.empty() ? path : source_id;
  dna.nucleotides.resize(count);
  for (uint64_t i = 0; i < count; ++i) {
    auto& nt = dna.nucleotides[i];
    nt.interval_start = double(i) * dna.step;
    nt.interval_length = dna.interval_length;
    nt.values.resize(d);
    r.read(nt.values.data(), std::size_t(d) * sizeof(float));
  }
  if (n > 0) {
    dna.bitcodes.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
      Bitcode code(n);
      r.read(code.bytes().data(), code.bytes().size());
      dna.bitcodes.push_back(std::move(code));
    }
  }
  r.expect_eof();
  return dna;
}

void write_metric_model(const std::string& path, const MetricModel& model) {
  Writer w(path);
  w.magic("VDMM");
  w.u32(1);
  w.u32(model.bits());
  w.u32(model.dim());
  w.f32(float(model.threshold));
  for (uint32_t i = 0; i < model.bits(); ++i)
    for (uint32_t j = 0; j < model.dim(); ++j)
      w.f32(model.projection(Eigen::Index(i), Eigen::Index(j)));
  for (uint32_t i = 0; i < model.bits(); ++i) w.f32(model.offset(Eigen::Index(i)));
  w.close();
}

MetricModel read_metric_model(const std::string& path) {
  Reader r(path);
  r.expect_magic("VDMM");
  r.expect_version(1);
  MetricModel model;
  const uint32_t n = r.u32();
  const uint32_t d = r.u32();
  model.threshold = r.f32();
  model.projection.resize(n, d);
  for (uint32_t i = 0; i < n; ++i)
    for (uint32_t j = 0; j < d; ++j) model.projection(Eigen::Index(i), Eigen::Index(j)) = r.f32();
  model.offset.resize(n);
  for (uint32_t i = 0; i < n; ++i) model.offset(Eigen::Index(i)) = r.f32();
  r.expect_eof();
  return model;
}

void write_band_index(const std::string& path, const BandIndex& index) {
  Writer w(path);
  w.magic("VDIX");
  w.u32(1);
  w.u32(index.code_bits());
  w.u32(index.bands());
  w.u32(uint32_t(index.catalog().size()));
  for (const IndexedSequence& seq : index.catalog()) {
    w.u64(seq.id);
    w.u32(seq.length);
    w.text(seq.source_id);
  }
  const uint32_t width = index.band_width_bits();
  for (uint32_t band = 0; band < index.bands(); ++band) {
    const auto& bucket_map = index.postings()[band];
    std::vector<uint64_t> values;
    values.reserve(bucket_map.size());
    for (const auto& [value, postings] : bucket_map) values.push_back(value);
    std::sort(values.begin(), values.end());
    w.u32(uint32_t(values.size()));
    for (const uint64_t value : values) {
      if (width <= 16)
        w.u16(uint16_t(value));
      else if (width <= 32)
        w.u32(uint32_t(value));
      else
        w.u64(value);
      const auto& postings = bucket_map.at(value);
      w.u32(uint32_t(postings.size()));
      for (const Posting& p : postings) {
        w.u64(p.sequence_id);
        w.u32(p.position);
      }
    }
  }
  w.close();
}

BandIndex read_band_index(const std::string& path) {
  Reader r(path);
  r.expect_magic("VDIX");
  r.expect_version(1);
  const uint32_t code_bits = r.u32();
  const uint32_t bands = r.u32();
  if (bands == 0 || code_bits == 0 || code_bits % bands != 0)
    fail(Errc::bad_format, path + ": invalid band layout");
  BandIndex index(code_bits, bands);
  const uint32_t catalog_count = r.u32();
  for (uint32_t s = 0; s < catalog_count; ++s) {
    IndexedSequence seq;
    seq.id = r.u64();
    seq.length = r.u32();
    seq.source_id = r.text();
    index.catalog().push_back(std::move(seq));
  }
  const uint32_t width = index.band_width_bits();
  for (uint32_t band = 0; band < bands; ++band) {
    const uint32_t bucket_count = r.u32();
    for (uint32_t bucket = 0; bucket < bucket_count; ++bucket) {
      uint64_t value;
      if (width <= 16)
        value = r.u16();
      else if (width <= 32)
        value = r.u32();
      else
        value = r.u64();
      const uint32_t posting_count = r.u32();
      auto& postings = index.postings()[band][value];
      postings.resize(posting_count);
      for (uint32_t p = 0; p < posting_count; ++p) {
        postings[p].sequence_id = r.u64();
        postings[p].position = r.u32();
      }
    }
  }
  r.expect_eof();
  return index;
}

std::vector<FrameFeatures> read_feature_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open: " + path);
  std::vector<FrameFeatures> frames;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    uint64_t frame_index;
    double timestamp;
    FeaturePoint p;
    if (!(ls >> frame_index >> timestamp >> p.x >> p.y))
      fail(Errc::bad_format, path + ":" + std::to_string(line_no) + ": malformed point");
    for (float& v : p.gray_desc)
      if (!(ls >> v))
        fail(Errc::bad_format, path + ":" + std::to_string(line_no) + ": short gray descriptor");
    for (float& v : p.color_desc)
      if (!(ls >> v))
        fail(Errc::bad_format, path + ":" + std::to_string(line_no) + ": short color descriptor");
    if (p.x < 0.0f || p.x > 1.0f || p.y < 0.0f || p.y > 1.0f)
      fail(Errc::bad_format, path + ":" + std::to_string(line_no) + ": coordinates outside [0,1]");

    if (frames.empty() || frames.back().frame_index != frame_index) {
      if (!frames.empty() && timestamp <= frames.back().timestamp)
        fail(Errc::bad_format,
             path + ":" + std::to_string(line_no) + ": timestamps must strictly increase");
      FrameFeatures f;
      f.frame_index = frame_index;
      f.timestamp = timestamp;
      frames.push_back(std::move(f));
    }
    frames.back().points.push_back(p);
  }
  return frames;
}

void write_feature_file(const std::string& path, const std::vector<FrameFeatures>& frames) {
  std::ofstream out(path);
  if (!out) fail(Errc::io_error, "cannot open for writing: " + path);
  for (const FrameFeatures& f : frames) {
    for (const FeaturePoint& p : f.points) {
      out << f.frame_index << ' ' << format_double(f.timestamp) << ' '
          << format_double(double(p.x)) << ' ' << format_double(double(p.y));
      for (float v : p.gray_desc) out << ' ' << format_double(double(v));
      for (float v : p.color_desc) out << ' ' << format_double(double(v));
      out << '\n';
    }
  }
  if (!out) fail(Errc::io_error, "write failed: " + path);
}

Image read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io_error, "cannot open: " + path);

  auto next_token = [&]() {
    std::string token;
    while (true) {
      const int c = in.get();
      if (c == EOF) fail(Errc::bad_format, path + ": truncated PPM header");
      if (c == '#') {
        std::string comment;
        std::getline(in, comment);
        continue;
      }
      if (std::isspace(c)) {
        if (!token.empty()) return token;
        continue;
      }
      token += char(c);
    }
  };

  if (next_token() != "P6") fail(Errc::bad_format, path + ": not a binary PPM (P6) file");
  Image img;
  img.width = uint32_t(std::stoul(next_token()));
  img.height = uint32_t(std::stoul(next_token()));
  const unsigned long maxval = std::stoul(next_token());
  if (maxval != 255) fail(Errc::bad_format, path + ": only 8-bit PPM supported");
  img.rgb.resize(std::size_t(img.width) * img.height * 3);
  in.read(reinterpret_cast<char*>(img.rgb.data()), std::streamsize(img.rgb.size()));
  if (std::size_t(in.gcount()) != img.rgb.size())
    fail(Errc::bad_format, path + ": truncated pixel data");
  return img;
}

void write_ppm(const std::string& path, const Image& image) {
  if (image.rgb.size() != std::size_t(image.width) * image.height * 3)
    fail(Errc::bad_format, "raster size does not match dimensions");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io_error, "cannot open for writing: " + path);
  out << "P6\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.rgb.data()), std::streamsize(image.rgb.size()));
  if (!out) fail(Errc::io_error, "write failed: " + path);
}

std::string distance_matrix_to_tsv(const DistanceMatrix& m) {
  std::string out = "label";
  for (const std::string& label : m.labels) out += "\t" + label;
  out += "\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    out += m.labels[i];
    for (std::size_t j = 0; j < m.size(); ++j) out += "\t" + format_double(m.at(i, j));
    out += "\n";
  }
  return out;
}

}  // namespace videodna

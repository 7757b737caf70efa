#include "smen/dataio.hpp"

#include <algorithm>
#include <bit>
#include <cerrno>
#include <cinttypes>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace smen {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

// --- binary primitives ---

BinaryWriter::BinaryWriter(const std::string& path) : path_(path) {
  f_ = std::fopen(path.c_str(), "wb");
  if (!f_) {
    throw FormatError(path + ": cannot open for writing: " + std::strerror(errno));
  }
}

BinaryWriter::~BinaryWriter() {
  if (f_) std::fclose(f_);
}

void BinaryWriter::write_magic(const char magic[9]) {
  if (std::fwrite(magic, 1, 8, f_) != 8) throw FormatError(path_ + ": short write");
}

void BinaryWriter::write_i32(std::int32_t v) {
  if (std::fwrite(&v, sizeof(v), 1, f_) != 1) throw FormatError(path_ + ": short write");
}

void BinaryWriter::write_f32(float v) {
  if (std::fwrite(&v, sizeof(v), 1, f_) != 1) throw FormatError(path_ + ": short write");
}

void BinaryWriter::write_f64_array(const std::vector<double>& v) {
  if (!v.empty() && std::fwrite(v.data(), sizeof(double), v.size(), f_) != v.size()) {
    throw FormatError(path_ + ": short write");
  }
}

BinaryReader::BinaryReader(const std::string& path) : path_(path) {
  f_ = std::fopen(path.c_str(), "rb");
  if (!f_) {
    throw FormatError(path + ": cannot open: " + std::strerror(errno));
  }
}

BinaryReader::~BinaryReader() {
  if (f_) std::fclose(f_);
}

void BinaryReader::read_raw(void* dst, std::size_t n) {
  const std::size_t got = std::fread(dst, 1, n, f_);
  if (got != n) {
    throw FormatError(path_ + ": unexpected end of file at byte " +
                      std::to_string(offset_ + got));
  }
  offset_ += n;
}

void BinaryReader::expect_magic(const char magic[9]) {
  char buf[9] = {0};
  const std::size_t at = offset_;
  read_raw(buf, 8);
  if (std::memcmp(buf, magic, 8) != 0) {
    throw FormatError(path_ + ": bad magic at byte " + std::to_string(at) +
                      " (expected " + magic + ")");
  }
}

std::int32_t BinaryReader::read_i32() {
  std::int32_t v = 0;
  read_raw(&v, sizeof(v));
  return v;
}

float BinaryReader::read_f32() {
  float v = 0;
  read_raw(&v, sizeof(v));
  return v;
}

void BinaryReader::read_f64_array(std::vector<double>& out) {
  if (!out.empty()) read_raw(out.data(), out.size() * sizeof(double));
}

void BinaryReader::expect_eof() {
  const int c = std::fgetc(f_);
  if (c != EOF) {
    throw FormatError(path_ + ": trailing data at byte " + std::to_string(offset_));
  }
}

// --- features ---

void write_features(const std::string& path, const FeatureSequence& x) {
  BinaryWriter w(path);
  w.write_magic("SMENFEA1");
  w.write_i32(x.length());
  w.write_i32(x.dim());
  for (int t = 0; t < x.length(); ++t) {
    for (int j = 0; j < x.dim(); ++j) {
      w.write_f32(static_cast<float>(x.data(t, j)));
    }
  }
}

FeatureSequence read_features(const std::string& path) {
  BinaryReader r(path);
  r.expect_magic("SMENFEA1");
  const std::int32_t t_len = r.read_i32();
  const std::int32_t d = r.read_i32();
  if (t_len < 1 || d < 1) {
    throw FormatError(path + ": invalid dimensions T=" + std::to_string(t_len) +
                      " d=" + std::to_string(d));
  }
  FeatureSequence x;
  x.data = Matrix(t_len, d);
  for (int t = 0; t < t_len; ++t) {
    for (int j = 0; j < d; ++j) {
      x.data(t, j) = r.read_f32();
    }
  }
  r.expect_eof();
  return x;
}

// --- text helpers ---

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

static std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(sep, pos);
    if (next == std::string::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

static double parse_double(const std::string& s, const std::string& path, int line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError(path + ":" + std::to_string(line_no) + ": bad number '" + s + "'");
  }
}

static int parse_int(const std::string& s, const std::string& path, int line_no) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError(path + ":" + std::to_string(line_no) + ": bad integer '" + s + "'");
  }
}

static std::ifstream open_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path + ": cannot open");
  return in;
}

static std::ofstream create_text(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError(path + ": cannot open for writing");
  return out;
}

void make_dirs(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw FormatError(dir + ": cannot create directory: " + ec.message());
}

// --- annotations ---

void write_annotations(const std::string& path,
                       const std::map<std::string, VideoAnnotation>& ann) {
  std::ofstream out = create_text(path);
  out << "SMENANN1\n";
  for (const auto& [id, va] : ann) {
    out << "video\t" << id << "\t";
    for (std::size_t i = 0; i < va.action_classes.size(); ++i) {
      if (i) out << ",";
      out << va.action_classes[i];
    }
    out << "\n";
    for (const GroundTruthSegment& gt : va.gts) {
      out << "gt\t" << id << "\t" << gt.class_id << "\t" << format_double(gt.start_sec)
          << "\t" << format_double(gt.end_sec) << "\t" << (gt.slow_motion ? 1 : 0) << "\n";
    }
  }
}

std::map<std::string, VideoAnnotation> read_annotations(const std::string& path) {
  std::ifstream in = open_text(path);
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line) || line != "SMENANN1") {
    throw FormatError(path + ":1: bad header (expected SMENANN1)");
  }
  line_no = 1;
  std::map<std::string, VideoAnnotation> ann;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = split(line, '\t');
    if (f[0] == "video") {
      if (f.size() != 3) {
        throw FormatError(path + ":" + std::to_string(line_no) + ": expected 3 fields");
      }
      VideoAnnotation& va = ann[f[1]];
      if (!f[2].empty()) {
        for (const std::string& c : split(f[2], ',')) {
          va.action_classes.push_back(parse_int(c, path, line_no));
        }
      }
    } else if (f[0] == "gt") {
      if (f.size() != 6) {
        throw FormatError(path + ":" + std::to_string(line_no) + ": expected 6 fields");
      }
      GroundTruthSegment gt;
      gt.video_id = f[1];
      gt.class_id = parse_int(f[2], path, line_no);
      gt.start_sec = parse_double(f[3], path, line_no);
      gt.end_sec = parse_double(f[4], path, line_no);
      gt.slow_motion = parse_int(f[5], path, line_no) != 0;
      if (!(gt.start_sec < gt.end_sec)) {
        throw FormatError(path + ":" + std::to_string(line_no) + ": start must precede end");
      }
      ann[f[1]].gts.push_back(gt);
    } else {
      throw FormatError(path + ":" + std::to_string(line_no) + ": unknown record '" + f[0] + "'");
    }
  }
  return ann;
}

// --- manifest ---

void write_manifest(const std::string& path, const CorpusManifest& manifest) {
  std::ofstream out = create_text(path);
  out << "SMENCOR1\n";
  out << "num_classes\t" << manifest.num_classes << "\n";
  out << "snippet_seconds\t" << format_double(manifest.snippet_seconds) << "\n";
  for (const ManifestEntry& e : manifest.videos) {
    out << "video\t" << e.video_id << "\t" << e.feature_file << "\t" << e.length << "\t"
        << e.dim << "\n";
  }
}

CorpusManifest read_manifest(const std::string& path) {
  std::ifstream in = open_text(path);
  std::string line;
  if (!std::getline(in, line) || line != "SMENCOR1") {
    throw FormatError(path + ":1: bad header (expected SMENCOR1)");
  }
  CorpusManifest m;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = split(line, '\t');
    if (f[0] == "num_classes" && f.size() == 2) {
      m.num_classes = parse_int(f[1], path, line_no);
    } else if (f[0] == "snippet_seconds" && f.size() == 2) {
      m.snippet_seconds = parse_double(f[1], path, line_no);
    } else if (f[0] == "video" && f.size() == 5) {
      ManifestEntry e;
      e.video_id = f[1];
      e.feature_file = f[2];
      e.length = parse_int(f[3], path, line_no);
      e.dim = parse_int(f[4], path, line_no);
      m.videos.push_back(e);
    } else {
      throw FormatError(path + ":" + std::to_string(line_no) + ": bad record '" + f[0] + "'");
    }
  }
  for (std::size_t i = 0; i < m.videos.size(); ++i) {
    for (std::size_t j = i + 1; j < m.videos.size(); ++j) {
      if (m.videos[i].video_id == m.videos[j].video_id) {
        throw FormatError(path + ": duplicate video id '" + m.videos[i].video_id + "'");
      }
    }
  }
  return m;
}

// --- corpus ---

void write_corpus(const std::string& dir, const Corpus& corpus) {
  make_dirs(dir + "/features");
  CorpusManifest manifest;
  manifest.num_classes = corpus.num_classes;
  manifest.snippet_seconds = corpus.snippet_seconds;
  std::map<std::string, VideoAnnotation> ann;
  for (const CorpusVideo& v : corpus.videos) {
    ManifestEntry e;
    e.video_id = v.id;
    e.feature_file = "features/" + v.id + ".feat";
    e.length = v.features.length();
    e.dim = v.features.dim();
    manifest.videos.push_back(e);
    write_features(dir + "/" + e.feature_file, v.features);
    VideoAnnotation va;
    for (int c = 0; c < v.label.num_classes(); ++c) {
      if (v.label.bits[c]) va.action_classes.push_back(c);
    }
    va.gts = v.gts;
    ann[v.id] = va;
  }
  write_manifest(dir + "/manifest.txt", manifest);
  write_annotations(dir + "/annotations.txt", ann);
}

Corpus read_corpus(const std::string& dir) {
  const CorpusManifest manifest = read_manifest(dir + "/manifest.txt");
  std::map<std::string, VideoAnnotation> ann = read_annotations(dir + "/annotations.txt");
  Corpus corpus;
  corpus.num_classes = manifest.num_classes;
  corpus.snippet_seconds = manifest.snippet_seconds;
  for (const ManifestEntry& e : manifest.videos) {
    CorpusVideo v;
    v.id = e.video_id;
    v.features = read_features(dir + "/" + e.feature_file);
    v.features.snippet_seconds = manifest.snippet_seconds;
    if (v.features.length() != e.length || v.features.dim() != e.dim) {
      throw FormatError(dir + "/" + e.feature_file + ": shape disagrees with manifest");
    }
    v.label.bits.assign(manifest.num_classes + 1, 0);
    v.label.bits[manifest.num_classes] = 1;  // untrimmed videos contain background
    auto it = ann.find(e.video_id);
    if (it != ann.end()) {
      for (int c : it->second.action_classes) {
        if (c < 0 || c >= manifest.num_classes) {
          throw FormatError(dir + "/annotations.txt: class id " + std::to_string(c) +
                            " out of range for video " + e.video_id);
        }
        v.label.bits[c] = 1;
      }
      v.gts = it->second.gts;
    }
    corpus.videos.push_back(std::move(v));
  }
  return corpus;
}

// --- masks ---

void write_masks(const std::string& path,
                 const std::vector<std::pair<std::string, std::vector<int>>>& masks) {
  std::ofstream out = create_text(path);
  for (const auto& [id, bits] : masks) {
    out << id << "\t";
    for (int b : bits) out << (b ? '1' : '0');
    out << "\n";
  }
}

std::map<std::string, std::vector<int>> read_masks(const std::string& path) {
  std::ifstream in = open_text(path);
  std::map<std::string, std::vector<int>> masks;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = split(line, '\t');
    if (f.size() != 2 || f[1].empty()) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": expected id<TAB>bitstring");
    }
    std::vector<int> bits;
    bits.reserve(f[1].size());
    for (char c : f[1]) {
      if (c != '0' && c != '1') {
        throw FormatError(path + ":" + std::to_string(line_no) + ": bitstring has '" +
                          std::string(1, c) + "'");
      }
      bits.push_back(c == '1' ? 1 : 0);
    }
    masks[f[0]] = std::move(bits);
  }
  return masks;
}

// --- proposals ---

void write_proposals_csv(const std::string& path, const std::vector<ProposalRecord>& rows) {
  std::ofstream out = create_text(path);
  out << "video_id,class_id,start_sec,end_sec,confidence\n";
  for (const ProposalRecord& r : rows) {
    out << r.video_id << "," << r.class_id << "," << format_double(r.start_sec) << ","
        << format_double(r.end_sec) << "," << format_double(r.confidence) << "\n";
  }
}

std::vector<ProposalRecord> read_proposals_csv(const std::string& path) {
  std::ifstream in = open_text(path);
  std::string line;
  if (!std::getline(in, line) || line != "video_id,class_id,start_sec,end_sec,confidence") {
    throw FormatError(path + ":1: bad proposal CSV header");
  }
  std::vector<ProposalRecord> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = split(line, ',');
    if (f.size() != 5) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": expected 5 fields");
    }
    ProposalRecord r;
    r.video_id = f[0];
    r.class_id = parse_int(f[1], path, line_no);
    r.start_sec = parse_double(f[2], path, line_no);
    r.end_sec = parse_double(f[3], path, line_no);
    r.confidence = parse_double(f[4], path, line_no);
    rows.push_back(r);
  }
  return rows;
}

// --- key=value and loss curves ---

void write_kv(const std::string& path, const std::map<std::string, std::string>& kv) {
  std::ofstream out = create_text(path);
  for (const auto& [k, v] : kv) out << k << "=" << v << "\n";
}

std::map<std::string, std::string> read_kv(const std::string& path) {
  std::ifstream in = open_text(path);
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

void write_loss_curve(const std::string& path, const std::vector<double>& losses) {
  std::ofstream out = create_text(path);
  out << "iteration,loss\n";
  for (std::size_t i = 0; i < losses.size(); ++i) {
    out << i << "," << format_double(losses[i]) << "\n";
  }
}

}  // namespace smen

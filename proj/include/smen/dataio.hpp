#pragma once

#include <cstdint>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "smen/metrics.hpp"
#include "smen/tensorseq.hpp"

namespace smen {

/// Raised on malformed files; the message carries the byte offset or line
/// number where parsing failed.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

class BinaryWriter {
 public:
  explicit BinaryWriter(const std::string& path);
  ~BinaryWriter();
  BinaryWriter(const BinaryWriter&) = delete;
  BinaryWriter& operator=(const BinaryWriter&) = delete;

  void write_magic(const char magic[9]);
  void write_i32(std::int32_t v);
  void write_f32(float v);
  void write_f64_array(const std::vector<double>& v);

 private:
  std::FILE* f_ = nullptr;
  std::string path_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::string& path);
  ~BinaryReader();
  BinaryReader(const BinaryReader&) = delete;
  BinaryReader& operator=(const BinaryReader&) = delete;

  void expect_magic(const char magic[9]);
  std::int32_t read_i32();
  float read_f32();
  void read_f64_array(std::vector<double>& out);
  void expect_eof();

 private:
  void read_raw(void* dst, std::size_t n);

  std::FILE* f_ = nullptr;
  std::string path_;
  std::size_t offset_ = 0;
};

/// Feature file: magic "SMENFEA1", little-endian int32 T and d, then T*d
/// little-endian float32 values row-major.
void write_features(const std::string& path, const FeatureSequence& x);
FeatureSequence read_features(const std::string& path);

struct VideoAnnotation {
  std::vector<int> action_classes;       // video-level weak label
  std::vector<GroundTruthSegment> gts;   // may be empty
};

/// Annotation file: UTF-8, tab-separated, one ground-truth segment per line.
///   SMENANN1
///   video <id> <comma-separated class ids>
///   gt <id> <class_id> <start_sec> <end_sec> <slow_flag>
void write_annotations(const std::string& path,
                       const std::map<std::string, VideoAnnotation>& ann);
std::map<std::string, VideoAnnotation> read_annotations(const std::string& path);

struct ManifestEntry {
  std::string video_id;
  std::string feature_file;  // relative to the manifest's directory
  int length = 0;
  int dim = 0;
};

struct CorpusManifest {
  int num_classes = 0;
  double snippet_seconds = 16.0 / 25.0;
  std::vector<ManifestEntry> videos;
};

void write_manifest(const std::string& path, const CorpusManifest& manifest);
CorpusManifest read_manifest(const std::string& path);

/// A fully loaded corpus: features plus weak labels plus ground truth.
struct CorpusVideo {
  std::string id;
  FeatureSequence features;
  VideoLabel label;
  std::vector<GroundTruthSegment> gts;
};

struct Corpus {
  int num_classes = 0;
  double snippet_seconds = 16.0 / 25.0;
  std::vector<CorpusVideo> videos;
};

/// Write manifest + annotations + per-video feature files under dir.
void write_corpus(const std::string& dir, const Corpus& corpus);
Corpus read_corpus(const std::string& dir);

/// Mask file: one line per video, "video_id<TAB>bitstring".
void write_masks(const std::string& path,
                 const std::vector<std::pair<std::string, std::vector<int>>>& masks);
std::map<std::string, std::vector<int>> read_masks(const std::string& path);

/// Proposal CSV: header then "video_id,class_id,start_sec,end_sec,confidence".
struct ProposalRecord {
  std::string video_id;
  int class_id = 0;
  double start_sec = 0.0;
  double end_sec = 0.0;
  double confidence = 0.0;
};

void write_proposals_csv(const std::string& path, const std::vector<ProposalRecord>& rows);
std::vector<ProposalRecord> read_proposals_csv(const std::string& path);

/// Key=value run-config snapshot, one pair per line, keys sorted.
void write_kv(const std::string& path, const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> read_kv(const std::string& path);

/// Loss curve CSV with an "iteration,loss" header.
void write_loss_curve(const std::string& path, const std::vector<double>& losses);

std::string format_double(double v);  // round-trip-exact decimal form
void make_dirs(const std::string& dir);

}  // namespace smen

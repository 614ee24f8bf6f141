// File formats and synthetic data.
//
// Embedding container (little-endian):
//   "SHRC" | u32 version | u64 N | u64 F | N*F f64, row-major
// with an optional text sidecar next to it (same stem, ".segs") holding N
// lines "onset duration [label]". The same container with F == N stores a
// precomputed similarity matrix (conventionally with a ".sim" suffix).

#ifndef SHARC_DATA_H_
#define SHARC_DATA_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sharc/core.h"
#include "sharc/simgraph.h"

namespace sharc {

inline constexpr uint32_t kEmbeddingFormatVersion = 1;

// path with its extension replaced by `suffix` (".segs", ".sim").
std::string SiblingPath(const std::string &path, const std::string &suffix);

// Writes the container and, when segments are present, the sidecar.
void WriteEmbeddings(const EmbeddingSet &set, const std::string &path);

// recording_id is the file stem. Reads the sidecar if it exists.
EmbeddingSet ReadEmbeddings(const std::string &path);

void WriteSimilarity(const SimilarityMatrix &s, const std::string &path);
SimilarityMatrix ReadSimilarity(const std::string &path);

struct RttmRecord {
  std::string recording_id;
  double onset = 0.0;
  double duration = 0.0;
  std::string speaker;
};

std::string SpeakerName(int label);

// Turns per-segment labels into speaker turns. Where consecutive segments
// overlap, the boundary is placed at the middle of the overlap; adjacent
// regions with the same label are then merged.
std::vector<RttmRecord> LabelsToRttm(std::span<const int> labels,
                                     std::span<const Segment> segments,
                                     const std::string &recording_id);

void WriteRttm(std::span<const RttmRecord> records, const std::string &path);
void WriteRttm(std::span<const int> labels, std::span<const Segment> segments,
               const std::string &recording_id, const std::string &path);
std::string FormatRttm(std::span<const RttmRecord> records);

std::vector<RttmRecord> ReadRttm(const std::string &path);
std::vector<RttmRecord> ParseRttm(const std::string &text);

struct SynthConfig {
  int n_recordings = 10;
  int min_speakers = 2;
  int max_speakers = 5;
  int dim = 16;
  double spread = 0.3;      // expected norm of the per-segment noise vector
  double min_turn = 3.0;    // seconds
  double max_turn = 12.0;
  int turns_per_speaker = 3;
  double min_angle_deg = 60.0;  // between speaker centroids
  double segment_length = 1.5;
  double segment_shift = 0.75;
  uint64_t seed = 0;
  std::string id_prefix = "synth";
};

// Labeled recordings with unit-norm speaker centroids plus isotropic Gaussian
// noise. Every requested speaker appears in its recording.
std::vector<EmbeddingSet> SynthGenerate(const SynthConfig &config);

}  // namespace sharc

#endif  // SHARC_DATA_H_

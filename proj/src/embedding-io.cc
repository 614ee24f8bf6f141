#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "binary-io.h"
#include "sharc/data.h"

namespace sharc {

namespace {

constexpr char kMagic[4] = {'S', 'H', 'R', 'C'};

void WriteContainer(const Matrix &m, const std::string &path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  os.write(kMagic, 4);
  internal::WriteLe<uint32_t>(os, kEmbeddingFormatVersion);
  internal::WriteLe<uint64_t>(os, static_cast<uint64_t>(m.rows()));
  internal::WriteLe<uint64_t>(os, static_cast<uint64_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) internal::WriteLe(os, m(r, c));
  }
  if (!os) throw Error(ErrorCode::kIo, "write failed for " + path);
}

Matrix ReadContainer(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIo, "cannot open " + path);
  char magic[4];
  if (!is.read(magic, 4)) throw Error(ErrorCode::kTruncated, path + ": header truncated");
  if (!std::equal(magic, magic + 4, kMagic)) {
    throw Error(ErrorCode::kBadMagic, path + ": bad magic, not an embedding container");
  }
  uint32_t version = 0;
  uint64_t rows = 0, cols = 0;
  if (!internal::ReadLe(is, &version) || !internal::ReadLe(is, &rows) ||
      !internal::ReadLe(is, &cols)) {
    throw Error(ErrorCode::kTruncated, path + ": header truncated");
  }
  if (version != kEmbeddingFormatVersion) {
    throw Error(ErrorCode::kUnsupportedVersion,
                path + ": unsupported format version " + std::to_string(version));
  }
  constexpr uint64_t kMaxValues = std::numeric_limits<uint64_t>::max() / sizeof(double);
  if (cols != 0 && rows > kMaxValues / cols) {
    throw Error(ErrorCode::kSizeOverflow, path + ": N*F overflows");
  }
  const uint64_t count = rows * cols;
  const auto header_end = is.tellg();
  is.seekg(0, std::ios::end);
  const auto available = static_cast<uint64_t>(is.tellg() - header_end);
  is.seekg(header_end);
  if (available < count * sizeof(double)) {
    throw Error(ErrorCode::kTruncated, path + ": payload truncated, expected " +
                                           std::to_string(count) + " values");
  }
  if (rows > static_cast<uint64_t>(std::numeric_limits<Eigen::Index>::max()) ||
      cols > static_cast<uint64_t>(std::numeric_limits<Eigen::Index>::max())) {
    throw Error(ErrorCode::kSizeOverflow, path + ": dimensions too large");
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (!internal::ReadLe(is, &m(r, c))) throw Error(ErrorCode::kTruncated, path + ": payload truncated");
    }
  }
  return m;
}

void ReadSidecar(const std::string &path, EmbeddingSet &set) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::vector<int> labels;
  int with_label = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::istringstream fields(line);
    Segment seg;
    if (!(fields >> seg.onset)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw Error(ErrorCode::kParse, path + ":" + std::to_string(line_no) + ": bad onset");
    }
    if (!(fields >> seg.duration)) {
      throw Error(ErrorCode::kParse, path + ":" + std::to_string(line_no) + ": bad duration");
    }
    int label;
    if (fields >> label) {
      labels.push_back(label);
      ++with_label;
    } else if (!fields.eof()) {
      throw Error(ErrorCode::kParse, path + ":" + std::to_string(line_no) + ": bad label");
    }
    set.segments.push_back(seg);
  }
  if (static_cast<int>(set.segments.size()) != set.size()) {
    throw Error(ErrorCode::kSidecarMismatch,
                path + ": " + std::to_string(set.segments.size()) + " segment lines for " +
                    std::to_string(set.size()) + " embeddings");
  }
  if (with_label != 0 && with_label != set.size()) {
    throw Error(ErrorCode::kSidecarMismatch, path + ": labels on only some lines");
  }
  if (with_label > 0) set.labels = std::move(labels);
}

}  // namespace

std::string SiblingPath(const std::string &path, const std::string &suffix) {
  return std::filesystem::path(path).replace_extension(suffix).string();
}

void WriteEmbeddings(const EmbeddingSet &set, const std::string &path) {
  WriteContainer(set.embeddings, path);
  if (set.segments.empty()) return;
  const std::string sidecar = SiblingPath(path, ".segs");
  std::ofstream os(sidecar);
  if (!os) throw Error(ErrorCode::kIo, "cannot open " + sidecar + " for writing");
  os.precision(17);
  for (size_t i = 0; i < set.segments.size(); ++i) {
    os << set.segments[i].onset << ' ' << set.segments[i].duration;
    if (set.labels) os << ' ' << (*set.labels)[i];
    os << '\n';
  }
}

EmbeddingSet ReadEmbeddings(const std::string &path) {
  EmbeddingSet set;
  set.recording_id = std::filesystem::path(path).stem().string();
  set.embeddings = ReadContainer(path);
  const std::string sidecar = SiblingPath(path, ".segs");
  if (std::filesystem::exists(sidecar)) ReadSidecar(sidecar, set);
  RequireValid(set);
  return set;
}

void WriteSimilarity(const SimilarityMatrix &s, const std::string &path) {
  WriteContainer(s.values, path);
}

SimilarityMatrix ReadSimilarity(const std::string &path) {
  return CheckedSimilarity(ReadContainer(path));
}

}  // namespace sharc

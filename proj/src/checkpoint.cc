#include <algorithm>
#include <fstream>

#include "binary-io.h"
#include "sharc/gnn.h"

namespace sharc {

namespace {

constexpr char kMagic[4] = {'S', 'H', 'G', 'N'};

// Eigen storage is column-major; the file is row-major.
template <typename M>
void WriteRowMajor(std::ostream &os, const M &m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) internal::WriteLe(os, m(r, c));
  }
}

template <typename M>
void ReadRowMajor(std::istream &is, M &m, const std::string &path) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (!internal::ReadLe(is, &m(r, c))) {
        throw Error(ErrorCode::kTruncated, path + ": checkpoint payload truncated");
      }
    }
  }
}

}  // namespace

void SaveParams(const ScorerParams &params, const std::string &path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  os.write(kMagic, 4);
  internal::WriteLe<uint32_t>(os, kCheckpointVersion);
  const ScorerDims &d = params.dims;
  for (int v : {d.input, d.latent, d.hidden1, d.hidden2}) {
    internal::WriteLe<uint64_t>(os, static_cast<uint64_t>(v));
  }
  WriteRowMajor(os, params.sage_weight);
  WriteRowMajor(os, params.sage_bias);
  for (int l = 0; l < 3; ++l) {
    WriteRowMajor(os, params.ffn_weight[l]);
    WriteRowMajor(os, params.ffn_bias[l]);
  }
  if (!os) throw Error(ErrorCode::kIo, "write failed for " + path);
}

ScorerParams LoadParams(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIo, "cannot open " + path);
  char magic[4];
  if (!is.read(magic, 4)) throw Error(ErrorCode::kTruncated, path + ": missing header");
  if (!std::equal(magic, magic + 4, kMagic)) {
    throw Error(ErrorCode::kBadMagic, path + ": not a scorer checkpoint");
  }
  uint32_t version = 0;
  if (!internal::ReadLe(is, &version)) throw Error(ErrorCode::kTruncated, path + ": missing version");
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kUnsupportedVersion,
                path + ": checkpoint version " + std::to_string(version));
  }
  uint64_t raw[4];
  for (auto &v : raw) {
    if (!internal::ReadLe(is, &v)) throw Error(ErrorCode::kTruncated, path + ": header truncated");
    if (v == 0 || v > (1u << 20)) {
      throw Error(ErrorCode::kIncompatibleCheckpoint, path + ": implausible dimension");
    }
  }
  ScorerDims dims{static_cast<int>(raw[0]), static_cast<int>(raw[1]),
                  static_cast<int>(raw[2]), static_cast<int>(raw[3])};
  ScorerParams p = ScorerParams::Zeros(dims);
  ReadRowMajor(is, p.sage_weight, path);
  ReadRowMajor(is, p.sage_bias, path);
  for (int l = 0; l < 3; ++l) {
    ReadRowMajor(is, p.ffn_weight[l], path);
    ReadRowMajor(is, p.ffn_bias[l], path);
  }
  if (!p.AllFinite()) throw Error(ErrorCode::kNonFinite, path + ": non-finite weights");
  return p;
}

}  // namespace sharc

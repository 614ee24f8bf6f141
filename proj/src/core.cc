#include "sharc/core.h"

#include <cmath>
#include <sstream>
#include <unordered_map>

namespace sharc {

const char *ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kShapeMismatch: return "shape-mismatch";
    case ErrorCode::kNonFinite: return "non-finite";
    case ErrorCode::kEmptyGraph: return "empty-graph";
    case ErrorCode::kZeroNorm: return "zero-norm";
    case ErrorCode::kMissingLabels: return "missing-labels";
    case ErrorCode::kBadMagic: return "bad-magic";
    case ErrorCode::kUnsupportedVersion: return "unsupported-version";
    case ErrorCode::kTruncated: return "truncated";
    case ErrorCode::kSizeOverflow: return "size-overflow";
    case ErrorCode::kSidecarMismatch: return "sidecar-mismatch";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kIncompatibleCheckpoint: return "incompatible-checkpoint";
    case ErrorCode::kInfeasible: return "infeasible";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

std::vector<std::string> Validate(const EmbeddingSet &set) {
  std::vector<std::string> issues;
  const int n = set.size();
  if (n < 1) issues.push_back("embedding matrix has no rows");
  if (set.dim() < 1) issues.push_back("embedding dimension is zero");
  for (int i = 0; i < n; ++i) {
    if (!set.embeddings.row(i).allFinite()) {
      issues.push_back("row " + std::to_string(i) + " has a NaN or Inf entry");
    }
  }
  if (!set.segments.empty()) {
    if (static_cast<int>(set.segments.size()) != n) {
      issues.push_back("shape mismatch: " + std::to_string(set.segments.size()) +
                       " segments for " + std::to_string(n) + " embeddings");
    }
    for (size_t i = 0; i < set.segments.size(); ++i) {
      const Segment &s = set.segments[i];
      if (!std::isfinite(s.onset) || !std::isfinite(s.duration)) {
        issues.push_back("segment " + std::to_string(i) + " is not finite");
      } else if (s.duration < 0) {
        issues.push_back("segment " + std::to_string(i) +
                         " has negative duration");
      }
    }
  }
  if (set.labels && static_cast<int>(set.labels->size()) != n) {
    issues.push_back("shape mismatch: " + std::to_string(set.labels->size()) +
                     " labels for " + std::to_string(n) + " embeddings");
  }
  return issues;
}

void RequireValid(const EmbeddingSet &set) {
  auto issues = Validate(set);
  if (issues.empty()) return;
  ErrorCode code = ErrorCode::kInvalidArgument;
  if (issues[0].find("NaN") != std::string::npos) code = ErrorCode::kNonFinite;
  if (issues[0].find("shape mismatch") == 0) code = ErrorCode::kShapeMismatch;
  throw Error(code, "recording '" + set.recording_id + "': " + issues[0]);
}

std::vector<std::string> CheckGraphInvariants(const LevelGraph &graph, int k,
                                              int total_origins) {
  std::vector<std::string> issues;
  const int n = graph.num_nodes();
  if (static_cast<int>(graph.offsets.size()) != n + 1) {
    issues.push_back("offsets has wrong length");
    return issues;
  }
  if (graph.edge_similarity.size() != graph.edges.size()) {
    issues.push_back("edge_similarity not aligned with edges");
  }
  const int want = std::min(k, n - 1);
  for (int i = 0; i < n; ++i) {
    if (graph.out_degree(i) != want) {
      issues.push_back("node " + std::to_string(i) + " has out-degree " +
                       std::to_string(graph.out_degree(i)) + ", want " +
                       std::to_string(want));
    }
    for (int e = graph.offsets[i]; e < graph.offsets[i + 1]; ++e) {
      if (graph.edges[e].src != i) issues.push_back("edge source out of order");
      if (graph.edges[e].dst == i) issues.push_back("self-loop at " + std::to_string(i));
    }
  }
  for (double s : graph.edge_similarity) {
    if (!(s >= 0.0 && s <= 1.0)) issues.push_back("edge similarity outside [0,1]");
  }
  std::vector<int> seen(total_origins, 0);
  if (static_cast<int>(graph.node_origin.size()) != n) {
    issues.push_back("node_origin has wrong length");
  }
  for (const auto &origin : graph.node_origin) {
    if (origin.empty()) issues.push_back("node with empty origin");
    for (int o : origin) {
      if (o < 0 || o >= total_origins) {
        issues.push_back("origin index out of range");
      } else {
        ++seen[o];
      }
    }
  }
  for (int o = 0; o < total_origins; ++o) {
    if (seen[o] != 1) {
      issues.push_back("origin " + std::to_string(o) + " covered " +
                       std::to_string(seen[o]) + " times");
      break;
    }
  }
  return issues;
}

ScorerParams ScorerParams::Zeros(const ScorerDims &dims) {
  if (dims.input < 1 || dims.latent < 1 || dims.hidden1 < 1 || dims.hidden2 < 1) {
    throw Error(ErrorCode::kInvalidArgument, "scorer dimensions must be positive");
  }
  ScorerParams p;
  p.dims = dims;
  p.sage_weight = Matrix::Zero(dims.latent, 4 * dims.input);
  p.sage_bias = Vector::Zero(dims.latent);
  p.ffn_weight[0] = Matrix::Zero(dims.hidden1, 2 * dims.latent);
  p.ffn_bias[0] = Vector::Zero(dims.hidden1);
  p.ffn_weight[1] = Matrix::Zero(dims.hidden2, dims.hidden1);
  p.ffn_bias[1] = Vector::Zero(dims.hidden2);
  p.ffn_weight[2] = Matrix::Zero(2, dims.hidden2);
  p.ffn_bias[2] = Vector::Zero(2);
  return p;
}

std::vector<std::span<double>> ScorerParams::Tensors() {
  std::vector<std::span<double>> out;
  auto add = [&out](auto &m) { out.emplace_back(m.data(), static_cast<size_t>(m.size())); };
  add(sage_weight);
  add(sage_bias);
  for (int l = 0; l < 3; ++l) {
    add(ffn_weight[l]);
    add(ffn_bias[l]);
  }
  return out;
}

std::vector<std::span<const double>> ScorerParams::Tensors() const {
  std::vector<std::span<const double>> out;
  for (auto t : const_cast<ScorerParams *>(this)->Tensors()) out.emplace_back(t);
  return out;
}

int64_t ScorerParams::NumValues() const {
  int64_t total = 0;
  for (auto t : Tensors()) total += static_cast<int64_t>(t.size());
  return total;
}

bool ScorerParams::AllFinite() const {
  for (auto t : Tensors()) {
    for (double v : t) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

int Hierarchy::MergeDepth() const {
  int depth = 0;
  for (const auto &level : levels) {
    if (level.num_clusters < level.graph.num_nodes()) ++depth;
  }
  return depth;
}

std::vector<int> DenseLabels(std::span<const int> labels) {
  std::unordered_map<int, int> ids;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) {
    auto [it, inserted] = ids.emplace(l, static_cast<int>(ids.size()));
    out.push_back(it->second);
  }
  return out;
}

bool SamePartition(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) return false;
  return DenseLabels(a) == DenseLabels(b);
}

}  // namespace sharc

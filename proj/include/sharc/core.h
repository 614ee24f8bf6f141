// Domain types shared by the graph builder, scorer, clustering and training
// code. Everything here is a plain value type: once built it is not mutated,
// so instances can be shared freely between worker threads.

#ifndef SHARC_CORE_H_
#define SHARC_CORE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sharc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class ErrorCode {
  kInvalidArgument,
  kShapeMismatch,
  kNonFinite,
  kEmptyGraph,
  kZeroNorm,
  kMissingLabels,
  kBadMagic,
  kUnsupportedVersion,
  kTruncated,
  kSizeOverflow,
  kSidecarMismatch,
  kParse,
  kIo,
  kIncompatibleCheckpoint,
  kInfeasible,
  kDivergence,
  kInternal,
};

const char *ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct Segment {
  double onset = 0.0;     // seconds
  double duration = 0.0;  // seconds
};

// Segment embeddings of one recording. Row i of `embeddings` is segment i.
struct EmbeddingSet {
  std::string recording_id;
  Matrix embeddings;              // N x F
  std::vector<Segment> segments;  // empty or N entries
  std::optional<std::vector<int>> labels;

  int size() const { return static_cast<int>(embeddings.rows()); }
  int dim() const { return static_cast<int>(embeddings.cols()); }
};

// Returns one human-readable message per violated invariant; empty means ok.
std::vector<std::string> Validate(const EmbeddingSet &set);

// Throws Error describing the first problem found by Validate().
void RequireValid(const EmbeddingSet &set);

struct Edge {
  int src = 0;
  int dst = 0;
  bool operator==(const Edge &) const = default;
};

// One level of the clustering hierarchy.
//
// node_features row i is [identity feature ; average feature], each of width
// F. Edges are stored grouped by source node in ascending source order; the
// out-edges of node i are edges[offsets[i] .. offsets[i+1]) and are ordered
// from most to least similar.
struct LevelGraph {
  int level = 0;
  Matrix node_features;  // n x 2F
  std::vector<Edge> edges;
  std::vector<double> edge_similarity;  // one per edge, in [0, 1]
  std::vector<int> offsets;             // n + 1
  std::vector<std::vector<int>> node_origin;

  int num_nodes() const { return static_cast<int>(node_features.rows()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int feature_dim() const { return static_cast<int>(node_features.cols() / 2); }
  int out_degree(int node) const { return offsets[node + 1] - offsets[node]; }

  auto identity_features() const {
    return node_features.leftCols(feature_dim());
  }
  auto average_features() const {
    return node_features.rightCols(feature_dim());
  }
};

// Checks out-degree, self-loop, similarity range and origin-partition
// invariants. `total_origins` is N, the number of level-0 embeddings.
std::vector<std::string> CheckGraphInvariants(const LevelGraph &graph, int k,
                                              int total_origins);

struct ScorerDims {
  int input = 0;     // F
  int latent = 64;   // F'
  int hidden1 = 32;
  int hidden2 = 32;
  bool operator==(const ScorerDims &) const = default;
};

// Learnable weights: one SAGE layer (latent x 4F) and a three layer
// feed-forward head (hidden1 x 2F', hidden2 x hidden1, 2 x hidden2).
struct ScorerParams {
  ScorerDims dims;
  Matrix sage_weight;
  Vector sage_bias;
  Matrix ffn_weight[3];
  Vector ffn_bias[3];

  static ScorerParams Zeros(const ScorerDims &dims);

  // Flat views over every tensor, in checkpoint order.
  std::vector<std::span<double>> Tensors();
  std::vector<std::span<const double>> Tensors() const;
  int64_t NumValues() const;
  bool AllFinite() const;
};

struct EdgeScores {
  std::vector<double> linkage_prob;  // p_ij, per edge
  std::vector<double> edge_weight;   // 2 p_ij - 1, per edge
  std::vector<double> density;       // per node
};

struct HierarchyLevel {
  LevelGraph graph;
  std::vector<int> assignment;  // node -> cluster id at the next level
  int num_clusters = 0;
};

struct Hierarchy {
  std::vector<HierarchyLevel> levels;
  std::vector<int> final_labels;
  bool hit_level_cap = false;

  // Number of levels at which at least one merge happened.
  int MergeDepth() const;
};

// Maps arbitrary labels to dense ids in order of first appearance.
std::vector<int> DenseLabels(std::span<const int> labels);

// True if the two labelings induce the same partition.
bool SamePartition(std::span<const int> a, std::span<const int> b);

}  // namespace sharc

#endif  // SHARC_CORE_H_

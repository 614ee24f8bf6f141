// Forward pass of the edge scorer: one similarity-weighted mean SAGE layer,
// a pairwise feed-forward head with a 2-way softmax, and the derived edge
// weights and node densities.

#ifndef SHARC_GNN_H_
#define SHARC_GNN_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sharc/core.h"

namespace sharc {

struct ForwardTrace {
  Matrix sage_input;      // n x 4F, row i = [h_i ; neigh_i]
  Matrix pre_activation;  // n x F', before ReLU
  Matrix latent;          // n x F', row i = ReLU(W [h_i ; neigh_i] + b)
  std::vector<double> neighbor_weight;  // per edge, sums to 1 over out-edges

  auto aggregated_neighborhood() const {
    return sage_input.rightCols(sage_input.cols() / 2);
  }
};

// Per-edge activations of the feed-forward head, kept for backprop.
struct PairCache {
  Matrix hidden1_pre;  // E x h1
  Matrix hidden2_pre;  // E x h2
  Matrix logits;       // E x 2, column 1 is the "linked" class
};

ScorerParams InitParams(const ScorerDims &dims, uint64_t seed);

// Throws kShapeMismatch if the graph feature width is not 2F.
ForwardTrace SageForward(const LevelGraph &graph, const ScorerParams &params);

// Linkage probability per edge. With `cache` set, every per-edge activation
// is stored; without it edges are processed in bounded-size blocks.
std::vector<double> ScorePairs(const ForwardTrace &trace, const LevelGraph &graph,
                               const ScorerParams &params,
                               PairCache *cache = nullptr);

// 2p - 1.
std::vector<double> EdgeWeights(std::span<const double> prob);

// Mean over each node's out-edges of weight * similarity. Isolated nodes get 0.
std::vector<double> NodeDensity(std::span<const double> weight, const LevelGraph &graph);

EdgeScores MakeEdgeScores(std::vector<double> prob, const LevelGraph &graph);

// SageForward + ScorePairs + MakeEdgeScores.
EdgeScores ScoreGraph(const LevelGraph &graph, const ScorerParams &params);

// Checkpoint container: "SHGN", u32 version, u64 F, F', h1, h2, then every
// tensor row-major as little-endian f64.
inline constexpr uint32_t kCheckpointVersion = 1;
void SaveParams(const ScorerParams &params, const std::string &path);
ScorerParams LoadParams(const std::string &path);

}  // namespace sharc

#endif  // SHARC_GNN_H_

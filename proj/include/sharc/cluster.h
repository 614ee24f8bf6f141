// Hierarchical clustering driven by edge scores: candidate edge filtering,
// one merge edge per node, connected components, and the level loop that
// aggregates clusters until nothing merges.

#ifndef SHARC_CLUSTER_H_
#define SHARC_CLUSTER_H_

#include <span>
#include <vector>

#include "sharc/core.h"
#include "sharc/simgraph.h"

namespace sharc {

// Per node, the indices (into graph.edges) of its candidate out-edges.
using CandidateSets = std::vector<std::vector<int>>;

// Keeps out-edge (i, j) when density_i <= density_j and p_ij >= p_tau.
CandidateSets SelectCandidates(const LevelGraph &graph, const EdgeScores &scores,
                               double p_tau);

// For every node with candidates, the candidate of largest edge weight; ties
// go to the lower destination index.
std::vector<Edge> SelectMerges(const LevelGraph &graph, const CandidateSets &candidates,
                               const EdgeScores &scores);

struct Assignment {
  std::vector<int> labels;
  int num_clusters = 0;
};

// Undirected connected components of `merges` over n nodes. Cluster ids are
// dense and ordered by each component's smallest member.
Assignment Components(std::span<const Edge> merges, int n);

class EdgeScorer {
 public:
  virtual ~EdgeScorer() = default;
  virtual EdgeScores Score(const LevelGraph &graph) const = 0;
};

class GnnScorer : public EdgeScorer {
 public:
  explicit GnnScorer(const ScorerParams &params) : params_(params) {}
  EdgeScores Score(const LevelGraph &graph) const override;

 private:
  const ScorerParams &params_;
};

// p_ij = 1 when both endpoints carry the same ground-truth label, else 0.
// A node's label is the label of its first origin.
class LabelOracleScorer : public EdgeScorer {
 public:
  explicit LabelOracleScorer(std::vector<int> labels) : labels_(std::move(labels)) {}
  EdgeScores Score(const LevelGraph &graph) const override;
  std::vector<double> Targets(const LevelGraph &graph) const;

 private:
  std::vector<int> labels_;
};

struct InferOptions {
  int k = 60;
  double p_tau = 0.0;
  int max_levels = 15;
};

Hierarchy SharcInfer(const EmbeddingSet &set, const EdgeScorer &scorer,
                     const InferOptions &options,
                     const SimilarityMatrix *level0_similarity = nullptr);

Hierarchy SharcInfer(const EmbeddingSet &set, const ScorerParams &params,
                     const InferOptions &options);

// Labels obtained by composing per-level assignments, starting from the
// identity over n level-0 nodes.
std::vector<int> ComposeLabels(const std::vector<HierarchyLevel> &levels, int n);

}  // namespace sharc

#endif  // SHARC_CLUSTER_H_

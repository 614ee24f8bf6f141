// Similarity scores, kNN edge selection and construction of the per-level
// graphs, including the cluster feature aggregation that produces level m+1
// from level m.

#ifndef SHARC_SIMGRAPH_H_
#define SHARC_SIMGRAPH_H_

#include <span>
#include <vector>

#include "sharc/core.h"

namespace sharc {

// Symmetric n x n matrix with entries in [0, 1] and a unit diagonal.
struct SimilarityMatrix {
  Matrix values;
  int size() const { return static_cast<int>(values.rows()); }
  double operator()(int i, int j) const { return values(i, j); }
};

// (cos(x_i, x_j) + 1) / 2 over the rows of `features`. The result is exactly
// symmetric. Throws kZeroNorm naming the first all-zero row.
SimilarityMatrix CosineSimilarity(const Eigen::Ref<const Matrix> &features);

// Wraps externally computed scores (e.g. PLDA loaded from disk) after checking
// shape, range and symmetry (1e-9). The diagonal is forced to 1.
SimilarityMatrix CheckedSimilarity(Matrix values);

// Scores used to connect graphs above level 0. Level 0 may instead use a
// precomputed matrix.
class SimilarityBackend {
 public:
  virtual ~SimilarityBackend() = default;
  virtual SimilarityMatrix Compute(const Eigen::Ref<const Matrix> &identity) const = 0;
};

class CosineBackend : public SimilarityBackend {
 public:
  SimilarityMatrix Compute(const Eigen::Ref<const Matrix> &identity) const override {
    return CosineSimilarity(identity);
  }
};

const SimilarityBackend &DefaultBackend();

struct KnnGraph {
  std::vector<Edge> edges;
  std::vector<double> similarity;
  std::vector<int> offsets;
};

// For each node, directed edges to its min(k, n-1) most similar other nodes,
// most similar first; equal scores go to the lower index.
KnnGraph SelectKnnEdges(const SimilarityMatrix &s, int k);

// Assembles a graph from node features [identity ; average] and origins.
LevelGraph BuildLevelGraph(int level, Matrix node_features,
                           std::vector<std::vector<int>> node_origin,
                           const SimilarityMatrix &s, int k);

// Level 0: every embedding is its own cluster and its features are [x ; x].
LevelGraph BuildLevel0(const EmbeddingSet &set, int k,
                       const SimilarityBackend &backend = DefaultBackend());
LevelGraph BuildLevel0(const EmbeddingSet &set, int k, const SimilarityMatrix &s);

// Collapses each cluster of `graph` to one node. The identity feature is that
// of the member with the largest density (lowest index on ties); the average
// feature is the mean of member identity features. Edges are rebuilt from the
// new identity features.
LevelGraph Aggregate(const LevelGraph &graph, std::span<const int> clusters,
                     std::span<const double> density, int k,
                     const SimilarityBackend &backend = DefaultBackend());

}  // namespace sharc

#endif  // SHARC_SIMGRAPH_H_

#include "sharc/simgraph.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sharc/parallel.h"

namespace sharc {

SimilarityMatrix CosineSimilarity(const Eigen::Ref<const Matrix> &features) {
  const int n = static_cast<int>(features.rows());
  Matrix unit(n, features.cols());
  for (int i = 0; i < n; ++i) {
    double norm = features.row(i).norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw Error(ErrorCode::kZeroNorm,
                  "row " + std::to_string(i) + " has zero or non-finite norm");
    }
    unit.row(i) = features.row(i) / norm;
  }

  SimilarityMatrix s;
  s.values.noalias() = unit * unit.transpose();
  for (int i = 0; i < n; ++i) {
    s.values(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      double v = std::clamp((s.values(i, j) + 1.0) * 0.5, 0.0, 1.0);
      s.values(i, j) = v;
      s.values(j, i) = v;
    }
  }
  return s;
}

SimilarityMatrix CheckedSimilarity(Matrix values) {
  if (values.rows() != values.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "similarity matrix is not square");
  }
  const int n = static_cast<int>(values.rows());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double v = values(i, j);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw Error(ErrorCode::kInvalidArgument,
                    "similarity entry (" + std::to_string(i) + "," +
                        std::to_string(j) + ") outside [0,1]");
      }
      if (std::abs(v - values(j, i)) > 1e-9) {
        throw Error(ErrorCode::kInvalidArgument, "similarity matrix is not symmetric");
      }
    }
    values(i, i) = 1.0;
  }
  return SimilarityMatrix{std::move(values)};
}

const SimilarityBackend &DefaultBackend() {
  static const CosineBackend backend;
  return backend;
}

KnnGraph SelectKnnEdges(const SimilarityMatrix &s, int k) {
  const int n = s.size();
  if (n == 0) throw Error(ErrorCode::kEmptyGraph, "cannot build a kNN graph over 0 nodes");
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  const int m = std::min(k, n - 1);

  KnnGraph g;
  g.edges.resize(static_cast<size_t>(n) * m);
  g.similarity.resize(g.edges.size());
  g.offsets.resize(n + 1);
  for (int i = 0; i <= n; ++i) g.offsets[i] = i * m;
  if (m == 0) return g;

  ParallelFor(static_cast<size_t>(n), [&](size_t row) {
    const int i = static_cast<int>(row);
    std::vector<int> others;
    others.reserve(n - 1);
    for (int j = 0; j < n; ++j) {
      if (j != i) others.push_back(j);
    }
    auto closer = [&](int a, int b) {
      double sa = s(i, a), sb = s(i, b);
      return sa != sb ? sa > sb : a < b;
    };
    if (m < n - 1) {
      std::nth_element(others.begin(), others.begin() + m, others.end(), closer);
    }
    std::sort(others.begin(), others.begin() + m, closer);
    for (int r = 0; r < m; ++r) {
      const size_t e = static_cast<size_t>(i) * m + r;
      g.edges[e] = Edge{i, others[r]};
      g.similarity[e] = s(i, others[r]);
    }
  });
  return g;
}

LevelGraph BuildLevelGraph(int level, Matrix node_features,
                           std::vector<std::vector<int>> node_origin,
                           const SimilarityMatrix &s, int k) {
  if (s.size() != node_features.rows() ||
      node_origin.size() != static_cast<size_t>(node_features.rows())) {
    throw Error(ErrorCode::kShapeMismatch, "graph parts disagree on node count");
  }
  KnnGraph knn = SelectKnnEdges(s, k);
  LevelGraph g;
  g.level = level;
  g.node_features = std::move(node_features);
  g.edges = std::move(knn.edges);
  g.edge_similarity = std::move(knn.similarity);
  g.offsets = std::move(knn.offsets);
  g.node_origin = std::move(node_origin);
  return g;
}

namespace {

LevelGraph Level0From(const EmbeddingSet &set, int k, const SimilarityMatrix &s) {
  const int n = set.size();
  Matrix features(n, 2 * set.dim());
  features << set.embeddings, set.embeddings;
  std::vector<std::vector<int>> origin(n);
  for (int i = 0; i < n; ++i) origin[i] = {i};
  return BuildLevelGraph(0, std::move(features), std::move(origin), s, k);
}

}  // namespace

LevelGraph BuildLevel0(const EmbeddingSet &set, int k, const SimilarityBackend &backend) {
  RequireValid(set);
  return Level0From(set, k, backend.Compute(set.embeddings));
}

LevelGraph BuildLevel0(const EmbeddingSet &set, int k, const SimilarityMatrix &s) {
  RequireValid(set);
  if (s.size() != set.size()) {
    throw Error(ErrorCode::kShapeMismatch, "similarity matrix size " +
                                               std::to_string(s.size()) + " != N " +
                                               std::to_string(set.size()));
  }
  return Level0From(set, k, s);
}

LevelGraph Aggregate(const LevelGraph &graph, std::span<const int> clusters,
                     std::span<const double> density, int k,
                     const SimilarityBackend &backend) {
  const int n = graph.num_nodes();
  if (static_cast<int>(clusters.size()) != n || static_cast<int>(density.size()) != n) {
    throw Error(ErrorCode::kShapeMismatch, "cluster/density length != node count");
  }
  int num_clusters = 0;
  for (int c : clusters) {
    if (c < 0) throw Error(ErrorCode::kInvalidArgument, "negative cluster id");
    num_clusters = std::max(num_clusters, c + 1);
  }

  const int f = graph.feature_dim();
  std::vector<int> peak(num_clusters, -1);
  std::vector<int> count(num_clusters, 0);
  Matrix sum = Matrix::Zero(num_clusters, f);
  std::vector<std::vector<int>> origin(num_clusters);
  for (int i = 0; i < n; ++i) {
    const int c = clusters[i];
    if (peak[c] < 0 || density[i] > density[peak[c]]) peak[c] = i;
    ++count[c];
    sum.row(c) += graph.node_features.row(i).head(f);
    origin[c].insert(origin[c].end(), graph.node_origin[i].begin(),
                     graph.node_origin[i].end());
  }

  Matrix features(num_clusters, 2 * f);
  for (int c = 0; c < num_clusters; ++c) {
    if (count[c] == 0) {
      throw Error(ErrorCode::kInternal, "cluster " + std::to_string(c) + " is empty");
    }
    features.row(c).head(f) = graph.node_features.row(peak[c]).head(f);
    features.row(c).tail(f) = sum.row(c) / static_cast<double>(count[c]);
    std::sort(origin[c].begin(), origin[c].end());
  }

  SimilarityMatrix s = backend.Compute(features.leftCols(f));
  return BuildLevelGraph(graph.level + 1, std::move(features), std::move(origin), s, k);
}

}  // namespace sharc

#include "sharc/cluster.h"

#include <numeric>

#include "sharc/gnn.h"

namespace sharc {

CandidateSets SelectCandidates(const LevelGraph &graph, const EdgeScores &scores,
                               double p_tau) {
  const int n = graph.num_nodes();
  if (scores.linkage_prob.size() != graph.edges.size() ||
      static_cast<int>(scores.density.size()) != n) {
    throw Error(ErrorCode::kShapeMismatch, "scores not aligned with graph");
  }
  CandidateSets out(n);
  for (int i = 0; i < n; ++i) {
    for (int e = graph.offsets[i]; e < graph.offsets[i + 1]; ++e) {
      const int j = graph.edges[e].dst;
      if (scores.density[i] <= scores.density[j] && scores.linkage_prob[e] >= p_tau) {
        out[i].push_back(e);
      }
    }
  }
  return out;
}

std::vector<Edge> SelectMerges(const LevelGraph &graph, const CandidateSets &candidates,
                               const EdgeScores &scores) {
  std::vector<Edge> merges;
  for (size_t i = 0; i < candidates.size(); ++i) {
    int best = -1;
    for (int e : candidates[i]) {
      if (best < 0) {
        best = e;
        continue;
      }
      const double w = scores.edge_weight[e], bw = scores.edge_weight[best];
      if (w > bw || (w == bw && graph.edges[e].dst < graph.edges[best].dst)) best = e;
    }
    if (best >= 0) merges.push_back(graph.edges[best]);
  }
  return merges;
}

namespace {

int Find(std::vector<int> &parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

Assignment Components(std::span<const Edge> merges, int n) {
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (const Edge &e : merges) {
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n) {
      throw Error(ErrorCode::kInvalidArgument, "merge edge outside node range");
    }
    int a = Find(parent, e.src), b = Find(parent, e.dst);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  // Roots are the smallest member of each component, so a forward scan hands
  // out ids in order of smallest member.
  Assignment out;
  out.labels.assign(n, -1);
  std::vector<int> root_id(n, -1);
  for (int i = 0; i < n; ++i) {
    int r = Find(parent, i);
    if (root_id[r] < 0) root_id[r] = out.num_clusters++;
    out.labels[i] = root_id[r];
  }
  return out;
}

EdgeScores GnnScorer::Score(const LevelGraph &graph) const {
  return ScoreGraph(graph, params_);
}

std::vector<double> LabelOracleScorer::Targets(const LevelGraph &graph) const {
  std::vector<double> q(graph.edges.size());
  for (size_t e = 0; e < q.size(); ++e) {
    const int a = graph.node_origin[graph.edges[e].src].front();
    const int b = graph.node_origin[graph.edges[e].dst].front();
    q[e] = labels_.at(a) == labels_.at(b) ? 1.0 : 0.0;
  }
  return q;
}

EdgeScores LabelOracleScorer::Score(const LevelGraph &graph) const {
  return MakeEdgeScores(Targets(graph), graph);
}

std::vector<int> ComposeLabels(const std::vector<HierarchyLevel> &levels, int n) {
  std::vector<int> labels(n);
  std::iota(labels.begin(), labels.end(), 0);
  for (const auto &level : levels) {
    for (int &l : labels) l = level.assignment[l];
  }
  return labels;
}

Hierarchy SharcInfer(const EmbeddingSet &set, const EdgeScorer &scorer,
                     const InferOptions &options,
                     const SimilarityMatrix *level0_similarity) {
  if (options.max_levels < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_levels must be at least 1");
  }
  Hierarchy h;
  LevelGraph graph = level0_similarity ? BuildLevel0(set, options.k, *level0_similarity)
                                       : BuildLevel0(set, options.k);
  for (int m = 0;; ++m) {
    const int n = graph.num_nodes();
    if (n <= 1) break;
    if (m == options.max_levels) {
      h.hit_level_cap = true;
      break;
    }
    EdgeScores scores = scorer.Score(graph);
    std::vector<Edge> merges =
        SelectMerges(graph, SelectCandidates(graph, scores, options.p_tau), scores);
    Assignment clusters = Components(merges, n);
    h.levels.push_back({std::move(graph), clusters.labels, clusters.num_clusters});
    // No merge edges means every component is a singleton: fixed point.
    if (merges.empty()) break;
    graph = Aggregate(h.levels.back().graph, clusters.labels, scores.density, options.k);
  }
  h.final_labels = ComposeLabels(h.levels, set.size());
  return h;
}

Hierarchy SharcInfer(const EmbeddingSet &set, const ScorerParams &params,
                     const InferOptions &options) {
  if (set.dim() != params.dims.input) {
    throw Error(ErrorCode::kIncompatibleCheckpoint,
                "embedding dimension " + std::to_string(set.dim()) +
                    " does not match scorer input " + std::to_string(params.dims.input));
  }
  return SharcInfer(set, GnnScorer(params), options);
}

}  // namespace sharc
